"""Two-step detector orchestration."""

import json

import numpy as np
import pytest

from sparsecoint import (
    Dataset,
    InitialOlsInfeasibleError,
    PipelineConfig,
    RankDeficientError,
    Verdict,
    detect,
    format_record,
    preset_config,
    result_record,
    simulate,
)
from sparsecoint.stationarity import IcSettings


def test_strong_signal_smoke():
    found, cointegrated = 0, 0
    for seed in range(50):
        ds = simulate(preset_config("strong", n=500, p=10, rho=0.0, seed=seed))
        res = detect(ds)
        cointegrated += res.verdict is Verdict.COINTEGRATED
        found += res.selected_covariates >= frozenset(range(5))
    assert cointegrated / 50 >= 0.9
    assert found / 50 >= 0.9


def test_infeasible_when_p_reaches_n():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((20, 20))
    ds = Dataset(y=rng.standard_normal(20), x=x)
    with pytest.raises(InitialOlsInfeasibleError):
        detect(ds)
    x2 = rng.standard_normal((21, 20))
    ds2 = Dataset(y=rng.standard_normal(21), x=x2)
    with pytest.raises(InitialOlsInfeasibleError):
        detect(ds2)  # n = p + 1 still infeasible


def test_deterministic_end_to_end():
    ds = simulate(preset_config("strong", n=300, p=10, rho=0.5, seed=3))
    a = detect(ds)
    b = detect(ds)
    assert a.verdict == b.verdict
    assert a.fit.lam == b.fit.lam
    assert np.array_equal(a.fit.beta, b.fit.beta)
    assert a.ic.ic0 == b.ic.ic0
    assert a.ic.ic1 == b.ic.ic1


def test_result_internal_consistency():
    ds = simulate(preset_config("strong", n=400, p=10, rho=0.0, seed=4))
    res = detect(ds)
    assert res.selected_covariates == res.fit.active_set
    assert res.verdict == res.ic.verdict
    assert res.kkt.passed
    assert set(res.timings) == {"initial_ols", "lasso_path", "classify"}
    assert len(res.bic_table) == 10


def test_classified_series_is_stage_one_residual():
    # the ic verdict must come from exactly the residuals of the chosen fit
    from sparsecoint import classify, residuals_al

    ds = simulate(preset_config("strong", n=400, p=10, rho=0.0, seed=8))
    config = PipelineConfig()
    res = detect(ds, config)
    resid = residuals_al(res.fit, ds, mode=config.residual_mode)
    again = classify(resid, config.ic_settings)
    assert again.verdict == res.ic.verdict
    assert again.ic0 == res.ic.ic0
    assert again.k_hat == res.ic.k_hat


def test_stage_label_attached_on_failure():
    rng = np.random.default_rng(5)
    base = rng.standard_normal((60, 2))
    x = np.column_stack([base, base[:, 0] + base[:, 1]])  # exactly collinear
    ds = Dataset(y=rng.standard_normal(60), x=x)
    with pytest.raises(RankDeficientError) as err:
        detect(ds)
    assert err.value.stage == "initial_ols"


def test_empty_selection_still_classifies():
    # pure noise: selection is typically empty and classification proceeds
    from sparsecoint import DgpConfig

    config = DgpConfig(
        n=300, p=5, s=5, beta0=1.0, beta_active=(0.0,) * 5, rho=0.0,
        sigma2_e=4.0, corr_decay=0.5, tau=0.5, seed=11,
    )
    ds = simulate(config)
    res = detect(ds)
    assert res.selected_covariates == res.fit.active_set
    assert res.verdict in (Verdict.COINTEGRATED, Verdict.SPURIOUS)


def test_direct_residual_mode():
    ds = simulate(preset_config("strong", n=300, p=10, rho=0.0, seed=6))
    res = detect(ds, PipelineConfig(residual_mode="direct"))
    assert res.residual_mode == "direct"


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(gamma=0.0)
    with pytest.raises(ValueError):
        PipelineConfig(residual_mode="other")


def test_record_round_trips_as_json():
    ds = simulate(preset_config("strong", n=300, p=10, rho=0.0, seed=7))
    res = detect(ds, PipelineConfig(ic_settings=IcSettings(k_max=4)))
    record = result_record(res)
    assert record["selected_covariates"] == sorted(j + 1 for j in res.selected_covariates)
    assert record["verdict"] in ("cointegrated", "spurious")
    text = format_record(res)
    parsed = json.loads(text)
    assert parsed["lambda"] == res.fit.lam
    assert parsed["beta"] == list(res.fit.beta)
    assert len(parsed["bic_table"]) == 10
    assert parsed["ic"]["k_hat"] == res.ic.k_hat
