"""Simulator contracts: covariance structure, reproducibility, moments, CSV."""

import numpy as np
import pytest

from sparsecoint import (
    ConfigFieldError,
    CsvFormatError,
    Dataset,
    DgpConfig,
    build_omega,
    default_tau,
    load_dataset_csv,
    max_admissible_tau,
    preset_config,
    save_dataset_csv,
    save_dataset_metadata,
    simulate,
)


def make_config(**overrides):
    base = dict(
        n=200, p=3, s=2, beta0=1.0, beta_active=(1.0, 0.5), rho=0.5,
        sigma2_e=4.0, corr_decay=0.5, tau=0.5, seed=123,
    )
    base.update(overrides)
    return DgpConfig(**base)


class TestBuildOmega:
    def test_toeplitz_entry(self):
        omega = build_omega(make_config(p=3, s=2, corr_decay=0.5))
        # v-block occupies rows/cols 1..p; entry (1,3) of the v-block
        assert omega[1, 3] == pytest.approx(0.25, abs=0)

    def test_top_left_is_error_variance(self):
        omega = build_omega(make_config(sigma2_e=4.0))
        assert omega[0, 0] == 4.0

    def test_tau_zero_no_endogeneity(self):
        omega = build_omega(make_config(tau=0.0))
        assert np.all(omega[0, 1:] == 0.0)
        assert np.all(omega[1:, 0] == 0.0)

    def test_tau_one_unit_cross_covariances(self):
        # diag of the Toeplitz block is all ones, so min(diag) = 1
        omega = build_omega(make_config(tau=1.0))
        assert np.all(omega[0, 1:] == 1.0)

    def test_symmetry(self):
        omega = build_omega(make_config(p=6, s=2, tau=0.3))
        assert np.array_equal(omega, omega.T)


class TestConfigValidation:
    def test_rho_out_of_range_names_field(self):
        with pytest.raises(ConfigFieldError) as err:
            make_config(rho=1.5)
        assert err.value.field == "rho"

    def test_active_count_bounds(self):
        with pytest.raises(ConfigFieldError) as err:
            make_config(p=2, s=3, beta_active=(1.0, 1.0, 1.0))
        assert err.value.field == "s"

    def test_beta_length_mismatch(self):
        with pytest.raises(ConfigFieldError) as err:
            make_config(beta_active=(1.0, 2.0, 3.0))
        assert err.value.field == "beta_active"

    def test_corr_decay_range(self):
        with pytest.raises(ConfigFieldError) as err:
            make_config(corr_decay=1.0)
        assert err.value.field == "corr_decay"

    def test_infeasible_endogeneity_rejected(self):
        # tau = 1 makes the joint covariance indefinite for p > 10
        with pytest.raises(ConfigFieldError) as err:
            make_config(p=50, s=2, tau=1.0)
        assert err.value.field == "tau"

    def test_admissible_tau_boundary(self):
        # closed form at corr_decay 0.5: 1'Ovv^-1 1 = (p+2)/3, so the
        # boundary at p=10, sigma2_e=4 is exactly 1
        assert max_admissible_tau(10) == pytest.approx(1.0, abs=1e-10)
        assert default_tau(10) == pytest.approx(0.9, abs=1e-10)
        make_config(p=10, s=2, tau=0.99)  # just inside: constructs fine


class TestSimulate:
    def test_reproducible_bit_for_bit(self):
        a = simulate(make_config())
        b = simulate(make_config())
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.z_true, b.z_true)

    def test_distinct_seeds_differ(self):
        a = simulate(make_config(seed=1))
        b = simulate(make_config(seed=2))
        assert not np.array_equal(a.y, b.y)

    def test_random_walk_z_is_cumsum_of_errors(self):
        # same seed gives identical innovation draws, and at rho=0 the
        # equilibrium error equals the e series itself
        walk = simulate(make_config(rho=1.0, seed=77))
        iid = simulate(make_config(rho=0.0, seed=77))
        assert np.array_equal(walk.z_true, np.cumsum(iid.z_true))

    def test_no_signal_means_y_equals_z(self):
        ds = simulate(make_config(beta0=0.0, beta_active=(0.0, 0.0)))
        assert np.array_equal(ds.y, ds.z_true)

    def test_covariates_are_cumulated_innovations(self):
        ds = simulate(make_config(seed=5))
        innov = np.diff(np.vstack([np.zeros(ds.p), ds.x]), axis=0)
        assert np.allclose(np.cumsum(innov, axis=0), ds.x, rtol=0, atol=0)

    def test_true_active_is_first_s(self):
        ds = simulate(make_config())
        assert ds.true_active == frozenset({0, 1})

    def test_moment_matching_large_sample(self):
        # tau=1 at p=2 is admissible; innovation covariance of (dx1, dx2)
        # should be the Toeplitz block and cov(e, dx_j) should equal tau
        config = DgpConfig(
            n=100_000, p=2, s=1, beta0=0.0, beta_active=(1.0,), rho=0.0,
            sigma2_e=4.0, corr_decay=0.5, tau=1.0, seed=1,
        )
        ds = simulate(config)
        dx = np.diff(np.vstack([np.zeros(2), ds.x]), axis=0)
        e = ds.z_true  # at rho=0, z_t = e_t
        cov_dx = np.cov(dx.T, bias=True)
        assert np.allclose(cov_dx, [[1.0, 0.5], [0.5, 1.0]], atol=0.02)
        for j in range(2):
            cov_ev = np.mean(e * dx[:, j]) - np.mean(e) * np.mean(dx[:, j])
            assert cov_ev == pytest.approx(1.0, abs=0.02)

    def test_variance_growth_separates_unit_root(self):
        # under a unit root the sample variance keeps growing with the
        # sample, under stationarity it stabilizes: compare the variance of
        # the full sample against the variance of its first half
        votes_rw, votes_iid = 0, 0
        for seed in range(50):
            cfg = dict(n=10_000, p=1, s=1, beta0=0.0, beta_active=(0.0,),
                       sigma2_e=4.0, corr_decay=0.5, tau=0.0, seed=seed)
            z_rw = simulate(DgpConfig(rho=1.0, **cfg)).z_true
            z_iid = simulate(DgpConfig(rho=0.0, **cfg)).z_true
            half = 5000
            votes_rw += np.var(z_rw) / np.var(z_rw[:half]) > 1.5
            votes_iid += np.var(z_iid) / np.var(z_iid[:half]) < 1.5
        assert votes_rw > 25
        assert votes_iid > 25


class TestPresets:
    def test_strong_and_weak_vectors(self):
        strong = preset_config("strong", n=100, p=10, rho=0.0, seed=0)
        weak = preset_config("weak", n=100, p=10, rho=0.0, seed=0)
        assert strong.beta_active == (1.0, 0.5, 1.5, 0.8, 1.0)
        assert weak.beta_active == (0.25,) * 5
        assert strong.s == weak.s == 5

    def test_unknown_preset(self):
        with pytest.raises(ConfigFieldError):
            preset_config("medium", n=100, p=10, rho=0.0, seed=0)

    def test_default_tau_shrinks_with_p(self):
        assert default_tau(50) < default_tau(10)


class TestCsvRoundTrip:
    def test_save_load_exact(self, tmp_path):
        ds = simulate(make_config(seed=9))
        path = tmp_path / "data.csv"
        save_dataset_csv(ds, path)
        back = load_dataset_csv(path)
        assert np.array_equal(back.y, ds.y)
        assert np.array_equal(back.x, ds.x)
        assert back.true_active is None

    def test_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,a,b\n1,2,3\n")
        with pytest.raises(CsvFormatError) as err:
            load_dataset_csv(path)
        assert err.value.row == 1

    def test_non_numeric_cell_located(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1.0,2.0\n3.0,oops\n")
        with pytest.raises(CsvFormatError) as err:
            load_dataset_csv(path)
        assert (err.value.row, err.value.col) == (3, 2)

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1.0,2.0\n3.0\n")
        with pytest.raises(CsvFormatError) as err:
            load_dataset_csv(path)
        assert err.value.row == 3

    def test_metadata_sidecar(self, tmp_path):
        cfg = make_config()
        path = tmp_path / "data.meta"
        save_dataset_metadata(cfg, path)
        text = path.read_text()
        assert "true_active = 1,2" in text
        assert "rho = 0.5" in text

    def test_lf_line_endings(self, tmp_path):
        ds = Dataset(y=np.array([1.0, 2.0]), x=np.array([[1.0], [2.0]]))
        path = tmp_path / "data.csv"
        save_dataset_csv(ds, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.startswith(b"y,x1\n")
