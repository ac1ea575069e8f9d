"""Two-step detector: adaptive-LASSO selection, then residual classification.

``detect`` chains the full procedure on one dataset: initial OLS for the
adaptive weights, BIC selection over the penalty grid, residual
construction (post-selection OLS refit by default), and the
information-criterion verdict.  The result records the chosen fit, the
per-lambda table, the KKT certificate, and per-stage wall times.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .adalasso import (
    AdaptiveLassoFit,
    KktReport,
    LambdaBicPoint,
    LambdaGrid,
    SolverSettings,
    certify_kkt,
    compute_weights,
    default_lambda_grid,
    residuals_al,
    select_lambda_bic,
)
from .dgp import Dataset
from .errors import InitialOlsInfeasibleError, SparseCointError
from .linalg import solve_ols
from .stationarity import IcReport, IcSettings, Verdict, classify, ic_record

#: Default adaptation exponent for the detection pipeline.
DEFAULT_GAMMA = 2.0
#: Certification tolerance applied to the selected fit.
KKT_CERTIFY_TOL = 1e-6


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of the two-step detector.

    ``grid=None`` builds the default penalty grid for the dataset's sample
    size at detection time.
    """

    gamma: float = DEFAULT_GAMMA
    grid: LambdaGrid | None = None
    residual_mode: str = "post_ols"
    ic_settings: IcSettings = field(default_factory=IcSettings)
    solver: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.residual_mode not in ("direct", "post_ols"):
            raise ValueError("residual_mode must be 'direct' or 'post_ols'")


@dataclass(frozen=True)
class DetectionResult:
    """Everything produced by one run of the two-step detector."""

    fit: AdaptiveLassoFit
    residual_mode: str
    ic: IcReport
    selected_covariates: frozenset[int]
    verdict: Verdict
    bic_table: list[LambdaBicPoint]
    kkt: KktReport
    timings: dict[str, float]


def _stage(name: str):
    """Decorator-free stage wrapper: tag library errors with the stage name."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, SparseCointError):
                exc.stage = name
            return False

    return _Ctx()


def detect(dataset: Dataset, config: PipelineConfig | None = None) -> DetectionResult:
    """Run the two-step cointegration detector on one dataset.

    Deterministic given its inputs.  Raises
    :class:`InitialOlsInfeasibleError` when ``n <= p + 1`` (the initial
    full-design OLS that defines the adaptive weights needs p + 1 < n);
    errors from inner stages propagate with a ``stage`` label attached.
    """
    config = config or PipelineConfig()
    n, p = dataset.x.shape
    if n <= p + 1:
        raise InitialOlsInfeasibleError(
            f"initial OLS needs n > p + 1, got n = {n}, p = {p}"
        )

    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    with _stage("initial_ols"):
        initial = solve_ols(dataset.y, dataset.x, with_intercept=True)
        weights = compute_weights(initial, config.gamma)
    timings["initial_ols"] = time.perf_counter() - t0

    grid = config.grid if config.grid is not None else default_lambda_grid(n)

    t0 = time.perf_counter()
    with _stage("lasso_path"):
        fit, table = select_lambda_bic(dataset, weights, grid, config.solver)
        kkt = certify_kkt(fit, dataset, tol=KKT_CERTIFY_TOL)
    timings["lasso_path"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with _stage("residuals"):
        resid = residuals_al(fit, dataset, mode=config.residual_mode)
    with _stage("classify"):
        ic = classify(resid, config.ic_settings)
    timings["classify"] = time.perf_counter() - t0

    return DetectionResult(
        fit=fit,
        residual_mode=config.residual_mode,
        ic=ic,
        selected_covariates=fit.active_set,
        verdict=ic.verdict,
        bic_table=table,
        kkt=kkt,
        timings=timings,
    )


def result_record(result: DetectionResult) -> dict:
    """JSON-serializable record of a detection result.

    Covariate indices are reported 1-based to match the x1..xp column
    labels of the data files.
    """
    fit = result.fit
    return {
        "verdict": result.verdict.value,
        "selected_covariates": [j + 1 for j in sorted(result.selected_covariates)],
        "residual_mode": result.residual_mode,
        "intercept": fit.intercept,
        "beta": list(fit.beta),
        "lambda": fit.lam,
        "gamma": fit.weights.gamma,
        "converged": fit.converged,
        "sweeps": fit.sweeps,
        "objective": fit.objective,
        "kkt_passed": result.kkt.passed,
        "kkt_worst_slack": result.kkt.worst,
        "bic_table": [
            {"lambda": pt.lam, "bic": pt.bic, "n_active": pt.n_active, "converged": pt.converged}
            for pt in result.bic_table
        ],
        "ic": ic_record(result.ic),
        "timings": result.timings,
    }


def _json_text(obj, indent: int = 0) -> str:
    """Minimal JSON rendering with %.17g floats (exact float64 round-trip)."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{json.dumps(k)}: {_json_text(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_json_text(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (float, np.floating)):
        return "%.17g" % obj
    return json.dumps(obj)


def format_record(result: DetectionResult) -> str:
    """Detection record as indented JSON with full float precision."""
    return _json_text(result_record(result))
