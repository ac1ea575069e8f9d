"""Sparse cointegration detection.

A two-step detector for cointegration among a large pool of I(1)
candidate covariates: adaptive-LASSO selection of the active set in the
cointegrating regression, followed by an information-criterion
classification of the fitted residuals as stationary (cointegration) or
unit root (spurious regression).  Includes a seeded simulator of the
sparse-cointegration process and a Monte Carlo harness that reproduces the
reference selection-accuracy and detection-frequency tables.
"""

from ._version import __version__
from .adalasso import (
    AdaptiveLassoFit,
    KktReport,
    LambdaBicPoint,
    LambdaGrid,
    SolverSettings,
    WeightVector,
    bic_of_fit,
    certify_kkt,
    compute_weights,
    default_lambda_grid,
    fit_record,
    fit_weighted_lasso,
    fit_weighted_lasso_direct,
    residuals_al,
    select_lambda_bic,
    soft_threshold,
)
from .dgp import (
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
from .errors import (
    ConfigFieldError,
    CsvFormatError,
    DegenerateRssError,
    DidNotConvergeError,
    EmptyInputError,
    InitialOlsInfeasibleError,
    NotPositiveDefiniteError,
    RankDeficientError,
    SparseCointError,
)
from .harness import (
    Cell,
    CellResult,
    ExperimentGrid,
    render_tables,
    replication_seed,
    run_cell,
    run_grid,
    write_manifest,
)
from .linalg import OlsFit, cholesky, solve_ols
from .metrics import AggregateMetrics, SelectionMetrics, aggregate, score_selection
from .pipeline import DetectionResult, PipelineConfig, detect, format_record, result_record
from .stationarity import (
    IcReport,
    IcSettings,
    Verdict,
    classify,
    fit_m0,
    fit_m1,
    ic_record,
    select_lag_bic,
)

__all__ = [
    "__version__",
    "AdaptiveLassoFit",
    "AggregateMetrics",
    "Cell",
    "CellResult",
    "ConfigFieldError",
    "CsvFormatError",
    "Dataset",
    "DegenerateRssError",
    "DetectionResult",
    "DgpConfig",
    "DidNotConvergeError",
    "EmptyInputError",
    "ExperimentGrid",
    "IcReport",
    "IcSettings",
    "InitialOlsInfeasibleError",
    "KktReport",
    "LambdaBicPoint",
    "LambdaGrid",
    "NotPositiveDefiniteError",
    "OlsFit",
    "PipelineConfig",
    "RankDeficientError",
    "SelectionMetrics",
    "SolverSettings",
    "SparseCointError",
    "Verdict",
    "WeightVector",
    "aggregate",
    "bic_of_fit",
    "build_omega",
    "certify_kkt",
    "cholesky",
    "classify",
    "compute_weights",
    "default_lambda_grid",
    "default_tau",
    "detect",
    "fit_m0",
    "fit_m1",
    "fit_record",
    "fit_weighted_lasso",
    "fit_weighted_lasso_direct",
    "format_record",
    "ic_record",
    "load_dataset_csv",
    "max_admissible_tau",
    "preset_config",
    "render_tables",
    "replication_seed",
    "residuals_al",
    "result_record",
    "run_cell",
    "run_grid",
    "save_dataset_csv",
    "save_dataset_metadata",
    "score_selection",
    "select_lag_bic",
    "select_lambda_bic",
    "simulate",
    "solve_ols",
    "soft_threshold",
    "write_manifest",
]
