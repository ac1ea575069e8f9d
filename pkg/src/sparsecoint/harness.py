"""Monte Carlo harness: selection-accuracy and detection-frequency tables.

A grid is the cartesian product of sample sizes, covariate counts, AR
coefficients of the equilibrium error, and adaptation exponents, at one
signal preset.  Each cell runs R independent replications of
simulate-then-detect and aggregates selection metrics (vs. the known
active set), verdict frequencies, and mean coefficient estimates.

Seed discipline: replication r of cell c draws its simulation seed as a
SplitMix64-style hash chain

    h = mix64(base_seed); h = mix64(h ^ c); seed = mix64(h ^ r)

where ``mix64`` is the SplitMix64 finalizer and c is the cell's 0-based
ordinal in the product ``n_values x p_values x rho_values x gamma_values``
(rightmost fastest).  Streams therefore depend only on (base_seed, cell,
r), never on execution order, and any cell can be reproduced in isolation.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from ._version import __version__ as _version
from .dgp import SIGNAL_PRESETS, DgpConfig, default_tau, simulate
from .errors import ConfigFieldError
from .metrics import aggregate, score_selection
from .pipeline import PipelineConfig, detect
from .stationarity import Verdict, classify

FLOAT_FORMAT = "%.17g"
_MASK64 = (1 << 64) - 1


def mix64(value: int) -> int:
    """SplitMix64 finalizer on 64-bit unsigned integers."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replication_seed(base_seed: int, cell_ordinal: int, r: int) -> int:
    """Simulation seed for replication ``r`` of the cell with ``cell_ordinal``."""
    h = mix64(base_seed)
    h = mix64(h ^ cell_ordinal)
    return mix64(h ^ r)


@dataclass(frozen=True)
class Cell:
    """Coordinates of one grid cell."""

    n: int
    p: int
    rho: float
    gamma: float


@dataclass(frozen=True)
class ExperimentGrid:
    """Specification of one Monte Carlo experiment.

    ``signal_preset`` is ``"strong"``, ``"weak"``, or ``"custom"`` with an
    explicit ``beta_active`` vector.  ``tau=None`` uses the per-p default
    endogeneity scale.  ``pipeline`` carries detector overrides shared by
    every cell except gamma, which is a grid dimension.
    """

    n_values: tuple[int, ...]
    p_values: tuple[int, ...]
    rho_values: tuple[float, ...]
    gamma_values: tuple[float, ...]
    signal_preset: str = "strong"
    beta_active: tuple[float, ...] | None = None
    replications: int = 1000
    base_seed: int = 0
    tau: float | None = None
    sigma2_e: float = 4.0
    corr_decay: float = 0.5
    beta0: float = 1.0
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        for name in ("n_values", "p_values", "rho_values", "gamma_values"):
            vals = getattr(self, name)
            if len(vals) == 0:
                raise ConfigFieldError(name, "must be nonempty")
        if self.replications < 1:
            raise ConfigFieldError("replications", "must be >= 1")
        if self.signal_preset in SIGNAL_PRESETS:
            if self.beta_active is not None:
                raise ConfigFieldError(
                    "beta_active", f"must be omitted with preset {self.signal_preset!r}"
                )
        elif self.signal_preset == "custom":
            if not self.beta_active:
                raise ConfigFieldError("beta_active", "required with the custom preset")
        else:
            raise ConfigFieldError(
                "signal_preset", f"unknown preset {self.signal_preset!r}"
            )

    @property
    def active_beta(self) -> tuple[float, ...]:
        if self.signal_preset in SIGNAL_PRESETS:
            return SIGNAL_PRESETS[self.signal_preset]
        return tuple(self.beta_active)

    def cells(self) -> list[Cell]:
        """All cells in ordinal order (rightmost dimension fastest)."""
        out = []
        for n in self.n_values:
            for p in self.p_values:
                for rho in self.rho_values:
                    for gamma in self.gamma_values:
                        out.append(Cell(n=n, p=p, rho=rho, gamma=gamma))
        return out

    def cell_ordinal(self, cell: Cell) -> int:
        cells = self.cells()
        try:
            return cells.index(cell)
        except ValueError:
            raise ValueError(f"{cell} is not a cell of this grid") from None


@dataclass(frozen=True)
class CellResult:
    """Aggregated outcome of one cell.

    ``coef_indices`` lists the tracked coefficient positions (0-based): the
    true active set plus the first inactive column as a zero-coefficient
    control; ``coef_means`` holds the replication means of the
    corresponding estimates.  ``freq_i0 + freq_i1 = 1`` over the
    replications that completed; a cell with more than 1% failures is
    flagged invalid.

    ``freq_i0_oracle``/``freq_i1_oracle`` record the classifier applied to
    the simulated equilibrium errors themselves (bypassing the selection
    step), a diagnostic that separates classifier behaviour from the
    effect of classifying fitted residuals.
    """

    cell: Cell
    preset: str
    replications: int
    failures: int
    mean_fpr: float
    mean_fnr: float
    mean_fdr: float
    freq_exact_support: float
    freq_i0: float
    freq_i1: float
    freq_i0_oracle: float
    freq_i1_oracle: float
    coef_indices: tuple[int, ...]
    coef_true: tuple[float, ...]
    coef_means: tuple[float, ...]
    kkt_failures: int
    converged_fits: int
    wall_time: float
    valid: bool


def _dgp_config(grid: ExperimentGrid, cell: Cell, seed: int) -> DgpConfig:
    beta = grid.active_beta
    tau = grid.tau
    if tau is None:
        tau = default_tau(cell.p, grid.sigma2_e, grid.corr_decay)
    return DgpConfig(
        n=cell.n,
        p=cell.p,
        s=len(beta),
        beta0=grid.beta0,
        beta_active=beta,
        rho=cell.rho,
        sigma2_e=grid.sigma2_e,
        corr_decay=grid.corr_decay,
        tau=tau,
        seed=seed,
    )


def _run_replication(args):
    """One simulate-then-detect replication; returns a compact record.

    Top-level function so process pools can pickle it.
    """
    grid, cell, r = args
    seed = replication_seed(grid.base_seed, grid.cell_ordinal(cell), r)
    config = _dgp_config(grid, cell, seed)
    pipe = replace(grid.pipeline, gamma=cell.gamma)
    try:
        dataset = simulate(config)
        result = detect(dataset, pipe)
        oracle = classify(dataset.z_true, pipe.ic_settings)
    except Exception as exc:  # recorded, not retried: retries would bias the draw
        return {"r": r, "error": repr(exc)}
    tracked = list(range(config.s)) + ([config.s] if cell.p > config.s else [])
    kkt_bad = 0 if result.kkt.passed else 1
    return {
        "r": r,
        "error": None,
        "metrics": score_selection(result.selected_covariates, dataset.true_active, cell.p),
        "exact": frozenset(result.selected_covariates) == dataset.true_active,
        "i0": result.verdict is Verdict.COINTEGRATED,
        "i0_oracle": oracle.verdict is Verdict.COINTEGRATED,
        "coefs": tuple(float(result.fit.beta[j]) for j in tracked),
        "kkt_failures": kkt_bad,
        "converged": 1 if result.fit.converged else 0,
    }


def run_cell(cell: Cell, grid: ExperimentGrid, jobs: int = 1) -> CellResult:
    """Run all replications of one cell and aggregate.

    Results are reduced in replication order whatever the worker count, so
    the aggregate is bit-identical across ``jobs`` settings.
    """
    start = time.perf_counter()
    tasks = [(grid, cell, r) for r in range(grid.replications)]
    if jobs > 1:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_replication, tasks, chunksize=chunk))
    else:
        records = [_run_replication(t) for t in tasks]

    ok = [rec for rec in records if rec["error"] is None]
    failures = len(records) - len(ok)

    beta = grid.active_beta
    s = len(beta)
    tracked = tuple(range(s)) + ((s,) if cell.p > s else ())
    truth = beta + ((0.0,) if cell.p > s else ())

    if ok:
        agg = aggregate([rec["metrics"] for rec in ok])
        n_ok = len(ok)
        freq_i0 = sum(rec["i0"] for rec in ok) / n_ok
        freq_i0_oracle = sum(rec["i0_oracle"] for rec in ok) / n_ok
        coef_means = tuple(
            sum(rec["coefs"][i] for rec in ok) / n_ok for i in range(len(tracked))
        )
        result = CellResult(
            cell=cell,
            preset=grid.signal_preset,
            replications=n_ok,
            failures=failures,
            mean_fpr=agg.mean_fpr,
            mean_fnr=agg.mean_fnr,
            mean_fdr=agg.mean_fdr,
            freq_exact_support=sum(rec["exact"] for rec in ok) / n_ok,
            freq_i0=freq_i0,
            freq_i1=1.0 - freq_i0,
            freq_i0_oracle=freq_i0_oracle,
            freq_i1_oracle=1.0 - freq_i0_oracle,
            coef_indices=tracked,
            coef_true=truth,
            coef_means=coef_means,
            kkt_failures=sum(rec["kkt_failures"] for rec in ok),
            converged_fits=sum(rec["converged"] for rec in ok),
            wall_time=time.perf_counter() - start,
            valid=failures <= 0.01 * grid.replications,
        )
    else:
        nan = float("nan")
        result = CellResult(
            cell=cell,
            preset=grid.signal_preset,
            replications=0,
            failures=failures,
            mean_fpr=nan,
            mean_fnr=nan,
            mean_fdr=nan,
            freq_exact_support=nan,
            freq_i0=nan,
            freq_i1=nan,
            freq_i0_oracle=nan,
            freq_i1_oracle=nan,
            coef_indices=tracked,
            coef_true=truth,
            coef_means=tuple(nan for _ in tracked),
            kkt_failures=0,
            converged_fits=0,
            wall_time=time.perf_counter() - start,
            valid=False,
        )
    return result


def run_grid(grid: ExperimentGrid, jobs: int | None = None, progress=None) -> list[CellResult]:
    """Evaluate every cell of the grid, in ordinal order.

    ``jobs=None`` uses the available parallelism.  ``progress``, when
    given, is called with each finished CellResult.
    """
    if jobs is None:
        jobs = os.cpu_count() or 1
    results = []
    for cell in grid.cells():
        res = run_cell(cell, grid, jobs=jobs)
        if progress is not None:
            progress(res)
        results.append(res)
    return results


# ---------------------------------------------------------------------------
# Table rendering
# ---------------------------------------------------------------------------

_SELECTION_HEADER = [
    "n", "p", "rho", "gamma", "preset", "replications", "failures",
    "mean_fpr", "mean_fnr", "mean_fdr", "freq_exact_support",
]
_DETECTION_HEADER = [
    "n", "p", "rho", "gamma", "preset", "replications", "failures",
    "freq_i1", "freq_i0", "freq_i1_oracle", "freq_i0_oracle",
]
_COEF_HEADER = [
    "n", "p", "rho", "gamma", "preset", "replications",
    "coef_index", "true_value", "mean_estimate",
]

_SELECTION_TABLE = {"strong": "table1_strong.csv", "weak": "table2_weak.csv"}


def _cell_key(res: CellResult) -> list[str]:
    c = res.cell
    return [str(c.n), str(c.p), FLOAT_FORMAT % c.rho, FLOAT_FORMAT % c.gamma, res.preset]


def render_tables(results: list[CellResult], out_dir) -> list[str]:
    """Write the table CSVs for a batch of cell results.

    One selection table and one detection table per preset (named after
    the published tables for the strong/weak presets) plus a long-format
    coefficient table.  Returns the written file names.  Output is
    byte-deterministic given the results.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    presets = []
    for res in results:
        if res.preset not in presets:
            presets.append(res.preset)

    for preset in presets:
        rows = [r for r in results if r.preset == preset]
        sel_name = _SELECTION_TABLE.get(preset, f"table1_{preset}.csv")
        det_name = f"table4_{preset}.csv"
        with open(os.path.join(out_dir, sel_name), "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_SELECTION_HEADER)
            for r in rows:
                writer.writerow(
                    _cell_key(r)
                    + [str(r.replications), str(r.failures)]
                    + [FLOAT_FORMAT % v for v in (r.mean_fpr, r.mean_fnr, r.mean_fdr, r.freq_exact_support)]
                )
        with open(os.path.join(out_dir, det_name), "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_DETECTION_HEADER)
            for r in rows:
                writer.writerow(
                    _cell_key(r)
                    + [str(r.replications), str(r.failures)]
                    + [
                        FLOAT_FORMAT % v
                        for v in (r.freq_i1, r.freq_i0, r.freq_i1_oracle, r.freq_i0_oracle)
                    ]
                )
        written += [sel_name, det_name]

    with open(os.path.join(out_dir, "table3_coefficients.csv"), "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_COEF_HEADER)
        for r in results:
            for idx, true_val, mean_val in zip(r.coef_indices, r.coef_true, r.coef_means):
                writer.writerow(
                    _cell_key(r)
                    + [str(r.replications), str(idx + 1)]
                    + [FLOAT_FORMAT % true_val, FLOAT_FORMAT % mean_val]
                )
    written.append("table3_coefficients.csv")
    return written


def write_manifest(grid: ExperimentGrid, results: list[CellResult], out_dir) -> str:
    """Record the run parameters and per-cell timings next to the tables."""
    path = os.path.join(out_dir, "manifest.txt")
    lines = [
        "# sparsecoint monte carlo manifest",
        f"version = {_version}",
        f"base_seed = {grid.base_seed}",
        f"replications = {grid.replications}",
        f"signal_preset = {grid.signal_preset}",
        "n_values = " + ",".join(str(v) for v in grid.n_values),
        "p_values = " + ",".join(str(v) for v in grid.p_values),
        "rho_values = " + ",".join(FLOAT_FORMAT % v for v in grid.rho_values),
        "gamma_values = " + ",".join(FLOAT_FORMAT % v for v in grid.gamma_values),
        f"cells = {len(results)}",
        "total_wall_time = %.3f" % sum(r.wall_time for r in results),
    ]
    for i, r in enumerate(results):
        c = r.cell
        lines.append(
            f"cell_{i} = n={c.n} p={c.p} rho={c.rho:g} gamma={c.gamma:g} "
            f"wall=%.3f valid={r.valid}" % r.wall_time
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
