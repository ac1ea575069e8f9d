"""Seeded simulation of the sparse-cointegration data-generating process.

The simulated model is

    y_t = beta0 + sum_{j<=s} beta_j x_{j,t} + z_t
    x_{j,t} = x_{j,t-1} + v_{j,t},          x_{j,0} = 0
    z_t = rho z_{t-1} + e_t,                z_0 = 0

with (e_t, v_{1,t}, ..., v_{p,t}) i.i.d. N(0, Omega) where Omega has the
block form built by :func:`build_omega`: variance ``sigma2_e`` for e, a
Toeplitz block ``corr_decay**|i-j|`` for the v's, and cross-covariances
``tau * min(diag(Omega_vv))`` between e and every v (the endogeneity knob).

Reproducibility: draws come from a Philox 4x64-10 counter-based generator
keyed by the config seed, and the standard-normal transform is NumPy's
ziggurat implementation via ``Generator.standard_normal``, drawn as a single
``(n, p + 1)`` block in row-major order.  Identical configs therefore give
bit-identical datasets, and distinct seeds give independent streams by
construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .errors import ConfigFieldError, CsvFormatError
from .linalg import cholesky

#: Active-coefficient presets: the strong and weaker signal vectors used by
#: the Monte Carlo experiments (s = 5 active covariates in both cases).
STRONG_BETA = (1.0, 0.5, 1.5, 0.8, 1.0)
WEAK_BETA = (0.25, 0.25, 0.25, 0.25, 0.25)
SIGNAL_PRESETS = {"strong": STRONG_BETA, "weak": WEAK_BETA}


def _omega_blocks(p: int, sigma2_e: float, corr_decay: float, tau: float) -> np.ndarray:
    idx = np.arange(p)
    omega_vv = corr_decay ** np.abs(idx[:, None] - idx[None, :])
    omega_ev = tau * float(np.min(np.diag(omega_vv))) * np.ones(p)
    omega = np.empty((p + 1, p + 1))
    omega[0, 0] = sigma2_e
    omega[0, 1:] = omega_ev
    omega[1:, 0] = omega_ev
    omega[1:, 1:] = omega_vv
    return omega


def max_admissible_tau(p: int, sigma2_e: float = 4.0, corr_decay: float = 0.5) -> float:
    """Largest endogeneity scale for which the implied covariance stays PSD.

    The joint covariance is positive definite iff
    ``tau**2 * ones' Omega_vv^{-1} ones < sigma2_e``; this returns the
    boundary value.  It shrinks as p grows, so a fixed large tau that is
    valid at small p can be infeasible at p = 50 or 100.
    """
    idx = np.arange(p)
    omega_vv = corr_decay ** np.abs(idx[:, None] - idx[None, :])
    quad = float(np.ones(p) @ np.linalg.solve(omega_vv, np.ones(p)))
    return float(np.sqrt(sigma2_e / quad))


def default_tau(p: int, sigma2_e: float = 4.0, corr_decay: float = 0.5) -> float:
    """Endogeneity scale used by the presets: 90% of the admissible maximum."""
    return 0.9 * max_admissible_tau(p, sigma2_e, corr_decay)


@dataclass(frozen=True)
class DgpConfig:
    """Full parameterization of one simulated dataset.

    ``beta_active`` holds the coefficients of the first ``s`` covariates;
    every remaining covariate has a zero coefficient.  Construction
    validates each field and checks that the implied innovation covariance
    is positive definite (via its Cholesky factor), so an invalid
    endogeneity configuration fails immediately with the offending field
    named.
    """

    n: int
    p: int
    s: int
    beta0: float
    beta_active: tuple[float, ...]
    rho: float
    sigma2_e: float
    corr_decay: float
    tau: float
    seed: int

    def __post_init__(self):
        if self.n < 2:
            raise ConfigFieldError("n", f"sample size must be >= 2, got {self.n}")
        if self.p < 1:
            raise ConfigFieldError("p", f"covariate count must be >= 1, got {self.p}")
        if not 1 <= self.s <= self.p:
            raise ConfigFieldError("s", f"active count must be in [1, p={self.p}], got {self.s}")
        if len(self.beta_active) != self.s:
            raise ConfigFieldError(
                "beta_active", f"expected {self.s} values, got {len(self.beta_active)}"
            )
        if not all(np.isfinite(self.beta_active)):
            raise ConfigFieldError("beta_active", "values must be finite")
        if not np.isfinite(self.beta0):
            raise ConfigFieldError("beta0", "must be finite")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigFieldError("rho", f"must be in [0, 1], got {self.rho}")
        if not self.sigma2_e > 0.0:
            raise ConfigFieldError("sigma2_e", f"must be > 0, got {self.sigma2_e}")
        if not 0.0 < self.corr_decay < 1.0:
            raise ConfigFieldError("corr_decay", f"must be in (0, 1), got {self.corr_decay}")
        if self.tau < 0.0:
            raise ConfigFieldError("tau", f"must be >= 0, got {self.tau}")
        if self.seed < 0:
            raise ConfigFieldError("seed", f"must be a nonnegative integer, got {self.seed}")
        try:
            cholesky(_omega_blocks(self.p, self.sigma2_e, self.corr_decay, self.tau))
        except Exception as exc:
            raise ConfigFieldError(
                "tau", f"implied innovation covariance is not positive definite ({exc})"
            ) from exc


@dataclass(frozen=True)
class Dataset:
    """Observed target series and covariate matrix, with optional truth labels.

    ``true_active`` holds 0-based column indices of the truly active
    covariates (present for simulated data, absent for user data);
    ``z_true`` holds the simulated equilibrium errors as a diagnostic.
    """

    y: np.ndarray
    x: np.ndarray
    true_active: frozenset[int] | None = None
    z_true: np.ndarray | None = None

    def __post_init__(self):
        if self.y.ndim != 1 or self.x.ndim != 2:
            raise ValueError("y must be 1-d and x 2-d")
        if self.x.shape[0] != len(self.y):
            raise ValueError("x and y disagree on sample size")
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.x))):
            raise ValueError("dataset contains NaN or Inf entries")
        if self.true_active is not None:
            p = self.x.shape[1]
            if any(not 0 <= j < p for j in self.true_active):
                raise ValueError("true_active indices out of range")
        if self.z_true is not None and len(self.z_true) != len(self.y):
            raise ValueError("z_true length mismatch")

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def p(self) -> int:
        return self.x.shape[1]


def build_omega(config: DgpConfig) -> np.ndarray:
    """Innovation covariance of ``(e_t, v_1t, ..., v_pt)`` for ``config``.

    Top-left entry is ``sigma2_e``; the v-block is Toeplitz with entries
    ``corr_decay**|i-j|``; the cross block is ``tau * min(diag(Omega_vv))``
    in every coordinate.
    """
    return _omega_blocks(config.p, config.sigma2_e, config.corr_decay, config.tau)


def simulate(config: DgpConfig) -> Dataset:
    """Draw one dataset from the configured process.

    Pure function of ``config`` including its seed: repeated calls return
    bit-identical datasets.  See the module docstring for the generator and
    draw-order conventions.
    """
    lower = cholesky(build_omega(config))
    rng = np.random.Generator(np.random.Philox(key=np.uint64(config.seed)))
    eta = rng.standard_normal((config.n, config.p + 1)) @ lower.T
    e = eta[:, 0]
    v = eta[:, 1:]

    x = np.cumsum(v, axis=0)
    if config.rho == 1.0:
        z = np.cumsum(e)
    elif config.rho == 0.0:
        z = e.copy()
    else:
        z = scipy.signal.lfilter([1.0], [1.0, -config.rho], e)

    beta = np.asarray(config.beta_active)
    y = config.beta0 + x[:, : config.s] @ beta + z
    return Dataset(y=y, x=x, true_active=frozenset(range(config.s)), z_true=z)


def preset_config(
    signal: str,
    n: int,
    p: int,
    rho: float,
    seed: int,
    *,
    tau: float | None = None,
    beta0: float = 1.0,
    sigma2_e: float = 4.0,
    corr_decay: float = 0.5,
) -> DgpConfig:
    """DgpConfig for the named signal preset (``"strong"`` or ``"weak"``).

    ``tau=None`` selects :func:`default_tau` for the given p; see the notes
    there on why the endogeneity scale cannot be held fixed across p.
    """
    if signal not in SIGNAL_PRESETS:
        raise ConfigFieldError("signal", f"unknown preset {signal!r}; use 'strong' or 'weak'")
    beta = SIGNAL_PRESETS[signal]
    if tau is None:
        tau = default_tau(p, sigma2_e, corr_decay)
    return DgpConfig(
        n=n,
        p=p,
        s=len(beta),
        beta0=beta0,
        beta_active=beta,
        rho=rho,
        sigma2_e=sigma2_e,
        corr_decay=corr_decay,
        tau=tau,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# CSV export / import
# ---------------------------------------------------------------------------

#: Format used for every numeric value written to disk; 17 significant
#: digits guarantee exact float64 round-trips.
FLOAT_FORMAT = "%.17g"


def save_dataset_csv(dataset: Dataset, path) -> None:
    """Write ``dataset`` as CSV with header ``y,x1,...,xp`` and LF endings."""
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y"] + [f"x{j + 1}" for j in range(dataset.p)])
        for t in range(dataset.n):
            row = [FLOAT_FORMAT % dataset.y[t]]
            row += [FLOAT_FORMAT % val for val in dataset.x[t]]
            writer.writerow(row)


def load_dataset_csv(path) -> Dataset:
    """Read a dataset written by :func:`save_dataset_csv`.

    Raises
    ------
    CsvFormatError
        On a malformed header or the first non-numeric cell, reporting its
        1-based row and column.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("file is empty", row=1) from None
        header = [h.strip() for h in header]
        p = len(header) - 1
        if p < 1 or header[0] != "y" or header[1:] != [f"x{j + 1}" for j in range(p)]:
            raise CsvFormatError(
                f"expected header 'y,x1,...,xp', got {','.join(header)!r}", row=1
            )
        ys: list[float] = []
        xs: list[list[float]] = []
        for i, row in enumerate(reader, start=2):
            if len(row) != p + 1:
                raise CsvFormatError(
                    f"expected {p + 1} columns, got {len(row)}", row=i
                )
            vals = []
            for j, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"non-numeric value {cell!r}", row=i, col=j + 1
                    ) from None
            if not all(np.isfinite(vals)):
                raise CsvFormatError("non-finite value", row=i)
            ys.append(vals[0])
            xs.append(vals[1:])
    if not ys:
        raise CsvFormatError("file contains a header but no data rows", row=2)
    return Dataset(y=np.array(ys), x=np.array(xs))


def save_dataset_metadata(config: DgpConfig, path) -> None:
    """Write the sidecar metadata record for a simulated dataset.

    Flat ``key = value`` lines; ``true_active`` is stored as 1-based
    indices to match the x1..xp column labels of the CSV.
    """
    lines = [
        "# sparsecoint dataset metadata",
        f"n = {config.n}",
        f"p = {config.p}",
        f"s = {config.s}",
        "beta0 = " + FLOAT_FORMAT % config.beta0,
        "beta_active = " + ",".join(FLOAT_FORMAT % b for b in config.beta_active),
        "rho = " + FLOAT_FORMAT % config.rho,
        "sigma2_e = " + FLOAT_FORMAT % config.sigma2_e,
        "corr_decay = " + FLOAT_FORMAT % config.corr_decay,
        "tau = " + FLOAT_FORMAT % config.tau,
        f"seed = {config.seed}",
        "true_active = " + ",".join(str(j + 1) for j in range(config.s)),
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
