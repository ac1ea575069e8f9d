"""Information-criterion classification of a series as I(0) or I(1).

Two autoregressions for the differenced series are compared:

    M0:  dz_t = mu + phi_1 dz_{t-1} + ... + phi_k dz_{t-k} + eps_t
    M1:  dz_t = mu + phi z_{t-1} + phi_1 dz_{t-1} + ... + phi_k dz_{t-k} + eps_t

M0 imposes a unit root; M1 adds the lagged level and allows stationarity.
With residual variances sigma2_m = RSS_m / n_eff on the common sample, the
criteria are

    IC0 = ln sigma2_m0 + c_n (k + 1) / n_eff
    IC1 = ln sigma2_m1 + c_n (k + 2) / n_eff

and the series is classified I(1) (spurious) iff IC0 <= IC1, equivalently
iff n_eff * ln(sigma2_m0 / sigma2_m1) <= c_n.  The default penalty
c_n = ln(n_eff) is consistent for both directions.

Sample alignment: for lag order k both models use observations
t = k + 2 .. n, so M0 is nested in M1 on identical rows and
sigma2_m1 <= sigma2_m0 holds exactly.  Lag selection fits M1 for
k = 0 .. k_max on the k_max-aligned sample so that the BICs are comparable
across candidate orders.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRssError, RankDeficientError
from .linalg import OlsFit, solve_ols

MIN_MARGIN = 10  # required observations beyond the lag window

#: An RSS at or below this fraction of the response sum of squares is a
#: perfect fit up to rounding; the criteria are undefined there.
RSS_DEGENERATE_REL = 1e-24


def _check_rss(rss: float, yss: float, context: str) -> None:
    if rss <= RSS_DEGENERATE_REL * max(yss, 1e-300):
        raise DegenerateRssError(f"perfect fit in {context} (rss = {rss:.3e})")


class Verdict(enum.Enum):
    COINTEGRATED = "cointegrated"  # M1, residuals I(0)
    SPURIOUS = "spurious"  # M0, residuals I(1)


def default_k_max(n_obs: int) -> int:
    """Standard augmentation bound ``floor(12 * (n/100)^(1/4))`` on the
    differenced-sample size, capped so the regression stays feasible."""
    n_diff = n_obs - 1
    k = int(math.floor(12.0 * (n_diff / 100.0) ** 0.25))
    return max(0, min(k, n_diff - MIN_MARGIN))


def penalty_value(rule: str, n_eff: int) -> float:
    """Deterministic penalty c_n for the given rule at sample size n_eff."""
    if rule == "log-n":
        return math.log(n_eff)
    if rule == "sqrt-n":
        return math.sqrt(n_eff)
    raise ValueError(f"unknown penalty rule {rule!r}; use 'log-n' or 'sqrt-n'")


@dataclass(frozen=True)
class IcSettings:
    """Classifier controls.

    ``k_max=None`` selects :func:`default_k_max` from the data length.
    ``penalty_scale`` multiplies the rule value, so constant-times-log-n
    penalties are expressible.  The intercept is included by default; the
    parameter counts (k+1)/(k+2) in the criteria are kept as written when
    it is on and reduced by one when it is off.
    """

    k_max: int | None = None
    penalty_rule: str = "log-n"
    penalty_scale: float = 1.0
    include_intercept: bool = True

    def __post_init__(self):
        if self.k_max is not None and self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        if not self.penalty_scale > 0:
            raise ValueError("penalty_scale must be positive")
        penalty_value(self.penalty_rule, 10)  # validates the rule name


@dataclass(frozen=True)
class IcReport:
    """Outcome of one classification."""

    k_hat: int
    sigma2_m0: float
    sigma2_m1: float
    ic0: float
    ic1: float
    c_n: float
    n_eff: int
    verdict: Verdict


def _design(z: np.ndarray, k: int, align_k: int, with_level: bool, intercept: bool):
    """Rows t = align_k + 2 .. n of the M0/M1 regression at lag order k.

    Returns (response, design) where the design columns are, in order:
    intercept (optional), lagged differences 1..k, lagged level (optional,
    last).
    """
    n = len(z)
    if align_k < k:
        raise ValueError("alignment lag must be >= k")
    if n - 1 - align_k < MIN_MARGIN:
        raise ValueError(
            f"series of length {n} too short for lag window {align_k}"
        )
    d = np.diff(z)
    rows = slice(align_k, n - 1)
    response = d[rows]
    cols = []
    if intercept:
        cols.append(np.ones(n - 1 - align_k))
    for j in range(1, k + 1):
        cols.append(d[align_k - j : n - 1 - j])
    if with_level:
        cols.append(z[align_k : n - 1])
    design = np.column_stack(cols) if cols else np.empty((n - 1 - align_k, 0))
    return response, design


def fit_m0(z, k: int, include_intercept: bool = True) -> OlsFit:
    """Fit the differenced AR(k) model M0 on the sample t = k + 2 .. n.

    The returned fit's ``rss / n_eff`` is the M0 residual variance.
    """
    z = np.asarray(z, dtype=np.float64)
    response, design = _design(z, k, k, with_level=False, intercept=include_intercept)
    if design.shape[1] == 0:
        # No regressors at all (k = 0, no intercept): variance of dz itself.
        rss = float(response @ response)
        return OlsFit(None, np.empty(0), response.copy(), rss, len(response))
    if include_intercept and design.shape[1] == 1:
        # Intercept only (k = 0): mean model.
        mean = float(response.mean())
        resid = response - mean
        return OlsFit(mean, np.empty(0), resid, float(resid @ resid), len(response))
    if include_intercept:
        return solve_ols(response, design[:, 1:], with_intercept=True)
    return solve_ols(response, design, with_intercept=False)


def fit_m1(z, k: int, include_intercept: bool = True) -> OlsFit:
    """Fit M1 (M0 plus the lagged level) on the same sample as ``fit_m0``.

    The lagged-level coefficient is the last entry of ``coefficients``.
    """
    z = np.asarray(z, dtype=np.float64)
    response, design = _design(z, k, k, with_level=True, intercept=include_intercept)
    if include_intercept:
        return solve_ols(response, design[:, 1:], with_intercept=True)
    return solve_ols(response, design, with_intercept=False)


def select_lag_bic(z, settings: IcSettings | None = None) -> int:
    """BIC lag order for M1 over k = 0 .. k_max on the k_max-aligned sample.

    The criterion is ``n ln(RSS_k/n) + m_k ln(n)`` with m_k the parameter
    count of M1 at order k; ties break toward the smaller order.
    """
    settings = settings or IcSettings()
    z = np.asarray(z, dtype=np.float64)
    k_max = default_k_max(len(z)) if settings.k_max is None else settings.k_max
    if len(z) - 1 - k_max < MIN_MARGIN:
        raise ValueError(f"series of length {len(z)} too short for k_max = {k_max}")

    best_k = 0
    best_bic = math.inf
    for k in range(k_max + 1):
        response, design = _design(
            z, k, k_max, with_level=True, intercept=settings.include_intercept
        )
        n_common = len(response)
        if settings.include_intercept:
            fit = solve_ols(response, design[:, 1:], with_intercept=True)
        else:
            fit = solve_ols(response, design, with_intercept=False)
        _check_rss(fit.rss, float(response @ response), f"lag-order candidate {k}")
        m_k = k + (2 if settings.include_intercept else 1)
        bic = n_common * math.log(fit.rss / n_common) + m_k * math.log(n_common)
        if bic < best_bic:
            best_bic = bic
            best_k = k
    return best_k


def _nested_rss(z: np.ndarray, k: int, intercept: bool) -> tuple[float, float, int]:
    """RSS of M0 and M1 at lag k from one shared QR factorization.

    The level column is ordered last, so RSS_m1 = RSS_m0 - c**2 for the
    final projection coefficient c; the nesting inequality therefore holds
    exactly in floating point.
    """
    response, design = _design(z, k, k, with_level=True, intercept=intercept)
    n_eff = len(response)
    yss = float(response @ response)
    if design.shape[1] == 0:
        return yss, yss, n_eff
    q, r = np.linalg.qr(design, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.max() == 0.0 or diag.min() <= 1e-10 * diag.max():
        raise RankDeficientError("M1 design is rank deficient")
    proj = q.T @ response
    rss = yss
    for i in range(design.shape[1] - 1):
        rss -= proj[i] ** 2
    rss_m0 = max(rss, 0.0)
    rss_m1 = max(rss - proj[-1] ** 2, 0.0)
    return rss_m0, rss_m1, n_eff


def _decide(
    sigma2_m0: float, sigma2_m1: float, k: int, n_eff: int, c_n: float, intercept: bool
) -> tuple[float, float, Verdict]:
    """Evaluate the two criteria and the verdict from the fitted variances."""
    adj = 0 if intercept else 1
    log0 = math.log(sigma2_m0)
    log1 = math.log(sigma2_m1)
    ic0 = log0 + c_n * (k + 1 - adj) / n_eff
    ic1 = log1 + c_n * (k + 2 - adj) / n_eff
    verdict = Verdict.SPURIOUS if ic0 <= ic1 else Verdict.COINTEGRATED
    # The likelihood-ratio form of the same rule must agree: M0 wins iff
    # n_eff * ln(sigma2_m0 / sigma2_m1) <= c_n.
    lr_spurious = n_eff * (log0 - log1) <= c_n
    if lr_spurious != (verdict is Verdict.SPURIOUS):
        raise AssertionError(
            "criterion comparison and likelihood-ratio form disagree: "
            f"ic0={ic0!r} ic1={ic1!r} lr={n_eff * (log0 - log1)!r} c_n={c_n!r}"
        )
    return ic0, ic1, verdict


def ic_record(report: IcReport) -> dict:
    """JSON-serializable record mirroring the IcReport fields."""
    return {
        "k_hat": report.k_hat,
        "sigma2_m0": report.sigma2_m0,
        "sigma2_m1": report.sigma2_m1,
        "ic0": report.ic0,
        "ic1": report.ic1,
        "c_n": report.c_n,
        "n_eff": report.n_eff,
        "verdict": report.verdict.value,
    }


def classify(z, settings: IcSettings | None = None) -> IcReport:
    """Classify a residual series as I(0) (cointegrated) or I(1) (spurious).

    Selects the lag order by BIC, fits M0 and M1 at that order on their
    common sample, and compares the criteria.  Scale invariant: rescaling
    z by any positive constant leaves the lag order and verdict unchanged.

    Raises
    ------
    DegenerateRssError
        If either model fits perfectly (RSS <= 0).
    """
    settings = settings or IcSettings()
    z = np.asarray(z, dtype=np.float64)
    k_hat = select_lag_bic(z, settings)
    rss_m0, rss_m1, n_eff = _nested_rss(z, k_hat, settings.include_intercept)
    d = np.diff(z)[k_hat:]
    yss = float(d @ d)
    _check_rss(rss_m0, yss, f"model M0 at lag {k_hat}")
    _check_rss(rss_m1, yss, f"model M1 at lag {k_hat}")
    sigma2_m0 = rss_m0 / n_eff
    sigma2_m1 = rss_m1 / n_eff
    c_n = settings.penalty_scale * penalty_value(settings.penalty_rule, n_eff)
    ic0, ic1, verdict = _decide(
        sigma2_m0, sigma2_m1, k_hat, n_eff, c_n, settings.include_intercept
    )
    return IcReport(
        k_hat=k_hat,
        sigma2_m0=sigma2_m0,
        sigma2_m1=sigma2_m1,
        ic0=ic0,
        ic1=ic1,
        c_n=c_n,
        n_eff=n_eff,
        verdict=verdict,
    )
