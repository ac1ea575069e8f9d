"""Dense linear-algebra primitives: Cholesky factorization and OLS.

Least squares goes through a column-pivoted QR decomposition rather than the
normal equations: integrated regressors with Toeplitz-correlated innovations
are badly conditioned at p around 100, and the QR route keeps the residual
contracts tight there.  A brute-force normal-equations solver exists only in
the test suite as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefiniteError, RankDeficientError

#: Relative tolerance used both for the rank test in :func:`solve_ols`
#: (against the largest column norm) and the symmetry test in :func:`cholesky`.
RANK_TOLERANCE = 1e-10
SYMMETRY_TOLERANCE = 1e-10


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Validate and return ``values`` as a 2-d float64 array.

    Requires at least one row and one column and all entries finite.
    """
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Validate and return ``values`` as a 1-d float64 array of finite entries."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return v


@dataclass(frozen=True)
class OlsFit:
    """Result of an ordinary least squares fit.

    Attributes
    ----------
    intercept : float or None
        Fitted constant, present only when the fit included one.
    coefficients : ndarray
        Slope estimates, one per regressor column.
    residuals : ndarray
        ``y`` minus fitted values, on the full estimation sample.
    rss : float
        Residual sum of squares.
    n_eff : int
        Number of observations used.
    """

    intercept: float | None
    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float
    n_eff: int


def cholesky(a) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric positive-definite matrix.

    Parameters
    ----------
    a : array_like
        Square symmetric matrix (symmetric within ``SYMMETRY_TOLERANCE``
        relative to its largest entry).

    Returns
    -------
    ndarray
        Lower-triangular ``L`` with ``L @ L.T == a`` within 1e-10 relative.

    Raises
    ------
    NotPositiveDefiniteError
        If any pivot is <= 0, which signals an invalid covariance
        configuration upstream.
    """
    a = as_matrix(a, "a")
    n, m = a.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {n}x{m}")
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOLERANCE * max(scale, 1.0):
        raise ValueError("matrix is not symmetric within tolerance")

    # Column-by-column Cholesky-Crout with an explicit pivot check, so the
    # failure mode is deterministic and independent of the BLAS in use.
    lower = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= 0.0:
            raise NotPositiveDefiniteError(
                f"pivot {pivot:.6g} <= 0 at column {j + 1}; matrix is not positive definite"
            )
        ljj = np.sqrt(pivot)
        lower[j, j] = ljj
        if j + 1 < n:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / ljj
    return lower


def solve_ols(y, x, with_intercept: bool = True) -> OlsFit:
    """Least squares of ``y`` on the columns of ``x`` via pivoted QR.

    The intercept, when requested, is handled by augmenting a constant
    column so the residual contracts (zero-sum residuals, rss consistency)
    hold exactly on a single code path.

    Parameters
    ----------
    y : array_like
        Response vector.
    x : array_like
        Design matrix with one row per observation.
    with_intercept : bool
        Fit a constant term in addition to the columns of ``x``.

    Raises
    ------
    RankDeficientError
        If the pivoted QR detects collinearity beyond ``RANK_TOLERANCE``
        times the largest column norm.  The caller decides whether to drop
        columns.
    ValueError
        If the effective regressor count is not smaller than the number of
        rows.
    """
    y = as_vector(y, "y")
    x = as_matrix(x, "x")
    n, p = x.shape
    if len(y) != n:
        raise ValueError(f"y has length {len(y)} but x has {n} rows")
    n_reg = p + (1 if with_intercept else 0)
    if n_reg >= n:
        raise ValueError(f"{n_reg} regressors require more than {n} observations")

    if with_intercept:
        design = np.empty((n, n_reg))
        design[:, 0] = 1.0
        design[:, 1:] = x
    else:
        design = x

    q, r, piv = scipy.linalg.qr(design, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    # After column pivoting |r[0, 0]| equals the largest column 2-norm.
    tol = RANK_TOLERANCE * diag[0] if diag[0] > 0 else 0.0
    if diag[0] == 0.0 or np.any(diag <= tol):
        raise RankDeficientError(
            "design is rank deficient: "
            f"min |diag(R)| = {diag.min():.3e} vs tolerance {tol:.3e}"
        )

    qty = q.T @ y
    coefs_piv = scipy.linalg.solve_triangular(r, qty)
    coefs = np.empty_like(coefs_piv)
    coefs[piv] = coefs_piv

    residuals = y - design @ coefs
    rss = float(residuals @ residuals)
    if with_intercept:
        return OlsFit(float(coefs[0]), coefs[1:].copy(), residuals, rss, n)
    return OlsFit(None, coefs, residuals, rss, n)
