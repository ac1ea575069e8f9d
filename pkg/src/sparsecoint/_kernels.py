"""Numba kernels for the weighted-lasso coordinate descent.

The solver works on the Gram form of the demeaned, weight-rescaled problem

    minimize  yss - 2 cy'b + b' gram b + 2 * lam_half * sum_j |b_j|

updating one coordinate at a time with the closed-form soft-threshold step.
Convergence requires both a small coefficient change over a full sweep
(per-coordinate tolerances, so callers can express them on the original
coefficient scale) and a subgradient-optimality check, which guarantees the
returned solution passes the external KKT certification with margin.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _kkt_ok(gram, cy, yss, lam_half, beta, rel_tol):
    """Subgradient optimality of ``beta`` at relative tolerance ``rel_tol``.

    Per-coordinate slack scales with the Cauchy-Schwarz bound
    ``sqrt(gram[j, j]) * ||residual||`` plus the threshold itself.
    """
    m = beta.shape[0]
    gb = gram @ beta
    quad = 0.0
    dot_cb = 0.0
    for j in range(m):
        quad += beta[j] * gb[j]
        dot_cb += beta[j] * cy[j]
    rss = yss - 2.0 * dot_cb + quad
    if rss < 0.0:
        rss = 0.0
    rnorm = np.sqrt(rss)
    for j in range(m):
        g = cy[j] - gb[j]
        slack = rel_tol * (np.sqrt(gram[j, j]) * rnorm + lam_half)
        if beta[j] > 0.0:
            if abs(g - lam_half) > slack:
                return False
        elif beta[j] < 0.0:
            if abs(g + lam_half) > slack:
                return False
        else:
            if abs(g) > lam_half + slack:
                return False
    return True


@numba.njit(cache=True)
def _sweep(gram, cy, lam_half, beta, tol_vec, active_only):
    """One cyclic pass over the coordinates; returns True if every update
    moved less than its tolerance."""
    m = beta.shape[0]
    small = True
    for j in range(m):
        bj = beta[j]
        if active_only and bj == 0.0:
            continue
        gjj = gram[j, j]
        if gjj <= 0.0:
            # Degenerate (constant) column: pinned at zero.
            if bj != 0.0:
                beta[j] = 0.0
            continue
        # Partial residual correlation with column j.
        g = cy[j] - gram[j] @ beta + gjj * bj
        if g > lam_half:
            bnew = (g - lam_half) / gjj
        elif g < -lam_half:
            bnew = (g + lam_half) / gjj
        else:
            bnew = 0.0
        if bnew != bj:
            beta[j] = bnew
            if abs(bnew - bj) > tol_vec[j]:
                small = False
    return small


@numba.njit(cache=True)
def cd_solve(gram, cy, yss, lam_half, beta, tol_vec, kkt_rel_tol, max_sweeps):
    """Run coordinate descent to joint coefficient/KKT convergence.

    ``beta`` is updated in place (warm start in, solution out).  Between
    full sweeps the active set is iterated on its own, which is where the
    path solver spends most of its time on sparse solutions.

    Returns ``(sweeps_used, converged)``.
    """
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        small = _sweep(gram, cy, lam_half, beta, tol_vec, False)
        sweeps += 1
        if small and _kkt_ok(gram, cy, yss, lam_half, beta, kkt_rel_tol):
            converged = True
            break
        while sweeps < max_sweeps:
            small_active = _sweep(gram, cy, lam_half, beta, tol_vec, True)
            sweeps += 1
            if small_active:
                break
    return sweeps, converged
