"""Cutting-plane solver for linear-plus-separable-convex programs over probability variables.

Solves::

    minimize   lin @ x + sum_j w_j * alpha(A[j] @ x)
    subject to A_eq @ x = b_eq,  0 <= x <= 1

with ``alpha`` convex and nondecreasing on ``[0, domain_max]``.  Each
``alpha(s_j)`` is replaced by an epigraph variable bounded below by
tangent lines; the LP value is a certified lower bound and the true
objective at the LP point is an upper bound, so the gap is a duality-type
certificate.  Tangents are added at the current point until the gap closes
(Kelley's method).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .ground import INF, AlphaFamily

_HIGHS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


class SolverError(RuntimeError):
    """Raised when the solver cannot certify the requested gap."""

    def __init__(self, message: str, best_value: float = INF, gap: float = INF, residual: float = INF):
        super().__init__(f"{message} (best={best_value:.6g}, gap={gap:.3g}, residual={residual:.3g})")
        self.best_value = best_value
        self.gap = gap
        self.residual = residual


@dataclass
class ConvexResult:
    x: np.ndarray
    value: float
    lower_bound: float
    gap: float
    residual: float
    iterations: int
    feasible: bool = True


def _tangent(alpha: AlphaFamily, s0: float, top: float):
    """Slope and intercept of a supporting line at ``s0`` (pulled inside when the slope is infinite)."""
    s0 = min(max(s0, 0.0), top)
    for shrink in (0.0, 1e-12, 1e-10, 1e-9):
        s = s0 - shrink * max(1.0, top) if shrink else s0
        s = max(s, 0.0)
        v = float(alpha(s))
        d = float(alpha.derivative(s))
        if np.isfinite(v) and np.isfinite(d):
            return d, v - d * s
    return None


def _initial_cuts(alpha: AlphaFamily, s_hi: float, n_grid: int):
    pieces = alpha.affine_pieces()
    if pieces is not None:
        return [(float(a), float(b)) for a, b in zip(*pieces)], True
    grid = list(np.linspace(0.0, s_hi, n_grid))
    if np.isfinite(alpha.domain_max) and s_hi >= alpha.domain_max:
        grid += [s_hi * (1.0 - 10.0 ** (-m)) for m in range(2, 9)]
    cuts = []
    for s in grid:
        c = _tangent(alpha, s, s_hi)
        if c is not None:
            cuts.append(c)
    return cuts, False


def minimize_composite(lin, A, weights, alpha: AlphaFamily, A_eq, b_eq, *, tol: float = 1e-8,
                       rtol: float = 1e-9, max_iter: int = 300, n_grid: int = 33,
                       col_scale=None, row_scale=None) -> ConvexResult:
    """Minimize ``lin @ x + sum_j w_j alpha(A[j] @ x)`` over the polytope.

    ``col_scale`` and ``row_scale`` only change what the LP solver sees
    (variables ``x = col_scale * y`` and equality rows multiplied by
    ``row_scale``); they keep coefficients above the solver's drop
    threshold when some weights are tiny.  Residuals are reported in the
    original rows.

    Returns a :class:`ConvexResult` whose ``value`` is the objective at a
    feasible point and whose ``gap`` bounds its suboptimality.  An
    infeasible polytope (including the implicit ``A[j] @ x <= domain_max``)
    yields ``value = inf`` and ``feasible = False``.

    Raises
    ------
    SolverError
        When the gap is still above tolerance after ``max_iter`` rounds or
        the LP solver fails.
    """
    lin = np.asarray(lin, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    w = np.asarray(weights, dtype=float)
    A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.asarray(b_eq, dtype=float)
    n = lin.size
    m = w.size if A.size else 0
    if m:
        keep = w > 0
        A, w = A[keep], w[keep]
        m = w.size

    s_hi = np.array([np.clip(A[j], 0.0, None).sum() for j in range(m)])
    top = alpha.domain_max
    if np.isfinite(top):
        s_hi = np.minimum(s_hi, top)

    rows, rhs, owner = [], [], []
    exact = True
    for j in range(m):
        cuts, exact_j = _initial_cuts(alpha, max(s_hi[j], 1e-12), n_grid)
        exact = exact and exact_j
        for d, c in cuts:
            rows.append(j)
            owner.append((d, c))
    ub_rows = []
    ub_rhs = []
    if np.isfinite(top):
        for j in range(m):
            if np.clip(A[j], 0.0, None).sum() > top:
                ub_rows.append(np.concatenate([A[j], np.zeros(m)]))
                ub_rhs.append(top)

    def cut_row(j, d, c):
        r = np.zeros(n + m)
        r[:n] = d * A[j]
        r[n + j] = -1.0
        return r, -c

    cut_mat = [cut_row(j, d, c) for j, (d, c) in zip(rows, owner)]
    cs = np.ones(n) if col_scale is None else np.asarray(col_scale, dtype=float)
    rs = np.ones(A_eq.shape[0]) if row_scale is None else np.asarray(row_scale, dtype=float)
    S = np.concatenate([cs, np.ones(m)])
    obj = np.concatenate([lin, w]) * S
    Aeq_full = np.hstack([A_eq * cs[None, :], np.zeros((A_eq.shape[0], m))]) * rs[:, None]
    b_lp = b_eq * rs
    bounds = [(0.0, 1.0 / c) for c in cs] + [(0.0, None)] * m

    def true_obj(x):
        s = A @ x if m else np.zeros(0)
        vals = np.asarray(alpha(np.clip(s, 0.0, None))) if m else np.zeros(0)
        return float(lin @ x + np.sum(w * vals)), s

    best = (INF, None)
    lower = -INF
    residual = INF
    for it in range(1, max_iter + 1):
        A_ub = [r for r, _ in cut_mat] + ub_rows
        b_ub = [b for _, b in cut_mat] + ub_rhs
        lp = dict(A_ub=np.array(A_ub) * S[None, :] if A_ub else None, b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=Aeq_full, b_eq=b_lp, bounds=bounds, method="highs")
        res = linprog(obj, options=_HIGHS, **lp)
        if res.status == 2:
            # presolve can misjudge feasibility when weights are tiny; confirm without it
            res = linprog(obj, options=dict(_HIGHS, presolve=False), **lp)
        if res.status == 2:
            return ConvexResult(np.zeros(n), INF, INF, 0.0, 0.0, it, feasible=False)
        if res.status != 0:
            raise SolverError(f"LP failure: {res.message}", best[0], best[0] - lower, residual)
        x = np.clip(res.x[:n] * cs, 0.0, 1.0)
        lower = max(lower, float(res.fun))
        val, s = true_obj(x)
        r = float(np.max(np.abs(A_eq @ x - b_eq))) if A_eq.size else 0.0
        if val < best[0]:
            best = (val, x)
            residual = r
        gap = best[0] - lower
        if gap <= tol + rtol * abs(best[0]) or exact:
            return ConvexResult(best[1], best[0], lower, max(gap, 0.0), residual, it)
        z = res.x[n:]
        added = 0
        for j in range(m):
            if w[j] * (float(alpha(max(s[j], 0.0))) - z[j]) > 0.1 * tol:
                c = _tangent(alpha, s[j], top if np.isfinite(top) else s[j])
                if c is not None:
                    cut_mat.append(cut_row(j, *c))
                    added += 1
        if not added:
            return ConvexResult(best[1], best[0], lower, max(gap, 0.0), residual, it)
    raise SolverError("cutting-plane iteration cap reached", best[0], best[0] - lower, residual)
