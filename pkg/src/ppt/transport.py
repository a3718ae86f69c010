"""Exact discrete optimal transport, assignment costs and weak transport costs."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from ._solver import ConvexResult, SolverError, minimize_composite
from .config import Configuration, PointConfiguration
from .ground import INF, AlphaFamily, CostFunction, GroundSpace
from .measures import DiscreteMeasure

MASS_TOL = 1e-9
# source weights below this trigger rescaled kernel variables
SMALL_SOURCE = 1e-6


@dataclass
class Coupling:
    """Transport plan between two finite measures (rows: source, columns: target)."""

    matrix: np.ndarray
    source_index: tuple = ()
    target_index: tuple = ()
    source_marginal: np.ndarray = field(init=False, repr=False)
    target_marginal: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2:
            self.matrix = self.matrix.reshape(0, 0)
        if not self.source_index:
            self.source_index = tuple(range(self.matrix.shape[0]))
        if not self.target_index:
            self.target_index = tuple(range(self.matrix.shape[1]))
        self.source_marginal = self.matrix.sum(axis=1)
        self.target_marginal = self.matrix.sum(axis=0)

    @classmethod
    def empty(cls) -> "Coupling":
        return cls(np.zeros((0, 0)))

    @property
    def is_empty(self) -> bool:
        return self.matrix.size == 0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["source", "target", "mass"])
            for i, j in zip(*np.nonzero(self.matrix)):
                w.writerow([self.source_index[i], self.target_index[j], repr(float(self.matrix[i, j]))])


@dataclass
class WeakKernel:
    """One probability row ``p_x`` per charged source point ``x``."""

    rows: np.ndarray
    source_index: tuple
    target_index: tuple
    source_weights: np.ndarray
    residual: float = 0.0
    gap: float = 0.0

    def target_marginal(self) -> np.ndarray:
        return self.source_weights @ self.rows

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["source", "target", "probability"])
            for i, j in zip(*np.nonzero(self.rows > 0)):
                w.writerow([self.source_index[i], self.target_index[j], repr(float(self.rows[i, j]))])


def cost_matrix_to_csv(C, path) -> None:
    C = np.asarray(C, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row"] + [f"c{j}" for j in range(C.shape[1])])
        for i, row in enumerate(C):
            w.writerow([i] + [repr(float(v)) for v in row])


def _weights(nu) -> np.ndarray:
    w = nu.weights if isinstance(nu, DiscreteMeasure) else np.asarray(nu, dtype=float).ravel()
    if np.any(w < 0) or np.any(~np.isfinite(w)):
        raise ValueError("measure weights must be finite and nonnegative")
    return np.asarray(w, dtype=float)


def _ground_matrix(omega, k: int, space: Optional[GroundSpace] = None) -> np.ndarray:
    if isinstance(omega, CostFunction):
        if omega.kind == "hamming":
            return 1.0 - np.eye(k)
        if omega.kind == "custom_matrix":
            return np.asarray(omega.matrix)
        if space is None:
            raise ValueError(f"{omega.kind} cost needs a ground space")
        return omega.on_space(space)
    C = np.asarray(omega, dtype=float)
    if C.shape != (k, k):
        raise ValueError(f"cost matrix must be {k}x{k}")
    return C


# ---------------------------------------------------------------------------
# Exact OT


def ot_lp(cost, nu1, nu2):
    """Exact discrete optimal transport by linear programming.

    Returns ``(value, Coupling)``; unequal total masses give ``(inf, empty)``.
    """
    a, b = _weights(nu1), _weights(nu2)
    C = np.asarray(cost, dtype=float)
    if C.shape != (a.size, b.size):
        raise ValueError("cost matrix shape does not match the measures")
    if abs(a.sum() - b.sum()) > MASS_TOL:
        return INF, Coupling.empty()
    I, J = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    if I.size == 0:
        return 0.0, Coupling(np.zeros((a.size, b.size)))
    sub = C[np.ix_(I, J)]
    finite = np.isfinite(sub)
    cells = np.argwhere(finite)
    n = cells.shape[0]
    A_eq = np.zeros((I.size + J.size, n))
    A_eq[cells[:, 0], np.arange(n)] = 1.0
    A_eq[I.size + cells[:, 1], np.arange(n)] = 1.0
    res = linprog(sub[finite], A_eq=A_eq, b_eq=np.concatenate([a[I], b[J]]), bounds=(0, None),
                  method="highs-ds", options={"primal_feasibility_tolerance": 1e-10})
    if res.status == 2:
        return INF, Coupling.empty()
    if res.status != 0:
        raise SolverError(f"OT LP failure: {res.message}")
    plan = np.zeros((a.size, b.size))
    plan[I[cells[:, 0]], J[cells[:, 1]]] = np.clip(res.x, 0.0, None)
    return float(np.sum(plan[plan > 0] * C[plan > 0])), Coupling(plan)


# ---------------------------------------------------------------------------
# Assignment


def hungarian(C) -> tuple:
    """Min-cost assignment for a rectangular cost matrix.

    Shortest augmenting paths with vertex potentials, ``O(n^2 m)`` for an
    ``n x m`` matrix with ``n <= m``.  Returns ``(value, cols)`` where
    ``cols[i]`` is the column matched to row ``i`` (when ``n > m`` the
    problem is solved on the transpose and ``rows[j]`` is returned for
    each column instead).
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2:
        raise ValueError("cost must be a matrix")
    n, m = C.shape
    if n == 0 or m == 0:
        return 0.0, np.zeros(0, dtype=int)
    if n > m:
        return hungarian(C.T)
    if not np.all(np.isfinite(C)):
        raise ValueError("assignment costs must be finite")
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    match = np.zeros(m + 1, dtype=int)  # match[j] = row (1-based) assigned to column j
    way = np.zeros(m + 1, dtype=int)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = np.full(m + 1, INF)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            free = ~used[1:]
            cur = C[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], INF)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[match[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    cols = np.zeros(n, dtype=int)
    for j in range(1, m + 1):
        if match[j]:
            cols[match[j] - 1] = j - 1
    return float(C[np.arange(n), cols].sum()), cols


def lexicographic_assignment(C, atol: float = 1e-12) -> tuple:
    """Optimal assignment whose column sequence is lexicographically smallest among optima.

    Rows are fixed one at a time to the smallest column that keeps the
    remaining problem optimal.  Requires ``n <= m``.
    """
    C = np.asarray(C, dtype=float)
    n, m = C.shape
    if n > m:
        raise ValueError("lexicographic assignment needs n <= m")
    best, _ = hungarian(C)
    tol = atol * max(1.0, abs(best))
    rows = list(range(n))
    cols_left = list(range(m))
    fixed_cost = 0.0
    chosen = []
    for i in rows:
        rest_rows = [r for r in rows if r > i]
        for j in cols_left:
            rest_cols = [c for c in cols_left if c != j]
            sub = C[np.ix_(rest_rows, rest_cols)] if rest_rows else np.zeros((0, 0))
            val = fixed_cost + C[i, j] + (hungarian(sub)[0] if rest_rows else 0.0)
            if val <= best + tol:
                chosen.append(j)
                fixed_cost += C[i, j]
                cols_left.remove(j)
                break
        else:  # pragma: no cover - only reachable through round-off
            raise SolverError("lexicographic tie-break lost optimality", best)
    cols = np.array(chosen, dtype=int)
    return float(C[np.arange(n), cols].sum()), cols


def _point_lists(omega, xi, chi, space):
    if isinstance(xi, Configuration) and isinstance(chi, Configuration):
        if xi.k != chi.k:
            raise ValueError("configurations live on different ground spaces")
        G = _ground_matrix(omega, xi.k, space)
        a, b = xi.expand(), chi.expand()
        return G[np.ix_(a, b)] if a and b else np.zeros((len(a), len(b)))
    if isinstance(xi, PointConfiguration) and isinstance(chi, PointConfiguration):
        X, Y = xi.expand(), chi.expand()
        if X.size == 0 or Y.size == 0:
            return np.zeros((xi.mass, chi.mass))
        if callable(omega) and not isinstance(omega, CostFunction):
            return np.array([[omega(x, y) for y in Y] for x in X], dtype=float)
        return omega.between(X, Y)
    raise ValueError("mismatched configuration types")


def assignment_cost(omega, xi, chi, space: Optional[GroundSpace] = None, lexicographic: bool = True):
    """``T_omega(chi | xi)`` between equal-mass configurations.

    The permutation maps the ``i``-th point of ``xi``'s expansion to the
    ``perm[i]``-th point of ``chi``'s.  Unequal masses give ``(inf, None)``.
    """
    if xi.mass != chi.mass:
        return INF, None
    if xi.mass == 0:
        return 0.0, np.zeros(0, dtype=int)
    C = _point_lists(omega, xi, chi, space)
    return lexicographic_assignment(C) if lexicographic else hungarian(C)


def partial_assignment_cost(omega, xi, chi, space: Optional[GroundSpace] = None) -> float:
    """Partial transport ``T_{omega,0}``: the larger side donates a sub-configuration of the smaller's mass."""
    if xi.mass == 0 or chi.mass == 0:
        return 0.0
    C = _point_lists(omega, xi, chi, space)
    return hungarian(C)[0]


def partial_cost_to_atom(rho: np.ndarray, chi: Configuration, x: int, m: int) -> float:
    """``T_{rho,0}(chi, m delta_x)`` on a finite space, in closed form.

    If ``chi`` has at least ``m`` points, the ``m`` points of ``chi``
    closest to ``x`` are moved; otherwise all of ``chi`` is moved to ``x``.
    """
    d = np.asarray(rho, dtype=float)[chi.expand(), x] if chi.mass else np.zeros(0)
    if chi.mass >= m:
        return float(np.sort(d)[:m].sum())
    return float(d.sum())


# ---------------------------------------------------------------------------
# Marton and weak transport


def marton_cost(nu1, nu2) -> float:
    """``sum_x [1 - nu1(x)/nu2(x)]_+^2 nu2(x)``; ``nu2``-null points contribute nothing."""
    a, b = _weights(nu1), _weights(nu2)
    on = b > 0
    return float(np.sum(np.clip(1.0 - a[on] / b[on], 0.0, None) ** 2 * b[on]))


def weak_transport(alpha: AlphaFamily, rho, nu1, nu2, tol: float = 1e-8, max_iter: int = 300):
    """Weak transport cost ``inf_p sum_x nu1(x) alpha(sum_y rho(x,y) p_x(y))``.

    The kernel ``p`` runs over probability rows with ``sum_x nu1(x) p_x = nu2``.
    Returns ``(value, WeakKernel)``; the kernel carries the certified gap
    and the marginal residual.

    Raises
    ------
    SolverError
        If the cutting-plane solver cannot certify ``tol``.
    """
    a, b = _weights(nu1), _weights(nu2)
    if abs(a.sum() - 1) > 1e-9 or abs(b.sum() - 1) > 1e-9:
        raise ValueError("weak transport needs probability measures")
    R = _ground_matrix(rho, a.size, None) if not isinstance(rho, np.ndarray) else np.asarray(rho, dtype=float)
    I, J = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    res = solve_weak_kernel(alpha, R[np.ix_(I, J)], a[I], b[J], tol=tol, max_iter=max_iter)
    if not res.feasible:
        return INF, None
    rows = res.x.reshape(I.size, J.size)
    kern = WeakKernel(rows, tuple(I), tuple(J), a[I], residual=res.residual, gap=res.gap)
    return res.value, kern


def solve_weak_kernel(alpha: AlphaFamily, coef, src, tgt, tol: float = 1e-8, max_iter: int = 300,
                      term_weights=None, term_coef=None) -> ConvexResult:
    """Kernel program shared by base and lifted weak costs.

    Variables ``p[i, j]`` (row-stochastic).  By default there is one convex
    term per source row ``i`` with argument ``coef[i] @ p[i]`` and weight
    ``src[i]``.  ``term_coef`` (shape ``(T, n_src, n_tgt)``) and
    ``term_weights`` override this with arbitrary terms.
    """
    coef = np.asarray(coef, dtype=float)
    ns, nt = src.size, tgt.size
    nvar = ns * nt
    A_eq = np.zeros((ns + nt, nvar))
    for i in range(ns):
        A_eq[i, i * nt:(i + 1) * nt] = 1.0
        A_eq[ns:, i * nt:(i + 1) * nt] = np.eye(nt) * src[i]
    b_eq = np.concatenate([np.ones(ns), tgt])
    if term_coef is None:
        A = np.zeros((ns, nvar))
        for i in range(ns):
            A[i, i * nt:(i + 1) * nt] = coef[i]
        w = src
    else:
        A = np.asarray(term_coef, dtype=float).reshape(len(term_weights), nvar)
        w = np.asarray(term_weights, dtype=float)
    col = row = None
    if src.min() < SMALL_SOURCE:
        # substitute y = sqrt(src_i) p_i so no equality coefficient falls below the LP drop threshold
        r = np.sqrt(src)
        col = np.repeat(1.0 / r, nt)
        row = np.concatenate([r, np.ones(nt)])
    return minimize_composite(np.zeros(nvar), A, w, alpha, A_eq, b_eq, tol=tol, max_iter=max_iter,
                              col_scale=col, row_scale=row)
