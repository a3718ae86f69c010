"""Transport costs between laws of point processes on an enumerated configuration space."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ground import INF, AlphaFamily, CostFunction, GroundSpace
from .processes import ProcessLaw, mass_law
from .transport import (Coupling, WeakKernel, _ground_matrix, assignment_cost, ot_lp,
                        partial_cost_to_atom, solve_weak_kernel)


@dataclass(frozen=True)
class LiftedCostSpec:
    """Which configuration-level cost to lift.

    ``linear``: ground cost ``T_rho`` (assignment) between equal-mass configurations.
    ``weak_hamming``: ``sum_x xi(x) alpha(E_Pi[1 - chi(x)/xi(x)]_+)``.
    ``weak_general``: ``sum_x xi(x) alpha(E_Pi[T_{rho,0}(chi, xi(x) delta_x)] / xi(x))``.
    """

    kind: str
    alpha: Optional[AlphaFamily] = None
    rho: object = None
    space: Optional[GroundSpace] = None

    def __post_init__(self):
        if self.kind not in ("linear", "weak_hamming", "weak_general"):
            raise ValueError(f"unknown lifted cost {self.kind!r}")
        if self.kind == "linear" and self.rho is None:
            raise ValueError("linear lift needs a ground cost")
        if self.kind != "linear":
            if self.alpha is None or not self.alpha.check_convex():
                raise ValueError("weak lifts need a convex alpha")
        if self.kind == "weak_general" and self.rho is None:
            raise ValueError("weak_general needs a ground cost")

    @classmethod
    def linear(cls, rho, space=None) -> "LiftedCostSpec":
        return cls("linear", rho=rho, space=space)

    @classmethod
    def weak_hamming(cls, alpha: AlphaFamily) -> "LiftedCostSpec":
        return cls("weak_hamming", alpha=alpha)

    @classmethod
    def weak_general(cls, alpha: AlphaFamily, rho, space=None) -> "LiftedCostSpec":
        return cls("weak_general", alpha=alpha, rho=rho, space=space)

    @classmethod
    def marton(cls) -> "LiftedCostSpec":
        """The process Marton cost: ``weak_hamming`` with ``alpha(u) = u^2``."""
        return cls.weak_hamming(AlphaFamily.square())

    def ground_matrix(self, k: int) -> np.ndarray:
        return _ground_matrix(self.rho, k, self.space)


def _check_pair(Pi1: ProcessLaw, Pi2: ProcessLaw):
    if Pi1.index != Pi2.index:
        raise ValueError("laws live on different enumerations")


def lifted_linear_cost(rho, Pi1: ProcessLaw, Pi2: ProcessLaw, space: Optional[GroundSpace] = None,
                       mass_tol: float = 1e-12):
    """``inf E[T_rho(xi1, xi2)]`` over couplings of two process laws.

    Cells pairing different masses cost ``inf`` and are removed from the
    LP, so differing mass laws give ``(inf, empty coupling)``.
    """
    _check_pair(Pi1, Pi2)
    if np.max(np.abs(mass_law(Pi1).weights - mass_law(Pi2).weights)) > mass_tol:
        return INF, Coupling.empty()
    idx = Pi1.index
    S1, S2 = Pi1.support(), Pi2.support()
    G = _ground_matrix(rho, idx.k, space)
    C = np.full((S1.size, S2.size), INF)
    for a, i in enumerate(S1):
        for b, j in enumerate(S2):
            if idx.masses[i] == idx.masses[j]:
                C[a, b] = assignment_cost(G, idx[i], idx[j], lexicographic=False)[0]
    # masses agree to mass_tol; match them exactly on each slice before solving
    value = 0.0
    plan = np.zeros((S1.size, S2.size))
    for n in np.unique(idx.masses[S1]):
        r = np.flatnonzero(idx.masses[S1] == n)
        c = np.flatnonzero(idx.masses[S2] == n)
        a = Pi1.probs[S1[r]]
        b = Pi2.probs[S2[c]] * (a.sum() / Pi2.probs[S2[c]].sum())
        v, cp = ot_lp(C[np.ix_(r, c)], a, b)
        value += v
        plan[np.ix_(r, c)] = cp.matrix
    return float(value), Coupling(plan, tuple(int(i) for i in S1), tuple(int(j) for j in S2))


def weak_terms(spec: LiftedCostSpec, Pi1: ProcessLaw, Pi2: ProcessLaw):
    """Convex terms ``(weight, coefficient row)`` of the lifted weak program.

    One term per ``(xi, x)`` with ``xi`` in the support of ``Pi1`` and
    ``xi(x) > 0``; the coefficient row runs over the support of ``Pi2``.
    """
    idx = Pi1.index
    S1, S2 = Pi1.support(), Pi2.support()
    G = spec.ground_matrix(idx.k) if spec.kind == "weak_general" else None
    weights, coefs = [], []
    for a, i in enumerate(S1):
        xi = idx.counts[i]
        for x in np.flatnonzero(xi):
            m = xi[x]
            if spec.kind == "weak_hamming":
                row = np.clip(1.0 - idx.counts[S2, x] / m, 0.0, None)
            else:
                row = np.array([partial_cost_to_atom(G, idx[j], x, m) for j in S2]) / m
            block = np.zeros((S1.size, S2.size))
            block[a] = row
            weights.append(Pi1.probs[i] * m)
            coefs.append(block)
    return np.array(weights), np.array(coefs).reshape(len(weights), S1.size, S2.size)


def lifted_weak_cost(spec: LiftedCostSpec, Pi1: ProcessLaw, Pi2: ProcessLaw, tol: float = 1e-7,
                     max_iter: int = 300):
    """``T_c(Pi2 | Pi1)``: kernels ``p_xi`` on the support of ``Pi1`` pushing ``Pi1`` onto ``Pi2``.

    Returns ``(value, WeakKernel)`` indexed by configuration indices.

    Raises
    ------
    SolverError
        On non-convergence, carrying the best value and residuals.
    """
    if spec.kind == "linear":
        raise ValueError("use lifted_linear_cost for the linear lift")
    _check_pair(Pi1, Pi2)
    S1, S2 = Pi1.support(), Pi2.support()
    w, coef = weak_terms(spec, Pi1, Pi2)
    src, tgt = Pi1.probs[S1], Pi2.probs[S2]
    if w.size == 0:
        rows = np.tile(tgt, (S1.size, 1))
        return 0.0, WeakKernel(rows, tuple(S1), tuple(S2), src)
    res = solve_weak_kernel(spec.alpha, None, src, tgt, tol=tol, max_iter=max_iter,
                            term_weights=w, term_coef=coef)
    if not res.feasible:
        return INF, None
    rows = res.x.reshape(S1.size, S2.size)
    return res.value, WeakKernel(rows, tuple(int(i) for i in S1), tuple(int(j) for j in S2), src,
                                 residual=res.residual, gap=res.gap)


def weak_cost_of_kernel(spec: LiftedCostSpec, Pi1: ProcessLaw, Pi2: ProcessLaw, rows: np.ndarray) -> float:
    """Objective ``sum_xi Pi1(xi) c(xi, p_xi)`` of a given kernel (rows over the supports)."""
    w, coef = weak_terms(spec, Pi1, Pi2)
    if w.size == 0:
        return 0.0
    s = np.einsum("tij,ij->t", coef, np.asarray(rows, dtype=float))
    return float(np.sum(w * np.asarray(spec.alpha(np.clip(s, 0.0, None)))))


def config_cost(spec: LiftedCostSpec, xi, Pi_weights, configs, k: Optional[int] = None) -> float:
    """``c(xi, Pi)`` for a configuration and a finitely supported law given by (weights, configs)."""
    counts = np.array([c.counts for c in configs], dtype=float)
    w = np.asarray(Pi_weights, dtype=float)
    G = spec.ground_matrix(xi.k) if spec.kind == "weak_general" else None
    total = 0.0
    for x in xi.support():
        m = xi[x]
        if spec.kind == "weak_hamming":
            vals = np.clip(1.0 - counts[:, x] / m, 0.0, None)
        else:
            vals = np.array([partial_cost_to_atom(G, c, x, m) for c in configs]) / m
        total += m * float(spec.alpha(max(float(w @ vals), 0.0)))
    return total
