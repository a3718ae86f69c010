"""Talagrand convex distances, two-set concentration and U-statistic deviation experiments."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import cvxpy as cp
import numpy as np
from scipy import stats

from ._solver import SolverError, minimize_composite
from .config import Configuration
from .ground import AlphaFamily
from .processes import ProcessLaw, sample_poisson_euclidean


@dataclass
class TargetSet:
    """A finite set ``A`` of configurations, optionally with a membership predicate.

    In Euclidean mode the predicate defines ``A`` and ``members`` is a
    finite witness list used by the convex-distance programs.
    """

    members: tuple
    predicate: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        self.members = tuple(self.members)
        if not self.members:
            raise ValueError("target set must be nonempty")
        kinds = {type(m) for m in self.members}
        if len(kinds) != 1:
            raise ValueError("members must share one configuration type")
        if isinstance(self.members[0], Configuration) and len({m.k for m in self.members}) != 1:
            raise ValueError("members must share the ground space")
        if self.predicate is None:
            self._set = set(self.members)

    def __contains__(self, xi) -> bool:
        if self.predicate is not None:
            return bool(self.predicate(xi))
        return xi in self._set

    def __len__(self) -> int:
        return len(self.members)

    @classmethod
    def mass_sublevel(cls, index, level: int) -> "TargetSet":
        """``{xi : xi(Z) <= level}`` inside an enumeration."""
        return cls(tuple(c for c in index.configs if c.mass <= level))


def _deficits(xi, A: TargetSet):
    """Support of ``xi``, its weights and ``[1 - chi(x)/xi(x)]_+`` for each member."""
    pts = xi.support()
    m = np.array([xi[x] for x in pts], dtype=float)
    M = np.array([[max(1.0 - chi[x] / xi[x], 0.0) for chi in A.members] for x in pts], dtype=float)
    return pts, m, M.reshape(len(pts), len(A))


def convex_distance_cA(xi, A: TargetSet, alpha: Optional[AlphaFamily] = None, tol: float = 1e-9):
    """``c_A(xi) = min_w sum_x xi(x) alpha(sum_chi w_chi [1 - chi(x)/xi(x)]_+)`` over the simplex on ``A``.

    Returns ``(value, weights)``.  The value is the objective at a feasible
    ``w`` and therefore an upper bound on ``c_A`` within the certified gap.
    """
    alpha = AlphaFamily.half_square() if alpha is None else alpha
    if xi in A:
        w = np.zeros(len(A))
        w[A.members.index(xi) if A.predicate is None else 0] = 1.0
        if A.predicate is None:
            return 0.0, w
    pts, m, M = _deficits(xi, A)
    if m.size == 0:
        w = np.zeros(len(A))
        w[0] = 1.0
        return 0.0, w
    res = minimize_composite(np.zeros(len(A)), M, m, alpha, np.ones((1, len(A))), np.ones(1), tol=tol)
    return res.value, res.x


def _dA_socp(m: np.ndarray, M: np.ndarray) -> float:
    """``sup_{g >= 0, sum m g^2 <= 1} min_chi sum_x g(x) m(x) M[x, chi]`` as a second-order cone program."""
    g = cp.Variable(m.size, nonneg=True)
    tau = cp.Variable()
    gains = (M * m[:, None]).T @ g
    prob = cp.Problem(cp.Maximize(tau), [tau <= gains, cp.sum(cp.multiply(m, cp.square(g))) <= 1])
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise SolverError(f"d_A cone program: {prob.status}")
    return max(float(prob.value), 0.0)


def convex_distance_dA(xi, A: TargetSet, rtol: float = 1e-3, atol: float = 1e-6) -> float:
    """``d_A(xi)`` as ``sqrt(2 c_A)`` with ``alpha = u^2/2``, cross-checked by the direct sup-inf.

    Raises
    ------
    SolverError
        If the two computations disagree beyond ``rtol`` (relative) plus ``atol``.
    """
    if A.predicate is None and xi in A:
        return 0.0
    c, _ = convex_distance_cA(xi, A, AlphaFamily.half_square())
    d1 = float(np.sqrt(2.0 * c))
    pts, m, M = _deficits(xi, A)
    if m.size == 0:
        return 0.0
    d2 = _dA_socp(m, M)
    if abs(d1 - d2) > rtol * max(d1, d2) + atol:
        raise SolverError(f"d_A routes disagree: {d1:.8g} vs {d2:.8g}", d1, abs(d1 - d2))
    return d1


def convex_distance_dA_direct(xi, A: TargetSet) -> float:
    """The direct sup-inf route alone."""
    pts, m, M = _deficits(xi, A)
    return 0.0 if m.size == 0 else _dA_socp(m, M)


# ---------------------------------------------------------------------------
# Two-set experiment


@dataclass
class TwoSetRow:
    r: float
    p_A: float
    p_not_Ar: float
    cor_lhs: float
    cor_bound: float
    p_not_Ard: float
    thm_lhs: float
    thm_bound: float

    @property
    def violated(self) -> bool:
        return self.cor_lhs > self.cor_bound * (1 + 1e-12) or self.thm_lhs > self.thm_bound * (1 + 1e-12)


def two_set_experiment(law: ProcessLaw, A: TargetSet, t: float, r_grid: Sequence[float]):
    """Exact two-set bounds on an enumerated law.

    ``P(A)^{1/t} P(not A_r)^{1/(1-t)} <= e^{-r}`` (enlargement by ``c_A``
    with ``alpha_t``) and ``P(A) P(not A_r^d) <= e^{-r^2/4}``.  Untruncated
    probabilities are used; the truncation tail is counted outside every
    enlargement, and a configuration is placed inside an enlargement only
    when the computed (upper-bound) distance certifies it.

    Returns ``(rows, distances)`` where ``distances`` has columns ``c_A``, ``d_A``.
    """
    raw = law.params.get("raw", law.probs * law.mass_covered)
    tail = law.tail_bound
    alpha = AlphaFamily.dembo(t)
    cA = np.zeros(len(law.index))
    dA = np.zeros(len(law.index))
    inA = np.zeros(len(law.index), dtype=bool)
    for i, xi in enumerate(law.index.configs):
        inA[i] = xi in A
        if inA[i]:
            continue
        cA[i] = convex_distance_cA(xi, A, alpha)[0]
        dA[i] = convex_distance_dA(xi, A)
    pA = float(raw[inA].sum())
    rows = []
    for r in r_grid:
        out = float(raw[cA > r].sum()) + tail
        outd = float(raw[dA > r].sum()) + tail
        rows.append(TwoSetRow(float(r), pA, out, pA ** (1 / t) * out ** (1 / (1 - t)), float(np.exp(-r)),
                              outd, pA * outd, float(np.exp(-r * r / 4))))
    return rows, np.column_stack([cA, dA])


# ---------------------------------------------------------------------------
# U-statistic deviation experiment


def edge_kernel(radius: float) -> Callable:
    """Pair kernel ``1_{|x-y| <= radius}`` acting on squared distances."""
    r2 = radius * radius
    return lambda sq: (sq <= r2).astype(float)


def pair_statistic(X: np.ndarray, kernel: Callable):
    """``F = sum_{i != j} h(x_i, x_j)`` and ``D^-_{x_i} F = 2 sum_{j != i} h(x_i, x_j)``."""
    if X.shape[0] < 2:
        return 0.0, np.zeros(X.shape[0])
    sq = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
    H = kernel(sq)
    np.fill_diagonal(H, 0.0)
    rows = H.sum(axis=1)
    return float(rows.sum()), 2.0 * rows


def br_bounds(r, m, delta: float, beta: float):
    """Upper and lower tail bounds; the exponent on ``r + m`` and ``m`` is ``beta``."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        up = 2 * np.exp(-r ** 2 / (4 * delta * np.power(r + m, beta)))
        lo = 2 * np.exp(-r ** 2 / (4 * delta * np.power(m, beta)))
    up = np.where(np.isnan(up), 2.0, up)
    lo = np.where(np.isnan(lo), 2.0, lo)
    return np.minimum(up, 2.0), np.minimum(lo, 2.0)


def clopper_pearson(k: int, n: int, level: float = 0.95):
    a = 1 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def median_ci(values: np.ndarray, level: float = 0.95):
    """Distribution-free CI for the median from order statistics."""
    v = np.sort(values)
    n = v.size
    lo_k = int(stats.binom.ppf((1 - level) / 2, n, 0.5))
    hi_k = int(stats.binom.isf((1 - level) / 2, n, 0.5))
    return float(v[max(lo_k - 1, 0)]), float(v[min(hi_k, n - 1)])


@dataclass
class BRReport:
    n_samples: int
    delta: float
    beta: float
    hypothesis_holds: bool
    condition_violations: int
    max_condition_ratio: float
    median: float
    median_ci: tuple
    rows: list
    violated: bool
    notes: list = field(default_factory=list)


def br_experiment(kernel: Callable, intensity: float, box, delta: float, beta: float, n_samples: int,
                  seed: int, r_grid: Sequence[float] = (5, 10, 20), q: int = 2, level: float = 0.95) -> BRReport:
    """Monte Carlo check of the U-statistic deviation bounds for a homogeneous Poisson process.

    Each sample checks ``sum_x (D^-_x F)^2 <= delta F^beta``.  A bound is
    flagged only when the Clopper-Pearson lower limit of the empirical tail
    exceeds the largest bound over the median's confidence interval.
    """
    if not 0 <= beta < 2:
        raise ValueError("beta must lie in [0, 2)")
    if q != 2:
        raise NotImplementedError("only pair statistics are vectorised")
    F = np.zeros(n_samples)
    worst, bad = 0.0, 0
    for i in range(n_samples):
        X = sample_poisson_euclidean(intensity, box, seed, i)
        F[i], D = pair_statistic(X, kernel)
        lhs = float(np.sum(D ** 2))
        rhs = delta * F[i] ** beta if F[i] > 0 else (delta if beta == 0 else 0.0)
        if lhs > rhs * (1 + 1e-12) + 1e-12:
            bad += 1
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    m = float(np.median(F))
    m_lo, m_hi = median_ci(F, level)
    rows = []
    violated = False
    for r in r_grid:
        up_hat = int(np.sum(F >= m + r))
        lo_hat = int(np.sum(F < m - r))
        # smallest event probability over the median CI, largest bound over it
        up_cons = int(np.sum(F >= m_hi + r))
        lo_cons = int(np.sum(F < m_lo - r))
        b_up = max(br_bounds(r, mm, delta, beta)[0] for mm in (m_lo, m_hi))
        b_lo = max(br_bounds(r, mm, delta, beta)[1] for mm in (m_lo, m_hi))
        cons_up = clopper_pearson(up_cons, n_samples, level)[0]
        cons_lo = clopper_pearson(lo_cons, n_samples, level)[0]
        ci_up = clopper_pearson(up_hat, n_samples, level)
        ci_lo = clopper_pearson(lo_hat, n_samples, level)
        v = bad == 0 and (cons_up > b_up or cons_lo > b_lo)
        violated |= v
        rows.append({"r": float(r), "upper_empirical": up_hat / n_samples, "upper_bound": float(b_up),
                     "upper_ci_low": ci_up[0], "upper_ci_high": ci_up[1], "upper_decision_low": cons_up,
                     "lower_empirical": lo_hat / n_samples, "lower_bound": float(b_lo),
                     "lower_ci_low": ci_lo[0], "lower_ci_high": ci_lo[1], "lower_decision_low": cons_lo,
                     "violated": bool(v)})
    notes = ["bound exponent uses beta"]
    if bad:
        notes.append("hypothesis failed: bounds not asserted")
    return BRReport(n_samples, delta, beta, bad == 0, bad, worst, m, (m_lo, m_hi), rows, violated, notes)
