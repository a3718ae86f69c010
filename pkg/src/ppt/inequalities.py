"""Verifiers for transport-entropy inequalities on base spaces and on process laws."""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ._solver import SolverError
from .ground import INF, AlphaFamily, CostFunction, GroundSpace, mul_ext
from .lifted import LiftedCostSpec, lifted_linear_cost, lifted_weak_cost
from .measures import relative_entropy
from .processes import ProcessLaw, binomial_law, entropy_wrt, mass_law, mixed_binomial_law
from .transport import _ground_matrix, ot_lp, solve_weak_kernel, weak_transport

EXACT_TOL = 1e-6
SOLVER_TOL = 1e-4


@dataclass
class VerificationReport:
    """Outcome of one inequality check ``lhs <= rhs``.

    ``violated`` is true exactly when ``margin = rhs - lhs < -tolerance``.
    """

    name: str
    lhs: float
    rhs: float
    tolerance: float
    diagnostics: dict = field(default_factory=dict)
    margin: float = field(init=False)
    violated: bool = field(init=False)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        if np.isinf(self.rhs) and self.rhs > 0:
            self.margin = INF
        elif np.isinf(self.lhs) and self.diagnostics.get("vacuous"):
            self.margin = INF
        else:
            self.margin = self.rhs - self.lhs
        self.violated = bool(self.margin < -self.tolerance)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["diagnostics"] = _jsonable(d["diagnostics"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def row(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
                "tolerance": self.tolerance, "violated": self.violated}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


@dataclass(frozen=True)
class BaseCertificate:
    """Constants ``(a1, a2)`` for which a base measure is claimed to satisfy an inequality.

    ``provenance`` is ``known_closed_form``, ``universal`` or ``estimated``;
    only the first two are proofs.
    """

    a1: float
    a2: float
    rho: object = None
    alpha: Optional[AlphaFamily] = None
    provenance: str = "universal"
    samples: int = 0

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise ValueError("certificate constants must be positive")
        if self.provenance not in ("known_closed_form", "universal", "estimated"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @classmethod
    def dembo(cls, t: float) -> "BaseCertificate":
        """Universal constants ``(1/t, 1/(1-t))`` for ``alpha_t`` and the Hamming cost."""
        if not 0 < t < 1:
            raise ValueError("t must lie in (0, 1)")
        return cls(1.0 / t, 1.0 / (1.0 - t), CostFunction.hamming(), AlphaFamily.dembo(t), "universal")

    @classmethod
    def hamming_domination(cls, rho_matrix) -> "BaseCertificate":
        """``alpha(u) = u^2`` with a bounded cost: ``rho <= D 1_{x != y}`` gives ``a = 4 D^2``."""
        D = float(np.max(rho_matrix))
        return cls(4 * D * D, 4 * D * D, np.asarray(rho_matrix), AlphaFamily.square(), "known_closed_form")

    @property
    def certified(self) -> bool:
        return self.provenance != "estimated"

    def rhs(self, h1: float, h2: float) -> float:
        return float(mul_ext(self.a1, h1) + mul_ext(self.a2, h2))


def _probs(Pi):
    return Pi.probs if isinstance(Pi, ProcessLaw) else np.asarray(Pi, dtype=float)


def _as_law(Pi, like: ProcessLaw) -> ProcessLaw:
    return Pi if isinstance(Pi, ProcessLaw) else like.with_probs(Pi)


# ---------------------------------------------------------------------------
# Base space


def verify_base_dembo(gamma, nu1, nu2, t: float, tol: float = EXACT_TOL) -> VerificationReport:
    """``T~_{alpha_t, d_H}(nu2 | nu1) <= H(nu1|gamma)/t + H(nu2|gamma)/(1-t)``."""
    cert = BaseCertificate.dembo(t)
    k = len(np.asarray(gamma.weights if hasattr(gamma, "weights") else gamma))
    rho = 1.0 - np.eye(k)

    def solve(stol):
        return weak_transport(cert.alpha, rho, nu1, nu2, tol=stol)

    lhs, kern = solve(1e-9)
    h1, h2 = relative_entropy(nu1, gamma), relative_entropy(nu2, gamma)
    slack = kern.gap + kern.residual
    rep = VerificationReport(f"dembo(t={t:g})", lhs, cert.rhs(h1, h2), tol + slack,
                             {"H1": h1, "H2": h2, "gap": kern.gap, "residual": kern.residual})
    return _recheck(rep, lambda: solve(1e-11)[0])


def _recheck(rep: VerificationReport, resolve) -> VerificationReport:
    """Re-solve the lhs at a tighter tolerance before trusting a violation."""
    if rep.violated:
        try:
            lhs = resolve()
        except SolverError as err:
            rep.diagnostics["recheck_error"] = str(err)
            return rep
        rep.diagnostics["recheck_lhs"] = lhs
        rep = VerificationReport(rep.name, lhs, rep.rhs, rep.tolerance, rep.diagnostics)
    return rep


# ---------------------------------------------------------------------------
# Process level


def verify_marton_process(law: ProcessLaw, Pi1, Pi2, t: float, tol: float = SOLVER_TOL) -> VerificationReport:
    """``T_{c_t}(Pi2 | Pi1) <= H(Pi1|law)/t + H(Pi2|law)/(1-t)`` for a binomial or Poisson reference."""
    P1, P2 = _as_law(Pi1, law), _as_law(Pi2, law)
    h1, h2 = entropy_wrt(P1, law), entropy_wrt(P2, law)
    cert = BaseCertificate.dembo(t)
    rhs = cert.rhs(h1, h2)
    spec = LiftedCostSpec.weak_hamming(cert.alpha)
    diag = {"H1": h1, "H2": h2, "tail_bound": law.tail_bound, "law": law.name}
    if not np.isfinite(rhs):
        diag["skipped_lhs"] = "rhs infinite"
        return VerificationReport(f"marton_process(t={t:g})", 0.0, rhs, tol, diag)
    lhs, kern = lifted_weak_cost(spec, P1, P2, tol=1e-8)
    diag.update(gap=kern.gap, residual=kern.residual)
    rep = VerificationReport(f"marton_process(t={t:g})", lhs, rhs, tol + kern.gap + kern.residual, diag)
    return _recheck(rep, lambda: lifted_weak_cost(spec, P1, P2, tol=1e-10)[0])


def verify_general_marton_process(cert: BaseCertificate, mu, n: int, Pi1, Pi2,
                                  space: Optional[GroundSpace] = None, tol: float = SOLVER_TOL) -> VerificationReport:
    """``T_c(Pi2|Pi1) <= a1 H(Pi1|B_{mu,n}) + a2 H(Pi2|B_{mu,n})`` with the partial-transport cost."""
    like = Pi1 if isinstance(Pi1, ProcessLaw) else Pi2
    B = binomial_law(mu, n, like.index)
    P1, P2 = _as_law(Pi1, B), _as_law(Pi2, B)
    h1, h2 = entropy_wrt(P1, B), entropy_wrt(P2, B)
    diag = {"H1": h1, "H2": h2, "provenance": cert.provenance}
    if not cert.certified:
        diag["warning"] = "base certificate is estimated, not proved"
    rhs = cert.rhs(h1, h2)
    spec = LiftedCostSpec.weak_general(cert.alpha, cert.rho, space)
    if not np.isfinite(rhs):
        return VerificationReport("general_marton_process", 0.0, rhs, tol, diag)
    lhs, kern = lifted_weak_cost(spec, P1, P2, tol=1e-8)
    if kern is None:
        return VerificationReport("general_marton_process", INF, rhs, tol, diag)
    diag.update(gap=kern.gap, residual=kern.residual)
    rep = VerificationReport("general_marton_process", lhs, rhs, tol + kern.gap + kern.residual, diag)
    return _recheck(rep, lambda: lifted_weak_cost(spec, P1, P2, tol=1e-10)[0])


def verify_talagrand_process(cert: BaseCertificate, mu, kappa, Pi1, Pi2, space: Optional[GroundSpace] = None,
                             tol: float = EXACT_TOL) -> VerificationReport:
    """``T_rho(Pi1,Pi2) + (a1+a2) H(lambda|kappa) <= a1 H(Pi1|B) + a2 H(Pi2|B)``.

    Instances with different mass laws have ``T_rho = inf``; they fall
    outside the hypothesis and are reported as vacuous.
    """
    like = Pi1 if isinstance(Pi1, ProcessLaw) else Pi2
    B = mixed_binomial_law(mu, kappa, like.index)
    P1, P2 = _as_law(Pi1, B), _as_law(Pi2, B)
    h1, h2 = entropy_wrt(P1, B), entropy_wrt(P2, B)
    kap = mass_law(B).weights
    lam = mass_law(P1).weights
    h_mass = relative_entropy(lam, kap)
    T, _ = lifted_linear_cost(cert.rho, P1, P2, space)
    diag = {"H1": h1, "H2": h2, "H_mass": h_mass, "transport": T, "provenance": cert.provenance}
    if not cert.certified:
        diag["warning"] = "base certificate is estimated, not proved"
    if np.isinf(T):
        diag["vacuous"] = True
    lhs = T + float(mul_ext(cert.a1 + cert.a2, h_mass))
    return VerificationReport("talagrand_process", lhs, cert.rhs(h1, h2), tol, diag)


def gaussian_talagrand_experiment(m_grid: Sequence[int], n_grid: Sequence[int], a=2) -> list:
    """Closed-form lift of the Gaussian inequality to binomial processes ``B_{N(m,1), n}``.

    The shift coupling gives ``T_{d^2} <= n (m1 - m2)^2`` and
    ``H(B_{N(m,1),n} | B_{N(0,1),n}) = n m^2 / 2``; the mass laws agree so
    the mass term vanishes.  Arithmetic is exact (``Fraction``).
    """
    a = Fraction(a)
    out = []
    for n in n_grid:
        for m1 in m_grid:
            for m2 in m_grid:
                lhs = Fraction(n * (m1 - m2) ** 2)
                rhs = a * Fraction(n * m1 * m1, 2) + a * Fraction(n * m2 * m2, 2)
                rep = VerificationReport(f"gaussian(n={n},m1={m1},m2={m2},a={a})", float(lhs), float(rhs), 0.0,
                                         {"exact_margin": str(rhs - lhs), "a": str(a)})
                out.append(rep)
    return out


# ---------------------------------------------------------------------------
# Constants and tensorization


def _random_density(gamma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A random probability absolutely continuous w.r.t. ``gamma``, from far to very close."""
    on = gamma > 0
    mode = rng.integers(3)
    if mode == 0:
        f = rng.dirichlet(np.ones(on.sum()) * rng.choice([0.3, 1.0, 3.0]))
        out = np.zeros_like(gamma)
        out[on] = f
        return out
    g = rng.standard_normal(gamma.size) * on
    eps = 10.0 ** rng.uniform(-3, 0) if mode == 1 else 1.0
    out = gamma * np.exp(eps * g)
    return out / out.sum()


def estimate_base_constant(gamma, cost, samples: int, seed: int = 0, pairs=None):
    """Empirical lower bound on the best symmetric constant ``a`` in ``T <= a (H1 + H2)``.

    ``cost`` is ``("linear", rho)`` or ``("weak", alpha, rho)``; the
    transport is ``T(nu2 | nu1)``.  Returns ``(estimate, worst_pair)``.
    """
    g = np.asarray(gamma.weights if hasattr(gamma, "weights") else gamma, dtype=float)
    k = g.size
    rng = np.random.default_rng(seed)
    rho = _ground_matrix(cost[-1], k) if not isinstance(cost[-1], np.ndarray) else np.asarray(cost[-1])
    if pairs is None:
        pairs = [(_random_density(g, rng), _random_density(g, rng)) for _ in range(samples)]
    best, worst = 0.0, None
    for nu1, nu2 in pairs:
        h = relative_entropy(nu1, g) + relative_entropy(nu2, g)
        if cost[0] == "linear":
            T, _ = ot_lp(rho, nu1, nu2)
        else:
            T, _ = weak_transport(cost[1], rho, nu1, nu2, tol=1e-9)
        if h <= 1e-300:
            continue
        r = T / h
        if r > best:
            best, worst = r, (np.asarray(nu1), np.asarray(nu2))
    return float(best), worst


def estimated_certificate(gamma, alpha: Optional[AlphaFamily], rho, samples: int = 200, seed: int = 0,
                          inflation: float = 1.1) -> BaseCertificate:
    """Certificate from :func:`estimate_base_constant`, inflated by ``inflation``."""
    cost = ("linear", rho) if alpha is None else ("weak", alpha, rho)
    est, _ = estimate_base_constant(gamma, cost, samples, seed)
    a = max(est * inflation, 1e-12)
    return BaseCertificate(a, a, rho, alpha, "estimated", samples)


def product_weak_cost(alpha: AlphaFamily, gamma_sizes, nu1, nu2, kernel=None, tol: float = 1e-9):
    """Weak cost with ``c(x, p) = sum_i alpha(P_{p}(Y_i != x_i))`` on a 2-fold product.

    Points of the product are flattened as ``x = x1 * k2 + x2``.  With a
    kernel given, returns its objective instead of the optimum.
    """
    k1, k2 = gamma_sizes
    a, b = np.asarray(nu1, dtype=float).ravel(), np.asarray(nu2, dtype=float).ravel()
    I, J = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    ns, nt = I.size, J.size
    coords_i = np.array([divmod(i, k2) for i in I])
    coords_j = np.array([divmod(j, k2) for j in J])
    weights, coefs = [], []
    for r in range(ns):
        for f in range(2):
            block = np.zeros((ns, nt))
            block[r] = (coords_j[:, f] != coords_i[r, f]).astype(float)
            weights.append(a[I[r]])
            coefs.append(block)
    w, C = np.array(weights), np.array(coefs)
    if kernel is not None:
        s = np.einsum("tij,ij->t", C, kernel)
        return float(np.sum(w * np.asarray(alpha(s)))), None
    res = solve_weak_kernel(alpha, None, a[I], b[J], tol=tol, term_weights=w, term_coef=C)
    return res.value, res


def verify_tensorization(certs: Sequence[BaseCertificate], gammas, nu1, nu2,
                         tol: float = SOLVER_TOL) -> VerificationReport:
    """Check the product inequality for ``gamma1 x gamma2`` with the summed weak Hamming cost."""
    if len(certs) != 2 or len(gammas) != 2:
        raise ValueError("tensorization is checked on 2-fold products")
    if certs[0].alpha != certs[1].alpha or (certs[0].a1, certs[0].a2) != (certs[1].a1, certs[1].a2):
        raise ValueError("factors must share alpha and constants")
    g1, g2 = (np.asarray(g, dtype=float) for g in gammas)
    gamma = np.outer(g1, g2).ravel()
    alpha = certs[0].alpha
    lhs, res = product_weak_cost(alpha, (g1.size, g2.size), nu1, nu2)
    a, b = np.asarray(nu1).ravel(), np.asarray(nu2).ravel()
    I, J = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    indep = np.tile(b[J], (I.size, 1))
    upper, _ = product_weak_cost(alpha, (g1.size, g2.size), nu1, nu2, kernel=indep)
    h1, h2 = relative_entropy(a, gamma), relative_entropy(b, gamma)
    diag = {"H1": h1, "H2": h2, "independent_upper": upper, "gap": res.gap, "residual": res.residual}
    return VerificationReport("tensorization", lhs, certs[0].rhs(h1, h2), tol + res.gap + res.residual, diag)
