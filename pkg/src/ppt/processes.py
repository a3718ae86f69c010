"""Exact (enumerated) and sampled laws of mixed binomial and Poisson processes."""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .config import Configuration
from .ground import INF
from .measures import DiscreteMeasure, relative_entropy, tv_distance

DEFAULT_TAIL = 1e-10


class ConfigurationSpaceIndex:
    """All count vectors on ``k`` points with total mass at most ``N``.

    Ordering is by mass, then reverse lexicographic inside a mass slice,
    so ``(n, 0, ..., 0)`` comes first.  The order is part of the CSV
    contract and never changes.
    """

    def __init__(self, k: int, N: int):
        if k < 1 or N < 0:
            raise ValueError("need k >= 1 and N >= 0")
        self.k = int(k)
        self.N = int(N)
        configs = []
        for n in range(self.N + 1):
            configs.extend(Configuration(c) for c in _compositions(n, self.k))
        self.configs = tuple(configs)
        self._pos = {c: i for i, c in enumerate(self.configs)}
        self.counts = np.array([c.counts for c in self.configs], dtype=int).reshape(len(configs), self.k)
        self.masses = self.counts.sum(axis=1)

    def __len__(self) -> int:
        return len(self.configs)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfigurationSpaceIndex) and (self.k, self.N) == (other.k, other.N)

    def __hash__(self):
        return hash((self.k, self.N))

    def __repr__(self):
        return f"ConfigurationSpaceIndex(k={self.k}, N={self.N})"

    def __getitem__(self, i: int) -> Configuration:
        return self.configs[i]

    def index_of(self, xi) -> int:
        if not isinstance(xi, Configuration):
            xi = Configuration(tuple(xi))
        try:
            return self._pos[xi]
        except KeyError:
            raise KeyError(f"{xi.counts} is outside the enumeration") from None

    def __contains__(self, xi) -> bool:
        return xi in self._pos

    def slice(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.masses == n)

    @staticmethod
    def expected_size(k: int, N: int) -> int:
        return sum(comb(n + k - 1, k - 1) for n in range(N + 1))


def _compositions(n: int, k: int):
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


@dataclass
class ProcessLaw:
    """Probability vector over an enumerated configuration space.

    ``tail_bound`` is the mass of the untruncated law beyond the mass cap
    (zero for exact laws); ``probs`` is renormalized on the enumeration.
    """

    index: ConfigurationSpaceIndex
    probs: np.ndarray
    tail_bound: float = 0.0
    name: str = ""
    params: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (len(self.index),):
            raise ValueError("probability vector does not match the index")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12 * max(1, p.size):
            raise ValueError(f"not a probability vector (sum={p.sum():.17g})")
        self.probs = p

    @property
    def kind(self) -> str:
        return "truncated" if self.tail_bound > 0 else "exact"

    @property
    def mass_covered(self) -> float:
        return 1.0 - self.tail_bound

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)

    def prob(self, xi) -> float:
        return float(self.probs[self.index.index_of(xi)])

    def as_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.probs, True)

    def expect(self, values) -> float:
        return float(self.probs @ np.asarray(values, dtype=float))

    def with_probs(self, probs, name: str = "") -> "ProcessLaw":
        return ProcessLaw(self.index, np.asarray(probs, dtype=float), 0.0, name)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "configuration", "probability"])
            for i, (c, p) in enumerate(zip(self.index.configs, self.probs)):
                w.writerow([i, " ".join(map(str, c.counts)), repr(float(p))])


def entropy_wrt(Pi, law: ProcessLaw) -> float:
    """``H(Pi | law)`` against the untruncated law.

    For a truncated reference with covered mass ``1 - tail``, the raw
    probabilities are ``(1 - tail) * law.probs`` on the enumeration, so the
    exact entropy is the truncated one minus ``log(1 - tail)``.
    """
    p = Pi.probs if isinstance(Pi, ProcessLaw) else np.asarray(Pi, dtype=float)
    h = relative_entropy(p, law.probs)
    if law.tail_bound > 0 and np.isfinite(h):
        h -= np.log1p(-law.tail_bound)
    return h


# ---------------------------------------------------------------------------
# Constructors


def _log_multinomial(counts: np.ndarray, mu: np.ndarray) -> np.ndarray:
    n = counts.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmu = np.log(mu)
        terms = np.where(counts > 0, counts * logmu[None, :], 0.0)
    return gammaln(n + 1) - gammaln(counts + 1).sum(axis=1) + terms.sum(axis=1)


def _weights(m) -> np.ndarray:
    return m.weights if isinstance(m, DiscreteMeasure) else np.asarray(m, dtype=float).ravel()


def mixed_binomial_law(mu, kappa, index: Optional[ConfigurationSpaceIndex] = None) -> ProcessLaw:
    """Exact law ``B_{mu,kappa}``: ``kappa(|xi|)`` times a multinomial weight."""
    mu_w, kap = _weights(mu), _weights(kappa)
    if abs(mu_w.sum() - 1) > 1e-12 or abs(kap.sum() - 1) > 1e-12:
        raise ValueError("mu and kappa must be probability vectors")
    if index is None:
        index = ConfigurationSpaceIndex(mu_w.size, kap.size - 1)
    if index.k != mu_w.size:
        raise ValueError("mu does not match the index")
    if kap.size > index.N + 1:
        if np.any(kap[index.N + 1:] > 0):
            raise ValueError("kappa charges masses beyond the index cap")
        kap = kap[: index.N + 1]
    kap_full = np.zeros(index.N + 1)
    kap_full[: kap.size] = kap
    with np.errstate(divide="ignore"):
        logp = _log_multinomial(index.counts, mu_w) + np.log(kap_full[index.masses])
    p = np.exp(logp)
    p /= p.sum()
    return ProcessLaw(index, p, 0.0, "mixed_binomial", {"mu": mu_w, "kappa": kap_full})


def binomial_law(mu, n: int, index: Optional[ConfigurationSpaceIndex] = None) -> ProcessLaw:
    """``B_{mu,n}``: ``n`` i.i.d. points of law ``mu``."""
    mu_w = _weights(mu)
    if index is None:
        index = ConfigurationSpaceIndex(mu_w.size, n)
    kap = np.zeros(index.N + 1)
    kap[n] = 1.0
    return mixed_binomial_law(mu_w, kap, index)


def poisson_cap(total: float, tail: float = DEFAULT_TAIL) -> int:
    """Smallest ``N`` with ``P(Poi(total) > N) <= tail``."""
    N = 0
    while stats.poisson.sf(N, total) > tail:
        N += 1
    return N


def poisson_law(nu, index: Optional[ConfigurationSpaceIndex] = None, tail: float = DEFAULT_TAIL) -> ProcessLaw:
    """Truncated law of the Poisson process with finite intensity vector ``nu``."""
    nu_w = _weights(nu)
    if np.any(nu_w < 0):
        raise ValueError("intensity must be nonnegative")
    total = float(nu_w.sum())
    if index is None:
        index = ConfigurationSpaceIndex(nu_w.size, poisson_cap(total, tail))
    with np.errstate(divide="ignore", invalid="ignore"):
        lognu = np.log(nu_w)
        terms = np.where(index.counts > 0, index.counts * lognu[None, :], 0.0)
    raw = np.exp(-total + terms.sum(axis=1) - gammaln(index.counts + 1).sum(axis=1))
    tail_mass = float(stats.poisson.sf(index.N, total)) if total > 0 else 0.0
    p = raw / raw.sum()
    law = ProcessLaw(index, p, tail_mass, "poisson", {"nu": nu_w, "raw": raw})
    return law


def truncated_poisson_mass(lam: float, N: int) -> np.ndarray:
    p = stats.poisson.pmf(np.arange(N + 1), lam)
    return p / p.sum()


def mass_law(law: ProcessLaw) -> DiscreteMeasure:
    """Push-forward under the total mass, as a measure on ``{0, ..., N}``."""
    lam = np.bincount(law.index.masses, weights=law.probs, minlength=law.index.N + 1)
    return DiscreteMeasure.probability(lam, renormalize=True)


def condition_on_mass(law: ProcessLaw, n: int) -> ProcessLaw:
    mask = law.index.masses == n
    mass = law.probs[mask].sum()
    if mass <= 0:
        raise ValueError(f"mass {n} has probability zero")
    p = np.where(mask, law.probs, 0.0) / mass
    return ProcessLaw(law.index, p, 0.0, f"{law.name}|mass={n}")


@dataclass
class ChainRuleReport:
    lhs: float
    mass_term: float
    slice_terms: dict
    rhs: float
    error: float
    ok: bool


def chain_rule_check(Pi: ProcessLaw, B: ProcessLaw, tol: float = 1e-9) -> ChainRuleReport:
    """Compare ``H(Pi|B)`` with ``H(lambda|kappa) + sum_n lambda(n) H(Pi^n | B_{mu,n})``."""
    if Pi.index != B.index:
        raise ValueError("laws live on different enumerations")
    lhs = relative_entropy(Pi.probs, B.probs)
    lam = mass_law(Pi).weights
    kap = mass_law(B).weights
    mass_term = relative_entropy(lam, kap)
    slices = {}
    for n in np.flatnonzero(lam > 0):
        if kap[n] <= 0:
            slices[int(n)] = INF
            continue
        slices[int(n)] = relative_entropy(condition_on_mass(Pi, n).probs, condition_on_mass(B, n).probs)
    rhs = mass_term + sum(lam[n] * h for n, h in slices.items())
    if np.isinf(lhs) or np.isinf(rhs):
        err = 0.0 if lhs == rhs else INF
    else:
        err = abs(lhs - rhs)
    return ChainRuleReport(lhs, mass_term, slices, rhs, err, err <= tol)


def thin_law(law: ProcessLaw, t: float) -> ProcessLaw:
    """Exact law after deleting each point independently with probability ``1 - t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    idx = law.index
    out = np.zeros(len(idx))
    for i in law.support():
        xi = idx.counts[i]
        ranges = [range(c + 1) for c in xi]
        per_atom = [stats.binom.pmf(np.arange(c + 1), c, t) for c in xi]
        for keep in itertools.product(*ranges):
            w = np.prod([pa[j] for pa, j in zip(per_atom, keep)])
            if w > 0:
                out[idx.index_of(keep)] += law.probs[i] * w
    out /= out.sum()
    return ProcessLaw(idx, out, law.tail_bound, f"thin({law.name},{t:g})")


def law_tv(a: ProcessLaw, b: ProcessLaw) -> float:
    if a.index != b.index:
        raise ValueError("laws live on different enumerations")
    return tv_distance(a.probs, b.probs)


# ---------------------------------------------------------------------------
# Samplers; draw i of stream s uses default_rng([seed, s, i])


def _rng(seed: int, i: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream), int(i)])


def sample_mixed_binomial(mu, kappa, n_samples: int, seed: int, stream: int = 0) -> np.ndarray:
    """Count vectors (one row per draw) from ``B_{mu,kappa}`` on a finite space."""
    mu_w, kap = _weights(mu), _weights(kappa)
    out = np.zeros((n_samples, mu_w.size), dtype=int)
    for i in range(n_samples):
        rng = _rng(seed, i, stream)
        n = rng.choice(kap.size, p=kap)
        out[i] = rng.multinomial(n, mu_w)
    return out


def sample_poisson(nu, n_samples: int, seed: int, stream: int = 0) -> np.ndarray:
    """Count vectors from the Poisson process with intensity vector ``nu``."""
    nu_w = _weights(nu)
    return np.array([_rng(seed, i, stream).poisson(nu_w) for i in range(n_samples)], dtype=int).reshape(
        n_samples, nu_w.size)


def sample_poisson_euclidean(intensity: float, box, seed: int, i: int, stream: int = 0) -> np.ndarray:
    """One homogeneous Poisson sample on a box: ``Poi(intensity * vol)`` uniform points."""
    box = np.asarray(box, dtype=float)
    rng = _rng(seed, i, stream)
    vol = float(np.prod(box[:, 1] - box[:, 0]))
    n = rng.poisson(intensity * vol)
    return box[:, 0] + rng.random((n, box.shape[0])) * (box[:, 1] - box[:, 0])


def sample_binomial_euclidean(n: int, box, seed: int, i: int, stream: int = 0) -> np.ndarray:
    """``n`` i.i.d. uniform points on a box."""
    box = np.asarray(box, dtype=float)
    rng = _rng(seed, i, stream)
    return box[:, 0] + rng.random((n, box.shape[0])) * (box[:, 1] - box[:, 0])


def thin_sample(sample, t: float, seed: int, i: int, stream: int = 1):
    """Independent ``t``-thinning of a count vector or a point array."""
    rng = _rng(seed, i, stream)
    sample = np.asarray(sample)
    if sample.ndim == 1 and np.issubdtype(sample.dtype, np.integer):
        return rng.binomial(sample, t)
    return sample[rng.random(sample.shape[0]) < t]


def samples_to_jsonl(samples, path) -> None:
    with open(path, "w") as fh:
        for i, s in enumerate(samples):
            fh.write(json.dumps({"draw": i, "sample": np.asarray(s).tolist()}) + "\n")


def empirical_law(counts: np.ndarray, index: ConfigurationSpaceIndex) -> np.ndarray:
    """Empirical frequencies of sampled count vectors on an enumeration (out-of-range draws dropped)."""
    freq = np.zeros(len(index))
    for row in counts:
        c = Configuration(tuple(row))
        if c in index:
            freq[index.index_of(c)] += 1
    return freq / max(len(counts), 1)
