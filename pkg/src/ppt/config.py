"""Finite point configurations, difference operators and U-statistics."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Configuration:
    """Integer-valued point measure on a finite ground space ``{0, ..., k-1}``."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def empty(cls, k: int) -> "Configuration":
        return cls((0,) * k)

    @classmethod
    def from_points(cls, points: Iterable[int], k: int) -> "Configuration":
        counts = [0] * k
        for p in points:
            counts[p] += 1
        return cls(tuple(counts))

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def mass(self) -> int:
        return sum(self.counts)

    def __getitem__(self, x: int) -> int:
        return self.counts[x]

    def support(self) -> list:
        return [x for x, c in enumerate(self.counts) if c > 0]

    def expand(self) -> list:
        """Point list with multiplicity, in increasing label order."""
        return [x for x, c in enumerate(self.counts) for _ in range(c)]

    def is_simple(self) -> bool:
        return all(c <= 1 for c in self.counts)

    def _check(self, other: "Configuration"):
        if self.k != other.k:
            raise ValueError("configurations live on different ground spaces")

    def __add__(self, other: "Configuration") -> "Configuration":
        self._check(other)
        return Configuration(tuple(a + b for a, b in zip(self.counts, other.counts)))

    def __le__(self, other: "Configuration") -> bool:
        """Componentwise domination ``self <= other`` (a partial order)."""
        self._check(other)
        return all(a <= b for a, b in zip(self.counts, other.counts))

    def add_point(self, x: int) -> "Configuration":
        counts = list(self.counts)
        counts[x] += 1
        return Configuration(tuple(counts))

    def remove_point(self, x: int) -> "Configuration":
        if self.counts[x] < 1:
            raise ValueError(f"point {x} is not charged by the configuration")
        counts = list(self.counts)
        counts[x] -= 1
        return Configuration(tuple(counts))

    def to_json(self) -> str:
        return json.dumps(list(self.counts))

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        return cls(tuple(json.loads(text)))


@dataclass(frozen=True)
class PointConfiguration:
    """Finite point measure on R^d stored as canonically ordered ``(point, multiplicity)`` pairs."""

    points: tuple
    multiplicities: tuple

    def __post_init__(self):
        merged = {}
        for p, m in zip(self.points, self.multiplicities):
            m = int(m)
            if m < 1:
                raise ValueError("multiplicities must be >= 1")
            key = tuple(float(v) for v in np.atleast_1d(p))
            merged[key] = merged.get(key, 0) + m
        keys = sorted(merged)
        if keys and len({len(p) for p in keys}) != 1:
            raise ValueError("points must share one dimension")
        object.__setattr__(self, "points", tuple(keys))
        object.__setattr__(self, "multiplicities", tuple(merged[p] for p in keys))

    @classmethod
    def from_array(cls, X) -> "PointConfiguration":
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            return cls((), ())
        X = X.reshape(X.shape[0], -1)
        return cls(tuple(map(tuple, X)), (1,) * X.shape[0])

    @property
    def mass(self) -> int:
        return sum(self.multiplicities)

    def __getitem__(self, x) -> int:
        key = tuple(float(v) for v in np.atleast_1d(x))
        try:
            return self.multiplicities[self.points.index(key)]
        except ValueError:
            return 0

    def support(self) -> list:
        return list(self.points)

    def expand(self) -> np.ndarray:
        rows = [p for p, m in zip(self.points, self.multiplicities) for _ in range(m)]
        if not rows:
            return np.zeros((0, 0))
        return np.array(rows)

    def is_simple(self) -> bool:
        return all(m == 1 for m in self.multiplicities)

    def __add__(self, other: "PointConfiguration") -> "PointConfiguration":
        return PointConfiguration(self.points + other.points, self.multiplicities + other.multiplicities)

    def add_point(self, x) -> "PointConfiguration":
        return PointConfiguration(self.points + (tuple(np.atleast_1d(x)),), self.multiplicities + (1,))

    def remove_point(self, x) -> "PointConfiguration":
        key = tuple(float(v) for v in np.atleast_1d(x))
        if key not in self.points:
            raise ValueError(f"point {key} is not charged by the configuration")
        i = self.points.index(key)
        mult = list(self.multiplicities)
        mult[i] -= 1
        keep = [j for j in range(len(mult)) if mult[j] > 0]
        return PointConfiguration(tuple(self.points[j] for j in keep), tuple(mult[j] for j in keep))

    def to_json(self) -> str:
        return json.dumps({"points": [list(p) for p in self.points], "multiplicities": list(self.multiplicities)})

    @classmethod
    def from_json(cls, text: str) -> "PointConfiguration":
        data = json.loads(text)
        return cls(tuple(map(tuple, data["points"])), tuple(data["multiplicities"]))


def setminus(xi, chi):
    """``xi \\ chi``: the point measure ``sum_x (xi(x) - chi(x))_+ delta_x``."""
    if isinstance(xi, Configuration):
        if not isinstance(chi, Configuration):
            raise ValueError("mismatched configuration types")
        xi._check(chi)
        return Configuration(tuple(max(a - b, 0) for a, b in zip(xi.counts, chi.counts)))
    if not isinstance(chi, PointConfiguration):
        raise ValueError("mismatched configuration types")
    pts, mult = [], []
    for p, m in zip(xi.points, xi.multiplicities):
        r = m - chi[p]
        if r > 0:
            pts.append(p)
            mult.append(r)
    return PointConfiguration(tuple(pts), tuple(mult))


class Functional:
    """A configuration functional ``F`` with unverified shape claims.

    The flags record what the caller claims; :func:`check_monotone_convex`
    is the only thing that establishes them.
    """

    def __init__(self, evaluate: Callable, claims_nondecreasing: bool = False,
                 claims_convex: bool = False, name: str = ""):
        self._evaluate = evaluate
        self.claims_nondecreasing = claims_nondecreasing
        self.claims_convex = claims_convex
        self.name = name or getattr(evaluate, "__name__", "F")

    def __call__(self, xi) -> float:
        return float(self._evaluate(xi))

    def __repr__(self):
        return f"Functional({self.name})"

    def on(self, configs: Sequence) -> np.ndarray:
        return np.array([self(c) for c in configs], dtype=float)

    @classmethod
    def mass(cls) -> "Functional":
        return cls(lambda xi: xi.mass, True, True, name="mass")

    @classmethod
    def constant(cls, value: float) -> "Functional":
        return cls(lambda xi: value, True, True, name=f"const({value:g})")

    @classmethod
    def from_table(cls, configs: Sequence, values, name: str = "table") -> "Functional":
        table = dict(zip(configs, map(float, values)))
        return cls(table.__getitem__, name=name)

    @classmethod
    def u_statistic(cls, h: Callable, q: int, name: str = "") -> "Functional":
        return cls(lambda xi: u_statistic(h, q, xi), True, True, name=name or f"U{q}")


def diff_minus(F: Callable, xi, x) -> float:
    """``D^-_x F(xi) = F(xi) - F(xi - delta_x)``; requires ``xi(x) >= 1``."""
    if xi[x] < 1:
        raise ValueError("D^- needs a point charged by the configuration")
    return F(xi) - F(xi.remove_point(x))


def diff_plus(F: Callable, xi, x) -> float:
    """``D^+_x F(xi) = F(xi + delta_x) - F(xi)``."""
    return F(xi.add_point(x)) - F(xi)


def _points(xi) -> list:
    if isinstance(xi, Configuration):
        return xi.expand()
    return [tuple(p) for p in xi.expand()]


def u_statistic(h: Callable, q: int, xi) -> float:
    """Sum of ``h`` over ordered ``q``-tuples of distinct indices of the expanded point list."""
    if q < 1:
        raise ValueError("q must be >= 1")
    pts = _points(xi)
    if len(pts) < q:
        return 0.0
    return float(sum(h(*tup) for tup in itertools.permutations(pts, q)))


def pair_u_statistic(X: np.ndarray, kernel: Callable) -> float:
    """Vectorised order-2 U-statistic ``sum_{i != j} h(x_i, x_j)``.

    ``kernel`` maps a pairwise squared-distance matrix to kernel values.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        return 0.0
    sq = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
    H = kernel(sq)
    np.fill_diagonal(H, 0.0)
    return float(H.sum())


@dataclass
class ShapeReport:
    nondecreasing: bool
    convex: bool
    checked_first: int
    checked_second: int
    first_violation: Optional[dict] = None
    second_violation: Optional[dict] = None


def check_monotone_convex(F: Callable, domain: Sequence[Configuration], tol: float = 1e-12) -> ShapeReport:
    """Check ``D^+_x F >= 0`` and ``D^+_y D^+_x F >= 0`` wherever the domain permits.

    A triple is checked only when every configuration it touches lies in
    ``domain`` (so mass caps are respected automatically).
    """
    members = set(domain)
    values = {c: F(c) for c in domain}
    report = ShapeReport(True, True, 0, 0)
    for xi in domain:
        for x in range(xi.k):
            up = xi.add_point(x)
            if up not in members:
                continue
            d1 = values[up] - values[xi]
            report.checked_first += 1
            if d1 < -tol and report.nondecreasing:
                report.nondecreasing = False
                report.first_violation = {"xi": xi.counts, "x": x, "D+": d1}
            for y in range(xi.k):
                upy = xi.add_point(y)
                both = up.add_point(y)
                if upy not in members or both not in members:
                    continue
                d2 = values[both] - values[up] - values[upy] + values[xi]
                report.checked_second += 1
                if d2 < -tol and report.convex:
                    report.convex = False
                    report.second_violation = {"xi": xi.counts, "x": x, "y": y, "D++": d2}
    return report
