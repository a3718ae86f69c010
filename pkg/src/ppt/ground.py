"""Ground spaces, base costs and the scalar convex families used by the costs.

All scalar functions accept floats or numpy arrays.  Values outside a
function's natural domain are reported as ``+inf`` where that is the
mathematically meaningful extension, and raise ``ValueError`` otherwise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

INF = float("inf")

# alpha_t switches to the closed-form limits within this distance of t=0,1
_T_LIMIT_EPS = 1e-9


def mul_ext(a, b):
    """Extended-real product with the convention 0 * inf = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a * b
    out = np.where((a == 0) | (b == 0), 0.0, out)
    return out if out.ndim else float(out)


def _xlog1p(a, x):
    """a * log1p(x) with 0 * log(0) = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a * np.log1p(x)
    return np.where(a == 0, 0.0, out)


def _check_unit(name, u):
    u = np.asarray(u, dtype=float)
    if np.any(np.isnan(u)) or np.any(u < 0) or np.any(u > 1):
        raise ValueError(f"{name} must lie in [0, 1]")
    return u


def alpha_t(t: float, u):
    """Dembo's interpolating family.

    For ``0 < t < 1``::

        alpha_t(u) = (t (1-u) log(1-u) - (1-tu) log(1-tu)) / (t (1-t))

    with the limits ``alpha_0(u) = (1-u) log(1-u) + u`` and
    ``alpha_1(u) = -u - log(1-u)`` (so ``alpha_1(1) = inf``).
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    u = _check_unit("u", u)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    if t < _T_LIMIT_EPS:
        out = _xlog1p(1.0 - u, -u) + u
    elif 1.0 - t < _T_LIMIT_EPS:
        with np.errstate(divide="ignore"):
            out = -u - np.log1p(-u)
        out = np.where(u >= 1.0, INF, out)
    else:
        num = t * _xlog1p(1.0 - u, -u) - _xlog1p(1.0 - t * u, -t * u)
        out = num / (t * (1.0 - t))
    out = np.maximum(out, 0.0)
    return float(out[0]) if scalar else out


def alpha_t_prime(t: float, u):
    """Derivative of :func:`alpha_t` in ``u``: ``(log(1-tu) - log(1-u)) / (1-t)``."""
    u = _check_unit("u", u)
    with np.errstate(divide="ignore"):
        if t < _T_LIMIT_EPS:
            out = -np.log1p(-u)
        elif 1.0 - t < _T_LIMIT_EPS:
            out = u / (1.0 - u)
        else:
            out = (np.log1p(-t * u) - np.log1p(-u)) / (1.0 - t)
    return out if np.ndim(out) else float(out)


def alpha1_conjugate(s):
    """Legendre transform of ``alpha_1``: ``s - log(1+s)`` for ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(np.isnan(s)) or np.any(s < 0):
        raise ValueError("s must be nonnegative")
    out = s - np.log1p(s)
    return out if out.ndim else float(out)


def phi(lam: float, s):
    """``phi_lambda(s) = s/(1-lam) - lam/(1-lam) * log(1 + s/lam)``; ``phi_0(s) = s``."""
    if not 0.0 <= lam < 1.0:
        raise ValueError("lambda must lie in [0, 1)")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    if lam == 0.0:
        out = s.copy()
    else:
        out = s / (1.0 - lam) - lam / (1.0 - lam) * np.log1p(s / lam)
    return out if out.ndim else float(out)


def phi_wu(s):
    """Wu's function ``exp(-s) + s - 1``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    out = np.expm1(-s) + s
    return out if out.ndim else float(out)


def three_point_convex(values, grid, tol: float = 1e-10) -> bool:
    """Discrete convexity test on a (possibly nonuniform) increasing grid."""
    x = np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float)
    finite = np.isfinite(y)
    x, y = x[finite], y[finite]
    if x.size < 3:
        return True
    slopes = np.diff(y) / np.diff(x)
    scale = max(1.0, float(np.max(np.abs(slopes))))
    return bool(np.all(np.diff(slopes) >= -tol * scale))


# ---------------------------------------------------------------------------
# Ground spaces and costs


@dataclass(frozen=True)
class GroundSpace:
    """Either a finite labelled metric space or a Euclidean box."""

    kind: str
    labels: tuple = ()
    metric: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    dimension: int = 0
    box: tuple = ()

    def __post_init__(self):
        if self.kind == "finite":
            m = np.asarray(self.metric, dtype=float)
            k = len(self.labels)
            if m.shape != (k, k):
                raise ValueError(f"metric must be {k}x{k}, got {m.shape}")
            _validate_metric(m)
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, "metric", m)
        elif self.kind == "euclidean":
            if self.dimension < 1:
                raise ValueError("dimension must be >= 1")
            box = tuple((float(lo), float(hi)) for lo, hi in self.box)
            if len(box) != self.dimension or any(hi <= lo for lo, hi in box):
                raise ValueError("box must give one nonempty interval per dimension")
            object.__setattr__(self, "box", box)
        else:
            raise ValueError(f"unknown ground space kind {self.kind!r}")

    @classmethod
    def finite(cls, metric, labels: Optional[Sequence] = None) -> "GroundSpace":
        metric = np.asarray(metric, dtype=float)
        if labels is None:
            labels = range(metric.shape[0])
        return cls("finite", labels=tuple(labels), metric=metric)

    @classmethod
    def discrete(cls, k: int) -> "GroundSpace":
        """``k`` points at mutual distance one."""
        return cls.finite(1.0 - np.eye(k))

    @classmethod
    def euclidean(cls, box) -> "GroundSpace":
        box = tuple(tuple(b) for b in box)
        return cls("euclidean", dimension=len(box), box=box)

    @property
    def size(self) -> int:
        if self.kind != "finite":
            raise TypeError("only finite spaces have a size")
        return len(self.labels)

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.box]))

    def to_json(self) -> str:
        if self.kind == "finite":
            return json.dumps({"labels": list(self.labels), "metric": self.metric.tolist()})
        return json.dumps({"box": [list(b) for b in self.box]})

    @classmethod
    def from_json(cls, text: str) -> "GroundSpace":
        data = json.loads(text)
        if "metric" in data:
            return cls.finite(data["metric"], data.get("labels"))
        if "box" in data:
            return cls.euclidean(data["box"])
        raise ValueError("expected a 'metric' or a 'box' entry")


def _validate_metric(m: np.ndarray, tol: float = 1e-12) -> None:
    if np.any(~np.isfinite(m)) or np.any(m < 0):
        raise ValueError("metric entries must be finite and nonnegative")
    if np.any(np.abs(np.diag(m)) > tol):
        raise ValueError("metric must have a zero diagonal")
    if np.any(np.abs(m - m.T) > tol):
        raise ValueError("metric must be symmetric")
    # d(i,j) <= d(i,l) + d(l,j) for all l
    via = m[:, :, None] + m[None, :, :]
    if np.any(m[:, None, :] > via + tol * (1 + np.abs(via))):
        raise ValueError("metric violates the triangle inequality")


@dataclass(frozen=True)
class CostFunction:
    """Base cost on pairs of ground points.

    ``kind`` is one of ``hamming``, ``squared_distance``, ``distance_power``
    (with ``power``) or ``custom_matrix`` (with ``matrix``).
    """

    kind: str
    power: float = 1.0
    matrix: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("hamming", "squared_distance", "distance_power", "custom_matrix"):
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if self.kind == "custom_matrix":
            m = np.array(self.matrix, dtype=float)
            if m.ndim != 2 or np.any(np.isnan(m)) or np.any(m < 0):
                raise ValueError("custom cost matrix must be nonnegative")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        if self.kind == "distance_power" and self.power <= 0:
            raise ValueError("power must be positive")

    @classmethod
    def hamming(cls) -> "CostFunction":
        return cls("hamming")

    @classmethod
    def squared_distance(cls) -> "CostFunction":
        return cls("squared_distance")

    @classmethod
    def distance_power(cls, power: float) -> "CostFunction":
        return cls("distance_power", power=power)

    @classmethod
    def custom(cls, matrix) -> "CostFunction":
        return cls("custom_matrix", matrix=matrix)

    def _from_distance(self, d):
        if self.kind == "squared_distance":
            return d ** 2
        if self.kind == "distance_power":
            return d ** self.power
        raise AssertionError

    def on_space(self, space: GroundSpace) -> np.ndarray:
        """Cost matrix over the points of a finite space."""
        k = space.size
        if self.kind == "hamming":
            return 1.0 - np.eye(k)
        if self.kind == "custom_matrix":
            if self.matrix.shape != (k, k):
                raise ValueError("custom matrix does not match the space")
            return np.array(self.matrix)
        return self._from_distance(np.asarray(space.metric))

    def between(self, X, Y) -> np.ndarray:
        """Cost matrix between two point arrays of shape (n, d) and (m, d)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if self.kind == "hamming":
            return np.any(X[:, None, :] != Y[None, :, :], axis=-1).astype(float)
        if self.kind == "custom_matrix":
            raise TypeError("custom matrices have no Euclidean evaluation")
        d = np.sqrt(np.sum((X[:, None, :] - Y[None, :, :]) ** 2, axis=-1))
        return self._from_distance(d)


# ---------------------------------------------------------------------------
# The alpha families


@dataclass(frozen=True)
class AlphaFamily:
    """Convex nondecreasing ``alpha`` with ``alpha(0) = 0``.

    ``kind`` is ``dembo`` (parameter ``t``), ``square`` (``u^2``),
    ``half_square`` (``u^2 / 2``), ``scaled`` (``scale * base``) or
    ``custom_convex`` (linear interpolation of ``(knots, values)`` samples).
    """

    kind: str
    t: float = 0.5
    knots: tuple = ()
    values: tuple = ()
    scale: float = 1.0
    base: Optional["AlphaFamily"] = None

    def __post_init__(self):
        if self.kind == "dembo":
            if not 0.0 <= self.t <= 1.0:
                raise ValueError("t must lie in [0, 1]")
        elif self.kind == "custom_convex":
            x = np.asarray(self.knots, dtype=float)
            y = np.asarray(self.values, dtype=float)
            if x.size < 2 or x.shape != y.shape or x[0] != 0.0 or np.any(np.diff(x) <= 0):
                raise ValueError("custom alpha needs increasing knots starting at 0")
            if y[0] != 0.0 or np.any(np.diff(y) < 0) or not three_point_convex(y, x):
                raise ValueError("custom alpha must be convex, nondecreasing and vanish at 0")
            object.__setattr__(self, "knots", tuple(map(float, x)))
            object.__setattr__(self, "values", tuple(map(float, y)))
        elif self.kind == "scaled":
            if self.base is None or self.scale <= 0:
                raise ValueError("scaled alpha needs a base family and a positive scale")
        elif self.kind not in ("square", "half_square"):
            raise ValueError(f"unknown alpha kind {self.kind!r}")

    @classmethod
    def dembo(cls, t: float) -> "AlphaFamily":
        return cls("dembo", t=float(t))

    @classmethod
    def square(cls) -> "AlphaFamily":
        return cls("square")

    @classmethod
    def half_square(cls) -> "AlphaFamily":
        return cls("half_square")

    @classmethod
    def custom(cls, knots, values) -> "AlphaFamily":
        return cls("custom_convex", knots=tuple(knots), values=tuple(values))

    def scaled(self, factor: float) -> "AlphaFamily":
        return AlphaFamily("scaled", scale=float(factor), base=self)

    @property
    def domain_max(self) -> float:
        """Right end of the effective domain (``alpha = inf`` beyond it)."""
        if self.kind == "dembo":
            return 1.0
        if self.kind == "custom_convex":
            return self.knots[-1]
        if self.kind == "scaled":
            return self.base.domain_max
        return INF

    @property
    def blows_up(self) -> bool:
        """True when alpha tends to infinity at ``domain_max``."""
        if self.kind == "scaled":
            return self.base.blows_up
        return self.kind == "dembo" and self.t > 1.0 - _T_LIMIT_EPS

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise ValueError("alpha is evaluated on [0, inf)")
        if self.kind == "square":
            out = u ** 2
        elif self.kind == "half_square":
            out = 0.5 * u ** 2
        elif self.kind == "scaled":
            out = self.scale * np.asarray(self.base(u))
        else:
            top = self.domain_max
            inside = np.minimum(u, top)
            if self.kind == "dembo":
                out = np.asarray(alpha_t(self.t, inside))
            else:
                out = np.interp(inside, self.knots, self.values)
            out = np.where(u > top * (1 + 1e-12), INF, out)
        return out if out.ndim else float(out)

    def derivative(self, u):
        """A (right) derivative, used for supporting lines."""
        u = np.asarray(u, dtype=float)
        if self.kind == "square":
            out = 2.0 * u
        elif self.kind == "half_square":
            out = u.copy()
        elif self.kind == "scaled":
            out = self.scale * np.asarray(self.base.derivative(u))
        elif self.kind == "dembo":
            out = np.asarray(alpha_t_prime(self.t, np.clip(u, 0.0, 1.0)))
        else:
            x = np.asarray(self.knots)
            y = np.asarray(self.values)
            slopes = np.diff(y) / np.diff(x)
            idx = np.clip(np.searchsorted(x, u, side="right") - 1, 0, slopes.size - 1)
            out = slopes[idx]
        return out if np.ndim(out) else float(out)

    def affine_pieces(self):
        """Exact affine representation ``max_i (a_i u + b_i)`` for piecewise-linear alphas."""
        if self.kind == "scaled":
            inner = self.base.affine_pieces()
            return None if inner is None else (self.scale * inner[0], self.scale * inner[1])
        if self.kind != "custom_convex":
            return None
        x = np.asarray(self.knots)
        y = np.asarray(self.values)
        a = np.diff(y) / np.diff(x)
        return a, y[:-1] - a * x[:-1]

    def check_convex(self, n: int = 2001) -> bool:
        top = self.domain_max
        grid = np.linspace(0.0, 1.0 if not np.isfinite(top) else top, n)
        if self.blows_up:
            grid = grid[:-1]
        vals = np.asarray(self(grid))
        return bool(vals[0] == 0.0 and np.all(np.diff(vals) >= -1e-12) and three_point_convex(vals, grid))

    def describe(self) -> str:
        if self.kind == "dembo":
            return f"dembo(t={self.t:g})"
        if self.kind == "scaled":
            return f"{self.scale:g}*{self.base.describe()}"
        return self.kind
