"""Discrete measures, relative entropy and total variation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .ground import INF

PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Nonnegative weights indexed by ``0..len-1`` of some finite universe.

    Parameters
    ----------
    weights : array_like
        Nonnegative weights.
    is_probability : bool
        If true, weights must sum to one within ``1e-12``.  Larger
        deviations raise unless ``renormalize=True`` is passed to
        :meth:`probability`, which records the correction applied.
    """

    weights: np.ndarray
    is_probability: bool = True
    correction: float = 0.0
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if self.is_probability and abs(w.sum() - 1.0) > PROB_TOL * max(1, w.size):
            raise ValueError(f"probability weights sum to {w.sum():.17g}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def probability(cls, weights, renormalize: bool = False) -> "DiscreteMeasure":
        w = np.asarray(weights, dtype=float).ravel()
        if renormalize:
            s = w.sum()
            if s <= 0:
                raise ValueError("cannot normalize a zero measure")
            return cls(w / s, True, correction=float(abs(s - 1.0)))
        return cls(w, True)

    @classmethod
    def finite(cls, weights) -> "DiscreteMeasure":
        return cls(np.asarray(weights, dtype=float), False)

    @classmethod
    def dirac(cls, i: int, k: int) -> "DiscreteMeasure":
        w = np.zeros(k)
        w[i] = 1.0
        return cls(w, True)

    @classmethod
    def uniform(cls, k: int) -> "DiscreteMeasure":
        return cls(np.full(k, 1.0 / k), True)

    def __len__(self) -> int:
        return self.weights.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self.is_probability == other.is_probability and np.array_equal(self.weights, other.weights)

    __hash__ = None

    def __getitem__(self, i):
        return self.weights[i]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure.probability(self.weights, renormalize=True)

    def scaled(self, c: float) -> "DiscreteMeasure":
        return DiscreteMeasure.finite(c * self.weights)

    def to_json(self) -> str:
        return json.dumps({"weights": self.weights.tolist(), "is_probability": self.is_probability})

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        data = json.loads(text)
        if isinstance(data, list):
            return cls(np.asarray(data, dtype=float), True)
        return cls(np.asarray(data["weights"], dtype=float), bool(data.get("is_probability", True)))


def _as_weights(m) -> np.ndarray:
    if isinstance(m, DiscreteMeasure):
        if not m.is_probability:
            raise ValueError("expected a probability measure")
        return m.weights
    w = np.asarray(m, dtype=float).ravel()
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("expected a probability vector")
    return w


def relative_entropy(nu, gamma) -> float:
    """``H(nu | gamma) = sum nu log(nu / gamma)`` in nats, ``+inf`` off absolute continuity."""
    p = _as_weights(nu)
    q = _as_weights(gamma)
    if p.shape != q.shape:
        raise ValueError("measures live on different universes")
    on = p > 0
    if np.any(q[on] <= 0):
        return INF
    return float(max(np.sum(p[on] * (np.log(p[on]) - np.log(q[on]))), 0.0))


def tv_distance(nu1, nu2) -> float:
    p = _as_weights(nu1)
    q = _as_weights(nu2)
    if p.shape != q.shape:
        raise ValueError("measures live on different universes")
    return float(0.5 * np.abs(p - q).sum())
