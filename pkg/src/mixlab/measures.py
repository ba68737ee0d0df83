"""Probability vectors on indexed finite sets and distances between them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASS_TOL = 1e-12


class DimensionError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Dist:
    """A dense probability vector over states ``0..m-1``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d vector")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > MASS_TOL * max(1, w.size):
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.weights.size

    @classmethod
    def point(cls, m: int, i: int) -> "Dist":
        w = np.zeros(m)
        w[i] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, m: int) -> "Dist":
        return cls(np.full(m, 1.0 / m))

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)

    def __len__(self):
        return self.m


def _vec(p) -> np.ndarray:
    return p.weights if isinstance(p, Dist) else np.asarray(p, dtype=float)


def _pair(p, q):
    a, b = _vec(p), _vec(q)
    if a.shape != b.shape:
        raise DimensionError(f"state counts differ: {a.size} vs {b.size}")
    return a, b


def _positive_pi(pi):
    if np.any(pi <= 0):
        raise DomainError("reference distribution must be strictly positive")


def tv_distance(p, q) -> float:
    a, b = _pair(p, q)
    return float(min(1.0, 0.5 * np.abs(a - b).sum()))


def chi_square(p, pi) -> float:
    a, b = _pair(p, pi)
    _positive_pi(b)
    return float(np.sum((a - b) ** 2 / b))


def separation(p, pi) -> float:
    a, b = _pair(p, pi)
    _positive_pi(b)
    return float(np.clip(np.max(1.0 - a / b), 0.0, 1.0))


def linf(p, pi) -> float:
    a, b = _pair(p, pi)
    _positive_pi(b)
    return float(np.max(np.abs(1.0 - a / b)))


def kl(pi, p) -> float:
    """Kullback-Leibler divergence D(pi || p) = sum pi log(pi/p), always >= 0.

    Returns ``inf`` when ``p`` vanishes somewhere ``pi`` does not.
    """
    b, a = _pair(pi, p)
    _positive_pi(b)
    if np.any(a[b > 0] == 0):
        return float("inf")
    return float(max(0.0, np.sum(b * np.log(b / a))))


METRICS = {
    "tv": tv_distance,
    "chi2": chi_square,
    "separation": separation,
    "linf": linf,
    "kl": lambda p, pi: kl(pi, p),
}


def get_metric(name: str):
    """Look up ``metric(p, pi)`` by name; all take the evolving law first."""
    try:
        return METRICS[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None
