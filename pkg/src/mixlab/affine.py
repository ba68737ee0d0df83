"""Affine walks X' = a X + e (mod p): the doubling speed-up and its random-multiplier variants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import Kernel, TVProfile, mixing_time
from .measures import Dist, tv_distance

DEFAULT_INCREMENTS = {-1: 1 / 3, 0: 1 / 3, 1: 1 / 3}


@dataclass(frozen=True)
class AffineWalkSpec:
    """Modulus, multiplier law and increment law of an affine walk started at 0.

    A single multiplier gives the fixed-``a`` walk; several give the walk whose
    multiplier is redrawn independently every step.
    """

    p: int
    multipliers: tuple[int, ...] = (2,)
    multiplier_probs: tuple[float, ...] | None = None
    increments: dict = field(default_factory=lambda: dict(DEFAULT_INCREMENTS))

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0:
            raise ValueError(f"modulus must be odd and >= 3, got {self.p}")
        mults = tuple(int(a) % self.p for a in self.multipliers)
        if not mults:
            raise ValueError("need at least one multiplier")
        for a in mults:
            if math.gcd(a, self.p) != 1:
                raise ValueError(f"multiplier {a} is not invertible mod {self.p}")
        probs = self.multiplier_probs
        if probs is None:
            probs = tuple([1.0 / len(mults)] * len(mults))
        if len(probs) != len(mults) or min(probs) < 0 or abs(sum(probs) - 1) > 1e-12:
            raise ValueError("multiplier probabilities must be a distribution over the multipliers")
        inc = {int(e): float(w) for e, w in self.increments.items()}
        if min(inc.values()) < 0 or abs(sum(inc.values()) - 1) > 1e-12:
            raise ValueError("increment law must be a probability distribution")
        object.__setattr__(self, "multipliers", mults)
        object.__setattr__(self, "multiplier_probs", tuple(float(x) for x in probs))
        object.__setattr__(self, "increments", inc)

    @classmethod
    def fixed(cls, p: int, a: int = 2, **kw) -> "AffineWalkSpec":
        return cls(p, (a,), **kw)


def _apply(x: np.ndarray, p: int, a: int, increments: dict) -> np.ndarray:
    # p_{t+1}(a j + e) += P(e) p_t(j)
    j = np.arange(p)
    out = np.zeros(p)
    base = (a * j) % p
    for e, w in increments.items():
        out += w * np.bincount((base + e) % p, weights=x, minlength=p)
    return out


def affine_step(spec: AffineWalkSpec, x: np.ndarray) -> np.ndarray:
    """One annealed update of a law on Z/p."""
    out = np.zeros(spec.p)
    for a, w in zip(spec.multipliers, spec.multiplier_probs):
        out += w * _apply(x, spec.p, a, spec.increments)
    return out


def affine_evolve(spec: AffineWalkSpec, steps: int, quenched_seed: int | None = None) -> Dist:
    """Exact law of X_steps from X_0 = 0.

    Averaged over multiplier draws by default; with ``quenched_seed`` one
    multiplier sequence is drawn up front and held fixed.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    x = np.zeros(spec.p)
    x[0] = 1.0
    if quenched_seed is None:
        for _ in range(steps):
            x = affine_step(spec, x)
    else:
        rng = np.random.default_rng(quenched_seed)
        seq = rng.choice(spec.multipliers, size=steps, p=spec.multiplier_probs)
        for a in seq:
            x = _apply(x, spec.p, int(a), spec.increments)
    return Dist(x)


def affine_kernel(spec: AffineWalkSpec) -> Kernel:
    """Dense-checkable transition kernel of the annealed walk."""
    p = spec.p
    maps, weights = [], []
    j = np.arange(p)
    for a, wa in zip(spec.multipliers, spec.multiplier_probs):
        for e, we in spec.increments.items():
            maps.append((a * j + e) % p)
            weights.append(wa * we)
    return Kernel.from_maps(maps, weights, label=f"affine(p={p}, a={spec.multipliers})")


def affine_profile(spec: AffineWalkSpec, max_steps: int, stop_below: float | None = None) -> TVProfile:
    x = np.zeros(spec.p)
    x[0] = 1.0
    u = np.full(spec.p, 1.0 / spec.p)
    values = [tv_distance(x, u)]
    for _ in range(max_steps):
        if stop_below is not None and values[-1] <= stop_below:
            break
        x = affine_step(spec, x)
        values.append(tv_distance(x, u))
    return TVProfile(np.arange(len(values)), np.array(values), "tv",
                     f"affine(p={spec.p}, a={spec.multipliers})")


def cdg_constant() -> float:
    """(1 - log2((5 + sqrt 17)/9))^-1 = 1.01999186..."""
    return 1.0 / (1.0 - math.log2((5.0 + math.sqrt(17.0)) / 9.0))


def doubling_steps(p: int, factor: float = 1.3) -> int:
    return math.ceil(factor * math.log2(p))


def doubling_speedup_experiment(p_list, step_factor: float = 1.3, tv_eps: float = 0.3) -> dict:
    """TV of the doubling walk and the plain (a = 1) walk at ceil(step_factor * log2 p).

    Returns ``{"rows": [(p, l, tv_doubling, tv_plain), ...], "fraction": ...}``
    where ``fraction`` is the share of p with doubling TV below ``tv_eps``.
    """
    rows = []
    for p in p_list:
        l = doubling_steps(p, step_factor)
        u = np.full(p, 1.0 / p)
        tv2 = tv_distance(affine_evolve(AffineWalkSpec.fixed(p, 2), l), u)
        tv1 = tv_distance(affine_evolve(AffineWalkSpec.fixed(p, 1), l), u)
        rows.append((int(p), l, tv2, tv1))
    frac = sum(r[2] < tv_eps for r in rows) / len(rows) if rows else float("nan")
    return {"rows": rows, "fraction": frac}


def sample_odd(lo: int, hi: int, count: int, seed: int) -> list[int]:
    """``count`` distinct odd integers in [lo, hi], sorted."""
    rng = np.random.default_rng(seed)
    odds = np.arange(lo | 1, hi + 1, 2)
    return sorted(int(x) for x in rng.choice(odds, size=count, replace=False))


def hildebrand_variant(spec: AffineWalkSpec, max_steps: int, stop_below: float | None = None) -> TVProfile:
    """Annealed TV profile for a (possibly random) multiplier law."""
    return affine_profile(spec, max_steps, stop_below)


def inverse_mod(a: int, p: int) -> int:
    return pow(a, -1, p)


def hildebrand_tmix(spec: AffineWalkSpec, eps: float = 0.25, max_steps: int = 10**6) -> int | None:
    return mixing_time(affine_profile(spec, max_steps, stop_below=eps), eps)
