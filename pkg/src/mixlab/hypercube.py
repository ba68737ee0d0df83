"""Walks on the hypercube C_2^n driven by fixed generator sets.

Vectors are Python ints: coordinate ``i`` is bit ``i``. In string form the
leftmost character is coordinate 0, so ``"100"`` is e_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .kernel import Kernel, TVProfile, ValidationError, mixing_time

TRANSFORM_CAP = 30


@dataclass(frozen=True)
class BitVec:
    n: int
    value: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.value < (1 << self.n):
            raise ValueError(f"value {self.value} does not fit in {self.n} bits")

    @classmethod
    def from_str(cls, s: str) -> "BitVec":
        return cls(len(s), sum(1 << i for i, ch in enumerate(s) if ch == "1"))

    def __str__(self):
        return "".join("1" if self.value >> i & 1 else "0" for i in range(self.n))

    @property
    def weight(self) -> int:
        return bin(self.value).count("1")

    def shift(self, j: int) -> "BitVec":
        return BitVec(self.n, rotate(self.value, j, self.n))


def rotate(v: int, j: int, n: int) -> int:
    """Cyclic shift moving coordinate i to coordinate (i + j) mod n."""
    j %= n
    mask = (1 << n) - 1
    return ((v << j) | (v >> (n - j))) & mask


@dataclass(frozen=True)
class GeneratorSet:
    """Step law: 0 w.p. ``holding``, else a uniformly chosen vector from ``vectors``."""

    n: int
    vectors: tuple[int, ...]
    holding: float = 0.0

    def __post_init__(self):
        if not self.vectors:
            raise ValueError("need at least one generator")
        if not 0 <= self.holding < 1:
            raise ValueError("holding probability must be in [0, 1)")
        if any(not 0 <= v < (1 << self.n) for v in self.vectors):
            raise ValueError("generator does not fit in n bits")

    @property
    def N(self) -> int:
        return len(self.vectors)

    def strings(self) -> list[str]:
        return [str(BitVec(self.n, v)) for v in self.vectors]


def cyclic_generators(pattern: BitVec, holding: bool = True) -> GeneratorSet:
    n = pattern.n
    vecs = tuple(rotate(pattern.value, j, n) for j in range(n))
    return GeneratorSet(n, vecs, 1.0 / (n + 1) if holding else 0.0)


def spatula_generators(n: int, d: int, holding: bool = True) -> GeneratorSet:
    """The n cyclic shifts of a block of d ones; holding 1/(n+1) by default."""
    if not 1 <= d <= n:
        raise ValueError(f"spatula width d={d} outside 1..{n}")
    return cyclic_generators(BitVec(n, (1 << d) - 1), holding)


def comb_generators(n: int, pattern: BitVec | str, holding: bool = True) -> GeneratorSet:
    if isinstance(pattern, str):
        pattern = BitVec.from_str(pattern.ljust(n, "0"))
    if pattern.n != n or pattern.value == 0:
        raise ValueError("comb pattern must be a non-zero vector of length n")
    return cyclic_generators(pattern, holding)


def comb_pattern(n: int, d: int) -> BitVec:
    """Every other position among the first d: 1010...1 padded with zeros."""
    return BitVec.from_str("".join("1" if i < d and i % 2 == 0 else "0" for i in range(n)))


def gf2_rank(vectors, n: int) -> int:
    """Rank over GF(2) by Gaussian elimination on int bitsets."""
    basis: list[int] = []  # each with a distinct leading bit
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def gf2_basis_check(g: GeneratorSet) -> bool:
    return gf2_rank([v for v in g.vectors if v], g.n) == g.n


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform: out[x] = sum_y (-1)^{x.y} a[y]."""
    a = np.array(a, dtype=float)
    size = a.size
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < size:
        view = a.reshape(-1, 2, h)
        lo = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = lo - view[:, 1, :]
        h *= 2
    return a


def step_measure(g: GeneratorSet) -> np.ndarray:
    if g.n > TRANSFORM_CAP:
        raise ValueError(f"n={g.n} exceeds transform cap {TRANSFORM_CAP}")
    mu = np.zeros(1 << g.n)
    mu[0] += g.holding
    np.add.at(mu, np.array(g.vectors, dtype=np.int64), (1.0 - g.holding) / g.N)
    return mu


def walsh_spectrum(g: GeneratorSet) -> np.ndarray:
    """lambda_x = sum_i w_i (-1)^{x.V_i} for every character x."""
    return fwht(step_measure(g))


def _check_ergodic(g: GeneratorSet):
    if not gf2_basis_check(g):
        raise ValidationError("generators do not span C_2^n; the walk is not ergodic")


def _tv_from_spectrum(lam: np.ndarray, k: int) -> float:
    size = lam.size
    p = fwht(lam ** k) / size
    return float(0.5 * np.abs(p - 1.0 / size).sum())


def hypercube_tv(g: GeneratorSet, k: int) -> float:
    """Exact TV between the k-step law from 0 and uniform on C_2^n."""
    _check_ergodic(g)
    return _tv_from_spectrum(walsh_spectrum(g), k)


def hypercube_profile(g: GeneratorSet, max_steps: int, stop_below: float | None = None) -> TVProfile:
    _check_ergodic(g)
    lam = walsh_spectrum(g)
    values = []
    for k in range(max_steps + 1):
        values.append(_tv_from_spectrum(lam, k))
        if stop_below is not None and values[-1] <= stop_below:
            break
    return TVProfile(np.arange(len(values)), np.array(values), "tv", f"hypercube(n={g.n}, N={g.N})")


def hypercube_kernel(g: GeneratorSet) -> Kernel:
    """Dense-evolution counterpart of the transform route (2^n states)."""
    states = np.arange(1 << g.n)
    maps = [states] + [states ^ v for v in g.vectors]
    weights = [g.holding] + [(1.0 - g.holding) / g.N] * g.N
    return Kernel.from_maps(maps, weights, label=f"hypercube(n={g.n})")


def basis_equivalence_check(n: int, d_list, max_steps: int | None = None, holding: bool = True) -> dict:
    """Max over k of |TV_spatula(d, k) - TV_ehrenfest(k)| for each basis-forming d.

    Widths failing gcd(d, n) = 1 or the GF(2) rank test are reported under
    ``skipped`` with the reason.
    """
    if max_steps is None:
        max_steps = math.ceil(n * math.log(n)) + 2 * n
    ehrenfest = hypercube_profile(spatula_generators(n, 1, holding), max_steps).values
    gaps, skipped = {}, {}
    for d in d_list:
        g = spatula_generators(n, d, holding)
        if math.gcd(d, n) != 1:
            skipped[d] = "gcd"
        elif not gf2_basis_check(g):
            skipped[d] = "rank"
        else:
            prof = hypercube_profile(g, max_steps).values
            gaps[d] = float(np.max(np.abs(prof - ehrenfest)))
    return {"n": n, "max_steps": max_steps, "gaps": gaps, "skipped": skipped}


def binary_entropy(x: float) -> float:
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def inverse_binary_entropy(y: float) -> float:
    """The x in [0, 1/2] with H(x) = y."""
    if not 0 <= y <= 1:
        raise ValueError("entropy value must lie in [0, 1]")
    if y == 0:
        return 0.0
    if y == 1:
        return 0.5
    return bisect(lambda x: binary_entropy(x) - y, 0.0, 0.5, xtol=1e-15, maxiter=200)


def wilson_threshold(n: int, N: int) -> float:
    """Cutoff location (N/2) ln(1 / (1 - 2 H^-1(n/N))) for N uniform generators on C_2^n."""
    if not N > n >= 1:
        raise ValueError("need N > n >= 1")
    h = inverse_binary_entropy(n / N)
    return 0.5 * N * math.log(1.0 / (1.0 - 2.0 * h))


def wilson_experiment(n: int, N: int, trials: int, seed: int, eps: float = 0.25) -> dict:
    """Mixing times of random N-generator walks on C_2^n relative to the threshold.

    Each trial draws N independent uniform vectors and walks by adding one chosen
    uniformly (no holding). Samples that are not ergodic (rank < n) or are
    periodic (some character equal to -1) are excluded and counted.
    """
    if n > 24:
        raise ValueError("wilson_experiment supports n <= 24")
    T = wilson_threshold(n, N)
    half = math.floor(0.5 * T)
    rng = np.random.default_rng(seed)
    records, excluded = [], 0
    for t in range(trials):
        vecs = tuple(int(v) for v in rng.integers(0, 1 << n, size=N))
        g = GeneratorSet(n, vecs, 0.0)
        if not gf2_basis_check(g):
            excluded += 1
            continue
        lam = walsh_spectrum(g)
        if np.any(lam[1:] <= -1 + 1e-12):
            excluded += 1
            continue
        values = []
        k = 0
        while True:
            values.append(_tv_from_spectrum(lam, k))
            if values[-1] <= eps or k >= 100 * n:
                break
            k += 1
        prof = TVProfile(np.arange(len(values)), np.array(values))
        tmix = mixing_time(prof, eps)
        tv_half = values[half] if half < len(values) else _tv_from_spectrum(lam, half)
        records.append({"trial": t, "tmix": tmix, "ratio": None if tmix is None else tmix / T,
                        "tv_at_half_T": tv_half})
    ratios = [r["ratio"] for r in records if r["ratio"] is not None]
    return {
        "n": n, "N": N, "T": T, "half_T_step": half, "trials": records, "excluded": excluded,
        "median_ratio": float(np.median(ratios)) if ratios else float("nan"),
    }
