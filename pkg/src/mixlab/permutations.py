"""Exact walks on the symmetric group, Mallows scans and shuffle test statistics.

Permutations are 0-based one-line tuples ``s`` with ``s[i] = s(i)``.
Composition is ``(t s)(i) = t(s(i))``, i.e. ``t[s]`` on arrays. Measures are
dense vectors over all n! permutations in lexicographic (Lehmer-rank) order.
"""

from __future__ import annotations

import bisect
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .kernel import Kernel, TVProfile, is_stationary, mixing_time, tv_profile
from .measures import Dist, tv_distance

DENSE_N = 8


def _check_perm(sigma) -> tuple[int, ...]:
    s = tuple(int(x) for x in sigma)
    if sorted(s) != list(range(len(s))):
        raise ValueError(f"not a permutation of 0..{len(s) - 1}: {sigma!r}")
    return s


def perm_rank(sigma) -> int:
    """Lehmer-code rank; the identity has rank 0 and rank follows lexicographic order."""
    s = _check_perm(sigma)
    n = len(s)
    rank = 0
    for i, x in enumerate(s):
        smaller = sum(1 for y in s[i + 1:] if y < x)
        rank += smaller * math.factorial(n - 1 - i)
    return rank


def perm_unrank(n: int, r: int) -> tuple[int, ...]:
    if not 0 <= r < math.factorial(n):
        raise ValueError(f"rank {r} out of range for n={n}")
    pool = list(range(n))
    out = []
    for i in range(n - 1, -1, -1):
        q, r = divmod(r, math.factorial(i))
        out.append(pool.pop(q))
    return tuple(out)


@lru_cache(maxsize=None)
def all_perms(n: int) -> np.ndarray:
    """All n! permutations, row r having rank r."""
    if n > DENSE_N:
        raise ValueError(f"dense tables limited to n <= {DENSE_N}")
    arr = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _factorial_weights(n: int) -> np.ndarray:
    return np.array([math.factorial(n - 1 - i) for i in range(n)], dtype=np.int64)


def rank_rows(perms: np.ndarray) -> np.ndarray:
    """Vectorized Lehmer rank of each row."""
    perms = np.asarray(perms)
    n = perms.shape[1]
    codes = np.zeros_like(perms)
    for i in range(n - 1):
        codes[:, i] = (perms[:, i + 1:] < perms[:, i:i + 1]).sum(axis=1)
    return codes @ _factorial_weights(n)


def inversions(sigma) -> int:
    s = _check_perm(sigma)
    return sum(1 for i in range(len(s)) for j in range(i + 1, len(s)) if s[i] > s[j])


@lru_cache(maxsize=None)
def inversion_table(n: int) -> np.ndarray:
    p = all_perms(n)
    return sum((p[:, i + 1:] < p[:, i:i + 1]).sum(axis=1) for i in range(n))


@lru_cache(maxsize=None)
def cycle_types(n: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for s in all_perms(n):
        seen = [False] * n
        lengths = []
        for i in range(n):
            if not seen[i]:
                j, c = i, 0
                while not seen[j]:
                    seen[j] = True
                    j = s[j]
                    c += 1
                lengths.append(c)
        out.append(tuple(sorted(lengths, reverse=True)))
    return tuple(out)


class GroupMeasure:
    """Probability measure on S_n, dense over n! ranks."""

    def __init__(self, n: int, weights):
        if not 1 <= n <= DENSE_N:
            raise ValueError(f"dense group measures need 1 <= n <= {DENSE_N}")
        w = np.asarray(weights, dtype=float)
        if w.shape != (math.factorial(n),):
            raise ValueError(f"expected {math.factorial(n)} weights, got {w.shape}")
        self.n = n
        self.dist = Dist(w)

    @property
    def weights(self) -> np.ndarray:
        return self.dist.weights

    @classmethod
    def uniform(cls, n: int) -> "GroupMeasure":
        return cls(n, np.full(math.factorial(n), 1.0 / math.factorial(n)))

    @classmethod
    def delta(cls, sigma) -> "GroupMeasure":
        s = _check_perm(sigma)
        w = np.zeros(math.factorial(len(s)))
        w[perm_rank(s)] = 1.0
        return cls(len(s), w)

    @classmethod
    def from_masses(cls, n: int, masses: dict) -> "GroupMeasure":
        w = np.zeros(math.factorial(n))
        for s, m in masses.items():
            w[perm_rank(s)] += m
        return cls(n, w)

    def __call__(self, sigma) -> float:
        return float(self.weights[perm_rank(sigma)])

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights)

    def tv_to_uniform(self) -> float:
        return tv_distance(self.weights, np.full(self.weights.size, 1.0 / self.weights.size))

    def __mul__(self, other: "GroupMeasure") -> "GroupMeasure":
        return convolve(self, other)

    def power(self, k: int) -> "GroupMeasure":
        out = GroupMeasure.delta(range(self.n))
        for _ in range(k):
            out = convolve(out, self)
        return out

    def powers(self, k_max: int):
        """Yield Q^{*0}, Q^{*1}, ..., Q^{*k_max}."""
        out = GroupMeasure.delta(range(self.n))
        yield out
        for _ in range(k_max):
            out = convolve(out, self)
            yield out

    def __repr__(self):
        return f"GroupMeasure(n={self.n}, support={self.support().size})"


def convolve(q: GroupMeasure, r: GroupMeasure) -> GroupMeasure:
    """(Q * R)(s) = sum_eta Q(eta) R(s eta^-1): draw eta from Q, then apply a draw from R."""
    if q.n != r.n:
        raise ValueError(f"size mismatch: S_{q.n} vs S_{r.n}")
    perms = all_perms(q.n)
    out = np.zeros(perms.shape[0])
    qs, rs = q.support(), r.support()
    if qs.size <= rs.size:
        for e in qs:
            # rho ranges over all permutations: targets rho o eta
            out[rank_rows(perms[:, perms[e]])] += q.weights[e] * r.weights
    else:
        for t in rs:
            out[rank_rows(perms[t][perms])] += r.weights[t] * q.weights
    out = np.clip(out, 0.0, None)
    return GroupMeasure(q.n, out / out.sum())


def rotation(n: int, j: int) -> tuple[int, ...]:
    return tuple((i + j) % n for i in range(n))


def cut_measure(n: int) -> GroupMeasure:
    """Mass 1/n on each of the n cyclic rotations."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return GroupMeasure.from_masses(n, {rotation(n, j): 1.0 / n for j in range(n)})


def transposition(n: int, i: int, j: int) -> tuple[int, ...]:
    s = list(range(n))
    s[i], s[j] = s[j], s[i]
    return tuple(s)


def random_transpositions_measure(n: int) -> GroupMeasure:
    """Pick two positions independently and uniformly, swap them: 1/n on id, 2/n^2 per transposition."""
    if not 2 <= n <= DENSE_N:
        raise ValueError(f"need 2 <= n <= {DENSE_N}")
    masses = {tuple(range(n)): 1.0 / n}
    for i, j in itertools.combinations(range(n), 2):
        masses[transposition(n, i, j)] = 2.0 / n ** 2
    return GroupMeasure.from_masses(n, masses)


def top_swap_or_cut_measure(n: int, holding: float = 0.0) -> GroupMeasure:
    """Swap the top two cards or move the top card to the bottom, 1/2 each.

    For even n both moves are odd permutations and the walk has period 2;
    ``holding`` puts that much mass on the identity and splits the rest evenly.
    """
    if not 3 <= n <= DENSE_N:
        raise ValueError(f"need 3 <= n <= {DENSE_N}")
    if not 0 <= holding < 1:
        raise ValueError("holding must be in [0, 1)")
    half = (1.0 - holding) / 2
    masses = {transposition(n, 0, 1): half, rotation(n, 1): half}
    if holding:
        masses[tuple(range(n))] = holding
    return GroupMeasure.from_masses(n, masses)


def gsr_measure(n: int) -> GroupMeasure:
    """One Gilbert-Shannon-Reeds riffle built from cuts and interleavings.

    Cut after c cards with probability C(n, c)/2^n, then choose the positions
    of the top packet uniformly among the C(n, c) interleavings.
    """
    w = np.zeros(math.factorial(n))
    for c in range(n + 1):
        for top_pos in itertools.combinations(range(n), c):
            deck = [0] * n
            top, bottom = iter(range(c)), iter(range(c, n))
            chosen = set(top_pos)
            for pos in range(n):
                deck[pos] = next(top) if pos in chosen else next(bottom)
            w[perm_rank(deck)] += 1.0
    return GroupMeasure(n, w / 2 ** n)


@lru_cache(maxsize=None)
def eulerian_row(n: int) -> tuple[int, ...]:
    """A(n, r) for r = 1..n: permutations of n with exactly r rising sequences."""
    row = [1]
    for m in range(2, n + 1):
        prev = row + [0]
        row = [(r * prev[r - 1]) + ((m - r + 1) * prev[r - 2] if r >= 2 else 0) for r in range(1, m + 1)]
    return tuple(row)


def riffle_tv_fraction(n: int, k: int) -> Fraction:
    """Exact TV to uniform after k riffles, as a fraction."""
    a = 2 ** k
    total = Fraction(0)
    u = Fraction(1, math.factorial(n))
    for r, count in enumerate(eulerian_row(n), start=1):
        prob = Fraction(math.comb(a + n - r, n), a ** n)
        total += count * abs(prob - u)
    return total / 2


def riffle_tv_exact(n: int, k: int) -> float:
    if not 1 <= n <= 100 or not 0 <= k <= 30:
        raise ValueError("riffle_tv_exact supports n <= 100, k <= 30")
    return float(riffle_tv_fraction(n, k))


def riffle_cutoff(n: int, threshold: float = 0.5, k_max: int = 30) -> int | None:
    """First k whose exact riffle TV is below ``threshold``."""
    for k in range(k_max + 1):
        if riffle_tv_exact(n, k) < threshold:
            return k
    return None


def fulman_cut_check(n: int, k_max: int, q: GroupMeasure | None = None) -> dict:
    """TV profiles of Q^{*k} and of Q^{*k} followed by a random cut (Q = GSR riffle by default)."""
    if n > 6:
        raise ValueError("fulman_cut_check is dense and limited to n <= 6")
    q = q or gsr_measure(n)
    c = cut_measure(n)
    plain, cut = [], []
    for qk in q.powers(k_max):
        plain.append(qk.tv_to_uniform())
        cut.append(convolve(qk, c).tv_to_uniform())
    plain, cut = np.array(plain), np.array(cut)
    return {"k": np.arange(k_max + 1), "plain": plain, "cut": cut, "gap": plain - cut}


def mallows_z(n: int, theta: float) -> float:
    """prod_{i=1}^n (1 + theta + ... + theta^(i-1))."""
    return math.prod(sum(theta ** j for j in range(i)) for i in range(1, n + 1))


def mallows_distribution(n: int, theta: float) -> GroupMeasure:
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    w = theta ** inversion_table(n).astype(float)
    z = w.sum()
    if abs(z - mallows_z(n, theta)) > 1e-9 * z:
        raise AssertionError("normalizing constant disagrees with product formula")
    return GroupMeasure(n, w / z)


def _value_swap_ranks(n: int, i: int) -> np.ndarray:
    """Rank of (i, i+1) s for every s: swap the values i and i+1."""
    tau = np.arange(n)
    tau[i], tau[i + 1] = i + 1, i
    return rank_rows(tau[all_perms(n)])


def metropolis_kernel(n: int, theta: float, i: int) -> Kernel:
    """Propose (i, i+1) s; accept if inversions drop, else with probability theta."""
    inv = inversion_table(n)
    m = inv.size
    target = _value_swap_ranks(n, i)
    accept = np.where(inv[target] < inv, 1.0, theta)
    src = np.arange(m)
    mat = sp.csr_matrix((np.concatenate([accept, 1.0 - accept]),
                         (np.concatenate([src, src]), np.concatenate([target, src]))), shape=(m, m))
    return Kernel(mat, label=f"metropolis(n={n}, i={i})")


def systematic_schedule(n: int) -> list[int]:
    """(1,2), (2,3), ..., (n-1,n), (n-2,n-1), ..., (1,2) as 0-based lower indices."""
    up = list(range(n - 1))
    return up + up[-2::-1]


@dataclass(frozen=True)
class ScanKernel:
    n: int
    theta: float
    mode: str
    schedule: tuple[int, ...]
    kernel: Kernel

    @property
    def cost(self) -> int:
        """Single-site proposals per application."""
        return len(self.schedule) if self.mode == "systematic" else 1


def scan_kernel(n: int, theta: float, mode: str = "random") -> ScanKernel:
    if n > 7:
        raise ValueError("scan kernels are limited to n <= 7")
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    pieces = [metropolis_kernel(n, theta, i) for i in range(n - 1)]
    if mode == "random":
        mat = sum(k.matrix for k in pieces) / (n - 1)
        sched = tuple(range(n - 1))
    elif mode == "systematic":
        sched = tuple(systematic_schedule(n))
        mat = sp.identity(pieces[0].m, format="csr")
        for i in sched:
            mat = mat @ pieces[i].matrix
    else:
        raise ValueError(f"mode must be 'random' or 'systematic', not {mode!r}")
    kern = Kernel(mat, label=f"{mode}-scan(n={n}, theta={theta})")
    pi = mallows_distribution(n, theta).weights
    if not is_stationary(kern, pi):
        raise AssertionError("scan kernel does not fix the Mallows law")
    return ScanKernel(n, theta, mode, sched, kern)


def scan_profile(sk: ScanKernel, max_steps: int, start=None, stop_below: float | None = None) -> TVProfile:
    """TV to the Mallows law from ``start`` (the reversal by default)."""
    start = tuple(range(sk.n))[::-1] if start is None else start
    pi = mallows_distribution(sk.n, sk.theta).weights
    return tv_profile(sk.kernel, Dist.point(pi.size, perm_rank(start)), pi, max_steps, stop_below=stop_below)


def scan_comparison(n: int, theta: float, eps: float = 0.25, max_steps: int = 100_000) -> dict:
    """Systematic t_mix in sweeps times sweep length, against random-scan t_mix in proposals."""
    sys_k = scan_kernel(n, theta, "systematic")
    rnd_k = scan_kernel(n, theta, "random")
    t_sys = mixing_time(scan_profile(sys_k, max_steps, stop_below=eps), eps)
    t_rnd = mixing_time(scan_profile(rnd_k, max_steps, stop_below=eps), eps)
    ratio = None if not (t_sys and t_rnd) else t_sys * sys_k.cost / t_rnd
    return {"n": n, "theta": theta, "sweep_cost": sys_k.cost, "tmix_systematic_sweeps": t_sys,
            "tmix_random_steps": t_rnd, "ratio": ratio}


def adjacency_statistic(perm) -> int:
    """#{i : |perm[i] - perm[i+1]| = 1}."""
    a = np.asarray(perm)
    return int(np.sum(np.abs(np.diff(a)) == 1))


def lis_length(perm) -> int:
    """Longest increasing subsequence by patience sorting."""
    piles: list = []
    for x in perm:
        j = bisect.bisect_left(piles, x)
        if j == len(piles):
            piles.append(x)
        else:
            piles[j] = x
    return len(piles)


STATISTICS = {"adjacency": adjacency_statistic, "lis": lis_length}


def uniform_permutations(n: int, samples: int, seed: int, batch: int = 10_000):
    """Yield arrays of uniform permutations (rows), reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        yield rng.permuted(np.tile(np.arange(n), (b, 1)), axis=1)
        done += b


def null_distribution(stat: str, n: int, samples: int, seed: int) -> dict[int, int]:
    """Monte Carlo histogram {value: count} of a statistic under uniform shuffles."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    try:
        fn = STATISTICS[stat]
    except KeyError:
        raise ValueError(f"unknown statistic {stat!r}") from None
    counts: Counter = Counter()
    for block in uniform_permutations(n, samples, seed):
        if stat == "adjacency":
            vals = (np.abs(np.diff(block, axis=1)) == 1).sum(axis=1)
            counts.update(vals.tolist())
        else:
            counts.update(fn(row) for row in block.tolist())
    return dict(sorted(counts.items()))


def parse_permutations(text: str) -> list[tuple[int, ...]]:
    """One 1-based comma-separated permutation per line; returns 0-based tuples."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            perm = tuple(int(x) - 1 for x in line.split(","))
            out.append(_check_perm(perm))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out
