"""Nonreversible lifted walk on {0..n-1} x {+, -} and its spectral-gap sweep.

State ``i`` is position i moving right (+); state ``n + i`` is position i
moving left (-). Each step follows the current direction around the ring
0+ -> 1+ -> ... -> (n-1)+ -> (n-1)- -> ... -> 0- -> 0+ with probability
1 - r, and with probability r takes the diagonal edge (i, +) -> (i-1, -),
(i, -) -> (i+1, +), holding at the two ends (0, +) and (n-1, -) where the
diagonal leaves the strip. Both moves are permutations of the 2n states, so
the kernel is doubly stochastic; the holding loops make it aperiodic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import path_kernel
from .kernel import Kernel, TVProfile, mixing_time, spectral_gap
from .measures import tv_distance


@dataclass(frozen=True)
class LiftedSpec:
    n: int
    reversal: float | None = None  # defaults to 1/n

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        r = 1.0 / self.n if self.reversal is None else float(self.reversal)
        if not 0 < r <= 1:
            raise ValueError(f"reversal probability {r} outside (0, 1]")
        object.__setattr__(self, "reversal", r)

    @classmethod
    def with_theta(cls, n: int, theta: float) -> "LiftedSpec":
        return cls(n, theta / n)


def _moves(n: int) -> tuple[np.ndarray, np.ndarray]:
    i = np.arange(n)
    ahead = np.concatenate([np.where(i < n - 1, i + 1, 2 * n - 1),   # (i,+)
                            np.where(i > 0, n + i - 1, 0)])          # (i,-)
    diagonal = np.concatenate([np.where(i > 0, n + i - 1, 0),
                               np.where(i < n - 1, i + 1, 2 * n - 1)])
    return ahead, diagonal


def dhn_kernel(spec: LiftedSpec) -> Kernel:
    ahead, diagonal = _moves(spec.n)
    r = spec.reversal
    return Kernel.from_maps([ahead, diagonal], [1.0 - r, r], label=f"lifted(n={spec.n}, r={r:.6g})")


def position_marginal(p: np.ndarray, n: int) -> np.ndarray:
    return p[:n] + p[n:]


def lifted_profile(spec: LiftedSpec, max_steps: int, start: int = 0,
                   stop_below: float | None = None) -> TVProfile:
    """TV between the position marginal and uniform on {0..n-1}."""
    k = dhn_kernel(spec)
    n = spec.n
    p = np.zeros(2 * n)
    p[start] = 1.0
    u = np.full(n, 1.0 / n)
    values = [tv_distance(position_marginal(p, n), u)]
    for _ in range(max_steps):
        if stop_below is not None and values[-1] <= stop_below:
            break
        p = k.step(p)
        values.append(tv_distance(position_marginal(p, n), u))
    return TVProfile(np.arange(len(values)), np.array(values), "tv", k.label)


def path_tmix(n: int, eps: float = 0.25, start: int = 0) -> int | None:
    k = path_kernel(n)
    p = np.zeros(n)
    p[start] = 1.0
    u = np.full(n, 1.0 / n)
    t = 0
    while tv_distance(p, u) > eps:
        if t > 100 * n * n:
            return None
        p = k.step(p)
        t += 1
    return t


def lifted_tmix(n: int, eps: float = 0.25, theta: float = 1.0) -> int | None:
    return mixing_time(lifted_profile(LiftedSpec.with_theta(n, theta), 100 * n, stop_below=eps), eps)


def lifted_vs_diffusive(n_list, eps: float = 0.25) -> dict:
    """t_mix of the lifted position marginal and of the path walk, with doubling ratios."""
    rows = []
    for n in n_list:
        if n > 4096:
            raise ValueError("n must be <= 4096")
        rows.append((int(n), lifted_tmix(n, eps), path_tmix(n, eps)))
    ratios = []
    for (n1, l1, p1), (n2, l2, p2) in zip(rows, rows[1:]):
        if n2 == 2 * n1:
            ratios.append((n1, l2 / l1, p2 / p1))
    return {"rows": rows, "ratios": ratios}


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` inclusive of stop (within float slack)."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ValueError(f"grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ValueError("grid needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def gap_vs_theta(n: int, theta_grid) -> dict:
    """Spectral gap of the lifted kernel at reversal theta/n for each grid theta."""
    grid = np.asarray(list(theta_grid), dtype=float)
    if grid.size == 0:
        raise ValueError("theta grid is empty")
    if n > 2048:
        raise ValueError("n must be <= 2048")
    gaps = np.array([spectral_gap(dhn_kernel(LiftedSpec.with_theta(n, t))) for t in grid])
    best = int(np.argmax(gaps))
    return {"n": n, "theta": grid, "gap": gaps, "argmax": float(grid[best]), "max_gap": float(gaps[best])}
