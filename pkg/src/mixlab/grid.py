"""Diffusive walks: the path, lattice points of a region, contingency tables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .kernel import Kernel, ValidationError

TABLE_CAP = 200_000


def path_kernel(n: int) -> Kernel:
    """Simple walk on {0..n-1}: step left/right w.p. 1/2, hold 1/2 at the two ends."""
    if n < 2:
        raise ValueError("path needs n >= 2")
    i = np.arange(n)
    left = np.maximum(i - 1, 0)
    right = np.minimum(i + 1, n - 1)
    return Kernel.from_maps([left, right], [0.5, 0.5], label=f"path(n={n})")


@dataclass(frozen=True)
class LatticeRegion:
    """Lattice points of a region in Z^d with a point <-> state index map."""

    points: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("region is empty")
        if len(set(self.points)) != len(self.points):
            raise ValueError("region points must be distinct")
        if len({len(p) for p in self.points}) != 1:
            raise ValueError("points have mixed dimensions")

    @property
    def d(self) -> int:
        return len(self.points[0])

    @property
    def index(self) -> dict[tuple[int, ...], int]:
        return {p: i for i, p in enumerate(self.points)}

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_predicate(cls, inside: Callable[[tuple[int, ...]], bool],
                       lo: Sequence[int], hi: Sequence[int]) -> "LatticeRegion":
        """Materialize the points of the box [lo, hi] (inclusive) satisfying ``inside``."""
        axes = [range(a, b + 1) for a, b in zip(lo, hi)]
        return cls(tuple(p for p in itertools.product(*axes) if inside(p)))

    @classmethod
    def box(cls, *sides: int) -> "LatticeRegion":
        return cls.from_predicate(lambda p: True, [1] * len(sides), sides)

    @classmethod
    def disc(cls, radius: float) -> "LatticeRegion":
        r = int(np.floor(radius))
        return cls.from_predicate(lambda p: p[0] ** 2 + p[1] ** 2 <= radius ** 2, (-r, -r), (r, r))


def lattice_kernel(region: LatticeRegion) -> Kernel:
    """Propose one of the 2d unit neighbours uniformly; hold if it falls outside."""
    index = region.index
    d = region.d
    m = len(region)
    rows, cols = [], []
    for i, p in enumerate(region.points):
        for axis in range(d):
            for sign in (-1, 1):
                q = list(p)
                q[axis] += sign
                rows.append(i)
                cols.append(index.get(tuple(q), i))
    mat = sp.csr_matrix((np.full(len(rows), 1.0 / (2 * d)), (rows, cols)), shape=(m, m))
    adjacency = mat - sp.diags(mat.diagonal())
    ncomp, _ = connected_components(adjacency, directed=False)
    if ncomp != 1:
        raise ValidationError(f"region splits into {ncomp} components under unit steps")
    return Kernel(mat, label=f"lattice(d={d}, m={m})")


@dataclass(frozen=True)
class TableSpace:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    tables: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def index(self) -> dict:
        return {t: i for i, t in enumerate(self.tables)}

    def __len__(self):
        return len(self.tables)


def _compositions(total: int, caps: Sequence[int]):
    """All non-negative integer vectors summing to ``total`` with entry j <= caps[j]."""
    if len(caps) == 1:
        if total <= caps[0]:
            yield (total,)
        return
    rest = sum(caps[1:])
    for x in range(max(0, total - rest), min(total, caps[0]) + 1):
        for tail in _compositions(total - x, caps[1:]):
            yield (x,) + tail


def _fill(rows, cols, cap, out):
    if len(rows) == 1:
        out.append((tuple(cols),))
        return
    for first in _compositions(rows[0], cols):
        remaining = tuple(c - x for c, x in zip(cols, first))
        sub = []
        _fill(rows[1:], remaining, cap, sub)
        out.extend((first,) + t for t in sub)
        if len(out) > cap:
            raise ValueError(f"table space exceeds cap of {cap}")


def table_space(r: Sequence[int], c: Sequence[int], cap: int = TABLE_CAP) -> TableSpace:
    r, c = tuple(int(x) for x in r), tuple(int(x) for x in c)
    if min(r + c) <= 0:
        raise ValueError("margins must be positive")
    if sum(r) != sum(c):
        raise ValueError(f"margin mismatch: row total {sum(r)} != column total {sum(c)}")
    out: list = []
    _fill(r, c, cap, out)
    return TableSpace(r, c, tuple(out))


def table_kernel(ts: TableSpace) -> Kernel:
    """Pick a row pair, a column pair and a sign uniformly; add the +-/-+ pattern if legal."""
    index = ts.index
    row_pairs = list(itertools.combinations(range(len(ts.rows)), 2))
    col_pairs = list(itertools.combinations(range(len(ts.cols)), 2))
    if not row_pairs or not col_pairs:
        m = len(ts)
        return Kernel(sp.identity(m, format="csr"), label="tables(trivial)")
    w = 1.0 / (2 * len(row_pairs) * len(col_pairs))
    src, dst = [], []
    for s, t in enumerate(ts.tables):
        for (a, b), (x, y), sign in itertools.product(row_pairs, col_pairs, (1, -1)):
            if min(t[a][x] + sign, t[b][y] + sign, t[a][y] - sign, t[b][x] - sign) < 0:
                dst.append(s)
            else:
                new = [list(row) for row in t]
                new[a][x] += sign
                new[b][y] += sign
                new[a][y] -= sign
                new[b][x] -= sign
                dst.append(index[tuple(tuple(row) for row in new)])
            src.append(s)
    m = len(ts)
    mat = sp.csr_matrix((np.full(len(src), w), (src, dst)), shape=(m, m))
    return Kernel(mat, label=f"tables(r={ts.rows}, c={ts.cols})")
