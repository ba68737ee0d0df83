"""Generic finite-chain machinery: exact evolution, profiles, spectra."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .measures import DimensionError, Dist, chi_square, get_metric

ROW_TOL = 1e-12
BALANCE_TOL = 1e-10
DENSE_CAP = 4096


class ValidationError(ValueError):
    pass


class SizeError(ValueError):
    pass


class Kernel:
    """Row-stochastic transition operator stored as sparse rows.

    ``rows[i]`` lists ``(j, K(i, j))`` pairs; duplicate targets are summed.
    """

    def __init__(self, matrix, label: str = ""):
        mat = sp.csr_matrix(matrix, dtype=float)
        mat.sum_duplicates()
        mat.eliminate_zeros()
        if mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"kernel must be square, got {mat.shape}")
        if mat.nnz and mat.data.min() < 0:
            raise ValidationError("negative transition probability")
        sums = np.asarray(mat.sum(axis=1)).ravel()
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            raise ValidationError(f"row {bad[0]} sums to {sums[bad[0]]!r}")
        self.matrix = mat
        self.label = label
        self._transpose = mat.T.tocsr()

    @classmethod
    def from_rows(cls, rows: Sequence[Iterable[tuple[int, float]]], label: str = "") -> "Kernel":
        m = len(rows)
        r, c, v = [], [], []
        for i, row in enumerate(rows):
            for j, pr in row:
                if not 0 <= j < m:
                    raise ValidationError(f"target {j} out of range in row {i}")
                r.append(i)
                c.append(j)
                v.append(pr)
        return cls(sp.csr_matrix((v, (r, c)), shape=(m, m)), label)

    @classmethod
    def from_maps(cls, maps: Sequence[np.ndarray], weights: Sequence[float], label: str = "") -> "Kernel":
        """Mixture of deterministic moves: state ``i`` goes to ``maps[t][i]`` w.p. ``weights[t]``."""
        m = len(maps[0])
        rows = np.tile(np.arange(m), len(maps))
        cols = np.concatenate([np.asarray(f) for f in maps])
        vals = np.repeat(np.asarray(weights, dtype=float), m)
        return cls(sp.csr_matrix((vals, (rows, cols)), shape=(m, m)), label)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def rows(self) -> list[list[tuple[int, float]]]:
        mat = self.matrix
        return [
            list(zip(mat.indices[mat.indptr[i]:mat.indptr[i + 1]].tolist(),
                     mat.data[mat.indptr[i]:mat.indptr[i + 1]].tolist()))
            for i in range(self.m)
        ]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0)).ravel()

    def step(self, p: np.ndarray) -> np.ndarray:
        """One left multiplication ``p K``."""
        return self._transpose @ p

    def __matmul__(self, other: "Kernel") -> "Kernel":
        return Kernel(self.matrix @ other.matrix, f"{self.label}*{other.label}")

    def __repr__(self):
        return f"Kernel(m={self.m}, nnz={self.matrix.nnz}, label={self.label!r})"


@dataclass(frozen=True)
class TVProfile:
    steps: np.ndarray
    values: np.ndarray
    metric: str = "tv"
    label: str = ""

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=int)
        values = np.asarray(self.values, dtype=float)
        if steps.shape != values.shape:
            raise DimensionError("steps and values differ in length")
        if steps.size > 1 and np.any(np.diff(steps) <= 0):
            raise ValueError("steps must be strictly increasing")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.steps.size

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "value", "metric", "chain"])
        for s, v in zip(self.steps, self.values):
            w.writerow([int(s), repr(float(v)), self.metric, self.label])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns psi_j, orthonormal in l2(pi)
    pi: np.ndarray = field(repr=False)


def _as_vec(p, m: int) -> np.ndarray:
    v = p.weights if isinstance(p, Dist) else np.asarray(p, dtype=float)
    if v.shape != (m,):
        raise DimensionError(f"distribution has {v.size} states, kernel has {m}")
    return v


def evolve(k: Kernel, start, steps: int) -> Dist:
    if steps < 0:
        raise ValueError("steps must be >= 0")
    p = _as_vec(start, k.m).copy()
    for _ in range(steps):
        p = k.step(p)
    return Dist(p)


def stationarity_residual(k: Kernel, pi) -> float:
    v = _as_vec(pi, k.m)
    return float(np.max(np.abs(k.step(v) - v)))


def is_stationary(k: Kernel, pi, tol: float = BALANCE_TOL) -> bool:
    return stationarity_residual(k, pi) <= tol


def balance_residual(k: Kernel, pi) -> float:
    """max |pi(i)K(i,j) - pi(j)K(j,i)|."""
    v = _as_vec(pi, k.m)
    flow = sp.diags(v) @ k.matrix
    diff = flow - flow.T
    return float(abs(diff).max()) if diff.nnz else 0.0


def is_reversible(k: Kernel, pi, tol: float = BALANCE_TOL) -> bool:
    return balance_residual(k, pi) <= tol


def tv_profile(k: Kernel, start, pi, max_steps: int, metric: str = "tv",
               stop_below: float | None = None) -> TVProfile:
    """Distance from the l-step law to ``pi`` for l = 0..max_steps.

    With ``stop_below`` the profile ends at the first value at or below it.
    """
    if not is_stationary(k, pi):
        raise ValidationError(f"pi is not stationary for {k.label or 'kernel'}")
    dist = get_metric(metric)
    target = _as_vec(pi, k.m)
    p = _as_vec(start, k.m).copy()
    values = []
    for l in range(max_steps + 1):
        if l:
            p = k.step(p)
        values.append(dist(p, target))
        if stop_below is not None and values[-1] <= stop_below:
            break
    return TVProfile(np.arange(len(values)), np.array(values), metric, k.label)


def mixing_time(profile: TVProfile, eps: float) -> int | None:
    """First recorded step whose distance is at most ``eps``; None if never."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    hit = np.flatnonzero(profile.values <= eps)
    return int(profile.steps[hit[0]]) if hit.size else None


def time_to_mix(k: Kernel, start, pi, eps: float = 0.25, max_steps: int = 10**6,
                metric: str = "tv") -> int | None:
    return mixing_time(tv_profile(k, start, pi, max_steps, metric, stop_below=eps), eps)


def spectral_decomposition(k: Kernel, pi) -> SpectralData:
    """Real spectrum of a reversible kernel via D^1/2 K D^-1/2 symmetrization."""
    if k.m > DENSE_CAP:
        raise SizeError(f"{k.m} states exceeds dense cap {DENSE_CAP}")
    v = _as_vec(pi, k.m)
    if np.any(v <= 0):
        raise ValidationError("pi must be strictly positive")
    if not is_reversible(k, v):
        raise ValidationError("kernel is not reversible w.r.t. pi; use subdominant_modulus")
    root = np.sqrt(v)
    sym = root[:, None] * k.dense() / root[None, :]
    sym = 0.5 * (sym + sym.T)
    lam, vec = np.linalg.eigh(sym)
    order = np.argsort(lam)[::-1]
    lam, vec = lam[order], vec[:, order]
    psi = vec / root[:, None]
    # fix the sign so the top eigenvector is +1, not -1
    psi[:, 0] *= np.sign(psi[0, 0])
    return SpectralData(lam, psi, v)


def chi_square_spectral(s: SpectralData, i: int, l: int) -> float:
    """sum_{j>=2} lambda_j^(2l) psi_j(i)^2."""
    m = s.eigenvalues.size
    if not 0 <= i < m:
        raise IndexError(f"state {i} out of range 0..{m - 1}")
    if l < 0:
        raise ValueError("l must be >= 0")
    lam = s.eigenvalues[1:]
    return float(np.sum(lam ** (2 * l) * s.eigenvectors[i, 1:] ** 2))


def chi_square_direct(k: Kernel, pi, i: int, l: int) -> float:
    return chi_square(evolve(k, Dist.point(k.m, i), l), pi)


def subdominant_modulus(k: Kernel, cap: int = DENSE_CAP) -> float:
    """Largest |lambda| after removing one eigenvalue equal to 1 (complex spectrum allowed)."""
    if k.m > cap:
        raise SizeError(f"{k.m} states exceeds dense cap {cap}")
    if k.m == 1:
        return 0.0
    lam = np.linalg.eigvals(k.dense())
    drop = np.argmin(np.abs(lam - 1.0))
    return float(min(1.0, np.max(np.abs(np.delete(lam, drop)))))


def spectral_gap(k: Kernel, cap: int = DENSE_CAP) -> float:
    return 1.0 - subdominant_modulus(k, cap)


def random_reversible_kernel(m: int, rng: np.random.Generator, density: float = 0.5) -> tuple[Kernel, np.ndarray]:
    """Metropolis chain for a random positive target over a random symmetric proposal graph.

    Returns ``(kernel, pi)`` with detailed balance holding exactly up to rounding.
    """
    pi = rng.uniform(0.1, 1.0, m)
    pi /= pi.sum()
    w = rng.uniform(0.0, 1.0, (m, m)) * (rng.uniform(size=(m, m)) < density)
    w = np.triu(w, 1)
    w = w + w.T
    # a ring keeps the proposal graph connected
    ring = np.arange(m)
    w[ring, (ring + 1) % m] += 0.1
    w[(ring + 1) % m, ring] += 0.1
    q = w / w.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q > 0, (pi[None, :] * q.T) / (pi[:, None] * q), 0.0)
    k = q * np.minimum(1.0, ratio)
    np.fill_diagonal(k, 0.0)
    np.fill_diagonal(k, np.clip(1.0 - k.sum(axis=1), 0.0, None))
    return Kernel(k, label=f"random-reversible(m={m})"), pi
