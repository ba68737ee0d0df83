"""Experiment registry, parameter schemas and the declarative pass/fail table."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import affine, grid, hypercube, lifted, permutations as perms
from .kernel import (
    Kernel, evolve, random_reversible_kernel, spectral_decomposition, chi_square_spectral,
    chi_square_direct, time_to_mix,
)
from .measures import Dist, chi_square, separation, tv_distance

# Random numbers: numpy PCG64 seeded through SeedSequence(seed).spawn(...) per task.

# claim id -> measured key -> (low, high); None leaves a side open.
BANDS: dict[str, dict[str, tuple[float | None, float | None]]] = {
    "AC-1": {"path_ratio": (3.4, 4.6)},
    "AC-2": {"disc_ratio": (3.0, 5.0), "table_worst_tv": (None, 0.01)},
    "AC-3": {"cdg_error": (None, 1e-8), "doubling_fraction": (0.9, None), "plain_min_tv": (0.9, None)},
    "AC-4": {"lifted_ratio": (1.6, 2.4), "path_ratio": (3.4, 4.6), "column_sum_error": (None, 1e-12)},
    "AC-5": {"gap_margin": (0.0, None)},
    "AC-6": {"stationarity_error": (None, 1e-10), "cost_ratio": (1 / 8, 8.0)},
    "AC-7": {"first_k_below_half": (7, 7), "closed_vs_dense_error": (None, 1e-12)},
    "AC-8": {"cut_contraction_violation": (None, 0.0), "crossing_gap": (None, 1)},
    "AC-9": {"tv_at_k": (None, 2 * math.exp(-2)), "class_function_error": (None, 1e-12)},
    "AC-10": {"equivalence_gap": (None, 1e-10), "transform_vs_dense_error": (None, 1e-12),
              "wilson_constant_error": (None, 5e-5), "wilson_median_ratio": (0.5, 2.0)},
    "AC-11": {"adjacency_mean_error": (None, 0.05), "lis_checks_failed": (0, 0)},
    "AC-12": {"chi2_identity_residual": (None, 1e-8), "mass_error": (None, 1e-12),
              "inequality_violations": (0, 0)},
}


class UsageError(ValueError):
    pass


def _intlist(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _floatlist(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


@dataclass
class Param:
    kind: Callable
    default: Any
    check: Callable[[Any], bool] = lambda v: True
    help: str = ""


@dataclass
class Experiment:
    name: str
    claim: str
    params: dict[str, Param]
    fn: Callable[..., tuple[dict, dict[str, str]]]
    doc: str = ""
    stochastic: bool = False

    def schema(self) -> str:
        return ", ".join(f"--{k} ({p.help or p.kind.__name__}, default {p.default})"
                         for k, p in self.params.items())


@dataclass
class ExperimentSpec:
    name: str
    parameters: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out: Path | None = None


@dataclass
class ResultBundle:
    name: str
    claim: str
    csvs: dict[str, str]
    measured: dict[str, float]
    checks: dict[str, bool]
    seconds: float

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def summary(self) -> dict:
        return {"experiment": self.name, "claim": self.claim, "measured": self.measured,
                "bands": {k: list(v) for k, v in BANDS[self.claim].items()},
                "checks": self.checks, "passed": self.passed, "seconds": round(self.seconds, 3)}

    def write(self, out: Path):
        out.mkdir(parents=True, exist_ok=True)
        for fname, text in self.csvs.items():
            (out / fname).write_text(text)
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2, default=float) + "\n")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _doubling_ratios(values):
    return [b / a for a, b in zip(values, values[1:])]


def exp_path_scaling(n_list, eps):
    rows = [(n, lifted.path_tmix(n, eps)) for n in n_list]
    ratios = _doubling_ratios([t for _, t in rows])
    return {"path_ratio": ratios}, {"path_tmix.csv": _csv(["n", "tmix"], rows)}


def exp_lattice_scaling(radii, rows, cols, eps):
    out = []
    for r in radii:
        region = grid.LatticeRegion.disc(r)
        k = grid.lattice_kernel(region)
        start = region.index[(-r, 0)]
        out.append((r, len(region), time_to_mix(k, Dist.point(k.m, start), Dist.uniform(k.m), eps)))
    ts = grid.table_space(rows, cols)
    tk = grid.table_kernel(ts)
    m = len(ts)
    u = Dist.uniform(m)
    steps = 10 * m * m
    worst = max(tv_distance(evolve(tk, Dist.point(m, i), steps), u) for i in range(m))
    return ({"disc_ratio": _doubling_ratios([t for *_, t in out]), "table_worst_tv": worst},
            {"disc_tmix.csv": _csv(["radius", "states", "tmix"], out)})


def exp_doubling(count, lo, hi, factor, tv_eps, seed):
    ps = affine.sample_odd(lo, hi, count, seed)
    res = affine.doubling_speedup_experiment(ps, factor, tv_eps)
    return ({"cdg_error": abs(affine.cdg_constant() - 1.01999186), "cdg_constant": affine.cdg_constant(),
             "doubling_fraction": res["fraction"], "plain_min_tv": min(r[3] for r in res["rows"])},
            {"doubling.csv": _csv(["p", "l", "tv_doubling", "tv_plain"], res["rows"])})


def exp_lifted(n_list, eps):
    res = lifted.lifted_vs_diffusive(n_list, eps)
    col_err = max(float(np.max(np.abs(lifted.dhn_kernel(lifted.LiftedSpec(n)).column_sums() - 1)))
                  for n in n_list)
    return ({"lifted_ratio": [r[1] for r in res["ratios"]], "path_ratio": [r[2] for r in res["ratios"]],
             "column_sum_error": col_err},
            {"lifted_vs_path.csv": _csv(["n", "tmix_lifted", "tmix_path"], res["rows"])})


def exp_gap(n, theta_grid):
    grid_vals = lifted.parse_grid(theta_grid)
    res = lifted.gap_vs_theta(n, grid_vals)
    at_one = float(res["gap"][np.argmin(np.abs(grid_vals - 1.0))])
    return ({"gap_margin": res["max_gap"] - at_one, "argmax_theta": res["argmax"], "max_gap": res["max_gap"]},
            {"gap_vs_theta.csv": _csv(["theta", "gap"], zip(grid_vals.tolist(), res["gap"].tolist()))})


def exp_scans(n, thetas, eps):
    rows, stat_err, ratios = [], 0.0, []
    for th in thetas:
        pi = perms.mallows_distribution(n, th).weights
        for mode in ("random", "systematic"):
            sk = perms.scan_kernel(n, th, mode)
            stat_err = max(stat_err, float(np.max(np.abs(sk.kernel.step(pi) - pi))))
        c = perms.scan_comparison(n, th, eps)
        ratios.append(c["ratio"])
        rows.append((th, c["tmix_systematic_sweeps"], c["sweep_cost"], c["tmix_random_steps"], c["ratio"]))
    return ({"stationarity_error": stat_err, "cost_ratio": ratios},
            {"scans.csv": _csv(["theta", "tmix_sweeps", "sweep_cost", "tmix_random", "ratio"], rows)})


def exp_riffle(n, dense_max):
    rows = [(k, perms.riffle_tv_exact(n, k)) for k in range(0, 16)]
    first = next(k for k, v in rows if v < 0.5)
    err = 0.0
    for m in range(2, dense_max + 1):
        for k, qk in enumerate(perms.gsr_measure(m).powers(10)):
            err = max(err, abs(qk.tv_to_uniform() - perms.riffle_tv_exact(m, k)))
    return ({"first_k_below_half": first, "closed_vs_dense_error": err},
            {"riffle.csv": _csv(["k", "tv"], rows)})


def exp_cuts(samples, n_fulman, k_max, seed):
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    c4 = perms.cut_measure(4)
    worst = -np.inf
    for _ in range(samples):
        q = perms.GroupMeasure(4, rng.dirichlet(np.ones(24)))
        worst = max(worst, perms.convolve(q, c4).tv_to_uniform() - q.tv_to_uniform())
    f = perms.fulman_cut_check(n_fulman, k_max)
    cross = [int(np.argmax(f[key] <= 0.25)) for key in ("plain", "cut")]
    rows = zip(f["k"].tolist(), f["plain"].tolist(), f["cut"].tolist())
    return ({"cut_contraction_violation": max(0.0, worst - 1e-12), "crossing_gap": abs(cross[0] - cross[1])},
            {"fulman.csv": _csv(["k", "tv_riffle", "tv_riffle_then_cut"], rows)})


def class_function_error(q: perms.GroupMeasure) -> float:
    types = perms.cycle_types(q.n)
    groups: dict = {}
    for w, t in zip(q.weights, types):
        groups.setdefault(t, []).append(w)
    return max(max(v) - min(v) for v in groups.values())


def exp_transpositions(n, class_n, class_k):
    k = math.ceil(0.5 * n * math.log(n) + 2 * n)
    q = perms.random_transpositions_measure(n)
    rows = [(j, qk.tv_to_uniform()) for j, qk in enumerate(q.powers(k))]
    cls_err = max(class_function_error(qk)
                  for qk in perms.random_transpositions_measure(class_n).powers(class_k))
    return ({"k": k, "tv_at_k": rows[-1][1], "class_function_error": cls_err},
            {"transpositions.csv": _csv(["k", "tv"], rows)})


def exp_hypercube(n, dense_max, wilson_n, wilson_N, trials, seed):
    eq = hypercube.basis_equivalence_check(n, range(1, n + 1))
    dense_err = 0.0
    for m in range(2, dense_max + 1):
        for d in range(1, m + 1):
            g = hypercube.spatula_generators(m, d)
            if not hypercube.gf2_basis_check(g):
                continue
            kern = hypercube.hypercube_kernel(g)
            p = np.zeros(kern.m)
            p[0] = 1.0
            u = np.full(kern.m, 1.0 / kern.m)
            for k in range(0, 3 * m):
                dense_err = max(dense_err, abs(tv_distance(p, u) - hypercube.hypercube_tv(g, k)))
                p = kern.step(p)
    const = hypercube.wilson_threshold(1000, 2000) / 1000
    wil = hypercube.wilson_experiment(wilson_n, wilson_N, trials, seed)
    rows = [(r["trial"], r["tmix"], r["ratio"]) for r in wil["trials"]]
    return ({"equivalence_gap": max(eq["gaps"].values()), "basis_widths": sorted(eq["gaps"]),
             "transform_vs_dense_error": dense_err, "wilson_constant": const,
             "wilson_constant_error": abs(const - 0.24853), "wilson_median_ratio": wil["median_ratio"],
             "wilson_excluded": wil["excluded"]},
            {"wilson.csv": _csv(["trial", "tmix", "ratio"], rows)})


def exp_statistics(n, samples, seed):
    hist = perms.null_distribution("adjacency", n, samples, seed)
    mean = sum(v * c for v, c in hist.items()) / samples
    ident, rev = list(range(n)), list(range(n))[::-1]
    failed = int(perms.lis_length(ident) != n) + int(perms.lis_length(rev) != 1)
    return ({"adjacency_mean": mean, "adjacency_mean_error": abs(mean - 2.0), "lis_checks_failed": failed},
            {"adjacency_null.csv": _csv(["value", "count"], hist.items())})


def exp_engine(chains, max_states, pairs, seed):
    ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(ss[0])
    resid, mass = 0.0, 0.0
    for _ in range(chains):
        m = int(rng.integers(2, max_states + 1))
        k, pi = random_reversible_kernel(m, rng)
        s = spectral_decomposition(k, pi)
        i = int(rng.integers(m))
        p = Dist.point(m, i).weights
        for l in range(0, 201):
            if l % 20 == 0:
                resid = max(resid, abs(chi_square_spectral(s, i, l) - chi_square(p, pi)))
            mass = max(mass, abs(p.sum() - 1.0))
            p = k.step(p)
    rng2 = np.random.default_rng(ss[1])
    bad = 0
    for _ in range(pairs):
        m = int(rng2.integers(2, 20))
        p = rng2.dirichlet(np.ones(m))
        pi = rng2.dirichlet(np.ones(m))
        tv = tv_distance(p, pi)
        bad += tv > separation(p, pi) + 1e-12
        bad += tv > 0.5 * math.sqrt(chi_square(p, pi)) + 1e-12
    return ({"chi2_identity_residual": resid, "mass_error": mass, "inequality_violations": bad}, {})


_pos = lambda v: v > 0
_eps = lambda v: 0 < v < 1
_size_list = lambda v: all(x >= 2 for x in v) and len(v) >= 2

REGISTRY: dict[str, Experiment] = {e.name: e for e in [
    Experiment("path-scaling", "AC-1", {
        "n": Param(_intlist, "16,32,64,128", _size_list, "comma-separated n, each >= 2"),
        "eps": Param(float, 0.25, _eps)},
        lambda p, seed: exp_path_scaling(p["n"], p["eps"]),
        "Lazy path walk t_mix under doubling of n."),
    Experiment("lattice-scaling", "AC-2", {
        "radii": Param(_intlist, "4,8", lambda v: all(r >= 1 for r in v) and len(v) >= 2),
        "rows": Param(_intlist, "2,2", lambda v: all(x > 0 for x in v)),
        "cols": Param(_intlist, "2,2", lambda v: all(x > 0 for x in v)),
        "eps": Param(float, 0.25, _eps)},
        lambda p, seed: exp_lattice_scaling(p["radii"], p["rows"], p["cols"], p["eps"]),
        "Disc lattice walk t_mix vs radius; contingency-table chain convergence."),
    Experiment("doubling-speedup", "AC-3", {
        "count": Param(int, 50, _pos), "lo": Param(int, 1000, lambda v: v >= 3),
        "hi": Param(int, 20000, lambda v: v >= 3), "factor": Param(float, 1.3, _pos),
        "tv_eps": Param(float, 0.3, _eps)},
        lambda p, seed: exp_doubling(p["count"], p["lo"], p["hi"], p["factor"], p["tv_eps"], seed),
        "X' = 2X + e mod p against X' = X + e at ceil(factor log2 p) steps.", stochastic=True),
    Experiment("lifted-vs-diffusive", "AC-4", {
        "n": Param(_intlist, "64,128,256", _size_list), "eps": Param(float, 0.25, _eps)},
        lambda p, seed: exp_lifted(p["n"], p["eps"]),
        "Lifted walk position marginal vs path walk."),
    Experiment("gap-vs-theta", "AC-5", {
        "n": Param(int, 256, lambda v: 2 <= v <= 2048), "theta_grid": Param(str, "0.25:4.0:0.25")},
        lambda p, seed: exp_gap(p["n"], p["theta_grid"]),
        "Spectral gap of the lifted kernel over reversal rates theta/n."),
    Experiment("scan-comparison", "AC-6", {
        "n": Param(int, 5, lambda v: 2 <= v <= 7), "theta": Param(_floatlist, "0.3,0.5,0.9",
                                                                  lambda v: all(0 < t <= 1 for t in v)),
        "eps": Param(float, 0.25, _eps)},
        lambda p, seed: exp_scans(p["n"], p["theta"], p["eps"]),
        "Systematic vs random scan Metropolis for the Mallows law."),
    Experiment("riffle", "AC-7", {
        "n": Param(int, 52, lambda v: 1 <= v <= 100), "dense_max": Param(int, 6, lambda v: 2 <= v <= 6)},
        lambda p, seed: exp_riffle(p["n"], p["dense_max"]),
        "Exact riffle-shuffle TV from rising sequences."),
    Experiment("cuts", "AC-8", {
        "samples": Param(int, 100, _pos), "n": Param(int, 5, lambda v: 2 <= v <= 6),
        "k_max": Param(int, 12, _pos)},
        lambda p, seed: exp_cuts(p["samples"], p["n"], p["k_max"], seed),
        "Random cuts never hurt; riffles with and without a final cut.", stochastic=True),
    Experiment("random-transpositions", "AC-9", {
        "n": Param(int, 7, lambda v: 2 <= v <= 8), "class_n": Param(int, 6, lambda v: 2 <= v <= 7),
        "class_k": Param(int, 8, _pos)},
        lambda p, seed: exp_transpositions(p["n"], p["class_n"], p["class_k"]),
        "Random transpositions at k = ceil(n ln n / 2 + 2n)."),
    Experiment("hypercube", "AC-10", {
        "n": Param(int, 9, lambda v: 2 <= v <= 20), "dense_max": Param(int, 12, lambda v: 2 <= v <= 12),
        "wilson_n": Param(int, 16, lambda v: 2 <= v <= 24), "N": Param(int, 32, _pos),
        "trials": Param(int, 20, _pos)},
        lambda p, seed: exp_hypercube(p["n"], p["dense_max"], p["wilson_n"], p["N"], p["trials"], seed),
        "Spatula/Ehrenfest equivalence, transform oracle, Wilson threshold.", stochastic=True),
    Experiment("statistics", "AC-11", {
        "n": Param(int, 52, lambda v: v >= 2), "samples": Param(int, 100_000, _pos)},
        lambda p, seed: exp_statistics(p["n"], p["samples"], seed),
        "Adjacency statistic null mean; LIS extremes.", stochastic=True),
    Experiment("engine-properties", "AC-12", {
        "chains": Param(int, 20, _pos), "max_states": Param(int, 50, lambda v: v >= 2),
        "pairs": Param(int, 1000, _pos)},
        lambda p, seed: exp_engine(p["chains"], p["max_states"], p["pairs"], seed),
        "Chi-square spectral identity, mass conservation, distance inequalities.", stochastic=True),
]}


def list_experiments() -> list[str]:
    return list(REGISTRY)


def resolve_params(exp: Experiment, given: dict[str, Any]) -> dict[str, Any]:
    unknown = set(given) - set(exp.params)
    if unknown:
        raise UsageError(f"unknown parameter(s) {sorted(unknown)} for {exp.name}; schema: {exp.schema()}")
    out = {}
    for key, param in exp.params.items():
        raw = given.get(key, param.default)
        try:
            value = param.kind(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"--{key}: {exc}; schema: {exp.schema()}") from None
        if not param.check(value):
            raise UsageError(f"--{key}={raw!r} is invalid; schema: {exp.schema()}")
        out[key] = value
    return out


def evaluate(claim: str, measured: dict) -> dict[str, bool]:
    checks = {}
    for key, (lo, hi) in BANDS[claim].items():
        vals = measured[key]
        vals = vals if isinstance(vals, (list, tuple)) else [vals]
        checks[key] = bool(vals) and all(
            v is not None and (lo is None or v >= lo) and (hi is None or v <= hi) for v in vals)
    return checks


def run(spec: ExperimentSpec) -> ResultBundle:
    try:
        exp = REGISTRY[spec.name]
    except KeyError:
        raise UsageError(f"unknown experiment {spec.name!r}; try one of {list_experiments()}") from None
    params = resolve_params(exp, spec.parameters)
    t0 = time.perf_counter()
    measured, csvs = exp.fn(params, spec.seed)
    bundle = ResultBundle(exp.name, exp.claim, csvs, measured, evaluate(exp.claim, measured),
                          time.perf_counter() - t0)
    if spec.out is not None:
        bundle.write(Path(spec.out))
    return bundle
