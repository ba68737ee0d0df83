"""Exit criteria AC-1 .. AC-12, each at its stated tolerance and time budget."""

import math
import time

import numpy as np
import pytest

from mixlab import affine, grid, hypercube, lifted, permutations as P
from mixlab.kernel import (
    chi_square_spectral, evolve, random_reversible_kernel, spectral_decomposition, time_to_mix,
)
from mixlab.measures import Dist, chi_square, separation, tv_distance


@pytest.fixture
def clock():
    t0 = time.perf_counter()
    return lambda: time.perf_counter() - t0


def test_ac1_path_scaling(record_criterion, clock):
    t = [lifted.path_tmix(n) for n in (16, 32, 64, 128)]
    ratios = [b / a for a, b in zip(t, t[1:])]
    ok = all(3.4 <= r <= 4.6 for r in ratios) and clock() < 10
    record_criterion("AC-1", ok, f"path t_mix {t}, ratios {np.round(ratios, 3).tolist()} in [3.4, 4.6]")
    assert ok


def test_ac2_lattice_and_tables(record_criterion, clock):
    ts = []
    for r in (4, 8):
        region = grid.LatticeRegion.disc(r)
        k = grid.lattice_kernel(region)
        ts.append(time_to_mix(k, Dist.point(k.m, region.index[(-r, 0)]), Dist.uniform(k.m), 0.25))
    space = grid.table_space((2, 2), (2, 2))
    tk = grid.table_kernel(space)
    m = len(space)
    worst = max(tv_distance(evolve(tk, Dist.point(m, i), 10 * m * m), Dist.uniform(m)) for i in range(m))
    ok = 3 <= ts[1] / ts[0] <= 5 and worst < 0.01 and clock() < 30
    record_criterion("AC-2", ok, f"disc t_mix {ts} ratio {ts[1] / ts[0]:.3f} in [3, 5]; table worst TV {worst:.2e} < 0.01")
    assert ok


def test_ac3_doubling(record_criterion, clock):
    c = affine.cdg_constant()
    ps = affine.sample_odd(1000, 20000, 50, seed=2012)
    res = affine.doubling_speedup_experiment(ps, step_factor=1.3, tv_eps=0.3)
    plain_min = min(r[3] for r in res["rows"])
    ok = abs(c - 1.01999186) <= 1e-8 and res["fraction"] >= 0.9 and plain_min > 0.9 and clock() < 60
    record_criterion("AC-3", ok, f"C*={c:.10f}; doubling fraction {res['fraction']:.2f} >= 0.9; "
                                 f"plain min TV {plain_min:.4f} > 0.9")
    assert ok


def test_ac4_lifted(record_criterion, clock):
    rep = lifted.lifted_vs_diffusive([64, 128, 256])
    col = max(np.max(np.abs(lifted.dhn_kernel(lifted.LiftedSpec(n)).column_sums() - 1)) for n in (64, 128, 256))
    lr = [r[1] for r in rep["ratios"]]
    pr = [r[2] for r in rep["ratios"]]
    ok = (all(1.6 <= x <= 2.4 for x in lr) and all(3.4 <= x <= 4.6 for x in pr) and col <= 1e-12
          and clock() < 30)
    record_criterion("AC-4", ok, f"lifted ratios {np.round(lr, 3).tolist()}, path ratios "
                                 f"{np.round(pr, 3).tolist()}, column-sum error {col:.1e}")
    assert ok


def test_ac5_gap_vs_theta(record_criterion, clock):
    grid_vals = lifted.parse_grid("0.25:4.0:0.25")
    res = lifted.gap_vs_theta(256, grid_vals)
    at_one = res["gap"][np.argmin(np.abs(grid_vals - 1.0))]
    ok = res["max_gap"] >= at_one and clock() < 60
    record_criterion("AC-5", ok, f"argmax theta {res['argmax']} gap {res['max_gap']:.5f} >= gap(1) {at_one:.5f}")
    assert ok


def test_ac6_scans(record_criterion, clock):
    err, ratios = 0.0, []
    for theta in (0.3, 0.5, 0.9):
        pi = P.mallows_distribution(5, theta).weights
        for mode in ("random", "systematic"):
            k = P.scan_kernel(5, theta, mode).kernel
            err = max(err, float(np.max(np.abs(k.step(pi) - pi))))
        ratios.append(P.scan_comparison(5, theta)["ratio"])
    ok = err <= 1e-10 and all(1 / 8 <= r <= 8 for r in ratios) and clock() < 60
    record_criterion("AC-6", ok, f"Mallows fixed to {err:.1e}; cost-adjusted ratios {np.round(ratios, 3).tolist()} in [1/8, 8]")
    assert ok


def test_ac7_riffle(record_criterion, clock):
    first = P.riffle_cutoff(52, 0.5)
    err = 0.0
    for n in range(2, 7):
        for k, qk in enumerate(P.gsr_measure(n).powers(12)):
            err = max(err, abs(qk.tv_to_uniform() - P.riffle_tv_exact(n, k)))
    ok = first == 7 and err <= 1e-12 and clock() < 30
    record_criterion("AC-7", ok, f"n=52 first k with TV < 1/2 is {first}; closed form vs dense error {err:.1e}")
    assert ok


def test_ac8_cuts(record_criterion, clock):
    rng = np.random.default_rng(8)
    c4 = P.cut_measure(4)
    violation = 0.0
    for _ in range(100):
        q = P.GroupMeasure(4, rng.dirichlet(np.ones(24)))
        violation = max(violation, P.convolve(q, c4).tv_to_uniform() - q.tv_to_uniform())
    rep = P.fulman_cut_check(5, 14)
    cross = [int(np.argmax(rep[key] <= 0.25)) for key in ("plain", "cut")]
    ok = violation <= 1e-12 and abs(cross[0] - cross[1]) <= 1 and clock() < 60
    record_criterion("AC-8", ok, f"max TV(CQ)-TV(Q) {violation:.2e} <= 0; crossings riffle {cross[0]}, riffle+cut {cross[1]}")
    assert ok


def test_ac9_random_transpositions(record_criterion, clock):
    n = 7
    k = math.ceil(0.5 * n * math.log(n) + 2 * n)
    tv = P.random_transpositions_measure(n).power(k).tv_to_uniform()
    types = P.cycle_types(6)
    cls_err = 0.0
    for qk in P.random_transpositions_measure(6).powers(10):
        groups = {}
        for w, t in zip(qk.weights, types):
            groups.setdefault(t, []).append(w)
        cls_err = max(cls_err, max(max(v) - min(v) for v in groups.values()))
    ok = k == 21 and tv <= 2 * math.exp(-2) and cls_err < 1e-12 and clock() < 300
    record_criterion("AC-9", ok, f"k={k}: TV {tv:.5f} <= 2e^-2 = {2 * math.exp(-2):.5f}; class-function error {cls_err:.1e}")
    assert ok


def test_ac10_hypercube(record_criterion, clock):
    eq = hypercube.basis_equivalence_check(9, range(1, 10))
    gap = max(eq["gaps"].values())
    dense_err = 0.0
    for n in range(2, 13):
        for d in range(1, n + 1):
            g = hypercube.spatula_generators(n, d)
            if not hypercube.gf2_basis_check(g):
                continue
            kern = hypercube.hypercube_kernel(g)
            p = np.zeros(kern.m)
            p[0] = 1
            u = np.full(kern.m, 1 / kern.m)
            for k in range(2 * n):
                dense_err = max(dense_err, abs(tv_distance(p, u) - hypercube.hypercube_tv(g, k)))
                p = kern.step(p)
    const = hypercube.wilson_threshold(1000, 2000) / 1000
    wil = hypercube.wilson_experiment(16, 32, 20, seed=1997)
    ok = (gap <= 1e-10 and dense_err <= 1e-12 and abs(const - 0.24853) <= 5e-5
          and 0.5 <= wil["median_ratio"] <= 2.0 and clock() < 120)
    record_criterion("AC-10", ok, f"spatula d in {sorted(eq['gaps'])} vs Ehrenfest {gap:.1e}; transform vs dense "
                                  f"{dense_err:.1e}; T(n,2n)/n={const:.6f}; median t_mix/T {wil['median_ratio']:.3f}")
    assert ok


def test_ac11_statistics(record_criterion, clock):
    hist = P.null_distribution("adjacency", 52, 100_000, seed=52)
    mean = sum(v * c for v, c in hist.items()) / 100_000
    lis_ok = P.lis_length(range(52)) == 52 and P.lis_length(range(52)[::-1]) == 1
    ok = abs(mean - 2) <= 0.05 and lis_ok and clock() < 30
    record_criterion("AC-11", ok, f"adjacency mean {mean:.4f} within 2 +- 0.05; LIS extremes {lis_ok}")
    assert ok


def test_ac12_engine(record_criterion, clock):
    rng = np.random.default_rng(12)
    resid = mass = 0.0
    for _ in range(20):
        m = int(rng.integers(2, 51))
        k, pi = random_reversible_kernel(m, rng)
        s = spectral_decomposition(k, pi)
        i = int(rng.integers(m))
        p = Dist.point(m, i).weights
        for l in range(201):
            if l % 10 == 0:
                resid = max(resid, abs(chi_square_spectral(s, i, l) - chi_square(p, pi)))
            mass = max(mass, abs(p.sum() - 1))
            p = k.step(p)
    bad = 0
    for _ in range(1000):
        m = int(rng.integers(2, 20))
        p, pi = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
        tv = tv_distance(p, pi)
        bad += (tv > separation(p, pi) + 1e-15) + (tv > 0.5 * math.sqrt(chi_square(p, pi)) + 1e-15)
    ok = resid < 1e-8 and mass < 1e-12 and bad == 0 and clock() < 60
    record_criterion("AC-12", ok, f"chi2 identity residual {resid:.1e}; mass error {mass:.1e}; inequality violations {bad}")
    assert ok
