import numpy as np
import pytest
import scipy.linalg

from mixlab.grid import path_kernel
from mixlab.kernel import (
    Kernel, SizeError, TVProfile, ValidationError, chi_square_direct, chi_square_spectral, evolve,
    is_reversible, mixing_time, random_reversible_kernel, spectral_decomposition, subdominant_modulus,
    tv_profile,
)
from mixlab.lifted import LiftedSpec, dhn_kernel
from mixlab.measures import Dist

HALF = Kernel([[0.5, 0.5], [0.5, 0.5]], "half")


def test_rows_validated():
    with pytest.raises(ValidationError):
        Kernel([[0.5, 0.4], [0, 1]])
    with pytest.raises(ValidationError):
        Kernel.from_rows([[(0, 1.0)], [(2, 1.0)]])
    k = Kernel.from_rows([[(0, 0.25), (1, 0.75)], [(0, 1.0)]])
    assert k.rows == [[(0, 0.25), (1, 0.75)], [(0, 1.0)]]


def test_evolve_examples():
    start = Dist([0.3, 0.7])
    assert np.array_equal(evolve(HALF, start, 0).weights, start.weights)
    ident = Kernel(np.eye(2))
    assert np.allclose(evolve(ident, start, 13).weights, start.weights)
    assert np.allclose(evolve(HALF, Dist.point(2, 0), 1).weights, [0.5, 0.5])


def test_mass_conservation():
    rng = np.random.default_rng(3)
    for m in (3, 10, 40):
        k, _ = random_reversible_kernel(m, rng)
        p = Dist.point(m, 0)
        for steps in (1, 10, 100, 1000):
            assert abs(evolve(k, p, steps).weights.sum() - 1) < 1e-12


def test_tv_profile_shape_and_start():
    m = 6
    k = path_kernel(m)
    prof = tv_profile(k, Dist.point(m, 0), Dist.uniform(m), 30)
    assert len(prof) == 31
    assert prof.values[0] == pytest.approx(1 - 1 / m)
    assert np.all(np.diff(prof.values) <= 1e-15)


def test_tv_profile_rejects_nonstationary():
    with pytest.raises(ValidationError):
        tv_profile(path_kernel(4), Dist.point(4, 0), Dist([0.7, 0.1, 0.1, 0.1]), 5)


def test_profile_monotone_reversible_lazy_chains():
    rng = np.random.default_rng(11)
    for _ in range(10):
        k, pi = random_reversible_kernel(int(rng.integers(3, 30)), rng)
        # make it lazy so the spectrum is non-negative
        lazy = Kernel(0.5 * (k.dense() + np.eye(k.m)))
        prof = tv_profile(lazy, Dist.point(k.m, int(rng.integers(k.m))), pi, 60)
        assert np.all(np.diff(prof.values) <= 1e-12)


def test_mixing_time():
    assert mixing_time(TVProfile(np.arange(4), np.zeros(4)), 0.25) == 0
    assert mixing_time(TVProfile(np.arange(4), [1, 0.5, 0.2, 0.05]), 0.25) == 2
    assert mixing_time(TVProfile(np.arange(3), [1, 0.9, 0.8]), 0.25) is None


def test_profile_csv():
    text = TVProfile(np.arange(2), [1.0, 0.5], "tv", "x").to_csv()
    assert text.splitlines() == ["step,value,metric,chain", "0,1.0,tv,x", "1,0.5,tv,x"]


def test_spectral_examples():
    s = spectral_decomposition(Kernel(np.eye(4)), Dist.uniform(4))
    assert np.allclose(s.eigenvalues, 1)
    s = spectral_decomposition(HALF, Dist.uniform(2))
    assert np.allclose(s.eigenvalues, [1, 0])
    k = path_kernel(3)
    s = spectral_decomposition(k, Dist.uniform(3))
    oracle = np.sort(np.linalg.eigvals(k.dense()).real)[::-1]
    assert np.allclose(s.eigenvalues, oracle, atol=1e-10)
    # pi-orthonormal eigenvectors
    gram = s.eigenvectors.T @ np.diag(s.pi) @ s.eigenvectors
    assert np.max(np.abs(gram - np.eye(3))) < 1e-8
    assert np.allclose(s.eigenvectors[:, 0], 1)


def test_spectral_rejects_nonreversible():
    k = dhn_kernel(LiftedSpec(5))
    with pytest.raises(ValidationError, match="subdominant_modulus"):
        spectral_decomposition(k, Dist.uniform(10))


@pytest.mark.parametrize("a", [0.1, 0.3, 0.8])
def test_two_state_chi_square_by_hand(a):
    k = Kernel([[1 - a, a], [a, 1 - a]])
    s = spectral_decomposition(k, Dist.uniform(2))
    # lambda_2 = 1 - 2a, psi_2 = (1, -1)
    assert chi_square_spectral(s, 0, 1) == pytest.approx((1 - 2 * a) ** 2)


def test_chi_square_identity_random_chains():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(2, 51))
        k, pi = random_reversible_kernel(m, rng)
        assert is_reversible(k, pi)
        s = spectral_decomposition(k, pi)
        i = int(rng.integers(m))
        for l in (0, 1, 5, 50, 200):
            worst = max(worst, abs(chi_square_spectral(s, i, l) - chi_square_direct(k, pi, i, l)))
        assert chi_square_spectral(s, i, 100_000) < 1e-12
    assert worst < 1e-8
    with pytest.raises(IndexError):
        chi_square_spectral(s, m, 1)


def test_subdominant_modulus():
    assert subdominant_modulus(Kernel(np.eye(3))) == pytest.approx(1)
    assert subdominant_modulus(HALF) == pytest.approx(0, abs=1e-15)
    k = dhn_kernel(LiftedSpec(16))
    lam = scipy.linalg.eigvals(k.dense())
    lam = np.delete(lam, np.argmin(np.abs(lam - 1)))
    assert subdominant_modulus(k) == pytest.approx(np.max(np.abs(lam)), abs=1e-10)
    with pytest.raises(SizeError):
        subdominant_modulus(k, cap=10)
