import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from hmfsim.equilibrium import EquilibriumState, f0_density, solve_m0


def oracle_m0(temperature, tol=1e-12):
    """Independent bisection over the fixed-point map, high-order quadrature."""
    beta = 1.0 / temperature

    def consistency(m):
        num, _ = quad(lambda x: np.cos(x) * np.exp(beta * m * np.cos(x)),
                      -np.pi, np.pi, epsabs=1e-14, epsrel=1e-14)
        den, _ = quad(lambda x: np.exp(beta * m * np.cos(x)),
                      -np.pi, np.pi, epsabs=1e-14, epsrel=1e-14)
        return num / den - m

    lo, hi = 1e-3, 1.0
    if consistency(lo) <= 0:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if consistency(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_paper_values_at_t01(eq01):
    assert eq01.m0 == pytest.approx(0.946, abs=1e-3)
    assert eq01.omega0 == pytest.approx(0.972, abs=1e-3)


def test_zero_branch_above_critical():
    assert solve_m0(0.6).m0 == 0.0
    assert solve_m0(0.5).m0 == 0.0
    assert solve_m0(0.7).omega0 == 0.0


def test_against_bisection_oracle():
    assert solve_m0(0.3).m0 == pytest.approx(oracle_m0(0.3), abs=1e-6)


def test_omega0_is_sqrt_m0(eq01):
    assert eq01.omega0 ** 2 == pytest.approx(eq01.m0, rel=1e-14)


def test_fixed_point_residual(eq01):
    from hmfsim.equilibrium import _consistency_map
    for T in (0.1, 0.2, 0.3, 0.45):
        eq = solve_m0(T, tol=1e-10)
        assert abs(_consistency_map(eq.m0, eq.beta) - eq.m0) <= 1e-10


def test_monotone_in_temperature():
    grid = np.arange(0.05, 0.50, 0.05)
    vals = [solve_m0(T).m0 for T in grid]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert all(v > 0 for v in vals)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        solve_m0(-0.1)
    with pytest.raises(ValueError):
        solve_m0(0.0)
    with pytest.raises(ValueError):
        solve_m0(0.1, tol=0.0)


def test_density_normalization(eq01):
    total, _ = dblquad(lambda p, x: f0_density(x, p, eq01),
                       -np.pi, np.pi, -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_density_symmetry(eq01):
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.uniform(-np.pi, np.pi)
        p = rng.uniform(-4, 4)
        assert f0_density(x, p, eq01) == f0_density(-x, -p, eq01)


def test_density_peak_against_quadrature_oracle(eq01):
    # Norm from an independent 2-d quadrature of the unnormalized density.
    z, _ = dblquad(
        lambda p, x: np.exp(-eq01.beta * (0.5 * p ** 2 - eq01.m0 * np.cos(x))),
        -np.pi, np.pi, -np.inf, np.inf)
    assert f0_density(0.0, 0.0, eq01) == pytest.approx(
        np.exp(eq01.beta * eq01.m0) / z, rel=1e-8)
    assert eq01.norm == pytest.approx(1.0 / z, rel=1e-8)


def test_density_vectorized(eq01):
    x = np.linspace(-3, 3, 11)
    p = np.zeros(11)
    vals = f0_density(x, p, eq01)
    assert vals.shape == (11,)
    assert np.all(vals >= 0)
