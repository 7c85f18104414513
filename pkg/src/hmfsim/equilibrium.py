"""Thermal stationary state of the cosine mean-field model.

The stationary density is f0(x, p) = N exp(-beta (p^2/2 - m0 cos x)) on the
cylinder (-pi, pi] x R, with the magnetization m0 fixed by the self-consistency
condition m0 = <cos x>_{f0}.
"""

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# Number of quadrature nodes for the angular integrals.  The integrands are
# smooth and 2pi-periodic, so the periodic trapezoid rule converges spectrally;
# 1024 nodes is far beyond machine precision for the betas of interest.
N_QUAD = 1024

CRITICAL_TEMPERATURE = 0.5


@dataclass(frozen=True)
class EquilibriumState:
    """Self-consistent thermal state at temperature T."""

    temperature: float
    beta: float
    m0: float
    omega0: float
    norm: float


def _angular_averages(m: float, beta: float, nodes: int = N_QUAD):
    """Return (Z_x, <cos x>) for the weight exp(beta m cos x) on (-pi, pi]."""
    x = -np.pi + TWO_PI * (np.arange(nodes) + 1.0) / nodes
    w = np.exp(beta * m * np.cos(x))
    z = np.sum(w) * (TWO_PI / nodes)
    mean_cos = np.sum(np.cos(x) * w) * (TWO_PI / nodes) / z
    return z, mean_cos


def _consistency_map(m: float, beta: float) -> float:
    """The map M(m) whose fixed points are the self-consistent magnetizations."""
    _, mean_cos = _angular_averages(m, beta)
    return mean_cos


def solve_m0(temperature: float, tol: float = 1e-10) -> EquilibriumState:
    """Solve the self-consistency equation for the magnetization.

    Returns the largest fixed point of M(m) on [0, 1); the zero branch is
    returned when no positive fixed point exists (temperature >= 0.5).
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    beta = 1.0 / temperature

    def g(m):
        return _consistency_map(m, beta) - m

    # Damped fixed-point iteration from the ordered side; contractive near the
    # stable branch but may stall close to the critical temperature.
    m = 0.9
    for _ in range(200):
        delta = g(m)
        m = max(m + 0.5 * delta, 0.0)
        if abs(delta) <= 0.1 * tol:
            break

    if abs(g(m)) > tol or m < 1e-6:
        # Fall back to a bracketed bisection on the largest sign change of g.
        grid = np.linspace(1e-4, 1.0 - 1e-12, 400)
        vals = np.array([g(mm) for mm in grid])
        idx = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
        if idx.size == 0:
            m = 0.0
        else:
            lo, hi = grid[idx[-1]], grid[idx[-1] + 1]
            while hi - lo > 0.25 * tol:
                mid = 0.5 * (lo + hi)
                if g(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            m = 0.5 * (lo + hi)
            if abs(g(m)) > tol:
                raise RuntimeError("consistency solver failed to reach tolerance")

    if m < 1e-6 and temperature >= CRITICAL_TEMPERATURE - 1e-12:
        m = 0.0

    z_x, _ = _angular_averages(m, beta)
    # Gaussian momentum integral is analytic; the angular factor uses the same
    # periodic quadrature as the consistency map.
    norm = 1.0 / (z_x * np.sqrt(TWO_PI * temperature))
    return EquilibriumState(
        temperature=temperature,
        beta=beta,
        m0=m,
        omega0=np.sqrt(m),
        norm=norm,
    )


def f0_density(x, p, eq: EquilibriumState):
    """Normalized stationary density f0(x, p); accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    out = eq.norm * np.exp(-eq.beta * (0.5 * p * p - eq.m0 * np.cos(x)))
    if out.ndim == 0:
        return float(out)
    return out
