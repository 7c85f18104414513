"""Pendulum action-angle quantities and asymptotic decay predictions.

The one-particle motion in the stationary field is governed by
h(x, p) = p^2/2 - m0 cos x: a pendulum with libration below E = m0, rotation
above, and a separatrix in between.  Orbits are computed by direct quadrature
(endpoint square-root singularities removed by substitution) and a fine ODE
solve; no elliptic-function identities are used, so every quantity can be
cross-checked against an independent route.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

SEPARATRIX_RTOL = 1e-10


class SeparatrixError(ValueError):
    """Energy on the separatrix: period diverges."""


@dataclass(frozen=True)
class PendulumOrbit:
    energy: float
    m0: float
    regime: str  # "libration" or "rotation"
    action: float
    period: float
    omega: float


@dataclass(frozen=True)
class DecayPrediction:
    observable: str  # "Mx" or "My"
    exponent: int
    frequency: float


def _check_energy(energy: float, m0: float) -> None:
    if m0 <= 0:
        raise ValueError(f"m0 must be positive, got {m0}")
    if energy < -m0:
        raise ValueError(f"energy {energy} below the potential minimum {-m0}")
    if abs(energy - m0) < SEPARATRIX_RTOL * m0:
        raise SeparatrixError(f"energy {energy} within tolerance of the separatrix {m0}")


def orbit_from_energy(energy: float, m0: float) -> PendulumOrbit:
    """Period, frequency and action of the orbit at the given energy."""
    _check_energy(energy, m0)
    w0 = math.sqrt(m0)

    if energy == -m0:
        return PendulumOrbit(energy, m0, "libration", 0.0, 2.0 * math.pi / w0, w0)

    if energy < m0:
        # Libration.  With sin(x/2) = k sin(phi), k = sin(xt/2), the period and
        # loop-area integrands become smooth on [0, pi/2]:
        #   T = (4/w0) Int dphi / sqrt(1 - k^2 sin^2 phi)
        #   J = (8 w0 k^2 / pi) Int cos^2 phi / sqrt(1 - k^2 sin^2 phi) dphi
        k2 = (energy + m0) / (2.0 * m0)
        period_int, _ = quad(lambda phi: 1.0 / math.sqrt(1.0 - k2 * math.sin(phi) ** 2),
                             0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-13)
        action_int, _ = quad(lambda phi: math.cos(phi) ** 2
                             / math.sqrt(1.0 - k2 * math.sin(phi) ** 2),
                             0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-13)
        period = 4.0 / w0 * period_int
        action = 8.0 * w0 * k2 / math.pi * action_int
        regime = "libration"
    else:
        # Rotation: p(x) = sqrt(2(E + m0 cos x)) never vanishes; the integrands
        # are smooth and periodic.
        def p_of_x(x):
            return math.sqrt(2.0 * (energy + m0 * math.cos(x)))

        period, _ = quad(lambda x: 1.0 / p_of_x(x), -math.pi, math.pi,
                         epsabs=1e-13, epsrel=1e-13)
        area, _ = quad(p_of_x, -math.pi, math.pi, epsabs=1e-13, epsrel=1e-13)
        action = area / (2.0 * math.pi)
        regime = "rotation"

    return PendulumOrbit(energy, m0, regime, action, period, 2.0 * math.pi / period)


def separatrix_action(m0: float) -> float:
    """Action of the separatrix loop p = 2 sqrt(m0) cos(x/2), by quadrature."""
    if m0 <= 0:
        raise ValueError(f"m0 must be positive, got {m0}")
    area_half, _ = quad(lambda x: 2.0 * math.sqrt(m0) * math.cos(0.5 * x),
                        -math.pi, math.pi, epsabs=1e-13, epsrel=1e-13)
    return 2.0 * area_half / (2.0 * math.pi)


def orbit_from_action(action: float, m0: float) -> PendulumOrbit:
    """Invert J(E) by bisection on the monotone branch containing the action."""
    if action < 0:
        raise ValueError("action must be nonnegative")
    if m0 <= 0:
        raise ValueError(f"m0 must be positive, got {m0}")
    js = separatrix_action(m0)
    if action == 0.0:
        return orbit_from_energy(-m0, m0)
    if abs(action - js) < 1e-12 * js:
        raise SeparatrixError("action at the separatrix")
    if action < js:
        lo, hi = -m0, m0 * (1.0 - 2.0 * SEPARATRIX_RTOL)
    else:
        lo = m0 * (1.0 + 2.0 * SEPARATRIX_RTOL)
        hi = max(4.0 * m0, 2.0 * action ** 2)
        while orbit_from_energy(hi, m0).action < action:
            hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        try:
            j_mid = orbit_from_energy(mid, m0).action
        except SeparatrixError:
            hi = mid if action < js else hi
            lo = lo if action < js else mid
            continue
        if j_mid < action:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * max(1.0, abs(hi)):
            break
    return orbit_from_energy(0.5 * (lo + hi), m0)


def _orbit_samples(orbit: PendulumOrbit, n_samples: int):
    """x(theta_j) at theta_j = 2 pi j / n, from a fine ODE solve over one period.

    Angle origin: turning point of maximum x for libration, the x = -pi
    crossing (positive branch) for rotation.
    """
    m0 = orbit.m0
    if orbit.regime == "libration":
        xt = math.acos(max(-1.0, min(1.0, -orbit.energy / m0)))
        y0 = [xt, 0.0]
    else:
        y0 = [-math.pi, math.sqrt(2.0 * (orbit.energy - m0))]

    t_eval = np.linspace(0.0, orbit.period, n_samples, endpoint=False)
    sol = solve_ivp(
        lambda t, y: [y[1], -m0 * math.sin(y[0])],
        (0.0, orbit.period), y0, t_eval=t_eval,
        method="DOP853", rtol=1e-12, atol=1e-14,
    )
    if not sol.success:
        raise RuntimeError(f"orbit integration failed: {sol.message}")
    return sol.y[0]


def angle_fourier(m: int, orbit: PendulumOrbit, which: str = "cos",
                  n_samples: int = 1024) -> complex:
    """Angle-Fourier coefficient Int_0^2pi g(x(theta)) exp(-i m theta) dtheta.

    g is cos x or sin x; the orbit is time-parametrized (theta = Omega t) and
    the integral evaluated by the periodic trapezoid rule, spectrally accurate.
    """
    if which not in ("cos", "sin"):
        raise ValueError(f"which must be 'cos' or 'sin', got {which!r}")
    x = _orbit_samples(orbit, n_samples)
    g = np.cos(x) if which == "cos" else np.sin(x)
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    return complex(np.sum(g * np.exp(-1j * m * theta)) * (2.0 * np.pi / n_samples))


# (angular mode m, singularity index nu) governing each observable; the decay
# law is t^-(nu+1) with phase frequency m * omega0.  Mx is driven by m = 2
# because its odd-m coefficients cancel on libration orbits.
_DECAY_TABLE = {"Mx": (2, 2), "My": (1, 1)}


def predict_decay(observable: str, omega0: float) -> DecayPrediction:
    """Asymptotic decay law for a magnetization component at the given omega0."""
    if observable not in _DECAY_TABLE:
        raise ValueError(f"observable must be 'Mx' or 'My', got {observable!r}")
    m, nu = _DECAY_TABLE[observable]
    return DecayPrediction(observable=observable, exponent=-(nu + 1),
                           frequency=m * omega0)
