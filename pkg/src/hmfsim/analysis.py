"""Time-series analysis: detrending, decay envelopes, power-law fits, spectra.

All operations act on a FluctuationSeries, the deviation of one magnetization
component from its slow part.  The long-time average subtraction suits
symmetric runs; the centered running average (default half-window 5) removes
the slow rotation of the magnetization that appears for asymmetric ones.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import MagnetizationSeries


class InvalidWindowError(ValueError):
    pass


class InvalidFitError(ValueError):
    pass


@dataclass
class FluctuationSeries:
    t: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        if self.t.size != self.value.size:
            raise ValueError("t and value must have equal length")
        if self.t.size >= 2 and np.any(np.diff(self.t) <= 0):
            raise ValueError("t must be strictly increasing")


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_amplitude: float
    residual: float  # RMS in log-log space
    window: tuple
    n_points: int


@dataclass
class Spectrum:
    omega: np.ndarray
    power: np.ndarray
    window: tuple


def component(series: MagnetizationSeries, which: str) -> FluctuationSeries:
    """Extract one magnetization component as a raw fluctuation series."""
    if which == "mx":
        return FluctuationSeries(series.t, series.mx)
    if which == "my":
        return FluctuationSeries(series.t, series.my)
    raise ValueError(f"unknown component {which!r}")


def detrend_constant(s: FluctuationSeries, t_tail_start: float) -> FluctuationSeries:
    """Subtract the mean of the samples with t >= t_tail_start."""
    tail = s.value[s.t >= t_tail_start]
    if tail.size == 0:
        raise InvalidWindowError(
            f"no samples at or beyond t_tail_start={t_tail_start}")
    return FluctuationSeries(s.t.copy(), s.value - tail.mean())


def detrend_running(s: FluctuationSeries, half_window: float) -> FluctuationSeries:
    """Subtract the centered moving integral mean over [t - dt, t + dt].

    The window integral is the trapezoid rule with exact partial end weights
    (linear interpolation of the cumulative integral); the output is restricted
    to times with a full window inside the series.
    """
    if s.t.size < 2:
        raise InvalidWindowError("series too short for a running average")
    h = s.t[1] - s.t[0]
    if half_window < h:
        raise InvalidWindowError(
            f"half_window {half_window} is below the sampling interval {h}")
    if 2 * half_window > s.t[-1] - s.t[0]:
        raise InvalidWindowError("window longer than the series")

    # Cumulative trapezoid integral; linear interpolation of it evaluates the
    # exact-window trapezoid integral with fractional end weights.
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (s.value[1:] + s.value[:-1])
                                           * np.diff(s.t))))
    keep = (s.t >= s.t[0] + half_window) & (s.t <= s.t[-1] - half_window)
    tk = s.t[keep]
    upper = np.interp(tk + half_window, s.t, cum)
    lower = np.interp(tk - half_window, s.t, cum)
    mean = (upper - lower) / (2.0 * half_window)
    return FluctuationSeries(tk, s.value[keep] - mean)


def envelope(f: FluctuationSeries):
    """Interpolated strict local maxima of |value|: arrays (t_k, a_k).

    Each maximum is refined by a 3-point parabola in both abscissa and height.
    """
    if f.t.size < 3:
        raise InvalidWindowError("need at least 3 samples")
    a = np.abs(f.value)
    idx = np.nonzero((a[1:-1] > a[:-2]) & (a[1:-1] > a[2:]))[0] + 1
    if idx.size == 0:
        return np.empty(0), np.empty(0)
    ym, y0, yp = a[idx - 1], a[idx], a[idx + 1]
    denom = ym - 2.0 * y0 + yp
    delta = np.where(denom != 0, 0.5 * (ym - yp) / np.where(denom == 0, 1.0, denom), 0.0)
    h = np.gradient(f.t)[idx]
    tk = f.t[idx] + delta * h
    ak = y0 - 0.25 * (ym - yp) * delta
    return tk, ak


def fit_power_law(t_k, a_k, t_min: float, t_max: float) -> PowerLawFit:
    """Ordinary least squares of log a_k against log t_k inside [t_min, t_max]."""
    if t_min >= t_max:
        raise InvalidFitError("t_min must be below t_max")
    t_k = np.asarray(t_k, dtype=float)
    a_k = np.asarray(a_k, dtype=float)
    sel = (t_k >= t_min) & (t_k <= t_max)
    t_w, a_w = t_k[sel], a_k[sel]
    if t_w.size < 3:
        raise InvalidFitError(
            f"need >= 3 envelope points in [{t_min}, {t_max}], got {t_w.size}")
    if np.any(a_w <= 0):
        raise InvalidFitError("nonpositive amplitude in fit window")
    lt, la = np.log(t_w), np.log(a_w)
    slope, intercept = np.polyfit(lt, la, 1)
    resid = la - (slope * lt + intercept)
    return PowerLawFit(
        exponent=float(slope),
        log_amplitude=float(intercept),
        residual=float(np.sqrt(np.mean(resid ** 2))),
        window=(t_min, t_max),
        n_points=int(t_w.size),
    )


def power_spectrum(f: FluctuationSeries, t0: float, t1: float) -> Spectrum:
    """DFT power of the rectangular-windowed samples with t0 <= t < t1.

    Normalization: power_k = |sum_n v_n exp(-i 2 pi k n / N)|^2 on the grid
    omega_k = 2 pi k / (t1 - t0), so sum_k power_k = N sum_n v_n^2 (Parseval).
    """
    if t1 <= t0:
        raise InvalidWindowError("t1 must exceed t0")
    sel = (f.t >= t0) & (f.t < t1)
    v = f.value[sel]
    if v.size < 16:
        raise InvalidWindowError(f"need >= 16 samples in window, got {v.size}")
    n = v.size
    h = f.t[sel][1] - f.t[sel][0]
    power = np.abs(np.fft.fft(v)) ** 2
    omega = 2.0 * np.pi * np.arange(n) / (n * h)
    return Spectrum(omega=omega, power=power, window=(t0, t1))


def peak_frequency(sp: Spectrum, omega_min: float, omega_max: float):
    """Maximizing bin in [omega_min, omega_max], refined by a 3-point parabola.

    The parabola is fit to the reciprocal of the power: near the main lobe of
    a rectangular-window tone the power scales as 1/(delta - j)^2, so the
    reciprocal is exactly parabolic with its minimum at the true frequency.
    """
    sel = np.nonzero((sp.omega >= omega_min) & (sp.omega <= omega_max))[0]
    if sel.size == 0:
        raise InvalidWindowError("empty frequency band")
    k = sel[np.argmax(sp.power[sel])]
    grid = sp.omega[1] - sp.omega[0]
    if k == 0 or k == sp.omega.size - 1 or min(sp.power[k - 1:k + 2]) <= 0:
        return float(sp.omega[k]), float(sp.power[k])
    zm, z0, zp = 1.0 / sp.power[k - 1:k + 2]
    denom = zm - 2.0 * z0 + zp
    delta = 0.5 * (zm - zp) / denom if denom != 0 else 0.0
    delta = float(np.clip(delta, -0.5, 0.5))
    return float(sp.omega[k] + delta * grid), float(sp.power[k])
