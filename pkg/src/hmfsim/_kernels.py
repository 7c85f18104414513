"""Numba kernels for the particle push and the deterministic reductions.

All reductions run over a fixed number of chunks; each chunk accumulates a
partial sum sequentially and the partials are combined in ascending chunk
order, so results are bitwise reproducible for a fixed chunk count regardless
of the thread schedule.
"""

import math

import numpy as np
from numba import njit, prange

# Fixed chunk count for all reductions; changing it changes round-off.
N_CHUNKS = 1024

TWO_PI = 2.0 * math.pi


@njit(parallel=True, cache=True)
def reduce_magnetization(x, w, nchunks):
    n = x.size
    partial = np.zeros((nchunks, 2))
    for c in prange(nchunks):
        lo = c * n // nchunks
        hi = (c + 1) * n // nchunks
        sx = 0.0
        sy = 0.0
        for i in range(lo, hi):
            sx += w[i] * math.cos(x[i])
            sy += w[i] * math.sin(x[i])
        partial[c, 0] = sx
        partial[c, 1] = sy
    mx = 0.0
    my = 0.0
    for c in range(nchunks):
        mx += partial[c, 0]
        my += partial[c, 1]
    return mx, my


@njit(parallel=True, cache=True)
def reduce_and_cache(x, w, cosx, sinx, nchunks):
    """Magnetization reduction that also caches cos x_i, sin x_i for the kicks."""
    n = x.size
    partial = np.zeros((nchunks, 2))
    for c in prange(nchunks):
        lo = c * n // nchunks
        hi = (c + 1) * n // nchunks
        sx = 0.0
        sy = 0.0
        for i in range(lo, hi):
            ci = math.cos(x[i])
            si = math.sin(x[i])
            cosx[i] = ci
            sinx[i] = si
            sx += w[i] * ci
            sy += w[i] * si
        partial[c, 0] = sx
        partial[c, 1] = sy
    mx = 0.0
    my = 0.0
    for c in range(nchunks):
        mx += partial[c, 0]
        my += partial[c, 1]
    return mx, my


@njit(parallel=True, cache=True)
def kick(p, cosx, sinx, mx, my, dt):
    """p_i += dt * (-mx sin x_i + my cos x_i) using cached trigonometry."""
    for i in prange(p.size):
        p[i] += dt * (my * cosx[i] - mx * sinx[i])


@njit(parallel=True, cache=True)
def drift(x, p, dt):
    """x_i += dt p_i, wrapped into (-pi, pi]."""
    for i in prange(x.size):
        xi = x[i] + dt * p[i]
        xi -= TWO_PI * math.ceil((xi - math.pi) / TWO_PI)
        x[i] = xi


@njit(parallel=True, cache=True)
def reduce_kinetic(p, w, nchunks):
    n = p.size
    partial = np.zeros(nchunks)
    for c in prange(nchunks):
        lo = c * n // nchunks
        hi = (c + 1) * n // nchunks
        s = 0.0
        for i in range(lo, hi):
            s += 0.5 * w[i] * p[i] * p[i]
        partial[c] = s
    total = 0.0
    for c in range(nchunks):
        total += partial[c]
    return total


@njit(parallel=True, cache=True)
def reduce_momentum(p, w, nchunks):
    n = p.size
    partial = np.zeros(nchunks)
    for c in prange(nchunks):
        lo = c * n // nchunks
        hi = (c + 1) * n // nchunks
        s = 0.0
        for i in range(lo, hi):
            s += w[i] * p[i]
        partial[c] = s
    total = 0.0
    for c in range(nchunks):
        total += partial[c]
    return total
