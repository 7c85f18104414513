"""Weighted particle cloud: lattice initialization, magnetization, checkpoints.

Particles sit initially on a regular cell-centered lattice covering
(-pi, pi] x [-pmax, pmax]; each carries a fixed weight proportional to the
initial density at its node.  Weights are normalized once at construction and
never mutated afterwards, so every weight power sum is conserved exactly.
"""

import struct
from dataclasses import dataclass

import numpy as np

from ._kernels import N_CHUNKS, reduce_magnetization

TWO_PI = 2.0 * np.pi

CHECKPOINT_MAGIC = b"HMFE"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIQdId")  # magic, version, N, time, flags, pmax


class DegenerateInitializationError(ValueError):
    """The density vanished on every lattice node."""


@dataclass(frozen=True)
class MagnetizationSample:
    t: float
    mx: float
    my: float


class WeightedEnsemble:
    """Positions, momenta and immutable weights of the particle cloud.

    If ``symmetry_reduced`` the stored particles are the p > 0 half of a
    (x, p) -> (-x, -p) symmetric cloud; every stored particle implicitly has a
    mirror partner with the same weight, and observables account for it.
    """

    def __init__(self, x, p, w, time=0.0, symmetry_reduced=False, pmax=None):
        x = np.ascontiguousarray(x, dtype=np.float64)
        p = np.ascontiguousarray(p, dtype=np.float64)
        w = np.ascontiguousarray(w, dtype=np.float64)
        if not (x.shape == p.shape == w.shape) or x.ndim != 1:
            raise ValueError("x, p, w must be 1-d arrays of equal length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        # Wrap into (-pi, pi].
        x -= TWO_PI * np.ceil((x - np.pi) / TWO_PI)
        w.setflags(write=False)
        self.x = x
        self.p = p
        self.w = w
        self.time = float(time)
        self.symmetry_reduced = bool(symmetry_reduced)
        self.pmax = float(pmax) if pmax is not None else float(np.max(np.abs(p), initial=0.0))

    @property
    def n(self) -> int:
        return self.x.size

    def copy(self) -> "WeightedEnsemble":
        return WeightedEnsemble(
            self.x.copy(), self.p.copy(), self.w.copy(),
            time=self.time, symmetry_reduced=self.symmetry_reduced, pmax=self.pmax,
        )

    def save(self, path) -> None:
        """Write a binary checkpoint (little-endian header + x, p, w arrays)."""
        flags = 1 if self.symmetry_reduced else 0
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
                                  self.n, self.time, flags, self.pmax))
            fh.write(self.x.astype("<f8", copy=False).tobytes())
            fh.write(self.p.astype("<f8", copy=False).tobytes())
            fh.write(self.w.astype("<f8", copy=False).tobytes())

    @classmethod
    def load(cls, path) -> "WeightedEnsemble":
        with open(path, "rb") as fh:
            header = fh.read(_HEADER.size)
            magic, version, n, time, flags, pmax = _HEADER.unpack(header)
            if magic != CHECKPOINT_MAGIC:
                raise ValueError(f"not an ensemble checkpoint: bad magic {magic!r}")
            if version != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {version}")
            data = np.frombuffer(fh.read(3 * n * 8), dtype="<f8")
            if data.size != 3 * n:
                raise ValueError("truncated checkpoint")
        x, p, w = data[:n], data[n:2 * n], data[2 * n:]
        return cls(x.copy(), p.copy(), w.copy(), time=time,
                   symmetry_reduced=bool(flags & 1), pmax=pmax)


def init_lattice(nx, np_rows, pmax, f, symmetry_reduced=False) -> WeightedEnsemble:
    """Place one particle per node of a regular cell-centered lattice.

    Nodes are x_j = -pi + (j + 1/2) 2pi/nx, p_k = -pmax + (k + 1/2) 2pmax/np.
    Weights are f at the node, renormalized so their total is 1 (1/2 for the
    stored half of a symmetry-reduced ensemble).
    """
    if nx < 2 or np_rows < 2:
        raise ValueError("lattice needs nx, np >= 2")
    if pmax <= 0:
        raise ValueError("pmax must be positive")
    if symmetry_reduced and np_rows % 2 != 0:
        raise ValueError("symmetry reduction requires an even momentum row count")

    xg = -np.pi + TWO_PI * (np.arange(nx) + 0.5) / nx
    pg = -pmax + 2.0 * pmax * (np.arange(np_rows) + 0.5) / np_rows
    pp, xx = np.meshgrid(pg, xg, indexing="ij")  # rows of constant p, x fastest
    ww = np.asarray(f(xx, pp), dtype=np.float64)
    if np.any(ww < 0):
        raise ValueError("density is negative on a lattice node")
    total = ww.sum()
    if total == 0.0:
        raise DegenerateInitializationError("density vanishes on every lattice node")

    if symmetry_reduced:
        keep = pg > 0
        xx, pp, ww = xx[keep], pp[keep], ww[keep]
        target = 0.5
    else:
        target = 1.0
    ww = ww * (target / ww.sum())
    return WeightedEnsemble(xx.ravel(), pp.ravel(), ww.ravel(),
                            symmetry_reduced=symmetry_reduced, pmax=pmax)


def magnetization(e: WeightedEnsemble) -> MagnetizationSample:
    """(sum w cos x, sum w sin x), with the mirror half folded in if reduced."""
    sx, sy = reduce_magnetization(e.x, e.w, N_CHUNKS)
    if e.symmetry_reduced:
        return MagnetizationSample(e.time, 2.0 * sx, 0.0)
    return MagnetizationSample(e.time, sx, sy)


def casimirs(e: WeightedEnsemble, lmax: int):
    """Power sums sum_i (w_i)^l for l = 1..lmax, mirror partners included."""
    if lmax < 1:
        raise ValueError("lmax must be >= 1")
    factor = 2.0 if e.symmetry_reduced else 1.0
    out = []
    wl = e.w.copy()
    for _ in range(lmax):
        out.append(factor * float(np.sum(wl)))
        wl = wl * e.w
    return out
