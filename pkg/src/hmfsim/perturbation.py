"""Perturbed initial densities f0 (1 + a cos x) and f0 (1 + a sin x)."""

from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumState, f0_density

KINDS = ("none", "cosine", "sine")


class InvalidAmplitudeError(ValueError):
    """|amplitude| >= 1 would make the density negative."""


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str = "none"
    amplitude: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if abs(self.amplitude) >= 1:
            raise InvalidAmplitudeError(
                f"|amplitude| must be < 1, got {self.amplitude}")


def perturbed_density(eq: EquilibriumState, spec: PerturbationSpec):
    """Return (x, p) -> f0(x, p) (1 + a g(x)) with g = cos or sin.

    The overall normalization is left to the lattice weight renormalization.
    """
    a = spec.amplitude
    if spec.kind == "none" or a == 0.0:
        return lambda x, p: f0_density(x, p, eq)
    if spec.kind == "cosine":
        return lambda x, p: f0_density(x, p, eq) * (1.0 + a * np.cos(x))
    return lambda x, p: f0_density(x, p, eq) * (1.0 + a * np.sin(x))
