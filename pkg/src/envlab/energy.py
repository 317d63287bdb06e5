"""Monge–Ampère energy relative to the model anchor, and its derivative.

The energy of φ against the anchor P (the I-model projection of u) is
the two-term average ∫(F_φ − F_P) d(μ_P + μ_φ)/2, defined whenever φ
shares the anchor's tail slopes so the difference is bounded.  The
cocycle identity between two arguments is exact in this model (double
integration by parts has no boundary terms when tails match).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envelopes import i_model_envelope, weighted_envelope
from .errors import SingularityTypeError
from .measures import ma_measure, measure_integral
from .profiles import ConvexProfile, WeightedSet

__all__ = [
    "EnergyValue",
    "ma_energy",
    "equilibrium_energy",
    "energy_derivative_check",
    "cocycle_difference",
]


@dataclass(frozen=True)
class EnergyValue:
    """Energy number together with the anchor it is measured against."""

    value: float
    reference: ConvexProfile

    def __float__(self):
        return float(self.value)


def _pair_integral(diff_fn, mu, other_grid):
    return measure_integral(diff_fn, mu, extra_breaks=other_grid)


def ma_energy(u: ConvexProfile, phi: ConvexProfile) -> EnergyValue:
    """Relative Monge–Ampère energy of φ against the anchor P of u.

    (1/2)·[∫(F_φ − F_P) dμ_P + ∫(F_φ − F_P) dμ_φ]; raises unless φ has
    the anchor's exact tail slopes.
    """
    p = i_model_envelope(u)
    if phi.s_minus != p.s_minus or phi.s_plus != p.s_plus:
        raise SingularityTypeError(
            "argument does not share the anchor's singularity type "
            f"({phi.s_minus}, {phi.s_plus}) vs ({p.s_minus}, {p.s_plus})"
        )

    def diff(t):
        return phi(t) - p(t)

    kinks = np.union1d(phi.grid, p.grid)
    val = 0.5 * (
        _pair_integral(diff, ma_measure(p), kinks)
        + _pair_integral(diff, ma_measure(phi), kinks)
    )
    return EnergyValue(float(val), p)


def cocycle_difference(phi1: ConvexProfile, phi2: ConvexProfile) -> float:
    """Right-hand side of the cocycle identity for I(φ₁) − I(φ₂)."""
    if phi1.s_minus != phi2.s_minus or phi1.s_plus != phi2.s_plus:
        raise SingularityTypeError("cocycle needs matching tail slopes")

    def diff(t):
        return phi1(t) - phi2(t)

    kinks = np.union1d(phi1.grid, phi2.grid)
    return 0.5 * (
        _pair_integral(diff, ma_measure(phi1), kinks)
        + _pair_integral(diff, ma_measure(phi2), kinks)
    )


def equilibrium_energy(u: ConvexProfile, K: WeightedSet,
                       mode: str = "i-order") -> EnergyValue:
    """Energy of the weighted envelope of (K, v) in u's singularity class."""
    return ma_energy(u, weighted_envelope(u, K, mode=mode))


def energy_derivative_check(u: ConvexProfile, K: WeightedSet, f, t: float,
                            delta: float = 1e-3) -> tuple[float, float]:
    """(centered difference, contact-measure integral) of s ↦ 𝓘(v + s·f).

    The exact value is ∫ f dμ of the envelope at weight v + t·f; the
    finite difference uses step delta around t.
    """
    if delta <= 0:
        raise ValueError("finite-difference step must be positive")
    e_plus = equilibrium_energy(u, K.add_weight(f, t + delta)).value
    e_minus = equilibrium_energy(u, K.add_weight(f, t - delta)).value
    fd = (e_plus - e_minus) / (2.0 * delta)
    env = weighted_envelope(u, K.add_weight(f, t))
    exact = measure_integral(f, ma_measure(env))
    return fd, float(exact)
