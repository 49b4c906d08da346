"""Conversions among polarization bias, spin temperature and entropy.

Boltzmann's constant is folded into the units: temperatures are measured in
the same units as the energy gap. Entropies are in bits.
"""

from __future__ import annotations

import math
from fractions import Fraction

LN4 = math.log(4.0)


def _check_bias(bias: float) -> None:
    if not -1.0 <= bias <= 1.0 or math.isnan(bias):
        raise ValueError(f"bias must lie in [-1, 1], got {bias!r}")


def energy_gap(gamma: float, field: float) -> float:
    """Energy gap ``2 * gamma * field`` of a spin-half in a static field."""
    return 2.0 * gamma * field


def bias_from_temperature(delta_e: float, temperature: float) -> float:
    """Equilibrium bias ``tanh(delta_e / 2T)``."""
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature!r}")
    if delta_e <= 0:
        raise ValueError(f"energy gap must be positive, got {delta_e!r}")
    return math.tanh(delta_e / (2.0 * temperature))


def temperature_from_bias(delta_e: float, bias: float) -> float:
    """Spin temperature ``delta_e / (2 atanh(bias))`` for a bias in (0, 1)."""
    if delta_e <= 0:
        raise ValueError(f"energy gap must be positive, got {delta_e!r}")
    if not 0.0 < bias < 1.0:
        raise ValueError(f"temperature is only finite and positive for 0 < bias < 1, got {bias!r}")
    return delta_e / (2.0 * math.atanh(bias))


def entropy_of_bias(bias: float) -> float:
    """Binary entropy (bits) of a spin with ``P(up) = (1 + bias) / 2``."""
    _check_bias(bias)
    h = 0.0
    for p in ((1.0 + bias) / 2.0, (1.0 - bias) / 2.0):
        if p > 0.0:
            h -= p * math.log2(p)
    return h


def entropy_of_bias_approx(bias: float) -> float:
    """Small-bias expansion ``1 - bias**2 / ln 4``."""
    return 1.0 - bias * bias / LN4


def shannon_bound_bias(n: int, bias: float) -> float:
    """Largest single-spin bias reachable by closed manipulation of ``n`` equal spins.

    This is the leading-order ``bias * sqrt(n)``, clamped to 1.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if bias < 0:
        raise ValueError(f"bias must be non-negative, got {bias!r}")
    return min(1.0, bias * math.sqrt(n))


def shannon_entropy_floor(n: int, bias: float) -> float:
    """Leading-order entropy floor ``1 - n * bias**2 / ln 4`` for one of ``n`` spins.

    Not clamped; for large ``n * bias**2`` the value goes negative.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return 1.0 - n * bias * bias / LN4


def rpc_spins_for_gain(multiplier: float) -> int:
    """Number of equal spins closed-system compression needs for a bias gain."""
    gain = Fraction(multiplier)
    if gain <= 0:
        raise ValueError(f"multiplier must be positive, got {multiplier!r}")
    return math.ceil(gain * gain)
