"""Distance scaling laws for surface-assisted links.

A large reflecting surface close to the link endpoints acts like a mirror:
the loss follows the total travelled distance, (d_sr + d_rd)^-n.  Far away
it behaves like a point scatterer and the per-segment losses multiply,
(d_sr * d_rd)^-n.  The crossover is the classical near-field boundary
2 * D^2 * f / c of an aperture of size D at carrier frequency f.
"""

from __future__ import annotations

import math

from .errors import GeometryError

SPEED_OF_LIGHT = 299792458.0  # m/s

NEAR_FIELD = "near-field/reflected"
FAR_FIELD = "far-field/scattered"


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        v = float(value)
        if not math.isfinite(v) or v <= 0.0:
            raise GeometryError(f"{name} must be positive and finite, got {value!r}")


def reflected_pathloss(d_sr: float, d_rd: float, exponent: float = 2.0) -> float:
    """Power loss when the surface reflects like a mirror: (d_sr + d_rd)^-n.

    Distances are in meters and must be positive; the exponent is the usual
    propagation exponent (2 in free space).  The constant in front of the
    law is application specific and omitted.
    """
    _check_positive(d_sr=d_sr, d_rd=d_rd, exponent=exponent)
    return (d_sr + d_rd) ** -exponent


def scattered_pathloss(d_sr: float, d_rd: float, exponent: float = 2.0) -> float:
    """Power loss when the surface scatters like a point: (d_sr * d_rd)^-n."""
    _check_positive(d_sr=d_sr, d_rd=d_rd, exponent=exponent)
    return (d_sr * d_rd) ** -exponent


def near_field_boundary(surface_size: float, frequency_hz: float) -> float:
    """Extent of the radiating near field, 2 * D^2 * f / c, in meters.

    ``surface_size`` is the largest aperture dimension D in meters.  Grows
    quadratically with D and linearly with carrier frequency, which is why
    electrically large surfaces keep entire deployments in their near field.
    """
    _check_positive(surface_size=surface_size, frequency_hz=frequency_hz)
    return 2.0 * surface_size**2 * frequency_hz / SPEED_OF_LIGHT


def classify_regime(d_sr: float, d_rd: float, surface_size: float, frequency_hz: float) -> str:
    """Pick the applicable scaling law for a pair of link distances.

    Returns NEAR_FIELD when both endpoints sit within the near-field
    boundary (max distance equal to the boundary included), FAR_FIELD
    otherwise.  No interpolation between regimes is attempted.
    """
    _check_positive(d_sr=d_sr, d_rd=d_rd)
    boundary = near_field_boundary(surface_size, frequency_hz)
    return NEAR_FIELD if max(d_sr, d_rd) <= boundary else FAR_FIELD
