"""Construction and characterization of surface-assisted MIMO channels.

The effective channel seen by the receiver is the superposition of a direct
(environment) response and a cascaded response through a reconfigurable
reflecting surface,

    H_eff = sqrt(direct_gain) * H_env + sqrt(ris_gain) * F @ Q @ G,

where Q is the diagonal matrix of per-element reflection coefficients
beta_l * exp(j * theta_l).  The cascade can equivalently be expressed as a
sum of rank-one outer products of array steering vectors when the surface
is described by discrete propagation paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError, GeometryError, ParameterError

__all__ = [
    "RisConfig",
    "SpatialPath",
    "UniformLinearArray",
    "Scene",
    "wrap_phase",
    "sample_rayleigh",
    "interaction_matrix",
    "assemble_dyadic",
    "steering_vector",
    "assemble_spatial",
    "effective_channel",
    "condition_number",
    "spectral_entropy",
    "entropy_upper_bound",
]

# Singular values at or below this fraction of the largest are treated as zero.
RANK_TOLERANCE = 1e-12


def wrap_phase(theta):
    """Wrap angles to the interval [-pi, pi)."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi


def _as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a dense 2-D complex128 array with finite entries."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got {arr.ndim}-D")
    arr = arr.astype(np.complex128, copy=False)
    if arr.size and not np.isfinite(arr).all():
        raise ParameterError(f"{name} contains non-finite entries")
    return arr


def _frozen_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a 1-D vector, got {arr.ndim}-D")
    if arr.size and not np.isfinite(arr).all():
        raise ParameterError(f"{name} contains non-finite entries")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RisConfig:
    """Per-element reflection state of the surface.

    Amplitudes must lie in [0, 1] (passive elements cannot amplify).  Phases
    are wrapped into [-pi, pi) on construction, so two configs representing
    the same physical state compare equal entry-wise.
    """

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amps = _frozen_vector(self.amplitudes, "amplitudes")
        phases = np.asarray(self.phases, dtype=float)
        if phases.ndim != 1:
            raise DimensionError(f"phases must be a 1-D vector, got {phases.ndim}-D")
        if phases.size and not np.isfinite(phases).all():
            raise ParameterError("phases contains non-finite entries")
        if amps.shape != phases.shape:
            raise DimensionError(
                f"amplitudes and phases lengths differ: {amps.size} vs {phases.size}"
            )
        if amps.size and (amps.min() < 0.0 or amps.max() > 1.0):
            raise ParameterError("amplitudes must lie in [0, 1]")
        phases = wrap_phase(phases)
        phases.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "phases", phases)

    @property
    def num_elements(self) -> int:
        return self.amplitudes.size

    def reflection_coefficients(self) -> np.ndarray:
        """Complex coefficients beta_l * exp(j * theta_l)."""
        return self.amplitudes * np.exp(1j * self.phases)

    @classmethod
    def full_reflection(cls, phases) -> "RisConfig":
        """Config with unit amplitude on every element."""
        phases = np.asarray(phases, dtype=float)
        return cls(np.ones(phases.shape), phases)


@dataclass(frozen=True)
class SpatialPath:
    """One resolvable propagation path through the surface.

    The complex ``gain`` absorbs the path attenuation; ``control`` is the
    surface's reflection coefficient for this path and must satisfy
    ``abs(control) <= 1``.  Azimuths live in [-pi, pi], elevations in
    [-pi/2, pi/2].
    """

    gain: complex
    control: complex
    rx_azimuth: float
    rx_elevation: float
    tx_azimuth: float
    tx_elevation: float

    def __post_init__(self):
        for attr in ("gain", "control"):
            v = complex(getattr(self, attr))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ParameterError(f"{attr} must be finite")
            object.__setattr__(self, attr, v)
        # small slack so abs() of a unit-modulus product does not trip the check
        if abs(self.control) > 1.0 + 1e-12:
            raise ParameterError(f"|control| = {abs(self.control):.6g} exceeds 1")
        for attr, lo, hi in (
            ("rx_azimuth", -np.pi, np.pi),
            ("tx_azimuth", -np.pi, np.pi),
            ("rx_elevation", -np.pi / 2, np.pi / 2),
            ("tx_elevation", -np.pi / 2, np.pi / 2),
        ):
            v = float(getattr(self, attr))
            if not math.isfinite(v) or v < lo or v > hi:
                raise ParameterError(f"{attr} = {v!r} outside [{lo:.6g}, {hi:.6g}]")
            object.__setattr__(self, attr, v)


@dataclass(frozen=True)
class UniformLinearArray:
    """Uniform linear antenna array with spacing in wavelengths."""

    num_elements: int
    spacing: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise GeometryError(f"num_elements must be a positive integer, got {self.num_elements!r}")
        object.__setattr__(self, "num_elements", int(self.num_elements))
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise GeometryError(f"spacing must be positive, got {self.spacing!r}")


@dataclass(frozen=True)
class Scene:
    """Static propagation state: everything except the surface configuration.

    Exactly one description of the cascaded segment must be given, either the
    factored (dyadic) pair ``ris_to_rx``/``tx_to_ris`` or a list of ``paths``
    with the two array geometries.  ``direct_gain`` and ``ris_gain`` are the
    nonnegative power splits applied outside the matrices.
    """

    direct: np.ndarray
    direct_gain: float
    ris_gain: float
    ris_to_rx: np.ndarray | None = None
    tx_to_ris: np.ndarray | None = None
    paths: tuple | None = None
    tx_array: UniformLinearArray | None = None
    rx_array: UniformLinearArray | None = None

    def __post_init__(self):
        direct = _as_complex_matrix(self.direct, "direct")
        direct.flags.writeable = False
        object.__setattr__(self, "direct", direct)
        for attr in ("direct_gain", "ris_gain"):
            v = float(getattr(self, attr))
            if not math.isfinite(v) or v < 0:
                raise ParameterError(f"{attr} must be nonnegative, got {v!r}")
            object.__setattr__(self, attr, v)

        dyadic = self.ris_to_rx is not None or self.tx_to_ris is not None
        spatial = self.paths is not None
        if dyadic == spatial:
            raise ParameterError(
                "give either the ris_to_rx/tx_to_ris pair or paths with array geometries"
            )
        n, m = direct.shape
        if dyadic:
            if self.ris_to_rx is None or self.tx_to_ris is None:
                raise DimensionError("ris_to_rx and tx_to_ris must be given together")
            f = _as_complex_matrix(self.ris_to_rx, "ris_to_rx")
            g = _as_complex_matrix(self.tx_to_ris, "tx_to_ris")
            if f.shape[0] != n or g.shape[1] != m or f.shape[1] != g.shape[0]:
                raise DimensionError(
                    f"inconsistent shapes: direct {direct.shape}, "
                    f"ris_to_rx {f.shape}, tx_to_ris {g.shape}"
                )
            f.flags.writeable = False
            g.flags.writeable = False
            object.__setattr__(self, "ris_to_rx", f)
            object.__setattr__(self, "tx_to_ris", g)
        else:
            if self.tx_array is None or self.rx_array is None:
                raise GeometryError("paths description requires tx_array and rx_array")
            paths = tuple(self.paths)
            for p in paths:
                if not isinstance(p, SpatialPath):
                    raise ParameterError(f"paths entries must be SpatialPath, got {type(p).__name__}")
            if self.rx_array.num_elements != n or self.tx_array.num_elements != m:
                raise DimensionError(
                    f"array sizes ({self.rx_array.num_elements}, {self.tx_array.num_elements}) "
                    f"do not match direct shape {direct.shape}"
                )
            object.__setattr__(self, "paths", paths)

    @property
    def is_dyadic(self) -> bool:
        return self.ris_to_rx is not None

    @property
    def num_rx(self) -> int:
        return self.direct.shape[0]

    @property
    def num_tx(self) -> int:
        return self.direct.shape[1]

    @property
    def num_elements(self) -> int:
        """Number of controllable surface elements (paths count as elements)."""
        if self.is_dyadic:
            return self.ris_to_rx.shape[1]
        return len(self.paths)


def sample_rayleigh(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an i.i.d. circularly symmetric complex Gaussian matrix.

    Entries are CN(0, 1): real and imaginary parts are independent
    N(0, 1/2).  The real part of every entry is drawn before its imaginary
    part so the stream layout is stable across releases.

    Args:
        rows: Number of rows, positive.
        cols: Number of columns, positive.
        rng: numpy Generator supplying the variates.

    Returns:
        (rows, cols) complex128 array.
    """
    if rows < 1 or cols < 1:
        raise DimensionError(f"matrix dimensions must be positive, got {rows}x{cols}")
    parts = rng.standard_normal((rows, cols, 2))
    return (parts[..., 0] + 1j * parts[..., 1]) / np.sqrt(2.0)


def interaction_matrix(config: RisConfig) -> np.ndarray:
    """Diagonal matrix of complex reflection coefficients."""
    return np.diag(config.reflection_coefficients()).astype(np.complex128)


def assemble_dyadic(ris_to_rx, config: RisConfig, tx_to_ris) -> np.ndarray:
    """Cascaded surface response F @ diag(q) @ G in factored form.

    Args:
        ris_to_rx: (N, L) response from the surface to the receiver.
        config: surface state with L elements.
        tx_to_ris: (L, M) response from the transmitter to the surface.

    Returns:
        (N, M) complex matrix.  Zero amplitudes remove the corresponding
        element's contribution entirely.
    """
    f = _as_complex_matrix(ris_to_rx, "ris_to_rx")
    g = _as_complex_matrix(tx_to_ris, "tx_to_ris")
    if f.shape[1] != g.shape[0]:
        raise DimensionError(
            f"inner dimensions differ: ris_to_rx {f.shape}, tx_to_ris {g.shape}"
        )
    if f.shape[1] != config.num_elements:
        raise DimensionError(
            f"config has {config.num_elements} elements, matrices have {f.shape[1]}"
        )
    q = config.reflection_coefficients()
    return (f * q[np.newaxis, :]) @ g


def steering_vector(array: UniformLinearArray, azimuth: float, elevation: float = 0.0) -> np.ndarray:
    """Far-field response of a uniform linear array.

    Entry k is exp(j * 2*pi * spacing * k * sin(azimuth) * cos(elevation)),
    k = 0 .. num_elements-1, so every entry has unit modulus.  No 1/sqrt(n)
    normalization is applied; scale factors belong in the path gains.
    """
    if not (-np.pi <= azimuth <= np.pi):
        raise ParameterError(f"azimuth {azimuth!r} outside [-pi, pi]")
    if not (-np.pi / 2 <= elevation <= np.pi / 2):
        raise ParameterError(f"elevation {elevation!r} outside [-pi/2, pi/2]")
    k = np.arange(array.num_elements)
    phase = 2.0 * np.pi * array.spacing * np.sin(azimuth) * np.cos(elevation)
    return np.exp(1j * phase * k)


def _spatial_sum(paths, tx_array, rx_array, coefficients) -> np.ndarray:
    out = np.zeros((rx_array.num_elements, tx_array.num_elements), dtype=np.complex128)
    for path, q in zip(paths, coefficients):
        if q == 0 or path.gain == 0:
            continue
        a_rx = steering_vector(rx_array, path.rx_azimuth, path.rx_elevation)
        a_tx = steering_vector(tx_array, path.tx_azimuth, path.tx_elevation)
        out += (path.gain * q) * np.outer(a_rx, a_tx.conj())
    return out


def assemble_spatial(paths, tx_array: UniformLinearArray, rx_array: UniformLinearArray) -> np.ndarray:
    """Cascaded surface response as a sum of rank-one path contributions.

    Each path contributes gain * control * outer(a_rx, conj(a_tx)).  An
    empty path list yields the all-zero matrix.
    """
    paths = tuple(paths)
    for p in paths:
        if not isinstance(p, SpatialPath):
            raise ParameterError(f"paths entries must be SpatialPath, got {type(p).__name__}")
    return _spatial_sum(paths, tx_array, rx_array, [p.control for p in paths])


def _combine(direct, cascade, direct_gain, ris_gain) -> np.ndarray:
    return np.sqrt(direct_gain) * direct + np.sqrt(ris_gain) * cascade


def effective_channel(scene: Scene, config: RisConfig) -> np.ndarray:
    """End-to-end channel for a scene under a given surface configuration.

    For spatial scenes the per-path control coefficients are replaced by the
    config's beta_l * exp(j * theta_l).
    """
    if config.num_elements != scene.num_elements:
        raise DimensionError(
            f"config has {config.num_elements} elements, scene has {scene.num_elements}"
        )
    if scene.is_dyadic:
        q = config.reflection_coefficients()
        cascade = (scene.ris_to_rx * q[np.newaxis, :]) @ scene.tx_to_ris
    else:
        cascade = _spatial_sum(
            scene.paths, scene.tx_array, scene.rx_array, config.reflection_coefficients()
        )
    h = _combine(scene.direct, cascade, scene.direct_gain, scene.ris_gain)
    if not np.isfinite(h).all():
        raise ParameterError("effective channel has non-finite entries")
    return h


def _nonzero_singular_values(h, name):
    h = _as_complex_matrix(h, name)
    if h.size == 0 or not h.any():
        raise DegenerateInputError(f"{name} is identically zero")
    return np.linalg.svd(h, compute_uv=False)


def condition_number(h) -> float:
    """Ratio of largest to smallest singular value.

    Returns ``math.inf`` when the smallest singular value is at or below
    RANK_TOLERANCE times the largest (rank-deficient within precision).
    Raises DegenerateInputError for an all-zero matrix.
    """
    s = _nonzero_singular_values(h, "matrix")
    if s[-1] <= RANK_TOLERANCE * s[0]:
        return math.inf
    return float(s[0] / s[-1])


def spectral_entropy(h) -> float:
    """Entropy of the normalized singular value distribution.

    The singular values sigma_i are normalized to p_i = sigma_i / sum(sigma)
    and the result is -sum(p_i * ln(p_i)), with 0 * ln(0) taken as 0.  The
    value lies in [0, ln(min(rows, cols))]; the upper end is attained exactly
    when all singular values are equal, i.e. the matrix is a scaled
    semi-unitary.  Raises DegenerateInputError for an all-zero matrix.
    """
    s = _nonzero_singular_values(h, "matrix")
    p = s / s.sum()
    nz = p[p > 0]
    ent = float(-(nz * np.log(nz)).sum())
    # rounding can land a hair above the exact bound
    return min(max(ent, 0.0), math.log(len(p)))


def entropy_upper_bound(rows: int, cols: int) -> float:
    """Largest attainable spectral entropy for a rows x cols matrix."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"matrix dimensions must be positive, got {rows}x{cols}")
    return math.log(min(rows, cols))
