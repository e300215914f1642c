"""Surface phase optimization.

The main entry point, maximize_spectral_entropy, runs projected gradient
ascent on the per-element phase shifts to drive the effective channel's
normalized singular value spectrum toward uniformity.  The objective is
bounded above by ln(min(num_rx, num_tx)), attained exactly when the channel
is a scaled semi-unitary, which gives a natural early-exit test.

Also here: nearest-level phase quantization for finite-resolution surfaces
and the closed-form co-phasing rule for the single-antenna case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    Scene,
    entropy_upper_bound,
    spectral_entropy,
    steering_vector,
    wrap_phase,
)
from .errors import DimensionError, ParameterError

__all__ = [
    "OptOptions",
    "OptResult",
    "se_gradient",
    "maximize_spectral_entropy",
    "quantize_phases",
    "quantization_levels",
    "cophase_gain_max",
]

# Armijo line search constants
ARMIJO_SHRINK = 0.5
ARMIJO_SLOPE = 1e-4
MAX_BACKTRACKS = 30
STEP_CAP = 1e6

# singular values closer than this (relative) use the finite-difference path
DEGENERATE_GAP = 1e-10

_STEP_CONTROLS = ("backtracking", "fixed")
_GRADIENT_MODES = ("analytic", "finite-difference")
_PHASE_UPDATES = ("wrap", "clamp")


@dataclass(frozen=True)
class OptOptions:
    """Knobs for maximize_spectral_entropy.

    ``se_tolerance`` is the convergence slack below the entropy upper bound.
    ``step_control`` picks Armijo backtracking (default) or a fixed step.
    The backtracking search starts at step 1.0 and afterwards opens each
    iteration at twice the last accepted step, so the step length adapts to
    the local curvature instead of being rediscovered from scratch.
    """

    max_iterations: int = 200
    se_tolerance: float = 1e-4
    step_control: str = "backtracking"
    fixed_step: float = 0.1
    gradient_mode: str = "analytic"
    fd_step: float = 1e-6
    gradient_norm_tol: float = 1e-8
    stall_limit: int = 20
    phase_update: str = "wrap"
    seed: int | None = None

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        for attr in ("se_tolerance", "fixed_step", "fd_step", "gradient_norm_tol"):
            v = float(getattr(self, attr))
            if not math.isfinite(v) or v <= 0:
                raise ParameterError(f"{attr} must be positive, got {v!r}")
        if self.step_control not in _STEP_CONTROLS:
            raise ParameterError(f"step_control must be one of {_STEP_CONTROLS}, got {self.step_control!r}")
        if self.gradient_mode not in _GRADIENT_MODES:
            raise ParameterError(f"gradient_mode must be one of {_GRADIENT_MODES}, got {self.gradient_mode!r}")
        if self.phase_update not in _PHASE_UPDATES:
            raise ParameterError(f"phase_update must be one of {_PHASE_UPDATES}, got {self.phase_update!r}")
        if int(self.stall_limit) != self.stall_limit or self.stall_limit < 1:
            raise ParameterError(f"stall_limit must be a positive integer, got {self.stall_limit!r}")


@dataclass(frozen=True)
class OptResult:
    """Outcome of a phase optimization run.

    ``objective_trace[0]`` is the entropy at the initial phases and
    ``objective_trace[-1]`` the entropy at the returned phases; with
    backtracking enabled the trace is non-decreasing.  ``converged`` is True
    only when the entropy reached its upper bound within tolerance;
    ``iterations`` counts gradient steps attempted.
    """

    phases: np.ndarray
    objective_trace: np.ndarray
    converged: bool
    iterations: int

    def __post_init__(self):
        for name in ("phases", "objective_trace"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def final_entropy(self) -> float:
        return float(self.objective_trace[-1])


def _dyadic_factors(scene: Scene):
    """Factor the cascaded segment as (N, L) @ diag(q) @ (L, M).

    Dyadic scenes already carry the factors.  Spatial scenes factor exactly:
    column l of the left factor is the receive steering vector of path l and
    row l of the right factor is the path gain times the conjugated transmit
    steering vector.
    """
    if scene.is_dyadic:
        return scene.ris_to_rx, scene.tx_to_ris
    n, m, l = scene.num_rx, scene.num_tx, scene.num_elements
    f = np.zeros((n, l), dtype=np.complex128)
    g = np.zeros((l, m), dtype=np.complex128)
    for i, path in enumerate(scene.paths):
        f[:, i] = steering_vector(scene.rx_array, path.rx_azimuth, path.rx_elevation)
        g[i, :] = path.gain * steering_vector(scene.tx_array, path.tx_azimuth, path.tx_elevation).conj()
    return f, g


def _effective(scene, f, g, q):
    cascade = (f * q[np.newaxis, :]) @ g
    return np.sqrt(scene.direct_gain) * scene.direct + np.sqrt(scene.ris_gain) * cascade


def _check_phase_vector(phases, num_elements):
    arr = np.asarray(phases, dtype=float)
    if arr.ndim != 1 or arr.size != num_elements:
        raise DimensionError(f"expected a phase vector of length {num_elements}, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ParameterError("phase vector contains non-finite entries")
    return arr


def _fd_gradient(scene, f, g, phases, amplitudes, h):
    grad = np.empty(phases.size)
    for i in range(phases.size):
        shift = np.zeros(phases.size)
        shift[i] = h
        q_plus = amplitudes * np.exp(1j * (phases + shift))
        q_minus = amplitudes * np.exp(1j * (phases - shift))
        se_plus = spectral_entropy(_effective(scene, f, g, q_plus))
        se_minus = spectral_entropy(_effective(scene, f, g, q_minus))
        grad[i] = (se_plus - se_minus) / (2.0 * h)
    return grad


def _analytic_gradient(scene, f, g, phases, amplitudes, fd_step):
    """Gradient of the entropy objective via singular value perturbation.

    d(sigma_k)/d(theta_l) = Re(conj(u_k)^T dH/d(theta_l) v_k) with
    dH/d(theta_l) = sqrt(ris_gain) * j * beta_l * exp(j theta_l) * f_l g_l,
    which collapses into two small matrix products.  When the spectrum has a
    repeated or zero singular value the perturbation formula degenerates, so
    those (measure-zero) inputs fall back to central differences.
    """
    q = amplitudes * np.exp(1j * phases)
    h_eff = _effective(scene, f, g, q)
    u, s, vh = np.linalg.svd(h_eff, full_matrices=False)
    total = s.sum()
    if total <= 0.0:
        return _fd_gradient(scene, f, g, phases, amplitudes, fd_step)
    gaps_ok = s.size < 2 or np.min(s[:-1] - s[1:]) > DEGENERATE_GAP * s[0]
    if s[-1] <= 0.0 or not gaps_ok:
        return _fd_gradient(scene, f, g, phases, amplitudes, fd_step)
    p = s / total
    ent = float(-(p * np.log(p)).sum())
    weights = -(np.log(p) + ent) / total
    coeff = np.sqrt(scene.ris_gain) * 1j * q
    a = u.conj().T @ f          # (K, L)
    b = g @ vh.conj().T         # (L, K)
    return weights @ np.real(coeff[np.newaxis, :] * a * b.T)


def se_gradient(scene: Scene, phases, amplitudes=None, mode: str = "analytic", fd_step: float = 1e-6):
    """Gradient of spectral entropy of the effective channel w.r.t. phases.

    Args:
        scene: propagation state; both representations are accepted (spatial
            scenes are factored internally).
        phases: surface phases, length scene.num_elements.
        amplitudes: optional per-element amplitudes in [0, 1]; default 1.
        mode: "analytic" (default) or "finite-difference".
        fd_step: central difference half step when finite differences run.

    Returns:
        Length-L float array.  Zero ris_gain gives the zero vector.
    """
    if mode not in _GRADIENT_MODES:
        raise ParameterError(f"mode must be one of {_GRADIENT_MODES}, got {mode!r}")
    if not (math.isfinite(fd_step) and fd_step > 0):
        raise ParameterError(f"fd_step must be positive, got {fd_step!r}")
    phases = _check_phase_vector(phases, scene.num_elements)
    if amplitudes is None:
        amplitudes = np.ones(phases.size)
    else:
        amplitudes = _check_phase_vector(amplitudes, scene.num_elements)
        if amplitudes.size and (amplitudes.min() < 0 or amplitudes.max() > 1):
            raise ParameterError("amplitudes must lie in [0, 1]")
    f, g = _dyadic_factors(scene)
    if mode == "analytic":
        return _analytic_gradient(scene, f, g, phases, amplitudes, fd_step)
    return _fd_gradient(scene, f, g, phases, amplitudes, fd_step)


def maximize_spectral_entropy(scene: Scene, options: OptOptions | None = None, initial_phases=None) -> OptResult:
    """Tune surface phases to equalize the effective channel's spectrum.

    Projected gradient ascent with Armijo backtracking on the wrapped phase
    vector (amplitudes pinned at 1: passive elements at full reflection).
    Terminates on any of: entropy within ``se_tolerance`` of the upper bound
    (the only case reported as converged), gradient norm below
    ``gradient_norm_tol``, ``stall_limit`` consecutive failed line searches,
    or ``max_iterations``.

    Args:
        scene: propagation state.
        options: optimizer knobs, defaults to OptOptions().
        initial_phases: optional start point (wrapped on entry); when omitted
            the start is i.i.d. uniform on [-pi, pi) from ``options.seed``.

    Returns:
        OptResult; result.phases reproduce result.objective_trace[-1] through
        effective_channel + spectral_entropy.
    """
    opts = options if options is not None else OptOptions()
    num = scene.num_elements
    if initial_phases is not None:
        theta = wrap_phase(_check_phase_vector(initial_phases, num))
    else:
        rng = np.random.default_rng(opts.seed)
        theta = rng.uniform(-np.pi, np.pi, num)
    amplitudes = np.ones(num)
    f, g = _dyadic_factors(scene)
    target = entropy_upper_bound(scene.num_rx, scene.num_tx)

    if opts.phase_update == "wrap":
        project = wrap_phase
    else:
        def project(t):
            return np.clip(t, -np.pi, np.pi)

    def objective(t):
        return spectral_entropy(_effective(scene, f, g, amplitudes * np.exp(1j * t)))

    current = objective(theta)
    trace = [current]
    converged = current >= target - opts.se_tolerance
    iterations = 0
    step_opening = 1.0
    stalls = 0

    while not converged and iterations < opts.max_iterations:
        iterations += 1
        grad = se_gradient(scene, theta, amplitudes, opts.gradient_mode, opts.fd_step)
        norm_sq = float(grad @ grad)
        if math.sqrt(norm_sq) < opts.gradient_norm_tol:
            trace.append(current)
            break

        if opts.step_control == "fixed":
            theta = project(theta + opts.fixed_step * grad)
            current = objective(theta)
        else:
            step = step_opening
            accepted = False
            for _ in range(MAX_BACKTRACKS):
                candidate = project(theta + step * grad)
                value = objective(candidate)
                if value >= current + ARMIJO_SLOPE * step * norm_sq:
                    accepted = True
                    break
                step *= ARMIJO_SHRINK
            if accepted:
                theta = candidate
                current = value
                step_opening = min(2.0 * step, STEP_CAP)
                stalls = 0
            else:
                stalls += 1
        trace.append(current)
        converged = current >= target - opts.se_tolerance
        if opts.step_control == "backtracking" and stalls >= opts.stall_limit:
            break

    return OptResult(
        phases=theta,
        objective_trace=np.asarray(trace),
        converged=bool(converged),
        iterations=iterations,
    )


def _check_bits(bits) -> int:
    if isinstance(bits, bool) or int(bits) != bits:
        raise ParameterError(f"bits must be an integer, got {bits!r}")
    bits = int(bits)
    if bits < 1:
        raise ParameterError(f"bits must be at least 1, got {bits}")
    if bits > 64:
        raise ParameterError(f"{bits} bits of phase resolution is not representable")
    return bits


def quantize_phases(phases, bits):
    """Snap each phase to the nearest of 2**bits uniformly spaced levels.

    Levels are -pi + 2*pi*k / 2**bits for k = 0 .. 2**bits - 1.  Nearest is
    measured by circular distance; exact ties resolve to the lower level.
    Idempotent on values already on the grid.
    """
    bits = _check_bits(bits)
    phases = np.asarray(phases, dtype=float)
    if phases.size and not np.isfinite(phases).all():
        raise ParameterError("phases contains non-finite entries")
    count = 2**bits
    step = 2.0 * np.pi / count
    ratio = (wrap_phase(phases) + np.pi) / step  # in [0, count)
    # ceil(r - 0.5) rounds to nearest with interior ties toward the lower
    # level; the tie straddling the wrap point is equidistant between the
    # topmost level and -pi, and -pi is the lower of the two
    index = np.ceil(ratio - 0.5)
    index = np.where(ratio == count - 0.5, 0.0, index)
    return -np.pi + np.mod(index, count) * step


def quantization_levels(bits) -> np.ndarray:
    """The phase grid used by quantize_phases, in ascending order."""
    bits = _check_bits(bits)
    if bits > 24:
        raise ParameterError("refusing to materialize more than 2**24 levels")
    count = 2**bits
    return -np.pi + 2.0 * np.pi * np.arange(count) / count


def cophase_gain_max(direct, tx_to_ris, ris_to_rx):
    """Phases that align all cascaded paths with the direct one (SISO).

    For a single-antenna link, channel magnitude is maximized by rotating
    every element's cascaded coefficient onto the direct channel's angle:

        theta_l = wrap(angle(direct) - angle(ris_to_rx[l] * tx_to_ris[l]))

    giving |h_eff| = |direct| + sum_l beta_l |ris_to_rx[l]| |tx_to_ris[l]|
    at unit amplitudes.  A zero direct channel uses reference angle 0; an
    element with a zero cascaded coefficient gets phase 0 (it contributes
    nothing regardless).
    """
    direct = complex(direct)
    if not (math.isfinite(direct.real) and math.isfinite(direct.imag)):
        raise ParameterError("direct must be finite")
    g = np.asarray(tx_to_ris, dtype=np.complex128)
    f = np.asarray(ris_to_rx, dtype=np.complex128)
    if f.ndim != 1 or g.ndim != 1:
        raise DimensionError("tx_to_ris and ris_to_rx must be 1-D vectors")
    if f.size != g.size:
        raise DimensionError(f"segment lengths differ: {f.size} vs {g.size}")
    if f.size and not (np.isfinite(f).all() and np.isfinite(g).all()):
        raise ParameterError("segment vectors contain non-finite entries")
    reference = np.angle(direct) if direct != 0 else 0.0
    cascade = f * g
    aligned = wrap_phase(reference - np.angle(cascade))
    return np.where(cascade == 0, 0.0, aligned)
