"""Monte Carlo symbol error rate simulation over surface-assisted channels.

Unit-energy QPSK is transmitted on every spatial stream, so a channel with
average entry gain 1 and M streams carries total power M.  SNR is defined as
total transmit power times average channel gain over the noise variance,
giving noise variance M / snr_linear per receive antenna.

Seeding layout (stable across releases): SeedSequence(seed).spawn(R) gives
one child per channel realization; realization streams are spawned from the
child as (channel, phases, noise).  Per SNR point the symbol indices are
drawn before the noise matrix.  Error counts are integers, so totals do not
depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .channel import (
    RisConfig,
    Scene,
    condition_number,
    effective_channel,
    sample_rayleigh,
    spectral_entropy,
)
from .errors import CapacityError, DimensionError, ParameterError, SingularChannelError
from .optimize import OptOptions, maximize_spectral_entropy, quantize_phases

__all__ = [
    "QPSK_CONSTELLATION",
    "qpsk_modulate",
    "awgn_ser_qpsk",
    "zf_decoder",
    "matched_filter",
    "detect_linear",
    "ml_detect",
    "ser_for_channel",
    "normalize_scene",
    "ExperimentConfig",
    "KappaSample",
    "SerCurve",
    "run_kappa_experiment",
    "run_ser_experiment",
]

# Gray-mapped QPSK, unit energy.  Index bit 0 selects the real sign,
# bit 1 the imaginary sign: 0 -> (+1+1j)/sqrt(2), 1 -> (-1+1j)/sqrt(2),
# 2 -> (+1-1j)/sqrt(2), 3 -> (-1-1j)/sqrt(2).
QPSK_CONSTELLATION = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2.0)

ML_CANDIDATE_LIMIT = 10**6

DETECTORS = ("zf", "mf", "ml")
SCENARIOS = ("baseline", "assisted")


def qpsk_modulate(indices) -> np.ndarray:
    """Map integer symbol indices in {0, 1, 2, 3} to QPSK points."""
    idx = np.asarray(indices)
    if idx.size and (not np.issubdtype(idx.dtype, np.integer) or idx.min() < 0 or idx.max() > 3):
        raise ParameterError("QPSK indices must be integers in {0, 1, 2, 3}")
    return QPSK_CONSTELLATION[idx]


def _qfunc(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def awgn_ser_qpsk(snr_db: float) -> float:
    """Closed-form QPSK symbol error probability on the scalar AWGN channel.

    With symbol SNR gamma_s and per-bit SNR gamma_b = gamma_s / 2 the
    probability is 1 - (1 - Q(sqrt(2 * gamma_b)))**2.
    """
    gamma_s = 10.0 ** (float(snr_db) / 10.0)
    q = _qfunc(math.sqrt(gamma_s))
    return 1.0 - (1.0 - q) ** 2


def zf_decoder(h) -> np.ndarray:
    """Zero-forcing decoder W = (H^H H)^-1 H^H (left pseudo-inverse).

    Requires at least as many receive antennas as streams and full column
    rank; raises SingularChannelError when the smallest singular value falls
    at or below 1e-12 of the largest.  W @ H recovers the identity.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2:
        raise DimensionError(f"channel must be 2-D, got {h.ndim}-D")
    n, m = h.shape
    if n < m:
        raise DimensionError(f"zero-forcing needs num_rx >= num_tx, got {n} < {m}")
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SingularChannelError("channel is rank deficient; zero-forcing undefined")
    return (vh.conj().T / s[np.newaxis, :]) @ u.conj().T


def matched_filter(h) -> np.ndarray:
    """Matched filter decoder: the conjugate transpose of the channel."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2:
        raise DimensionError(f"channel must be 2-D, got {h.ndim}-D")
    return h.conj().T


def _nearest_indices(z, constellation) -> np.ndarray:
    # argmin takes the first occurrence, so ties go to the lowest index
    return np.abs(z[..., np.newaxis] - constellation).argmin(axis=-1)


def detect_linear(w, y, constellation=QPSK_CONSTELLATION) -> np.ndarray:
    """Apply a linear decoder and slice each stream to the nearest point.

    Args:
        w: (M, N) decoder matrix.
        y: length-N received vector.
        constellation: candidate symbol points.

    Returns:
        Length-M integer indices into ``constellation``.
    """
    w = np.asarray(w, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if w.ndim != 2 or y.ndim != 1 or w.shape[1] != y.size:
        raise DimensionError(f"decoder {w.shape} does not match received vector of length {y.size}")
    return _nearest_indices(w @ y, np.asarray(constellation, dtype=np.complex128))


def _ml_candidates(num_streams: int, constellation) -> tuple[np.ndarray, np.ndarray]:
    q = len(constellation)
    if q**num_streams > ML_CANDIDATE_LIMIT:
        raise CapacityError(
            f"{q}**{num_streams} candidate vectors exceed the exhaustive search limit {ML_CANDIDATE_LIMIT}"
        )
    idx = np.array(list(product(range(q), repeat=num_streams)), dtype=np.intp)
    return idx, np.asarray(constellation, dtype=np.complex128)[idx]


def _ml_detect_batch(h, y_batch, cand_idx, cand_syms) -> np.ndarray:
    # squared distance up to the |y|^2 row constant; argmin then picks the
    # first (lexicographically smallest) candidate on exact ties
    hc = cand_syms @ h.T
    scores = np.sum(np.abs(hc) ** 2, axis=1)[np.newaxis, :] - 2.0 * np.real(y_batch @ hc.conj().T)
    return cand_idx[scores.argmin(axis=1)]


def ml_detect(h, y, constellation=QPSK_CONSTELLATION) -> np.ndarray:
    """Maximum likelihood detection by exhaustive enumeration.

    Minimizes ||y - H x||^2 over every candidate symbol vector, enumerated
    in lexicographic index order (exact ties take the lexicographically
    smallest).  Raises CapacityError beyond ML_CANDIDATE_LIMIT candidates.
    """
    h = np.asarray(h, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if h.ndim != 2 or y.ndim != 1 or h.shape[0] != y.size:
        raise DimensionError(f"channel {h.shape} does not match received vector of length {y.size}")
    cand_idx, cand_syms = _ml_candidates(h.shape[1], constellation)
    return _ml_detect_batch(h, y[np.newaxis, :], cand_idx, cand_syms)[0]


def _noise_sigma2(num_tx: int, snr_db: float) -> float:
    return num_tx / 10.0 ** (snr_db / 10.0)


def ser_for_channel(h, snr_grid_db, trials: int, detectors, rng, constellation=QPSK_CONSTELLATION):
    """Count symbol errors for one fixed channel across an SNR grid.

    Every configured detector decodes the same received samples, so detector
    comparisons on a given channel share noise realizations.

    Args:
        h: (N, M) channel matrix.
        snr_grid_db: iterable of SNR points in dB.
        trials: transmitted vectors per SNR point, positive.
        detectors: subset of {"zf", "mf", "ml"}.
        rng: numpy Generator for symbols and noise.
        constellation: symbol alphabet, unit average energy assumed.

    Returns:
        dict mapping detector name to an int64 array of symbol error counts
        per SNR point; each point sees trials * M symbol transmissions.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2:
        raise DimensionError(f"channel must be 2-D, got {h.ndim}-D")
    n, m = h.shape
    if trials < 1:
        raise ParameterError(f"trials must be positive, got {trials}")
    detectors = tuple(detectors)
    unknown = set(detectors) - set(DETECTORS)
    if not detectors or unknown:
        raise ParameterError(f"detectors must be a nonempty subset of {DETECTORS}, got {detectors!r}")
    constellation = np.asarray(constellation, dtype=np.complex128)
    grid = [float(v) for v in snr_grid_db]

    linear = {}
    if "zf" in detectors:
        linear["zf"] = zf_decoder(h)
    if "mf" in detectors:
        linear["mf"] = matched_filter(h)
    if "ml" in detectors:
        cand_idx, cand_syms = _ml_candidates(m, constellation)

    errors = {det: np.zeros(len(grid), dtype=np.int64) for det in detectors}
    for pi, snr_db in enumerate(grid):
        sigma2 = _noise_sigma2(m, snr_db)
        idx = rng.integers(0, len(constellation), size=(trials, m))
        x = constellation[idx]
        parts = rng.standard_normal((trials, n, 2))
        noise = (parts[..., 0] + 1j * parts[..., 1]) * math.sqrt(sigma2 / 2.0)
        y = x @ h.T + noise
        for det in detectors:
            if det == "ml":
                decided = _ml_detect_batch(h, y, cand_idx, cand_syms)
            else:
                decided = _nearest_indices(y @ linear[det].T, constellation)
            errors[det][pi] = int((decided != idx).sum())
    return errors


def normalize_scene(num_tx: int, num_rx: int, num_elements: int, ris_power_fraction: float,
                    rng: np.random.Generator) -> Scene:
    """Draw a random scene whose average effective entry gain is 1.

    All three matrices are i.i.d. CN(0, 1), drawn in the order direct,
    surface-to-receiver, transmitter-to-surface.  The power split
    ``ris_power_fraction`` (rho) routes rho through the surface:
    direct_gain = 1 - rho and ris_gain = rho / L, the latter compensating
    the L-fold variance of the cascaded sum.  The split keeps comparisons
    between assisted and unassisted links fair: the surface may only
    rearrange energy across the spectrum, not add any.
    """
    rho = float(ris_power_fraction)
    if not (0.0 <= rho <= 1.0):
        raise ParameterError(f"ris_power_fraction must lie in [0, 1], got {rho!r}")
    if num_elements < 1:
        raise DimensionError(f"num_elements must be positive, got {num_elements}")
    direct = sample_rayleigh(num_rx, num_tx, rng)
    ris_to_rx = sample_rayleigh(num_rx, num_elements, rng)
    tx_to_ris = sample_rayleigh(num_elements, num_tx, rng)
    return Scene(
        direct=direct,
        direct_gain=1.0 - rho,
        ris_gain=rho / num_elements,
        ris_to_rx=ris_to_rx,
        tx_to_ris=tx_to_ris,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared parameters for the conditioning and error rate experiments."""

    num_tx: int = 4
    num_rx: int = 4
    num_elements: int = 100
    ris_power_fraction: float = 0.5
    snr_grid_db: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)
    trials_per_point: int = 1000
    channel_realizations: int = 100
    detectors: tuple = ("zf", "ml")
    optimize_ris: bool = True
    quantize_bits: int | None = None
    seed: int = 0
    threads: int = 1
    opt_options: OptOptions = field(default_factory=OptOptions)

    def __post_init__(self):
        for attr in ("num_tx", "num_rx", "num_elements", "trials_per_point",
                     "channel_realizations", "threads"):
            v = getattr(self, attr)
            if int(v) != v or v < 1:
                raise ParameterError(f"{attr} must be a positive integer, got {v!r}")
            object.__setattr__(self, attr, int(v))
        rho = float(self.ris_power_fraction)
        if not (math.isfinite(rho) and 0.0 <= rho <= 1.0):
            raise ParameterError(f"ris_power_fraction must lie in [0, 1], got {rho!r}")
        grid = tuple(float(v) for v in self.snr_grid_db)
        if not grid or not all(math.isfinite(v) for v in grid):
            raise ParameterError("snr_grid_db must be a nonempty tuple of finite values")
        object.__setattr__(self, "snr_grid_db", grid)
        detectors = tuple(self.detectors)
        if not detectors or set(detectors) - set(DETECTORS) or len(set(detectors)) != len(detectors):
            raise ParameterError(f"detectors must be distinct names from {DETECTORS}, got {detectors!r}")
        object.__setattr__(self, "detectors", detectors)
        if self.quantize_bits is not None:
            bits = self.quantize_bits
            if isinstance(bits, bool) or int(bits) != bits or bits < 1:
                raise ParameterError(f"quantize_bits must be a positive integer or None, got {bits!r}")
            object.__setattr__(self, "quantize_bits", int(bits))


@dataclass(frozen=True)
class KappaSample:
    """Conditioning of one channel realization before and after tuning."""

    realization: int
    kappa_before: float
    kappa_after: float
    se_before: float
    se_after: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SerCurve:
    """Symbol error rates across an SNR grid for one scenario and detector."""

    scenario: str
    detector: str
    snr_db: np.ndarray
    ser: np.ndarray
    trials: np.ndarray
    ci_halfwidth: np.ndarray


def _realization_streams(root_children, index: int):
    channel_ss, phase_ss, noise_ss = root_children[index].spawn(3)
    return (
        np.random.default_rng(channel_ss),
        np.random.default_rng(phase_ss),
        np.random.default_rng(noise_ss),
    )


def _map_realizations(fn, count: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def run_kappa_experiment(config: ExperimentConfig) -> list[KappaSample]:
    """Condition number statistics before and after surface tuning.

    For each realization a normalized scene is drawn, the surface starts at
    i.i.d. uniform phases (the untuned baseline) and the optimizer runs from
    that same start.  Results are indexed by realization and independent of
    ``config.threads``.
    """
    children = np.random.SeedSequence(config.seed).spawn(config.channel_realizations)

    def one(i: int) -> KappaSample:
        channel_rng, phase_rng, _ = _realization_streams(children, i)
        scene = normalize_scene(
            config.num_tx, config.num_rx, config.num_elements,
            config.ris_power_fraction, channel_rng,
        )
        init = phase_rng.uniform(-np.pi, np.pi, config.num_elements)
        before = effective_channel(scene, RisConfig.full_reflection(init))
        result = maximize_spectral_entropy(scene, config.opt_options, initial_phases=init)
        after = effective_channel(scene, RisConfig.full_reflection(result.phases))
        return KappaSample(
            realization=i,
            kappa_before=condition_number(before),
            kappa_after=condition_number(after),
            se_before=spectral_entropy(before),
            se_after=result.final_entropy,
            iterations=result.iterations,
            converged=result.converged,
        )

    return _map_realizations(one, config.channel_realizations, config.threads)


def _assisted_channel(config: ExperimentConfig, channel_rng, phase_rng) -> np.ndarray:
    scene = normalize_scene(
        config.num_tx, config.num_rx, config.num_elements,
        config.ris_power_fraction, channel_rng,
    )
    phases = phase_rng.uniform(-np.pi, np.pi, config.num_elements)
    if config.optimize_ris:
        phases = maximize_spectral_entropy(scene, config.opt_options, initial_phases=phases).phases
    if config.quantize_bits is not None:
        phases = quantize_phases(phases, config.quantize_bits)
    return effective_channel(scene, RisConfig.full_reflection(phases))


def run_ser_experiment(config: ExperimentConfig, scenarios=SCENARIOS) -> list[SerCurve]:
    """Monte Carlo SER curves, averaged over channel realizations.

    The ``baseline`` scenario draws an unassisted i.i.d. CN(0, 1) channel;
    ``assisted`` draws a normalized scene and applies the configured surface
    tuning.  Both scenarios reuse the same per-realization noise stream, so
    they see identical symbol and noise draws.  Returned curves are ordered
    scenario-major, detector-minor.
    """
    scenarios = tuple(scenarios)
    if not scenarios or set(scenarios) - set(SCENARIOS) or len(set(scenarios)) != len(scenarios):
        raise ParameterError(f"scenarios must be distinct names from {SCENARIOS}, got {scenarios!r}")
    children = np.random.SeedSequence(config.seed).spawn(config.channel_realizations)
    grid = np.asarray(config.snr_grid_db, dtype=float)
    symbols_per_point = config.channel_realizations * config.trials_per_point * config.num_tx

    curves = []
    for scenario in scenarios:
        def one(i: int):
            channel_rng, phase_rng, noise_rng = _realization_streams(children, i)
            if scenario == "baseline":
                h = sample_rayleigh(config.num_rx, config.num_tx, channel_rng)
            else:
                h = _assisted_channel(config, channel_rng, phase_rng)
            return ser_for_channel(
                h, grid, config.trials_per_point, config.detectors, noise_rng,
            )

        counts = _map_realizations(one, config.channel_realizations, config.threads)
        for det in config.detectors:
            total = np.zeros(grid.size, dtype=np.int64)
            for c in counts:
                total += c[det]
            ser = total / symbols_per_point
            halfwidth = 1.96 * np.sqrt(ser * (1.0 - ser) / symbols_per_point)
            curves.append(SerCurve(
                scenario=scenario,
                detector=det,
                snr_db=grid.copy(),
                ser=ser,
                trials=np.full(grid.size, symbols_per_point, dtype=np.int64),
                ci_halfwidth=halfwidth,
            ))
    return curves
