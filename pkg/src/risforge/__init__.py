"""Surface-assisted MIMO channel shaping toolkit.

Assemble effective channels through a reconfigurable reflecting surface,
tune the per-element phases to flatten the singular value spectrum, and
measure the link level consequences with seeded Monte Carlo experiments.
"""

__version__ = "0.1.0"

from .channel import (
    RisConfig,
    Scene,
    SpatialPath,
    UniformLinearArray,
    assemble_dyadic,
    assemble_spatial,
    condition_number,
    effective_channel,
    entropy_upper_bound,
    interaction_matrix,
    sample_rayleigh,
    spectral_entropy,
    steering_vector,
    wrap_phase,
)
from .errors import (
    CapacityError,
    DegenerateInputError,
    DimensionError,
    GeometryError,
    ParameterError,
    RisForgeError,
    SingularChannelError,
)
from .linksim import (
    QPSK_CONSTELLATION,
    ExperimentConfig,
    KappaSample,
    SerCurve,
    awgn_ser_qpsk,
    detect_linear,
    matched_filter,
    ml_detect,
    normalize_scene,
    qpsk_modulate,
    run_kappa_experiment,
    run_ser_experiment,
    ser_for_channel,
    zf_decoder,
)
from .optimize import (
    OptOptions,
    OptResult,
    cophase_gain_max,
    maximize_spectral_entropy,
    quantization_levels,
    quantize_phases,
    se_gradient,
)
from .pathloss import (
    SPEED_OF_LIGHT,
    classify_regime,
    near_field_boundary,
    reflected_pathloss,
    scattered_pathloss,
)

__all__ = [
    "__version__",
    "RisConfig", "Scene", "SpatialPath", "UniformLinearArray",
    "assemble_dyadic", "assemble_spatial", "condition_number",
    "effective_channel", "entropy_upper_bound", "interaction_matrix",
    "sample_rayleigh", "spectral_entropy", "steering_vector", "wrap_phase",
    "RisForgeError", "DimensionError", "ParameterError", "GeometryError",
    "DegenerateInputError", "SingularChannelError", "CapacityError",
    "QPSK_CONSTELLATION", "ExperimentConfig", "KappaSample", "SerCurve",
    "awgn_ser_qpsk", "detect_linear", "matched_filter", "ml_detect",
    "normalize_scene", "qpsk_modulate", "run_kappa_experiment",
    "run_ser_experiment", "ser_for_channel", "zf_decoder",
    "OptOptions", "OptResult", "cophase_gain_max",
    "maximize_spectral_entropy", "quantization_levels", "quantize_phases",
    "se_gradient",
    "SPEED_OF_LIGHT", "classify_regime", "near_field_boundary",
    "reflected_pathloss", "scattered_pathloss",
]
