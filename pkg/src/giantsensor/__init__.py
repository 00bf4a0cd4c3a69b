"""Giant-cavity non-Hermitian sensor: frequency-domain metrics, a delay-equation
cross-check, parameter sweeps and figure regeneration."""

from .errors import (
    GiantSensorError,
    NonpositiveNoise,
    NotConverged,
    NotUnimodal,
    NumericalError,
    SingularSystem,
    StepTooLarge,
    ValidationError,
)
from .model import (
    DEFAULT_CONVENTION,
    SensorParams,
    Topology,
    TransferConvention,
    build_params,
    dissipation_matrix_giant,
    dissipation_matrix_small,
    gain_matrix,
)
from .sweep import SweepSpec, compare_topologies, find_extremum, run_sweep
from .transfer import (
    MetricsReport,
    NoiseBreakdown,
    calibration_report,
    metrics,
    output_noise,
    output_noise_matrix_form,
    reflection_coefficient,
    relative_signal_per_photon,
    relative_snr_per_photon,
    response_coefficient,
    system_matrix,
    transfer_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONVENTION",
    "GiantSensorError",
    "MetricsReport",
    "NoiseBreakdown",
    "NonpositiveNoise",
    "NotConverged",
    "NotUnimodal",
    "NumericalError",
    "SensorParams",
    "SingularSystem",
    "StepTooLarge",
    "SweepSpec",
    "Topology",
    "TransferConvention",
    "ValidationError",
    "build_params",
    "calibration_report",
    "compare_topologies",
    "dissipation_matrix_giant",
    "dissipation_matrix_small",
    "find_extremum",
    "gain_matrix",
    "metrics",
    "output_noise",
    "output_noise_matrix_form",
    "reflection_coefficient",
    "relative_signal_per_photon",
    "relative_snr_per_photon",
    "response_coefficient",
    "run_sweep",
    "system_matrix",
    "transfer_matrix",
]
