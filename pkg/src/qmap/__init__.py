"""Quantized kicked maps on the torus: spectra, level motion, ergodicity.

The library quantizes three one-kick map families (chaotic, regular, and a
slowly ergodic sawtooth variant), follows their eigenlevels under an
O(h^2) change of quantization, and measures coarse-grained ergodicity of
eigenstates through diagonal matrix elements, smoothed two-point sums and
trace autocorrelations.
"""

from ._version import __version__
from .classical import (
    OBSERVABLES,
    CorrelatorCurve,
    LyapunovReport,
    classical_correlator,
    lyapunov_exponent,
    map_step,
    microcanonical_average,
)
from .config import RunSpec, load_config, make_runspec
from .ergodicity import (
    ErgodicityReport,
    diagonal_elements_report,
    offdiag_near_degenerate,
    quantum_F_curve,
    quantum_classical_compare,
    quantum_correlator,
    quantum_correlator_eigenbasis,
)
from .errors import (
    ConfigurationError,
    DomainError,
    FitError,
    NumericalError,
    QmapError,
    StepTooLargeError,
    TrackingError,
)
from .model import (
    VARIANTS,
    MapFamily,
    PhaseSpacePoint,
    PlanckScale,
    evaluate,
    require_even_dimension,
)
from .quantize import (
    FloquetOperator,
    ObservableMatrix,
    build_floquet,
    free_propagator,
    kick_propagator,
    quantize_observable,
)
from .spectral import (
    SpectralData,
    decompose_unitary,
    diagonalize,
    mean_spacing,
    phase_clusters,
)
from .sweep import (
    LevelTrajectories,
    ModelFit,
    ScalingFit,
    ShiftStatistics,
    fit_shift_scaling,
    scaling_study,
    shift_statistics,
    sweep_quantization,
    track_levels,
)

__all__ = [
    "__version__",
    "OBSERVABLES",
    "VARIANTS",
    "MapFamily",
    "PhaseSpacePoint",
    "PlanckScale",
    "evaluate",
    "require_even_dimension",
    "map_step",
    "microcanonical_average",
    "lyapunov_exponent",
    "LyapunovReport",
    "classical_correlator",
    "CorrelatorCurve",
    "build_floquet",
    "kick_propagator",
    "free_propagator",
    "quantize_observable",
    "FloquetOperator",
    "ObservableMatrix",
    "diagonalize",
    "decompose_unitary",
    "mean_spacing",
    "phase_clusters",
    "SpectralData",
    "diagonal_elements_report",
    "ErgodicityReport",
    "quantum_F_curve",
    "offdiag_near_degenerate",
    "quantum_correlator",
    "quantum_correlator_eigenbasis",
    "quantum_classical_compare",
    "sweep_quantization",
    "track_levels",
    "LevelTrajectories",
    "shift_statistics",
    "ShiftStatistics",
    "scaling_study",
    "fit_shift_scaling",
    "ModelFit",
    "ScalingFit",
    "RunSpec",
    "load_config",
    "make_runspec",
    "QmapError",
    "ConfigurationError",
    "DomainError",
    "NumericalError",
    "StepTooLargeError",
    "TrackingError",
    "FitError",
]
