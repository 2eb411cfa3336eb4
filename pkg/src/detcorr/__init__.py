"""detcorr: correct qubit readout errors by inverting a calibrated flip model.

The per-qubit error matrix tensors into the full response, so unfolding
measured distributions, correcting diagonal observables (Pauli strings,
stabilizers, collective-spin moments, squeezing, entanglement witnesses), and
collective excitation-count data all reduce to cheap analytic operations once
the flip rates are calibrated.
"""

from .collective import (
    CollectiveCounts,
    CollectiveResponse,
    UnfoldResult,
    build_inverse_response,
    build_response,
    unfold_collective,
)
from .error_model import (
    CalibrationResult,
    DetectorModel,
    apply_m,
    apply_m_inverse,
    calibrate,
    m_element,
    single_qubit_inverse,
    single_qubit_matrix,
)
from .errors import (
    DegenerateMeanSpinError,
    NoDataError,
    ResourceLimitError,
    SettingMismatchError,
    SingularModelError,
)
from .graphs import GraphSpec, build_graph, class_setting
from .observables import (
    CorrectedObservable,
    JzMoments,
    PauliString,
    SensitivityEstimate,
    SqueezingInput,
    SqueezingResult,
    calibration_sensitivity,
    correction_factor,
    expect_corrected,
    expect_raw,
    jz_moments_corrected,
    squeezing_corrected,
    stabilizer_generators,
    witness_from_counts,
    witness_value,
)
from .reconstruct import (
    CountsRecord,
    Distribution,
    correct,
    frequencies,
    project_to_simplex,
)
from .statesim import (
    NoiseSpec,
    ShotPlan,
    figure1_experiment,
    figure2_experiment,
    sample_setting,
    stabilizer_expectations_noisy,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationResult",
    "CollectiveCounts",
    "CollectiveResponse",
    "CorrectedObservable",
    "CountsRecord",
    "DegenerateMeanSpinError",
    "DetectorModel",
    "Distribution",
    "GraphSpec",
    "JzMoments",
    "NoDataError",
    "NoiseSpec",
    "PauliString",
    "ResourceLimitError",
    "SensitivityEstimate",
    "SettingMismatchError",
    "ShotPlan",
    "SingularModelError",
    "SqueezingInput",
    "SqueezingResult",
    "UnfoldResult",
    "apply_m",
    "apply_m_inverse",
    "build_graph",
    "build_inverse_response",
    "build_response",
    "calibrate",
    "calibration_sensitivity",
    "class_setting",
    "correct",
    "correction_factor",
    "expect_corrected",
    "expect_raw",
    "figure1_experiment",
    "figure2_experiment",
    "frequencies",
    "jz_moments_corrected",
    "m_element",
    "project_to_simplex",
    "sample_setting",
    "single_qubit_inverse",
    "single_qubit_matrix",
    "squeezing_corrected",
    "stabilizer_expectations_noisy",
    "stabilizer_generators",
    "unfold_collective",
    "witness_from_counts",
    "witness_value",
]
