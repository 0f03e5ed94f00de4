"""Charged particle in a Paul trap under a second-order gravitational field.

Classical trajectories, Floquet stability, restricted-path-integral
measurement probabilities and quantum nondemolition variables.
"""
__version__ = "0.1.0"

from .errors import (
    DegenerateBVP,
    IntegrationError,
    NonFiniteError,
    NumericalError,
    ParameterError,
    PoleDetected,
    ZeroCrossing,
)
from .grid import SolutionGrid
from .mathieu import (
    CoefficientFunction,
    FundamentalBasis,
    StabilityVerdict,
    d_function,
    fundamental_basis,
    integrate,
    stability,
    stability_scan,
)
from .model import (
    SCALED,
    SI,
    EffectiveCoefficients,
    EnvironmentReport,
    MathieuParameters,
    PhysicalConstants,
    TrapInput,
    derive_coefficients,
    environment_report,
    from_mathieu_parameters,
    to_mathieu_parameters,
)
from .qnd import (
    QndRatio,
    QndVariable,
    canonical_ratio,
    closed_form_ratio,
    hamiltonian_value,
    qnd_residual,
    qnd_variable,
)
from .rpif import (
    UNMONITORED,
    ComplexPathResult,
    MeasurementRecord,
    ProbabilityValue,
    PropagatorValue,
    classical_action,
    complex_classical_path,
    effective_shift,
    probability_density,
    propagator,
    record_sweep,
)
from .trajectory import (
    ForcedTrajectory,
    forced_solution_green,
    forced_solution_nested,
    rescaling_equivalence_check,
    residual,
    simulate,
)

__all__ = [
    "__version__",
    "SolutionGrid",
    "DegenerateBVP",
    "IntegrationError",
    "NonFiniteError",
    "NumericalError",
    "ParameterError",
    "PoleDetected",
    "ZeroCrossing",
    "CoefficientFunction",
    "FundamentalBasis",
    "StabilityVerdict",
    "d_function",
    "fundamental_basis",
    "integrate",
    "stability",
    "stability_scan",
    "SCALED",
    "SI",
    "EffectiveCoefficients",
    "EnvironmentReport",
    "MathieuParameters",
    "PhysicalConstants",
    "TrapInput",
    "derive_coefficients",
    "environment_report",
    "from_mathieu_parameters",
    "to_mathieu_parameters",
    "QndRatio",
    "QndVariable",
    "canonical_ratio",
    "closed_form_ratio",
    "hamiltonian_value",
    "qnd_residual",
    "qnd_variable",
    "UNMONITORED",
    "ComplexPathResult",
    "MeasurementRecord",
    "ProbabilityValue",
    "PropagatorValue",
    "classical_action",
    "complex_classical_path",
    "effective_shift",
    "probability_density",
    "propagator",
    "record_sweep",
    "ForcedTrajectory",
    "forced_solution_green",
    "forced_solution_nested",
    "rescaling_equivalence_check",
    "residual",
    "simulate",
]
