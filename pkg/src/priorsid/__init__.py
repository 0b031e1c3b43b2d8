"""Prior-knowledge equality constraints on Markov parameters for LTI identification.

The package turns physical prior knowledge about a sampled plant (DC gains,
dominant time constants, integrating or dead channels, second-order
recurrences) into linear equality constraints on the Markov parameters,
estimates those parameters from input-output data by constrained FIR least
squares, and realizes a state-space model with Kung's algorithm.
"""

from .discretize import (
    DtSecondOrderCoeffs,
    FirstOrder,
    Integrator,
    IntegratorFirstOrder,
    PrototypeModel,
    SecondOrderOsc,
    TwoTimeConstants,
    controller_form,
    prototype_markov,
    prototype_statespace,
    zoh_first_order,
    zoh_integrator,
    zoh_second_order,
)
from .estimate import (
    EstimateResult,
    EstimationWarning,
    FirRegression,
    IdentDataset,
    build_fir_regression,
    default_weight,
    ls_equality_exact,
    ls_equality_weighted,
    ls_unconstrained,
)
from .priors import (
    ConsistencyReport,
    ConstraintCompileWarning,
    DcGain,
    DcGainMatrix,
    EqualityConstraintSet,
    FirstOrderDecay,
    GainRatio,
    InfeasibleConstraintsError,
    IntegratorChannel,
    MarkovIndexing,
    PriorSpec,
    SecondOrderRecurrence,
    ZeroChannel,
    check_consistency,
    compile_priors,
    constraint_residual,
)
from .realize import (
    HankelSpec,
    RealizationResult,
    block_hankel,
    default_hankel_shape,
    identify_pipeline,
    kung_realize,
)
from .statespace import (
    MarkovSequence,
    SimulationRecord,
    StateSpaceModel,
    apply_similarity,
    dc_gain,
    markov_sequence,
    pulse_response,
    simulate,
    simulate_record,
    spectral_radius,
)

__version__ = "0.1.0"

__all__ = [
    "StateSpaceModel",
    "MarkovSequence",
    "SimulationRecord",
    "simulate",
    "simulate_record",
    "markov_sequence",
    "pulse_response",
    "dc_gain",
    "apply_similarity",
    "spectral_radius",
    "Integrator",
    "FirstOrder",
    "IntegratorFirstOrder",
    "TwoTimeConstants",
    "SecondOrderOsc",
    "PrototypeModel",
    "DtSecondOrderCoeffs",
    "zoh_first_order",
    "zoh_integrator",
    "zoh_second_order",
    "controller_form",
    "prototype_markov",
    "prototype_statespace",
    "MarkovIndexing",
    "DcGain",
    "DcGainMatrix",
    "GainRatio",
    "FirstOrderDecay",
    "IntegratorChannel",
    "SecondOrderRecurrence",
    "ZeroChannel",
    "PriorSpec",
    "EqualityConstraintSet",
    "ConsistencyReport",
    "ConstraintCompileWarning",
    "InfeasibleConstraintsError",
    "compile_priors",
    "check_consistency",
    "constraint_residual",
    "IdentDataset",
    "FirRegression",
    "EstimateResult",
    "EstimationWarning",
    "build_fir_regression",
    "ls_unconstrained",
    "ls_equality_exact",
    "ls_equality_weighted",
    "default_weight",
    "HankelSpec",
    "RealizationResult",
    "block_hankel",
    "kung_realize",
    "identify_pipeline",
    "default_hankel_shape",
]
