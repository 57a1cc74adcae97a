"""Two-state vector analysis of linear-optical networks."""

from .circuit import (
    Attenuator,
    BeamSplitter,
    Block,
    Circuit,
    Detector,
    Mirror,
    Phase,
    Polarizer,
    PolRotator,
    VibrationSpec,
    backward_amplitudes,
    forward_amplitudes,
    overlap,
    postselection_probability,
    propagate_backward,
    propagate_forward,
)
from .errors import (
    BasisError,
    ComplexityError,
    ConfigError,
    EmptyPostselection,
    InconsistentPostselection,
    ParseError,
    PostselectionImpossible,
    SceneError,
    SemanticError,
    TopologyError,
    TsvfError,
    UnknownNameError,
)
from .hilbert import BasisLabel, Operator, StateVector
from .tsvf import (
    ProbeSpec,
    TwoStateVector,
    abl_probabilities,
    classify_presence,
    find_probability,
    partial_postselect,
    perturbation_response,
    two_state_vector_at,
    unconditional_trace,
    weak_value,
    wire_weak_values,
)

__version__ = "0.1.0"
