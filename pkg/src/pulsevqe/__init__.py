"""Pulse-level variational quantum eigensolver on simulated transmon devices.

Drives a coupled-transmon model with parameterized control pulses, evaluates
the qubit-mapped molecular energy of the evolved state, and variationally
shapes the pulses toward the molecular ground state.
"""

from .hamiltonians import (
    PauliTerm,
    QubitHamiltonian,
    SpinPenalty,
    parse_hamiltonian,
    load_hamiltonian,
    serialize_hamiltonian,
    expectation,
    exact_ground,
    overlap_with_ground,
)
from .device import (
    TransmonDevice,
    Coupling,
    StaticSpectrum,
    build_static_hamiltonian,
    lowering_operator,
    eigendecompose_static,
    parse_device,
    load_device,
    ring_device,
)
from .pulses import (
    SquarePulse,
    GaussianPulse,
    GaussianComponent,
    PulseSet,
    ParamVector,
    amplitude_at,
    pack,
    unpack,
    split_largest_segment,
    square_template,
    parse_pulse_set,
    load_pulse_set,
    serialize_pulse_set,
)
from .dynamics import (
    EvolutionConfig,
    EvolutionResult,
    embed_reference,
    drive_hamiltonian,
    evolve,
    leakage,
)
from .objective import (
    ObjectiveSpec,
    GradientReport,
    project_normalize,
    energy,
    gradient,
    value_and_gradient,
    spin_expectation,
)
from .optimize import (
    OptimizerConfig,
    OptimizationRecord,
    minimize,
    multistart,
    adaptive_optimize,
    duration_search,
)
from .estimators import PulseVQE, AdaptivePulseVQE

__version__ = "0.1.0"
