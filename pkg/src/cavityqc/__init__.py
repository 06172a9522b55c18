"""Simulator and verification suite for ensemble-pair encoded cavity qubits."""

from .basis import (
    CollectiveBasis,
    CompositeBasis,
    FockFactor,
    Mode,
    NodeSpec,
    build_microscopic_basis,
    build_two_node_collective_basis,
    collective_excitation_state,
    double_excitation_state,
    pair_isometry,
    symmetrize,
)
from .circuits import (
    AssemblyReport,
    Circuit,
    CircuitBundle,
    EquivalenceResult,
    LogicalRegister,
    Operation,
    and_gate,
    apply,
    circuit_from_text,
    circuit_to_text,
    controlled_power_improved,
    controlled_power_matrix,
    controlled_power_standard,
    encoded_toffoli,
    equivalence_up_to_global_phase,
    gate_counts,
    logical_matrix,
    standard_toffoli_upto_phase,
)
from .dynamics import (
    BlockadeSolution,
    ErrorReport,
    TransistorBasis,
    analytic_pair_evolution,
    blockade_solution,
    effective_model_error,
    evolve_on_grid,
    first_maximum_time,
    propagate,
    transistor_evolution,
)
from .gates import (
    CNOT,
    TOFFOLI,
    GateUnitary,
    LogicalQubit,
    RotationSynthesis,
    controlled_et,
    decode,
    encode,
    et_gate,
    haar_random_unitary,
    pcet,
    phase_gate,
    synthesize_rotation,
)
from .hamiltonian import (
    CouplingSet,
    DetuningSet,
    EffectiveRates,
    HamiltonianMatrix,
    SwCoefficients,
    collective_pair_hamiltonian,
    effective_hamiltonian,
    effective_hamiltonian_microscopic,
    lamb_shift_hamiltonian,
    microscopic_hamiltonian,
    photon_free_effective_hamiltonian,
    schrieffer_wolff_hamiltonian,
    sw_coefficients,
    sw_generator,
    swap_hamiltonian_microscopic,
    total_excitation_operator,
    transistor_hamiltonian,
    transistor_rate,
    two_level_swap_hamiltonian,
)
from .state import StateVector, fidelity, inner

__version__ = "0.1.0"
