"""Seeded state-vector simulator for eigenvalue extraction by phase estimation.

The package splits into a simulation core (:mod:`~spectral_qpe.statevector`,
:mod:`~spectral_qpe.qft`), Hamiltonian evolution
(:mod:`~spectral_qpe.hamiltonian`), the estimation pipeline
(:mod:`~spectral_qpe.phase_estimation`), demo problems and resource
arithmetic (:mod:`~spectral_qpe.problems`), a dense classical reference
engine (:mod:`~spectral_qpe.oracle`), and a batch CLI
(:mod:`~spectral_qpe.cli`).
"""

from .errors import ContractViolation
from .hamiltonian import (
    EvolutionParams,
    HamiltonianSum,
    LocalTerm,
    exact_unitary,
    slices_for_accuracy,
    term_exponential,
    trotter_evolve,
    trotter_step,
)
from .oracle import (
    DEGENERACY_TOL,
    MAX_DENSE_QUBITS,
    SpectralDecomposition,
    assemble_dense,
    degenerate_groups,
    eigendecompose,
    embed_operator,
    spectral_components,
)
from .phase_estimation import (
    EigenResult,
    Histogram,
    PhaseEstimationConfig,
    PhaseSample,
    analytic_bin_distribution,
    apply_conditional_powers_binary,
    apply_conditional_powers_flag_loop,
    default_peak_threshold,
    eigenvector_fidelity,
    phase_to_energy,
    pre_measurement_distribution,
    pre_measurement_state,
    prepare_index_superposition,
    run_phase_estimation,
    sample_spectrum,
)
from .problems import (
    GridRecipe,
    ResourceEstimate,
    build_grid_particle,
    build_transverse_ising,
    product_state_guess,
    resource_estimate,
    sample_potential,
)
from .qft import qft_forward, qft_inverse
from .statevector import (
    GateMatrix,
    MeasurementOutcome,
    RegisterLayout,
    StateVector,
    apply_controlled_gate,
    apply_diagonal_phase,
    apply_gate,
    hadamard,
    inner_product,
    load_amplitudes,
    measure_register,
    new_basis_state,
    pauli_x,
    pauli_z,
    phase_shift,
    register_distribution,
    register_values,
    swap_gate,
    trial_stream,
)

__version__ = "0.1.0"

__all__ = [
    "ContractViolation",
    "EvolutionParams",
    "HamiltonianSum",
    "LocalTerm",
    "exact_unitary",
    "slices_for_accuracy",
    "term_exponential",
    "trotter_evolve",
    "trotter_step",
    "DEGENERACY_TOL",
    "MAX_DENSE_QUBITS",
    "SpectralDecomposition",
    "assemble_dense",
    "degenerate_groups",
    "eigendecompose",
    "embed_operator",
    "spectral_components",
    "EigenResult",
    "Histogram",
    "PhaseEstimationConfig",
    "PhaseSample",
    "analytic_bin_distribution",
    "apply_conditional_powers_binary",
    "apply_conditional_powers_flag_loop",
    "default_peak_threshold",
    "eigenvector_fidelity",
    "phase_to_energy",
    "pre_measurement_distribution",
    "pre_measurement_state",
    "prepare_index_superposition",
    "run_phase_estimation",
    "sample_spectrum",
    "GridRecipe",
    "ResourceEstimate",
    "build_grid_particle",
    "build_transverse_ising",
    "product_state_guess",
    "resource_estimate",
    "sample_potential",
    "qft_forward",
    "qft_inverse",
    "GateMatrix",
    "MeasurementOutcome",
    "RegisterLayout",
    "StateVector",
    "apply_controlled_gate",
    "apply_diagonal_phase",
    "apply_gate",
    "hadamard",
    "inner_product",
    "load_amplitudes",
    "measure_register",
    "new_basis_state",
    "pauli_x",
    "pauli_z",
    "phase_shift",
    "register_distribution",
    "register_values",
    "swap_gate",
    "trial_stream",
    "__version__",
]
