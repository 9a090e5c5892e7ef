"""Numerical laboratory for a nuclear-ensemble quantum memory.

A single electron spin exchanges excitations with N polarized nuclear
spins through inhomogeneous hyperfine couplings.  This package builds the
exact finite-N model on its invariant subspaces, the single-collective-
mode approximation with its validity diagnostics, the qubit write/read
storage protocol, and the thermal dephasing caused by the auxiliary
collective modes.
"""

from .couplings import (
    CouplingProfile,
    HomogeneityReport,
    ModeBasis,
    generate_profile,
    gram_schmidt_modes,
    homogeneity_metrics,
    permutation_mode,
)
from .decoherence import (
    DecoherenceCurve,
    ThermalParams,
    decoherence_factor,
    offdiagonal_element,
    surface_grid,
    thermal_sum_oracle,
    zero_temperature_limit,
)
from .dynamics import (
    EffectiveState,
    ExactEvolution,
    ExactStorageOutcome,
    QubitState,
    StorageResult,
    effective_evolve,
    exact_evolve,
    jc_block_propagator,
    protocol_basis,
    storage_error_sweep,
    write_qubit,
    write_qubit_exact,
    write_rotation,
    write_time,
)
from .errors import (
    DegenerateStateError,
    InvalidArgumentError,
    ProfileGenerationError,
    ResourceCapError,
    SubspaceViolationError,
    ToleranceError,
    UnsupportedConstructionError,
)
from .fockspace import (
    SPIN_DOWN,
    SPIN_UP,
    NuclearSector,
    SparseOperator,
    StateVector,
    SubspaceBasis,
    apply_collective_raising,
    aux_mode_lowering,
    bright_fock_state,
    bright_mode_lowering,
    build_operator,
    commutator_defect,
    enumerate_sectors,
    enumerate_subspace,
    ground_state,
    ident,
    ladder_matrix_element,
    nuc_minus,
    nuc_plus,
    nuc_z,
    random_state,
    sigma_minus,
    sigma_plus,
    sigma_z,
)
from .hamiltonian import (
    HamiltonianParts,
    ModelParams,
    build_effective_jc,
    build_full,
    build_inhomogeneity,
    build_parts,
    build_rabi_exchange,
    build_sector_energy,
    build_site_exchange,
    composite_energy_down,
    composite_energy_up,
    effective_dim,
    effective_index,
    rabi_frequency,
    sector_energy,
    tune_resonance,
)
from .spectra import (
    Cluster,
    Spectrum,
    SpectrumComparison,
    compare_spectra,
    effective_eigenstate,
    effective_spectrum,
    eigensolve,
    perturbation_ratio,
)

__version__ = "0.1.0"
