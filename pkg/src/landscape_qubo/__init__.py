"""Approximate QUBO solving via the localization landscape of a perturbed
Ising Hamiltonian, with variational-ansatz and depth-one QAOA baselines."""
from .errors import (
    BoundNotApplicableError,
    CapacityError,
    InvalidInputError,
    LandscapeQuboError,
    NotConvergedError,
    NumericalError,
    SingularOverlapError,
    SingularSpectrumError,
)
from .hamiltonian import (
    PerturbedHamiltonian,
    ValidityReport,
    build,
    dense_matrix,
    heuristic_parameters,
    validity_check,
)
from .landscape import (
    DistributionSource,
    LandscapeVector,
    SamplingDistribution,
    effective_potential,
    hamming_profile,
    sample_bitstrings,
    sampling_distribution,
    solve_landscape,
    verify_bound,
)
from .qaoa import QaoaParams, grid_search, qaoa_cnot_count, qaoa_state
from .qubo import (
    Bitstring,
    ProblemKind,
    QuboProblem,
    SolutionRecord,
    brute_force_solve,
    generate_maxcut_3regular,
    generate_random_qubo,
    ising_diagonal,
    qubo_cost,
)
from .varprep import AnsatzParams, VariationalConfig, cnot_count, optimize, prepare_ansatz

__version__ = "0.1.0"
