"""Exact diagnostics for information backflow in small open quantum systems.

The package simulates a qubit coupled to a finite spin-chain environment
(or any user-supplied finite model), evolves two initial product states
under the joint Hamiltonian, and tracks the trace distance between the
reduced system states together with the correlation and environment
terms that bound its growth.
"""

from .diagnostics import (
    BoundTerms,
    DiagnosticsRow,
    correlation_distance,
    correlation_operator,
    distinguishability_bound,
    env_indistinguishability,
    guess_probability,
    mutual_information,
    sigma_series,
    trace_distance,
)
from .evolution import (
    Propagator,
    SubspaceOperator,
    TimeGrid,
    TrajectoryRecord,
    carrier_indices,
    evolve_state,
    make_propagator,
    run_trajectory,
)
from .linalg import (
    Bipartition,
    DensityMatrix,
    PureState,
    haar_random_state,
    hermitian_eig,
    kron,
    partial_trace,
    purity,
    trace_norm,
    von_neumann_entropy,
)
from .measure import (
    EquatorialScan,
    MeasureReport,
    PlusMinusPair,
    RandomPairs,
    blp_integral,
    blp_measure,
    down_up_crossings,
    increasing_intervals,
    interval_contributions,
)
from .model import (
    ChainParams,
    CorrelatedInitialStateError,
    DimensionMismatchError,
    Model,
    ModelFileError,
    NonHermitianHamiltonianError,
    build_chain_model,
    equatorial_pair,
    excitation_sectors,
    load_generic_model,
    pauli_on_site,
    plus_minus_pair,
    total_sz_diagonal,
)
from .verify import CheckResult, bound_suite, random_generic_model, run_all_checks, structural_suite

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "BoundTerms",
    "ChainParams",
    "CheckResult",
    "CorrelatedInitialStateError",
    "DensityMatrix",
    "DiagnosticsRow",
    "DimensionMismatchError",
    "EquatorialScan",
    "MeasureReport",
    "Model",
    "ModelFileError",
    "NonHermitianHamiltonianError",
    "PlusMinusPair",
    "Propagator",
    "PureState",
    "RandomPairs",
    "SubspaceOperator",
    "TimeGrid",
    "TrajectoryRecord",
    "blp_integral",
    "blp_measure",
    "build_chain_model",
    "carrier_indices",
    "correlation_distance",
    "correlation_operator",
    "distinguishability_bound",
    "down_up_crossings",
    "env_indistinguishability",
    "equatorial_pair",
    "evolve_state",
    "excitation_sectors",
    "guess_probability",
    "haar_random_state",
    "hermitian_eig",
    "increasing_intervals",
    "interval_contributions",
    "kron",
    "load_generic_model",
    "make_propagator",
    "mutual_information",
    "partial_trace",
    "pauli_on_site",
    "plus_minus_pair",
    "purity",
    "random_generic_model",
    "run_all_checks",
    "run_trajectory",
    "sigma_series",
    "structural_suite",
    "total_sz_diagonal",
    "trace_distance",
    "trace_norm",
    "von_neumann_entropy",
    "__version__",
]
