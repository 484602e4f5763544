"""Sparse-signal recovery in overcomplete dictionaries.

Greedy signal-space recovery with pluggable near-optimal projections,
classic coefficient-space baselines, isometry/localization diagnostics,
and a reproducible batch experiment harness.
"""

from .dictionaries import (
    Dictionary,
    SensingMatrix,
    is_parseval,
    load_matrix,
    make_gaussian_sensing,
    make_identity,
    make_overcomplete_dft,
    make_random_orthonormal,
    make_renormalized_orthogonal,
    save_matrix,
)
from .estimators import CoefficientPursuit, SignalSpacePursuit
from .experiments import (
    ExperimentSpec,
    RecoveryCurve,
    derive_seed,
    dump_spec,
    export_csv,
    load_csv,
    load_spec,
    run_curve,
    run_trial,
    write_traces,
)
from .linalg import (
    least_squares_on_support,
    normalized_correlations,
    opnorm_gram_deviation,
    project_onto_span,
    top_k_indices,
)
from .metrics import (
    BoundReport,
    DripEstimate,
    bound_report,
    convergence_constants,
    drip_constant,
    localization_factor,
    measurement_bound,
    model_mismatch,
    r_snr,
    recovery_error,
    tail_energy,
)
from .projections import (
    NearOptimality,
    ProjectionResult,
    ProjectionScheme,
    lambda_opt_bruteforce,
    near_optimality_constants,
    project_with_scheme,
    sd_pursuit,
    sd_threshold,
)
from .pursuit import SolverSpec, exact_recovery, solve, solve_with_info
from .signals import SparseCoef, SupportModel, add_noise, gen_p_compressible, gen_sparse_coef
from .sssp import RecoveryResult, SsspConfig, estimate_sparsity, sssp_recover

__version__ = "0.1.0"
