"""Prediction-oriented calibration of computer models.

The package fits a computer model eta(x, theta) to noisy field data
Y_i = zeta(X_i) + eps_i while modeling the physical-versus-model
discrepancy nonparametrically in the RKHS of a Matern-3/2 kernel.
Besides classical least squares and L2 calibration, it implements a
prediction-weighted calibration whose parameter update minimizes
(Y - eta)^T (Sigma + n*lambda I)^{-1} (Y - eta), the profiled form of
the joint penalized problem, and it verifies the Bayesian limit that
connects the penalized fit to a Gaussian-process posterior mean.
"""

from .bayes import (
    BayesHyper,
    LinearComputerModel,
    RankDeficientBasis,
    partial_spline_limit,
    posterior_mean,
    verify_proposition_limit,
)
from .calibrate import (
    CalibrationResult,
    ComputerModel,
    ObjectiveNonFinite,
    calibrate_l2,
    calibrate_ls,
    calibrate_optpred,
    lagrangian_value,
    minimize_box,
    weighted_objective,
)
from .experiments import (
    DEFAULT_SEED,
    METHOD_NAMES,
    ExperimentConfig,
    PmseReport,
    build_predictors,
    cv5_select_psi,
    default_psi_grid,
    parse_config,
    pmse,
    run_experiment,
)
from .kernels import (
    DEFAULT_JITTER,
    MAX_JITTER,
    GramMatrix,
    KernelSpec,
    gram,
    kernel_cross,
    kernel_eval,
    rkhs_norm_sq_approx,
)
from .linalg import (
    CholFactor,
    DimensionMismatch,
    NotPositiveDefinite,
    SymMatrix,
    cholesky,
    matrix_exponential,
    solve_spd,
    trace_of_influence,
)
from .regression import (
    DEFAULT_LAMBDA_GRID,
    AllDegenerate,
    Dataset,
    DegenerateTrace,
    DiscrepancyFit,
    fit_ridge,
    gcv_score,
    predict_discrepancy,
    select_lambda_gcv,
)
from .rng import RngStream, latin_hypercube, normal, uniform
from .systems import (
    NamedSystem,
    NoTruthAvailable,
    ex1_eta,
    ex1_zeta,
    ex2_eta,
    ex2_zeta,
    ex3_eta,
    ex3_zeta,
    generate_dataset,
    get_system,
    ion_eta,
    load_dataset_csv,
    system_names,
)

__version__ = "0.1.0"
