"""Sparse regularization with a smooth weakly-convex envelope penalty.

The package provides the WEEP penalty (closed-form value, gradient, and
proximal operator), the usual comparison penalties and robust losses,
TV-denoising solvers (ADMM, L-BFGS, closed-form L2), quality metrics, and a
seeded experiment harness with a CLI front end.
"""

from .baselines import (
    CappedL2Penalty,
    HuberLoss,
    L1Penalty,
    McpPenalty,
    NondifferentiableError,
    Penalty,
    PenaltyCapabilityError,
    SquaredL2Penalty,
    TukeyLoss,
    WeepPenalty,
    make_penalty,
)
from .errors import ConvergenceError, NumericalError, SolverError
from .experiments import (
    DenoiseMethod,
    ExperimentReport,
    RegressionDataset,
    add_gaussian_noise,
    fit_mestimator,
    gen_regression_data,
    gen_test_signal,
    grid_search,
    monte_carlo_regression,
    rng_from_seed,
    run_denoise_1d,
    run_denoise_2d,
)
from .linops import (
    DiffField2D,
    diff1d,
    diff1d_adjoint,
    diff2d,
    diff2d_adjoint,
    solve_tikhonov_diff,
)
from .metrics import SsimConfig, mae, mse, psnr, ssim
from .penalty import (
    BasePenaltyParams,
    WeepParams,
    base_value,
    derive_weep_params,
    weep_grad,
    weep_prox,
    weep_value,
)
from .solvers import (
    AdmmConfig,
    LbfgsConfig,
    SolverTrace,
    denoise_admm,
    denoise_l2_closed_form,
    denoise_prox_gradient,
    minimize_lbfgs,
    weep_tv_objective_and_grad,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "BasePenaltyParams",
    "CappedL2Penalty",
    "ConvergenceError",
    "DenoiseMethod",
    "DiffField2D",
    "ExperimentReport",
    "HuberLoss",
    "L1Penalty",
    "LbfgsConfig",
    "McpPenalty",
    "NondifferentiableError",
    "NumericalError",
    "Penalty",
    "PenaltyCapabilityError",
    "RegressionDataset",
    "SolverError",
    "SolverTrace",
    "SquaredL2Penalty",
    "SsimConfig",
    "TukeyLoss",
    "WeepParams",
    "WeepPenalty",
    "add_gaussian_noise",
    "base_value",
    "denoise_admm",
    "denoise_l2_closed_form",
    "denoise_prox_gradient",
    "derive_weep_params",
    "diff1d",
    "diff1d_adjoint",
    "diff2d",
    "diff2d_adjoint",
    "fit_mestimator",
    "gen_regression_data",
    "gen_test_signal",
    "grid_search",
    "mae",
    "make_penalty",
    "minimize_lbfgs",
    "monte_carlo_regression",
    "mse",
    "psnr",
    "rng_from_seed",
    "run_denoise_1d",
    "run_denoise_2d",
    "solve_tikhonov_diff",
    "ssim",
    "weep_grad",
    "weep_prox",
    "weep_tv_objective_and_grad",
    "weep_value",
]
