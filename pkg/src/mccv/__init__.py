"""Modified cross-validation tuning-parameter selection for penalized regression."""

from .criteria import (
    CriterionSurface,
    SplitEvaluation,
    criterion_surface,
    evaluate_split_path,
    gamma0,
    gamma1,
    gamma2,
    gamma3,
    info_criterion,
    shrinkage_correction,
)
from .errors import MccvError
from .refit import OlsFit, ols_refit, predict
from .selector import (
    METHOD_NAMES,
    MethodSpec,
    SelectionResult,
    method_from_name,
    run_many,
    run_selection,
    selection_proportions,
)
from .simgen import (
    CovSpec,
    ExperimentConfig,
    Metrics,
    TrueModel,
    evaluate,
    make_covariance,
    run_experiment,
    sample_dataset,
    standard_betas,
)
from .solver import (
    LASSO,
    Dataset,
    LambdaGrid,
    PathPoint,
    PenaltySpec,
    SolutionPath,
    fit_path,
    fit_point,
    kkt_check,
    lambda_grid,
    soft_threshold,
    standardize,
    take_rows,
)
from .splits import (
    KFold,
    MonteCarlo,
    ReversedKFold,
    SplitPlan,
    make_kfold,
    make_mccv,
    make_plan,
    make_reversed_kfold,
)

__version__ = "0.1.0"
