"""Change point localization for Bradley-Terry-Luce pairwise comparison streams."""

from .dp import DpTrace, Segmentation, default_min_seg, dp_detect, dp_objective
from .evaluate import (
    CvResult,
    count_k,
    cv_select,
    hausdorff,
    odd_even_split,
    original_time_of_test,
    theory_gamma,
    original_time_of_train,
)
from .model import (
    ComparisonGraph,
    DisconnectedGraphError,
    Observation,
    ObservationSeries,
    ProbMatrix,
    Theta,
    grad_neg_log_lik,
    hess_neg_log_lik,
    laplacian_spectrum,
    neg_log_lik,
    p_lb,
    prob_matrix,
    prob_matrix_bounds_check,
    sigmoid,
    win_prob,
)
from .refine import dplr_detect, refine
from .simulate import (
    ChangeSpec,
    Scenario,
    SnrReport,
    apply_change,
    base_theta,
    generate,
    snr_diagnostic,
)
from .solver import (
    FitResult,
    IntervalCache,
    SolverConfig,
    fit_interval,
    interval_objective,
    pair_counts,
)
from .wbs import (
    IntervalStat,
    WbsConfig,
    borda_cusum,
    borda_vector,
    glr_stat,
    sst_stat,
    wbs_detect,
)

__version__ = "0.1.0"

__all__ = [
    "ChangeSpec",
    "ComparisonGraph",
    "CvResult",
    "DisconnectedGraphError",
    "DpTrace",
    "FitResult",
    "IntervalCache",
    "IntervalStat",
    "Observation",
    "ObservationSeries",
    "ProbMatrix",
    "Scenario",
    "Segmentation",
    "SnrReport",
    "SolverConfig",
    "Theta",
    "WbsConfig",
    "apply_change",
    "base_theta",
    "borda_cusum",
    "borda_vector",
    "count_k",
    "cv_select",
    "default_min_seg",
    "dp_detect",
    "dp_objective",
    "dplr_detect",
    "fit_interval",
    "generate",
    "glr_stat",
    "grad_neg_log_lik",
    "hausdorff",
    "hess_neg_log_lik",
    "interval_objective",
    "laplacian_spectrum",
    "neg_log_lik",
    "odd_even_split",
    "p_lb",
    "pair_counts",
    "prob_matrix",
    "prob_matrix_bounds_check",
    "refine",
    "sigmoid",
    "snr_diagnostic",
    "sst_stat",
    "original_time_of_test",
    "theory_gamma",
    "original_time_of_train",
    "wbs_detect",
    "win_prob",
]
