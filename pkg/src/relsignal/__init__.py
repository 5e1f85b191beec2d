"""Label-noise analysis toolkit.

Computes relative signal strength and signal regions, checks noise-immunity
conditions on transition matrices, evaluates excess-risk bounds with
explicit constants, simulates adversarial minimax constructions and
label-flipping processes, and trains noise-ignorant linear classifiers on
feature files.
"""

from .bounds import (
    BoundQuery,
    BoundReport,
    estimation_term,
    log_shatter_bound,
    lower_bound_general,
    lower_bound_zero_error,
    oracle_rhs,
    smooth_margin_bound,
    upper_bound_ni_erm,
)
from .estimate import RssEstimateReport, estimate_report, fit_smooth_margin
from .fileio import read_features, read_labels, write_features, write_labels
from .immunity import (
    SymmetricNoiseSpec,
    find_counterexample,
    is_diagonally_dominant,
    is_immune,
    make_symmetric,
    sym_noise_stats,
    universal_form_decompose,
)
from .signal import (
    RegionReport,
    pi_membership,
    positive_region,
    region_masses,
    rss,
    rss_binary,
)
from .simplex import (
    ClassifierTable,
    FinitePosteriorTriple,
    SimplexVector,
    TransitionMatrix,
    ValidationError,
    argmax_set,
    bayes_risk,
    compose_noisy_posterior,
    excess_risk,
    risk_of,
)
from .synth import (
    ClassConditional,
    InstanceDependent,
    LabeledSample,
    MinimaxInstanceSpec,
    UniformFlip,
    build_general_instance,
    build_zero_error_instance,
    flip_labels,
    gaussian_mixture,
    general_proof_params,
    mc_excess_risk,
    plurality_fit,
    sample_from_triple,
)
from .trainer import (
    CvReport,
    LinearModel,
    TrainConfig,
    accuracy,
    cross_validate,
    fit,
    loss_and_gradient,
    predict_proba,
)

__version__ = "0.1.0"
