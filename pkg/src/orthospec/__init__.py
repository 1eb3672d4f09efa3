"""Spectral initialization and expectation-propagation analysis for
phase retrieval with column-orthogonal sensing matrices."""

from .asymptotics import (
    AsymptoticPrediction,
    DeltaThreshold,
    PsiTriple,
    delta_threshold,
    f_of_mu,
    lambda_of_mu,
    mu_bar,
    mu_hat,
    predict,
    psi,
    rho_star_curve,
    star_optimal,
)
from .core import (
    SignalInstance,
    cosine_similarity_sq,
    make_rng,
    make_signal,
    sample_complex_gaussian,
)
from .errors import (
    ConfigError,
    DegeneratePredictionError,
    DegenerateStateError,
    InvalidParameterError,
    NumericError,
    OrthospecError,
    SingularityError,
)
from .pcaep import (
    EPState,
    SEState,
    TrackedRun,
    build_ep_weights,
    ep_extract_x,
    ep_init,
    ep_step,
    fixed_point_check,
    noise_corr_step,
    run_tracked,
    se_cosine,
    se_step,
)
from .preprocessing import (
    ProcessingFunction,
    eval_G,
    eval_T,
    make_function,
    normalize,
    t_range,
)
from .sensing import SensingSpec
from .spectral import (
    SpectralEstimate,
    TrialResult,
    WeightDiagonal,
    apply_D,
    build_weights,
    default_shift,
    power_method,
    run_trial,
)
from .spectrum import SpectrumReport, analyze, dense_D, dense_E

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPrediction",
    "ConfigError",
    "DegeneratePredictionError",
    "DegenerateStateError",
    "DeltaThreshold",
    "EPState",
    "InvalidParameterError",
    "NumericError",
    "OrthospecError",
    "ProcessingFunction",
    "PsiTriple",
    "SEState",
    "SensingSpec",
    "SignalInstance",
    "SingularityError",
    "SpectralEstimate",
    "SpectrumReport",
    "TrackedRun",
    "TrialResult",
    "WeightDiagonal",
    "analyze",
    "apply_D",
    "build_ep_weights",
    "build_weights",
    "cosine_similarity_sq",
    "default_shift",
    "delta_threshold",
    "dense_D",
    "dense_E",
    "ep_extract_x",
    "ep_init",
    "ep_step",
    "eval_G",
    "eval_T",
    "f_of_mu",
    "fixed_point_check",
    "lambda_of_mu",
    "make_function",
    "make_rng",
    "make_signal",
    "mu_bar",
    "mu_hat",
    "noise_corr_step",
    "normalize",
    "power_method",
    "predict",
    "psi",
    "rho_star_curve",
    "run_tracked",
    "run_trial",
    "sample_complex_gaussian",
    "se_cosine",
    "se_step",
    "star_optimal",
    "t_range",
]
