"""Gap-metric robustness certification for LTI systems."""

from .bounds import BoundReport
from .coprime import BezoutPair, GraphSymbol, bezout_solve, coprime_perturbation, nrcf
from .errors import (
    DimensionError,
    DomainError,
    FactorizationError,
    GapcertError,
    NumericalError,
    RiccatiError,
    SingularityError,
)
from .gap import GapResult, directed_gap, gap_metric, pointwise_lb
from .hinfnorm import grid_norm, hinf_norm
from .lti import RationalTF, StateSpace, freq_response, is_stable, poles, ss, tf, tf_to_ss
from .mc import ExperimentConfig, ExperimentResult, GapStatistics, run_experiment
from .perf import bpc, closed_loop_Q, closed_loop_T
from .sampling import Delta, GaussianSpec, PlantFamily, realize_plant, sample_theta

__version__ = "0.1.0"

__all__ = [
    "BezoutPair", "BoundReport", "Delta", "DimensionError", "DomainError", "ExperimentConfig",
    "ExperimentResult", "FactorizationError", "GapResult", "GapStatistics", "GapcertError",
    "GaussianSpec", "GraphSymbol", "NumericalError", "PlantFamily", "RationalTF", "RiccatiError",
    "SingularityError", "StateSpace", "bezout_solve", "bpc", "closed_loop_Q", "closed_loop_T",
    "coprime_perturbation", "directed_gap", "freq_response", "gap_metric", "grid_norm",
    "hinf_norm", "is_stable", "nrcf", "pointwise_lb", "poles", "realize_plant", "run_experiment",
    "sample_theta", "ss", "tf", "tf_to_ss",
]
