"""Two-tier hyper-parameter optimization for tabular RL agents.

Structural choices (algorithm, traces, policy, epsilon decay) are optimized
first with a second-order binary surrogate and simulated annealing; the best
structure is then frozen while GP expected improvement tunes the real-valued
settings.  The objective is the mean episode reward of a freshly trained
agent on discretized cart-pole.  Random-search and single-level BO baselines
share the evaluation path, and an experiment CLI writes the comparison
tables.
"""

from .agent import TabularAgent, run_episode, train_cartpole
from .bocs import BocsModel, decode, encode, features, fit_bocs, propose_structural, sa_maximize, sample_acquisition
from .cartpole import CartPole, DiscretizedCartPole, Discretizer, EnvState
from .config import CampaignConfig, ConfigError, parse_config
from .gp import (
    BoxSpace,
    DegenerateModelError,
    Dimension,
    GpModel,
    KernelConfig,
    expected_improvement,
    fit_gp,
    posterior,
    propose_next,
    se_kernel,
)
from .params import Algorithm, AlgorithmParams, HyperParamPoint, Policy, StructuralParams
from .runner import run_campaign, summarize
from .tuner import (
    MetaEpisodeResult,
    ObservationSet,
    TuningReport,
    evaluate_f,
    run_monolithic_bo,
    run_random_search,
    run_two_tier,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "AlgorithmParams",
    "BocsModel",
    "BoxSpace",
    "CampaignConfig",
    "CartPole",
    "ConfigError",
    "DegenerateModelError",
    "Dimension",
    "DiscretizedCartPole",
    "Discretizer",
    "EnvState",
    "GpModel",
    "HyperParamPoint",
    "KernelConfig",
    "MetaEpisodeResult",
    "ObservationSet",
    "Policy",
    "StructuralParams",
    "TabularAgent",
    "TuningReport",
    "decode",
    "encode",
    "evaluate_f",
    "expected_improvement",
    "features",
    "fit_bocs",
    "fit_gp",
    "posterior",
    "propose_next",
    "propose_structural",
    "run_campaign",
    "run_episode",
    "run_monolithic_bo",
    "run_random_search",
    "run_two_tier",
    "sa_maximize",
    "sample_acquisition",
    "se_kernel",
    "summarize",
    "train_cartpole",
    "__version__",
]
