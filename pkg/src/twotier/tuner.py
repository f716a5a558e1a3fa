"""Two-tier hyper-parameter search and its baselines.

The two-tier optimizer first explores the four structural switches for N
evaluations with the binary surrogate, holding the real-valued settings at
their priors; it then freezes the best structure found and spends M more
evaluations on the real-valued box with GP expected improvement, warm-started
from the structural incumbent (copied, not re-evaluated).  Random search and
single-level BO are driven through the same evaluation path so all three see
identical objective noise per (campaign seed, evaluation index).
"""

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .agent import train_cartpole
from .bocs import decode, encode, propose_structural
from .gp import BoxSpace, DegenerateModelError, Dimension, fit_gp, propose_next, quasi_random_points
from .params import Algorithm, AlgorithmParams, HyperParamPoint, Policy, StructuralParams

logger = logging.getLogger(__name__)

# Stream tags: evaluation seeds are shared by every optimizer (so they face
# the same objective noise at the same evaluation index), proposal streams
# are keyed by optimizer (so adding one cannot perturb the others).
EVAL_STREAM = 0x45564C31
PROPOSAL_STREAM = 0x50525031

OPTIMIZER_CODES = {"two_tier": 0, "random": 1, "mono_bo": 2}

# Structural configuration used when a baseline does not search structure.
DEFAULT_STRUCTURAL = StructuralParams(
    algorithm=Algorithm.QLEARNING,
    eligibility_traces=False,
    policy=Policy.EPSILON_GREEDY,
    epsilon_decay=False,
)

REAL_DIM_NAMES = ("alpha", "epsilon", "gamma", "tau", "n_bins", "n_bins_angle")
MONO_INIT_POINTS = 5


def evaluation_seed(campaign_seed: int, eval_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((EVAL_STREAM, campaign_seed, eval_index))


def proposal_rng(campaign_seed: int, optimizer: str) -> np.random.Generator:
    code = OPTIMIZER_CODES[optimizer]
    return np.random.default_rng(np.random.SeedSequence((PROPOSAL_STREAM, campaign_seed, code)))


@dataclass(frozen=True)
class MetaEpisodeResult:
    """One objective evaluation: a fresh agent trained under one setting."""

    point: HyperParamPoint
    f_value: float
    episode_rewards: tuple[float, ...]
    seed: int
    wall_time: float = field(compare=False, default=0.0)

    def __post_init__(self):
        if self.episode_rewards:
            mean = sum(self.episode_rewards) / len(self.episode_rewards)
            if abs(mean - self.f_value) > 1e-9:
                raise ValueError("f_value is not the mean of episode_rewards")


class ObservationSet:
    """Append-only evaluation log with earliest-index max lookup."""

    def __init__(self, items: list[MetaEpisodeResult] | None = None):
        self._items: list[MetaEpisodeResult] = list(items) if items else []

    def append(self, result: MetaEpisodeResult) -> None:
        self._items.append(result)

    def best(self) -> MetaEpisodeResult:
        if not self._items:
            raise ValueError("empty observation set")
        best = self._items[0]
        for r in self._items[1:]:
            if r.f_value > best.f_value:
                best = r
        return best

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, i):
        return self._items[i]

    def __iter__(self):
        return iter(self._items)


@dataclass
class TuningReport:
    """Full record of one optimization campaign."""

    optimizer: str
    campaign_seed: int
    results: list[MetaEpisodeResult]
    incumbents: list[float]
    best_point: HyperParamPoint
    best_f: float
    structural_proposals: int = 0
    real_proposals: int = 0
    initial_points: int = 0
    fallback_proposals: int = 0
    frozen_structural: StructuralParams | None = None
    d1: ObservationSet | None = None
    d2: ObservationSet | None = None


def evaluate_f(
    point: HyperParamPoint,
    episodes: int,
    seed,
    max_steps: int = 200,
    x_dot_limit: float = 3.0,
    theta_dot_limit: float = 3.5,
) -> MetaEpisodeResult:
    """Train a fresh agent for ``episodes`` episodes; f is the mean reward.

    Deterministic given (point, seed): the generator drives both the start
    states and every exploration draw.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    seed_seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seed_record = int(seed_seq.generate_state(1)[0])
    rng = np.random.default_rng(seed_seq)
    start = time.perf_counter()
    rewards = train_cartpole(
        point.structural,
        point.algorithm,
        episodes,
        rng,
        max_steps=max_steps,
        x_dot_limit=x_dot_limit,
        theta_dot_limit=theta_dot_limit,
    )
    wall = time.perf_counter() - start
    return MetaEpisodeResult(
        point=point,
        f_value=float(np.mean(rewards)),
        episode_rewards=tuple(float(r) for r in rewards),
        seed=seed_record,
        wall_time=wall,
    )


def real_space(structural: StructuralParams, bounds: dict) -> BoxSpace:
    """Box of the real-valued settings that are live under this structure.

    Epsilon only matters to an epsilon-greedy agent and tau only to a
    softmax one, so exactly one of the two appears; alpha, gamma, and both
    bin counts are always live.
    """
    dims = []
    for name in REAL_DIM_NAMES:
        if name == "epsilon" and structural.policy != Policy.EPSILON_GREEDY:
            continue
        if name == "tau" and structural.policy != Policy.SOFTMAX:
            continue
        lo, hi = bounds[name]
        dims.append(Dimension(name, float(lo), float(hi), integer=name.startswith("n_bins")))
    return BoxSpace(dims)


def full_real_space(bounds: dict) -> BoxSpace:
    """All six real-valued dimensions (random search samples them all)."""
    dims = [
        Dimension(name, float(bounds[name][0]), float(bounds[name][1]), integer=name.startswith("n_bins"))
        for name in REAL_DIM_NAMES
    ]
    return BoxSpace(dims)


def params_from_vector(space: BoxSpace, vec: np.ndarray, prior: AlgorithmParams) -> AlgorithmParams:
    """Prior settings with the space's dimensions replaced by ``vec``."""
    updates = {}
    for dim, v in zip(space.dims, vec):
        updates[dim.name] = int(np.rint(v)) if dim.integer else float(v)
    return dataclasses.replace(prior, **updates)


def vector_from_params(space: BoxSpace, params: AlgorithmParams) -> np.ndarray:
    return np.array([float(getattr(params, d.name)) for d in space.dims], dtype=np.float64)


def _make_evaluator(config, campaign_seed: int):
    def evaluate(point: HyperParamPoint, eval_index: int) -> MetaEpisodeResult:
        return evaluate_f(
            point,
            config.episodes,
            evaluation_seed(campaign_seed, eval_index),
            max_steps=config.max_steps,
            x_dot_limit=config.x_dot_limit,
            theta_dot_limit=config.theta_dot_limit,
        )

    return evaluate


def _finish(report: TuningReport) -> TuningReport:
    incumbents = []
    best = None
    cur = -np.inf
    for r in report.results:
        if r.f_value > cur:
            cur = r.f_value
            best = r
        incumbents.append(cur)
    report.incumbents = incumbents
    report.best_point = best.point
    report.best_f = best.f_value
    return report


def run_two_tier(config, campaign_seed: int, evaluate=None) -> TuningReport:
    """Structural loop (N evaluations, binary surrogate) then real-valued
    loop (M evaluations, GP/EI) with the best structure frozen."""
    n, m = config.n_structural, config.n_real
    if n < 1 or m < 1:
        raise ValueError("need n_structural >= 1 and n_real >= 1")
    if evaluate is None:
        evaluate = _make_evaluator(config, campaign_seed)
    rng = proposal_rng(campaign_seed, "two_tier")
    prior = config.prior

    d1 = ObservationSet()
    bit_history: list[tuple[np.ndarray, float]] = []
    n_structural_proposals = 0
    for i in range(n):
        structural = propose_structural(bit_history, rng)
        n_structural_proposals += 1
        result = evaluate(HyperParamPoint(structural, prior), i)
        d1.append(result)
        bit_history.append((encode(structural), result.f_value))

    incumbent = d1.best()
    frozen = incumbent.point.structural
    d2 = ObservationSet([incumbent])
    space = real_space(frozen, config.bounds)
    x_obs = [vector_from_params(space, incumbent.point.algorithm)]
    y_obs = [incumbent.f_value]

    n_real_proposals = 0
    n_fallbacks = 0
    for j in range(m):
        try:
            model = fit_gp(space, np.array(x_obs), np.array(y_obs))
            x_next = propose_next(model, max(y_obs), rng)
        except DegenerateModelError:
            logger.warning("degenerate surrogate at real step %d; sampling uniformly", j)
            x_next = space.sample(rng)
            n_fallbacks += 1
        n_real_proposals += 1
        params = params_from_vector(space, x_next, prior)
        result = evaluate(HyperParamPoint(frozen, params), n + j)
        d2.append(result)
        x_obs.append(vector_from_params(space, result.point.algorithm))
        y_obs.append(result.f_value)

    results = list(d1) + list(d2)[1:]
    report = TuningReport(
        optimizer="two_tier",
        campaign_seed=campaign_seed,
        results=results,
        incumbents=[],
        best_point=None,
        best_f=0.0,
        structural_proposals=n_structural_proposals,
        real_proposals=n_real_proposals,
        fallback_proposals=n_fallbacks,
        frozen_structural=frozen,
        d1=d1,
        d2=d2,
    )
    return _finish(report)


def run_random_search(config, campaign_seed: int, evaluate=None) -> TuningReport:
    """Uniform sampling: structure uniform over the 16 vectors (unless fixed
    by config), real values uniform over the full box."""
    if evaluate is None:
        evaluate = _make_evaluator(config, campaign_seed)
    rng = proposal_rng(campaign_seed, "random")
    prior = config.prior
    space = full_real_space(config.bounds)

    results = []
    for i in range(config.budget):
        if config.rs_fix_structural:
            structural = DEFAULT_STRUCTURAL
        else:
            idx = int(rng.integers(16))
            structural = decode(np.array([(idx >> b) & 1 for b in range(4)], dtype=np.int64))
        vec = space.sample(rng)
        params = params_from_vector(space, vec, prior)
        results.append(evaluate(HyperParamPoint(structural, params), i))

    report = TuningReport(
        optimizer="random",
        campaign_seed=campaign_seed,
        results=results,
        incumbents=[],
        best_point=None,
        best_f=0.0,
    )
    return _finish(report)


def run_monolithic_bo(config, campaign_seed: int, evaluate=None) -> TuningReport:
    """Single-level GP/EI over the real-valued box with structure pinned to
    the default; a small quasi-random design precedes the first fit."""
    if evaluate is None:
        evaluate = _make_evaluator(config, campaign_seed)
    rng = proposal_rng(campaign_seed, "mono_bo")
    prior = config.prior
    structural = DEFAULT_STRUCTURAL
    space = real_space(structural, config.bounds)

    n_init = min(MONO_INIT_POINTS, config.budget)
    init_points = quasi_random_points(space, n_init, rng)
    results = []
    x_obs = []
    y_obs = []
    for i in range(n_init):
        vec = init_points[i]
        params = params_from_vector(space, vec, prior)
        result = evaluate(HyperParamPoint(structural, params), i)
        results.append(result)
        x_obs.append(vector_from_params(space, result.point.algorithm))
        y_obs.append(result.f_value)

    n_real_proposals = 0
    n_fallbacks = 0
    for i in range(n_init, config.budget):
        try:
            model = fit_gp(space, np.array(x_obs), np.array(y_obs))
            x_next = propose_next(model, max(y_obs), rng)
        except DegenerateModelError:
            logger.warning("degenerate surrogate at step %d; sampling uniformly", i)
            x_next = space.sample(rng)
            n_fallbacks += 1
        n_real_proposals += 1
        params = params_from_vector(space, x_next, prior)
        result = evaluate(HyperParamPoint(structural, params), i)
        results.append(result)
        x_obs.append(vector_from_params(space, result.point.algorithm))
        y_obs.append(result.f_value)

    report = TuningReport(
        optimizer="mono_bo",
        campaign_seed=campaign_seed,
        results=results,
        incumbents=[],
        best_point=None,
        best_f=0.0,
        real_proposals=n_real_proposals,
        initial_points=n_init,
        fallback_proposals=n_fallbacks,
    )
    return _finish(report)


OPTIMIZER_RUNNERS = {
    "two_tier": run_two_tier,
    "random": run_random_search,
    "mono_bo": run_monolithic_bo,
}
