"""Optimizer loops: budgets, freezing, warm start, seeding, and baselines."""

import numpy as np
import pytest

from twotier.config import CampaignConfig, parse_config
from twotier.gp import DegenerateModelError
from twotier.params import Algorithm, AlgorithmParams, HyperParamPoint, Policy, StructuralParams
from twotier.tuner import (
    DEFAULT_STRUCTURAL,
    MONO_INIT_POINTS,
    MetaEpisodeResult,
    ObservationSet,
    evaluate_f,
    evaluation_seed,
    full_real_space,
    params_from_vector,
    proposal_rng,
    real_space,
    run_monolithic_bo,
    run_random_search,
    run_two_tier,
    vector_from_params,
)

EG = Policy.EPSILON_GREEDY
SM = Policy.SOFTMAX


def synthetic(fn):
    """Wrap f(point, eval_index) as an injectable evaluator that logs indices."""
    calls = []

    def evaluate(point, eval_index):
        calls.append(eval_index)
        return MetaEpisodeResult(
            point=point, f_value=float(fn(point, eval_index)), episode_rewards=(), seed=eval_index
        )

    return evaluate, calls


def two_tier_config(**kw):
    kw.setdefault("optimizers", "two_tier")
    return parse_config(overrides=kw)


def structure_score(point, _i):
    s = point.structural
    return (
        2.0 * int(s.algorithm)
        + 1.0 * int(s.eligibility_traces)
        + 1.5 * int(s.policy)
        + 0.5 * int(s.epsilon_decay)
    )


class TestEvaluateF:
    def test_f_is_mean_of_episode_rewards(self):
        point = HyperParamPoint(DEFAULT_STRUCTURAL, AlgorithmParams(n_bins=6, n_bins_angle=6))
        r = evaluate_f(point, 20, 123)
        assert len(r.episode_rewards) == 20
        assert abs(r.f_value - np.mean(r.episode_rewards)) < 1e-9

    def test_deterministic_given_point_and_seed(self):
        point = HyperParamPoint(
            StructuralParams(Algorithm.SARSA, True, SM, False),
            AlgorithmParams(n_bins=6, n_bins_angle=6),
        )
        a = evaluate_f(point, 15, 5)
        b = evaluate_f(point, 15, 5)
        assert a.f_value == b.f_value
        assert a.episode_rewards == b.episode_rewards
        c = evaluate_f(point, 15, 6)
        assert c.episode_rewards != a.episode_rewards

    def test_rejects_zero_episodes(self):
        point = HyperParamPoint(DEFAULT_STRUCTURAL, AlgorithmParams())
        with pytest.raises(ValueError):
            evaluate_f(point, 0, 1)

    def test_result_consistency_enforced(self):
        point = HyperParamPoint(DEFAULT_STRUCTURAL, AlgorithmParams())
        ok = MetaEpisodeResult(point, 50.0, (-200.0, 200.0, 150.0), 0)
        assert ok.f_value == 50.0
        with pytest.raises(ValueError):
            MetaEpisodeResult(point, 49.0, (-200.0, 200.0, 150.0), 0)

    def test_sensible_settings_beat_pathological_ones(self):
        bad = HyperParamPoint(DEFAULT_STRUCTURAL, AlgorithmParams(alpha=0.99, epsilon=0.99))
        tuned = HyperParamPoint(
            DEFAULT_STRUCTURAL,
            AlgorithmParams(alpha=0.3, epsilon=0.1, gamma=0.99, n_bins=8, n_bins_angle=8),
        )
        for seed in range(6):
            f_bad = evaluate_f(bad, 200, seed).f_value
            f_tuned = evaluate_f(tuned, 200, seed).f_value
            assert f_tuned > f_bad, f"seed {seed}: {f_tuned} <= {f_bad}"


class TestSeeding:
    def test_evaluation_seed_keyed_by_campaign_and_index(self):
        a = evaluation_seed(3, 5).generate_state(4)
        assert np.array_equal(a, evaluation_seed(3, 5).generate_state(4))
        assert not np.array_equal(a, evaluation_seed(3, 6).generate_state(4))
        assert not np.array_equal(a, evaluation_seed(4, 5).generate_state(4))

    def test_proposal_streams_keyed_by_optimizer(self):
        draws = {
            name: proposal_rng(0, name).random(4).tolist()
            for name in ("two_tier", "random", "mono_bo")
        }
        assert draws["two_tier"] != draws["random"] != draws["mono_bo"]
        again = proposal_rng(0, "random").random(4).tolist()
        assert draws["random"] == again

    def test_optimizers_share_evaluation_seeds(self):
        config = parse_config(
            overrides={"optimizers": "random,mono_bo", "budget": 6, "episodes": 1}
        )
        rand = run_random_search(config, campaign_seed=2)
        mono = run_monolithic_bo(config, campaign_seed=2)
        assert [r.seed for r in rand.results] == [r.seed for r in mono.results]


class TestObservationSet:
    def test_best_keeps_earliest_on_ties(self):
        point = HyperParamPoint(DEFAULT_STRUCTURAL, AlgorithmParams())
        rs = [MetaEpisodeResult(point, v, (), i) for i, v in enumerate([1.0, 3.0, 3.0, 2.0])]
        obs = ObservationSet(rs)
        assert obs.best() is rs[1]
        assert len(obs) == 4

    def test_empty_best_rejected(self):
        with pytest.raises(ValueError):
            ObservationSet().best()


class TestTwoTier:
    def test_budget_split_and_warm_start(self):
        config = two_tier_config(budget=30, n_structural=10, n_real=20)
        evaluate, calls = synthetic(structure_score)
        report = run_two_tier(config, campaign_seed=0, evaluate=evaluate)

        assert calls == list(range(30))  # every index used once, in order
        assert len(report.results) == 30
        assert report.structural_proposals == 10
        assert report.real_proposals == 20
        assert len(report.d1) == 10
        assert len(report.d2) == 21  # warm-start copy plus 20 evaluations
        assert report.d2[0] == report.d1.best()
        assert report.results == list(report.d1) + list(report.d2)[1:]

    def test_loop_one_holds_reals_at_prior(self):
        config = two_tier_config(budget=30, n_structural=10, n_real=20)
        evaluate, _ = synthetic(structure_score)
        report = run_two_tier(config, campaign_seed=1, evaluate=evaluate)
        for r in report.d1:
            assert r.point.algorithm == config.prior

    def test_loop_two_structure_frozen(self):
        config = two_tier_config(budget=30, n_structural=10, n_real=20)
        evaluate, _ = synthetic(structure_score)
        report = run_two_tier(config, campaign_seed=2, evaluate=evaluate)
        assert report.frozen_structural == report.d1.best().point.structural
        for r in report.d2:
            assert r.point.structural == report.frozen_structural

    def test_finds_best_structure_on_clean_signal(self):
        target = StructuralParams(Algorithm.SARSA, True, SM, True)
        config = two_tier_config(budget=30, n_structural=10, n_real=20)
        evaluate, _ = synthetic(structure_score)
        hits = 0
        for seed in range(10):
            report = run_two_tier(config, campaign_seed=seed, evaluate=evaluate)
            hits += report.frozen_structural == target
        assert hits == 10

    def test_minimal_budgets(self):
        config = two_tier_config(budget=2, n_structural=1, n_real=1)
        evaluate, calls = synthetic(structure_score)
        report = run_two_tier(config, campaign_seed=0, evaluate=evaluate)
        assert calls == [0, 1]
        assert len(report.d1) == 1 and len(report.d2) == 2
        assert len(report.results) == 2

    def test_rejects_empty_loops(self):
        config = CampaignConfig(n_structural=0, n_real=2)
        evaluate, _ = synthetic(structure_score)
        with pytest.raises(ValueError):
            run_two_tier(config, 0, evaluate=evaluate)

    def test_deterministic_per_campaign_seed(self):
        config = two_tier_config(budget=30, n_structural=10, n_real=20)
        evaluate, _ = synthetic(lambda p, i: structure_score(p, i) - (p.algorithm.alpha - 0.4) ** 2)
        r1 = run_two_tier(config, campaign_seed=7, evaluate=evaluate)
        r2 = run_two_tier(config, campaign_seed=7, evaluate=evaluate)
        assert [r.f_value for r in r1.results] == [r.f_value for r in r2.results]
        assert [r.point for r in r1.results] == [r.point for r in r2.results]

    def test_incumbents_monotone_and_consistent(self):
        config = two_tier_config(budget=30, n_structural=10, n_real=20)
        evaluate, _ = synthetic(lambda p, i: float(np.sin(i * 2.3)))
        report = run_two_tier(config, campaign_seed=3, evaluate=evaluate)
        inc = report.incumbents
        assert len(inc) == 30
        assert all(b >= a for a, b in zip(inc, inc[1:]))
        assert inc[-1] == report.best_f
        running = [max(r.f_value for r in report.results[: k + 1]) for k in range(30)]
        assert inc == running

    def test_nuisance_settings_never_searched(self):
        config = two_tier_config(budget=30, n_structural=10, n_real=20)
        evaluate, _ = synthetic(structure_score)
        report = run_two_tier(config, campaign_seed=4, evaluate=evaluate)
        for r in report.results:
            assert r.point.algorithm.lam == config.prior.lam
            assert r.point.algorithm.epsilon_decay_rate == config.prior.epsilon_decay_rate
            assert r.point.algorithm.epsilon_min == config.prior.epsilon_min

    def test_frozen_softmax_keeps_epsilon_at_prior(self):
        config = two_tier_config(budget=20, n_structural=8, n_real=12)
        evaluate, _ = synthetic(lambda p, i: float(p.structural.policy == SM))
        report = run_two_tier(config, campaign_seed=0, evaluate=evaluate)
        assert report.frozen_structural.policy == SM
        taus = set()
        for r in report.d2[1:]:
            assert r.point.algorithm.epsilon == config.prior.epsilon
            taus.add(r.point.algorithm.tau)
            lo, hi = config.bounds["tau"]
            assert lo <= r.point.algorithm.tau <= hi
        assert len(taus) > 1

    def test_gp_failure_falls_back_to_uniform(self, monkeypatch):
        def boom(*args, **kwargs):
            raise DegenerateModelError("forced")

        monkeypatch.setattr("twotier.tuner.fit_gp", boom)
        config = two_tier_config(budget=30, n_structural=10, n_real=20)
        evaluate, calls = synthetic(structure_score)
        report = run_two_tier(config, campaign_seed=0, evaluate=evaluate)
        assert report.fallback_proposals == 20
        assert len(report.results) == 30
        assert calls == list(range(30))


class TestRandomSearch:
    def test_budget_and_structure_coverage(self):
        config = parse_config(overrides={"optimizers": "random", "budget": 400})
        evaluate, calls = synthetic(lambda p, i: 0.0)
        report = run_random_search(config, campaign_seed=0, evaluate=evaluate)
        assert calls == list(range(400))
        structures = {r.point.structural for r in report.results}
        assert len(structures) == 16
        b0 = np.mean([int(r.point.structural.algorithm) for r in report.results])
        assert abs(b0 - 0.5) < 3 * np.sqrt(0.25 / 400)

    def test_samples_all_six_real_settings(self):
        config = parse_config(overrides={"optimizers": "random", "budget": 50})
        evaluate, _ = synthetic(lambda p, i: 0.0)
        report = run_random_search(config, campaign_seed=1, evaluate=evaluate)
        for name in ("alpha", "epsilon", "gamma", "tau", "n_bins", "n_bins_angle"):
            values = {getattr(r.point.algorithm, name) for r in report.results}
            assert len(values) > 1, name
            lo, hi = config.bounds[name]
            assert all(lo <= v <= hi for v in values)

    def test_fixed_structure_mode(self):
        config = parse_config(
            overrides={"optimizers": "random", "budget": 40, "rs_fix_structural": True}
        )
        evaluate, _ = synthetic(lambda p, i: 0.0)
        report = run_random_search(config, campaign_seed=2, evaluate=evaluate)
        assert all(r.point.structural == DEFAULT_STRUCTURAL for r in report.results)

    def test_deterministic_per_campaign_seed(self):
        config = parse_config(overrides={"optimizers": "random", "budget": 25})
        evaluate, _ = synthetic(lambda p, i: float(np.cos(i)))
        r1 = run_random_search(config, campaign_seed=9, evaluate=evaluate)
        r2 = run_random_search(config, campaign_seed=9, evaluate=evaluate)
        assert [r.point for r in r1.results] == [r.point for r in r2.results]


class TestMonolithicBo:
    def test_budget_split(self):
        config = parse_config(overrides={"optimizers": "mono_bo", "budget": 30})
        evaluate, calls = synthetic(lambda p, i: 0.0)
        report = run_monolithic_bo(config, campaign_seed=0, evaluate=evaluate)
        assert calls == list(range(30))
        assert report.initial_points == MONO_INIT_POINTS
        assert report.real_proposals == 30 - MONO_INIT_POINTS

    def test_structure_pinned_to_default(self):
        config = parse_config(overrides={"optimizers": "mono_bo", "budget": 12})
        evaluate, _ = synthetic(lambda p, i: float(np.sin(i)))
        report = run_monolithic_bo(config, campaign_seed=1, evaluate=evaluate)
        assert all(r.point.structural == DEFAULT_STRUCTURAL for r in report.results)
        assert all(r.point.algorithm.tau == config.prior.tau for r in report.results)

    def test_tiny_budget_is_all_initial_design(self):
        config = parse_config(overrides={"optimizers": "mono_bo", "budget": 3})
        evaluate, calls = synthetic(lambda p, i: 0.0)
        report = run_monolithic_bo(config, campaign_seed=0, evaluate=evaluate)
        assert calls == [0, 1, 2]
        assert report.initial_points == 3
        assert report.real_proposals == 0

    def test_optimizes_a_smooth_synthetic_objective(self):
        def objective(point, _i):
            a = point.algorithm.alpha
            e = point.algorithm.epsilon
            return 1.0 - 2.0 * (a - 0.4) ** 2 - 3.0 * (e - 0.2) ** 2

        config = parse_config(overrides={"optimizers": "mono_bo", "budget": 30})
        evaluate, _ = synthetic(objective)
        hits = 0
        for seed in range(10):
            report = run_monolithic_bo(config, campaign_seed=seed, evaluate=evaluate)
            hits += report.best_f >= 0.9
        assert hits >= 8

    def test_gp_failure_falls_back_to_uniform(self, monkeypatch):
        def boom(*args, **kwargs):
            raise DegenerateModelError("forced")

        monkeypatch.setattr("twotier.tuner.fit_gp", boom)
        config = parse_config(overrides={"optimizers": "mono_bo", "budget": 10})
        evaluate, calls = synthetic(lambda p, i: 0.0)
        report = run_monolithic_bo(config, campaign_seed=0, evaluate=evaluate)
        assert calls == list(range(10))
        assert report.fallback_proposals == 10 - MONO_INIT_POINTS


class TestSpacesAndVectors:
    def test_active_dimensions_follow_policy(self):
        bounds = parse_config().bounds
        eg = real_space(StructuralParams(Algorithm.QLEARNING, False, EG, False), bounds)
        assert eg.names == ("alpha", "epsilon", "gamma", "n_bins", "n_bins_angle")
        sm = real_space(StructuralParams(Algorithm.QLEARNING, False, SM, False), bounds)
        assert sm.names == ("alpha", "gamma", "tau", "n_bins", "n_bins_angle")
        assert full_real_space(bounds).names == (
            "alpha",
            "epsilon",
            "gamma",
            "tau",
            "n_bins",
            "n_bins_angle",
        )

    def test_bin_dimensions_are_integer(self):
        space = full_real_space(parse_config().bounds)
        flags = dict(zip(space.names, space.integer))
        assert flags["n_bins"] and flags["n_bins_angle"]
        assert not flags["alpha"] and not flags["tau"]

    def test_params_from_vector_round_trip(self):
        prior = AlgorithmParams()
        space = full_real_space(parse_config().bounds)
        vec = np.array([0.3, 0.2, 0.9, 1.5, 7.0, 12.0])
        params = params_from_vector(space, vec, prior)
        assert np.array_equal(vector_from_params(space, params), vec)
        assert params.lam == prior.lam  # untouched nuisance setting

    def test_integer_rounding_half_to_even(self):
        prior = AlgorithmParams()
        space = full_real_space(parse_config().bounds)
        vec = np.array([0.3, 0.2, 0.9, 1.5, 7.5, 8.5])
        params = params_from_vector(space, vec, prior)
        assert params.n_bins == 8
        assert params.n_bins_angle == 8
        assert isinstance(params.n_bins, int)
