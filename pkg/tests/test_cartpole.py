"""Cart-pole physics, termination/reward rules, and the state discretizer."""

import math

import numpy as np
import pytest

from twotier import kernels
from twotier.cartpole import (
    ACTION_LEFT,
    ACTION_RIGHT,
    CartPole,
    DiscretizedCartPole,
    Discretizer,
    EnvState,
)


def pd_action(s: EnvState) -> int:
    # Hand-tuned stabilizing controller; survives 200 steps from any start
    # state in the reset range.
    return 1 if (s.theta + 0.25 * s.theta_dot + 0.02 * s.x + 0.05 * s.x_dot) > 0 else 0


class TestPhysics:
    def test_one_step_from_origin_right(self):
        # Hand-derived Euler update: temp = 10/1.1, theta_acc = -600/41,
        # x_acc = 400/41; velocities advance by dt * acc, positions by
        # dt * old velocity (zero here).
        x, x_dot, theta, theta_dot = kernels.physics_step(0.0, 0.0, 0.0, 0.0, 10.0)
        assert x == 0.0
        assert theta == 0.0
        assert abs(x_dot - 8.0 / 41.0) < 1e-10
        assert abs(theta_dot - (-12.0 / 41.0)) < 1e-10

    def test_one_step_from_origin_left_mirrors(self):
        right = kernels.physics_step(0.0, 0.0, 0.0, 0.0, 10.0)
        left = kernels.physics_step(0.0, 0.0, 0.0, 0.0, -10.0)
        assert left[1] == -right[1]
        assert left[3] == -right[3]

    def test_zero_force_upright_is_equilibrium(self):
        out = kernels.physics_step(0.0, 0.0, 0.0, 0.0, 0.0)
        assert out == (0.0, 0.0, 0.0, 0.0)

    def test_position_uses_pre_step_velocity(self):
        x, _, theta, _ = kernels.physics_step(1.0, 2.0, 0.1, 0.5, 10.0)
        assert x == 1.0 + 0.02 * 2.0
        assert theta == 0.1 + 0.02 * 0.5


class TestTermination:
    def test_bounds_are_strict(self):
        thr = kernels.THETA_THRESHOLD
        assert thr == 12.0 * 2.0 * math.pi / 360.0
        assert not kernels.out_of_bounds(2.4, 0.0)
        assert kernels.out_of_bounds(2.4000001, 0.0)
        assert not kernels.out_of_bounds(-2.4, 0.0)
        assert kernels.out_of_bounds(0.0, thr + 1e-12)
        assert not kernels.out_of_bounds(0.0, thr)
        assert kernels.out_of_bounds(0.0, -thr - 1e-12)

    def test_envstate_terminal_property(self):
        assert not EnvState(0.0, 0.0, 0.0, 0.0).terminal
        assert EnvState(2.5, 0.0, 0.0, 0.0).terminal
        assert EnvState(0.0, 0.0, 0.3, 0.0).terminal


class TestEpisodeRules:
    def test_constant_action_fails_with_minus_200(self):
        # k surviving steps at +1 each, then the failing step scores -200.
        env = CartPole()
        env.reset(np.random.default_rng(0))
        total = 0.0
        steps = 0
        terminal = False
        while not terminal:
            _, r, terminal, truncated = env.step(ACTION_RIGHT)
            total += r
            steps += 1
            assert not truncated
        assert total == (steps - 1) * 1.0 - 200.0

    def test_truncation_at_exactly_200(self):
        env = CartPole()
        for seed in range(10):
            s = env.reset(np.random.default_rng(seed))
            total = 0.0
            while True:
                s, r, terminal, truncated = env.step(pd_action(s))
                total += r
                if terminal or truncated:
                    break
            assert not terminal
            assert truncated
            assert env.steps == 200
            assert total == 200.0

    def test_custom_max_steps(self):
        env = CartPole(max_steps=7)
        s = env.reset(np.random.default_rng(1))
        for i in range(7):
            s, r, terminal, truncated = env.step(pd_action(s))
        assert truncated

    def test_reset_draw_order_and_range(self):
        env = CartPole()
        s = env.reset(np.random.default_rng(123))
        rng = np.random.default_rng(123)
        expect = [-0.05 + 0.1 * rng.random() for _ in range(4)]
        assert (s.x, s.x_dot, s.theta, s.theta_dot) == tuple(expect)
        for seed in range(50):
            s = env.reset(np.random.default_rng(seed))
            for v in (s.x, s.x_dot, s.theta, s.theta_dot):
                assert -0.05 <= v <= 0.05

    def test_step_after_done_raises(self):
        env = CartPole()
        with pytest.raises(RuntimeError):
            env.step(ACTION_LEFT)
        env.reset(np.random.default_rng(0))
        terminal = truncated = False
        while not (terminal or truncated):
            _, _, terminal, truncated = env.step(ACTION_RIGHT)
        with pytest.raises(RuntimeError):
            env.step(ACTION_RIGHT)
        env.reset(np.random.default_rng(0))
        env.step(ACTION_LEFT)

    def test_invalid_action_rejected(self):
        env = CartPole()
        env.reset(np.random.default_rng(0))
        with pytest.raises(ValueError):
            env.step(2)


class TestDiscretizer:
    def test_left_closed_edge_bins(self):
        assert kernels.bin_index(-2.4, -2.4, 2.4, 5) == 0
        assert kernels.bin_index(-3.0, -2.4, 2.4, 5) == 0
        assert kernels.bin_index(2.4, -2.4, 2.4, 5) == 4
        assert kernels.bin_index(99.0, -2.4, 2.4, 5) == 4

    def test_center_bin(self):
        assert kernels.bin_index(0.0, -2.4, 2.4, 5) == 2

    def test_interior_boundary(self):
        # bins of width 0.96 starting at -2.4; boundary between bin 0 and 1
        # sits at -1.44 and belongs to bin 1 (left-closed)
        assert kernels.bin_index(-1.44 - 1e-9, -2.4, 2.4, 5) == 0
        assert kernels.bin_index(-1.44 + 1e-9, -2.4, 2.4, 5) == 1

    def test_mixed_radix_id(self):
        d = Discretizer(n_bins=5, n_bins_angle=7)
        assert d.n_states == 5 * 5 * 7 * 7 == 1225
        # bin tuple (4, 4, 6, 6): every component at its top edge bin
        state = EnvState(x=2.4, x_dot=3.0, theta=kernels.THETA_THRESHOLD, theta_dot=3.5)
        assert d.state_id(state) == 1224
        assert d.state_id(EnvState(-2.4, -3.0, -kernels.THETA_THRESHOLD, -3.5)) == 0

    def test_all_ids_in_range(self):
        d = Discretizer(n_bins=6, n_bins_angle=4)
        rng = np.random.default_rng(0)
        for _ in range(500):
            state = EnvState(*(rng.uniform(-5, 5, size=4)))
            assert 0 <= d.state_id(state) < d.n_states

    def test_velocity_clipping_overridable(self):
        tight = Discretizer(n_bins=4, n_bins_angle=4, x_dot_limit=1.0)
        wide = Discretizer(n_bins=4, n_bins_angle=4, x_dot_limit=10.0)
        fast = EnvState(0.0, 2.0, 0.0, 0.0)
        assert tight.state_id(fast) != wide.state_id(fast)

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            Discretizer(n_bins=0)
        with pytest.raises(ValueError):
            Discretizer(x_dot_limit=-1.0)


class TestDiscretizedCartPole:
    def test_protocol(self):
        env = DiscretizedCartPole(Discretizer(n_bins=5, n_bins_angle=5))
        assert env.n_states == 625
        assert env.n_actions == 2
        sid = env.reset(np.random.default_rng(0))
        assert isinstance(sid, int) and 0 <= sid < 625
        sid, reward, terminal, truncated = env.step(ACTION_RIGHT)
        assert isinstance(sid, int)
        assert reward == 1.0
        assert not terminal and not truncated
