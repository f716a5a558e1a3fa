"""Cart-pole balancing environment with a uniform-grid state discretizer.

The agent pushes a cart left or right along a frictionless track to keep a
pole upright.  An episode fails when the cart leaves the track bounds or the
pole tips past 12 degrees; each surviving step is worth +1, and the failing
step is worth -200 instead.  Episodes are cut off after ``max_steps`` steps.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import (
    DT,
    FAIL_REWARD,
    FORCE_MAG,
    STEP_REWARD,
    THETA_THRESHOLD,
    X_THRESHOLD,
    physics_step,
)

ACTION_LEFT = 0
ACTION_RIGHT = 1
N_ACTIONS = 2


@dataclass(frozen=True)
class EnvState:
    """Full continuous state: cart position/velocity, pole angle/velocity."""

    x: float
    x_dot: float
    theta: float
    theta_dot: float

    @property
    def terminal(self) -> bool:
        return bool(kernels.out_of_bounds(self.x, self.theta))


class CartPole:
    """Continuous cart-pole with the standard physics constants.

    Dynamics are integrated with explicit Euler at DT = 0.02 s; the two
    actions apply a fixed force of +/-10 N.  ``reset`` draws each state
    component uniformly from [-0.05, 0.05].
    """

    def __init__(self, max_steps: int = 200):
        if max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {max_steps}")
        self.max_steps = max_steps
        self.state = EnvState(0.0, 0.0, 0.0, 0.0)
        self.steps = 0
        self._done = True

    def reset(self, rng: np.random.Generator) -> EnvState:
        x, x_dot, theta, theta_dot = kernels.draw_start_state(rng)
        self.state = EnvState(x, x_dot, theta, theta_dot)
        self.steps = 0
        self._done = False
        return self.state

    def step(self, action: int) -> tuple[EnvState, float, bool, bool]:
        """Apply an action; returns (state, reward, terminal, truncated)."""
        if self._done:
            raise RuntimeError("step() on a finished episode; call reset() first")
        if action not in (ACTION_LEFT, ACTION_RIGHT):
            raise ValueError(f"action must be 0 or 1, got {action}")
        force = FORCE_MAG if action == ACTION_RIGHT else -FORCE_MAG
        s = self.state
        x, x_dot, theta, theta_dot = physics_step(s.x, s.x_dot, s.theta, s.theta_dot, force)
        self.state = EnvState(x, x_dot, theta, theta_dot)
        self.steps += 1
        terminal = self.state.terminal
        truncated = self.steps >= self.max_steps
        reward = FAIL_REWARD if terminal else STEP_REWARD
        self._done = terminal or truncated
        return self.state, reward, terminal, truncated


@dataclass(frozen=True)
class Discretizer:
    """Uniform-grid state binning for the cart-pole.

    Position and angle are binned over their failure ranges; the velocities,
    which the dynamics leave unbounded, are clipped to the configured limits
    first.  Bins are left-closed, and values at or beyond a range edge fall
    into the edge bin.
    """

    n_bins: int = 10
    n_bins_angle: int = 10
    x_dot_limit: float = 3.0
    theta_dot_limit: float = 3.5

    def __post_init__(self):
        if self.n_bins < 1 or self.n_bins_angle < 1:
            raise ValueError("bin counts must be >= 1")
        if self.x_dot_limit <= 0.0 or self.theta_dot_limit <= 0.0:
            raise ValueError("velocity limits must be positive")

    @property
    def n_states(self) -> int:
        return self.n_bins * self.n_bins * self.n_bins_angle * self.n_bins_angle

    def state_id(self, state: EnvState) -> int:
        return int(
            kernels.state_index(
                state.x,
                state.x_dot,
                state.theta,
                state.theta_dot,
                self.n_bins,
                self.n_bins_angle,
                self.x_dot_limit,
                self.theta_dot_limit,
            )
        )


class DiscretizedCartPole:
    """Cart-pole presented through integer state ids.

    Matches the tabular-environment interface used by ``run_episode``:
    ``reset(rng) -> state_id`` and ``step(action) -> (state_id, reward,
    terminal, truncated)``.
    """

    def __init__(self, discretizer: Discretizer | None = None, max_steps: int = 200):
        self.env = CartPole(max_steps=max_steps)
        self.discretizer = discretizer if discretizer is not None else Discretizer()

    @property
    def n_states(self) -> int:
        return self.discretizer.n_states

    @property
    def n_actions(self) -> int:
        return N_ACTIONS

    def reset(self, rng: np.random.Generator) -> int:
        return self.discretizer.state_id(self.env.reset(rng))

    def step(self, action: int) -> tuple[int, float, bool, bool]:
        state, reward, terminal, truncated = self.env.step(action)
        return self.discretizer.state_id(state), reward, terminal, truncated
