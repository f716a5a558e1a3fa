"""Tabular TD-learning agent: Q-learning / SARSA, eligibility traces, two policies.

:class:`TabularAgent` keeps the Q table and exploration state and exposes
single-transition operations; :func:`run_episode` drives one episode against
any environment with ``reset(rng) -> state_id`` and ``step(action) ->
(state_id, reward, terminal, truncated)``.  Both actions are selected before
the update they feed (the next action is drawn even when the algorithm is
Q-learning, so the two algorithms consume identical random streams), and the
bootstrap target is zero on failure but not on cutoff.
"""

import numpy as np

from . import kernels
from .params import Algorithm, AlgorithmParams, Policy, StructuralParams


class TabularAgent:
    """Q table plus update/selection rules fixed by the hyper-parameters.

    ``watkins_cutoff`` zeroes the eligibility traces after a Q-learning
    update whose next action is non-greedy; ``explore_all`` makes the
    epsilon-greedy exploration draw include the greedy action.
    """

    def __init__(
        self,
        n_states: int,
        n_actions: int,
        structural: StructuralParams,
        params: AlgorithmParams,
        watkins_cutoff: bool = True,
        explore_all: bool = False,
    ):
        if n_states < 1 or n_actions < 2:
            raise ValueError("need n_states >= 1 and n_actions >= 2")
        self.n_states = n_states
        self.n_actions = n_actions
        self.structural = structural
        self.params = params
        self.watkins_cutoff = watkins_cutoff
        self.explore_all = explore_all
        self.q = np.zeros((n_states, n_actions), dtype=np.float64)
        self.e = np.zeros((n_states, n_actions), dtype=np.float64)
        # Flat indices of nonzero trace entries. Traces reset every episode,
        # so at most one entry per step can be live at a time.
        self._active = np.zeros(n_states * n_actions, dtype=np.int64)
        self._n_active = 0
        self.epsilon = params.epsilon

    def begin_episode(self) -> None:
        """Clear the eligibility traces for a fresh episode."""
        for i in range(self._n_active):
            f = int(self._active[i])
            self.e[f // self.n_actions, f % self.n_actions] = 0.0
        self._n_active = 0

    def select_action(self, state_id: int, rng: np.random.Generator) -> int:
        return int(
            kernels.select_action_core(
                self.q[state_id],
                int(self.structural.policy),
                self.epsilon if self.structural.policy == Policy.EPSILON_GREEDY else 0.0,
                self.params.tau,
                self.explore_all,
                rng,
            )
        )

    def action_probabilities(self, state_id: int) -> np.ndarray:
        """Softmax action distribution for one state (diagnostic helper)."""
        out = np.empty(self.n_actions, dtype=np.float64)
        kernels.softmax_probabilities(self.q[state_id], self.params.tau, out)
        return out

    def td_update(
        self,
        s: int,
        a: int,
        reward: float,
        s_next: int,
        a_next: int,
        bootstrap: bool,
    ) -> None:
        """Apply one TD update; ``bootstrap=False`` means a zero target."""
        self._n_active = int(
            kernels.td_step(
                self.q,
                self.e,
                self._active,
                self._n_active,
                s,
                a,
                reward,
                s_next,
                a_next,
                bootstrap,
                int(self.structural.algorithm),
                self.structural.eligibility_traces,
                self.watkins_cutoff,
                self.params.alpha,
                self.params.gamma,
                self.params.lam,
            )
        )

    def decay_epsilon(self) -> None:
        """End-of-episode epsilon decay, floored at epsilon_min."""
        if self.structural.epsilon_decay and self.structural.policy == Policy.EPSILON_GREEDY:
            self.epsilon = max(self.params.epsilon_min, self.epsilon * self.params.epsilon_decay_rate)

    def greedy_policy(self) -> np.ndarray:
        """Greedy action per state, lowest index winning ties."""
        return np.argmax(self.q, axis=1)


def run_episode(env, agent: TabularAgent, rng: np.random.Generator) -> tuple[float, int]:
    """Run one episode to failure or cutoff; returns (total_reward, steps)."""
    agent.begin_episode()
    s = env.reset(rng)
    a = agent.select_action(s, rng)
    total = 0.0
    steps = 0
    while True:
        s_next, reward, terminal, truncated = env.step(a)
        total += reward
        steps += 1
        if terminal:
            agent.td_update(s, a, reward, s_next, 0, bootstrap=False)
        else:
            a_next = agent.select_action(s_next, rng)
            agent.td_update(s, a, reward, s_next, a_next, bootstrap=True)
        if terminal or truncated:
            break
        s = s_next
        a = a_next
    agent.decay_epsilon()
    return total, steps


def train_cartpole(
    structural: StructuralParams,
    params: AlgorithmParams,
    n_episodes: int,
    rng: np.random.Generator,
    max_steps: int = 200,
    x_dot_limit: float = 3.0,
    theta_dot_limit: float = 3.5,
) -> np.ndarray:
    """Train a fresh agent on cart-pole; returns the per-episode reward trace.

    This is the fused fast path: the whole episode loop runs inside one
    compiled kernel.  It produces bit-identical rewards to driving
    :func:`run_episode` over :class:`~twotier.cartpole.DiscretizedCartPole`
    with the same generator.
    """
    n_states = params.n_bins * params.n_bins * params.n_bins_angle * params.n_bins_angle
    q = np.zeros((n_states, 2), dtype=np.float64)
    e = np.zeros((n_states, 2), dtype=np.float64)
    active = np.zeros(max_steps + 1, dtype=np.int64)
    rewards = np.empty(n_episodes, dtype=np.float64)
    epsilon = params.epsilon if structural.policy == Policy.EPSILON_GREEDY else 0.0
    kernels.run_learning_episodes(
        q,
        e,
        active,
        rewards,
        epsilon,
        rng,
        int(structural.algorithm),
        structural.eligibility_traces,
        int(structural.policy),
        structural.epsilon_decay,
        True,
        False,
        params.alpha,
        params.gamma,
        params.tau,
        params.lam,
        params.epsilon_decay_rate,
        params.epsilon_min,
        params.n_bins,
        params.n_bins_angle,
        x_dot_limit,
        theta_dot_limit,
        max_steps,
    )
    return rewards


__all__ = [
    "Algorithm",
    "AlgorithmParams",
    "Policy",
    "StructuralParams",
    "TabularAgent",
    "run_episode",
    "train_cartpole",
]
