"""Hyper-parameter containers for the tunable tabular agents.

A full assignment is a :class:`HyperParamPoint`: four categorical
structural choices (:class:`StructuralParams`) plus the real-valued
settings of the chosen algorithm (:class:`AlgorithmParams`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Algorithm(enum.IntEnum):
    """Temporal-difference update rule. Integer value doubles as the encoding bit."""

    QLEARNING = 0
    SARSA = 1

    @property
    def label(self) -> str:
        return "QLearning" if self is Algorithm.QLEARNING else "Sarsa"


class Policy(enum.IntEnum):
    """Exploration policy. Integer value doubles as the encoding bit."""

    EPSILON_GREEDY = 0
    SOFTMAX = 1

    @property
    def label(self) -> str:
        return "EpsilonGreedy" if self is Policy.EPSILON_GREEDY else "Softmax"


@dataclass(frozen=True)
class StructuralParams:
    """Categorical choices that define the shape of the learning algorithm.

    ``epsilon_decay`` is stored regardless of the policy but only consulted
    under the epsilon-greedy policy, so every 4-bit combination is a valid
    instance.
    """

    algorithm: Algorithm = Algorithm.QLEARNING
    eligibility_traces: bool = False
    policy: Policy = Policy.EPSILON_GREEDY
    epsilon_decay: bool = False


@dataclass(frozen=True)
class AlgorithmParams:
    """Real-valued settings conditioned on the structural choices.

    Bounds are enforced on construction; ``n_bins`` and ``n_bins_angle``
    must already be integers (continuous optimizer proposals are rounded
    half-to-even before an instance is built).
    """

    alpha: float = 0.5
    epsilon: float = 0.1
    gamma: float = 0.95
    tau: float = 1.0
    lam: float = 0.9
    epsilon_decay_rate: float = 0.99
    n_bins: int = 10
    n_bins_angle: int = 10
    epsilon_min: float = 0.01

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must be in [0, 1], got {self.lam}")
        if not 0.0 < self.epsilon_decay_rate <= 1.0:
            raise ValueError(
                f"epsilon_decay_rate must be in (0, 1], got {self.epsilon_decay_rate}"
            )
        for name in ("n_bins", "n_bins_angle"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if not 5 <= value <= 20:
                raise ValueError(f"{name} must be in [5, 20], got {value}")
        if not 0.0 <= self.epsilon_min < 1.0:
            raise ValueError(f"epsilon_min must be in [0, 1), got {self.epsilon_min}")


@dataclass(frozen=True)
class HyperParamPoint:
    """One complete hyper-parameter assignment, hashable for history lookup."""

    structural: StructuralParams
    algorithm: AlgorithmParams
