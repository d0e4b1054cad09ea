"""Pairwise game, local states, and the instantaneous cooperation metric.

The stage game is a two-action social dilemma parameterized by two
dilemma-strength values: ``d_r`` (loss when exploited) and ``d_g``
(gain from exploiting). The payoff matrix, with cooperate encoded as 0
and defect as 1, is::

    (C,C) -> 1        (C,D) -> -d_r
    (D,C) -> 1 + d_g  (D,D) -> 0

Agents live on a degree-4 interaction graph (see :mod:`sharedq.topology`)
and observe a 5-bit local state: the previous actions of their four
neighbors followed by their own, optionally extended with scalar
annealing/progress signals.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .errors import ConfigError


class Action(IntEnum):
    """Binary action encoding: cooperate is 0, defect is 1."""

    COOPERATE = 0
    DEFECT = 1


@dataclass(frozen=True)
class PayoffParams:
    """Dilemma-strength pair; both values must lie in [0, 1].

    ``d_r`` sets the sucker's payoff to -d_r, ``d_g`` sets the
    temptation payoff to 1 + d_g. Mutual cooperation pays 1, mutual
    defection pays 0.
    """

    d_r: float
    d_g: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.d_r <= 1.0):
            raise ConfigError(f"d_r must be in [0, 1], got {self.d_r}")
        if not (0.0 <= self.d_g <= 1.0):
            raise ConfigError(f"d_g must be in [0, 1], got {self.d_g}")

    def matrix(self) -> np.ndarray:
        """2x2 payoff table indexed by (own action, other action)."""
        return np.array(
            [[1.0, -self.d_r], [1.0 + self.d_g, 0.0]], dtype=np.float64
        )


class AugMode(Enum):
    """Optional scalar features appended to the 5-bit interaction state."""

    NONE = "none"
    TAU = "tau"
    PROGRESS = "progress"
    JOINT = "joint"

    @property
    def n_features(self) -> int:
        return {"none": 0, "tau": 1, "progress": 1, "joint": 2}[self.value]

    @property
    def state_dim(self) -> int:
        return 5 + self.n_features

    def select(self, tau_norm: float, progress: float) -> tuple[float, ...]:
        """Pick the feature values this mode appends, in order."""
        if self is AugMode.NONE:
            return ()
        if self is AugMode.TAU:
            return (tau_norm,)
        if self is AugMode.PROGRESS:
            return (progress,)
        return (tau_norm, progress)


def payoff(a_self: int, a_other: int, p: PayoffParams) -> float:
    """Payoff received by ``a_self`` against ``a_other``."""
    if a_self == Action.COOPERATE:
        return 1.0 if a_other == Action.COOPERATE else -p.d_r
    return 1.0 + p.d_g if a_other == Action.COOPERATE else 0.0


def step_rewards(actions: np.ndarray, topo, p: PayoffParams) -> np.ndarray:
    """Per-agent mean payoff over the four neighbor interactions.

    ``actions`` is an integer array of length ``topo.n_agents``.
    """
    actions = np.asarray(actions)
    if actions.shape != (topo.n_agents,):
        raise ConfigError(
            f"actions has shape {actions.shape}, expected ({topo.n_agents},)"
        )
    m = p.matrix()
    neighbor_actions = actions[topo.neighbors]  # (n, 4)
    return m[actions[:, None], neighbor_actions].mean(axis=1)


def build_state(
    agent: int,
    prev_actions: np.ndarray,
    topo,
    aug_mode: AugMode = AugMode.NONE,
    aug_values: tuple[float, ...] = (),
) -> np.ndarray:
    """Observation vector for one agent from the previous step's actions.

    Layout: four neighbor actions in the topology's fixed neighbor
    order, then the agent's own action, then any augmentation features.
    """
    prev_actions = np.asarray(prev_actions)
    if prev_actions.shape != (topo.n_agents,):
        raise ConfigError(
            f"prev_actions has shape {prev_actions.shape}, "
            f"expected ({topo.n_agents},)"
        )
    if not 0 <= agent < topo.n_agents:
        raise IndexError(f"unknown agent index {agent}")
    if len(aug_values) != aug_mode.n_features:
        raise ConfigError(
            f"augmentation mode {aug_mode.value!r} takes "
            f"{aug_mode.n_features} values, got {len(aug_values)}"
        )
    state = np.empty(aug_mode.state_dim, dtype=np.float64)
    state[:4] = prev_actions[topo.neighbors[agent]]
    state[4] = prev_actions[agent]
    state[5:] = aug_values
    return state


def build_states(
    prev_actions: np.ndarray,
    topo,
    aug_mode: AugMode = AugMode.NONE,
    aug_values: tuple[float, ...] = (),
) -> np.ndarray:
    """All agents' observation vectors as one (n_agents, dim) matrix."""
    prev_actions = np.asarray(prev_actions)
    if prev_actions.shape != (topo.n_agents,):
        raise ConfigError(
            f"prev_actions has shape {prev_actions.shape}, "
            f"expected ({topo.n_agents},)"
        )
    if len(aug_values) != aug_mode.n_features:
        raise ConfigError(
            f"augmentation mode {aug_mode.value!r} takes "
            f"{aug_mode.n_features} values, got {len(aug_values)}"
        )
    states = np.empty((topo.n_agents, aug_mode.state_dim), dtype=np.float64)
    states[:, :4] = prev_actions[topo.neighbors]
    states[:, 4] = prev_actions
    states[:, 5:] = aug_values
    return states


def cooperation_rate(actions: np.ndarray) -> float:
    """Fraction of agents playing cooperate in one action profile."""
    actions = np.asarray(actions)
    if actions.size == 0:
        raise ConfigError("cooperation_rate of an empty action profile")
    return int(np.count_nonzero(actions == Action.COOPERATE)) / actions.size
