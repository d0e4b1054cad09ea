"""Boltzmann action selection, linear temperature annealing, greedy
evaluation, and the per-schedule exploration-strength scalar."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .game import Action


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear temperature decay from tau_init to tau_final over t_anneal steps."""

    tau_init: float
    tau_final: float
    t_anneal: int

    def __post_init__(self) -> None:
        if not self.tau_final > 0.0:
            raise ConfigError(f"tau_final must be > 0, got {self.tau_final}")
        if self.tau_init < self.tau_final:
            raise ConfigError(
                f"tau_init ({self.tau_init}) must be >= tau_final "
                f"({self.tau_final})"
            )
        if self.t_anneal < 1:
            raise ConfigError(f"t_anneal must be >= 1, got {self.t_anneal}")


@dataclass(frozen=True)
class EvalPolicy:
    """Evaluation-phase action rule: fixed-temperature softmax or argmax."""

    mode: str = "softmax"
    tau_eval: float = 0.10

    def __post_init__(self) -> None:
        if self.mode not in ("softmax", "greedy"):
            raise ConfigError(f"unknown evaluation mode {self.mode!r}")
        if self.mode == "softmax" and not self.tau_eval > 0.0:
            raise ConfigError(f"tau_eval must be > 0, got {self.tau_eval}")


def temperature(s: AnnealSchedule, t: int) -> float:
    """Temperature at environment step t (1-based); constant after t_anneal."""
    if t < 1:
        raise ConfigError(f"step index must be >= 1, got {t}")
    if s.t_anneal == 1:
        return s.tau_init if t == 1 else s.tau_final
    if t >= s.t_anneal:
        return s.tau_final
    return s.tau_init + (s.tau_final - s.tau_init) * (t - 1) / (s.t_anneal - 1)


def temperatures(s: AnnealSchedule, ts: np.ndarray) -> np.ndarray:
    """Vectorized schedule evaluation over an array of step indices."""
    ts = np.asarray(ts, dtype=np.float64)
    if s.t_anneal == 1:
        return np.where(ts <= 1, s.tau_init, s.tau_final)
    interp = s.tau_init + (s.tau_final - s.tau_init) * (ts - 1) / (s.t_anneal - 1)
    return np.where(ts >= s.t_anneal, s.tau_final, interp)


def softmax_probs(q: np.ndarray, tau: float) -> np.ndarray:
    """Boltzmann probabilities, computed with max-shifted logits.

    ``q`` is one action-value pair or an (n, 2) batch of them.
    """
    if tau <= 0.0:
        raise ConfigError(f"temperature must be > 0, got {tau}")
    q = np.asarray(q, dtype=np.float64)
    if not np.all(np.isfinite(q)):
        raise ValueError("non-finite action values reached the policy")
    shifted = (q - q.max(axis=-1, keepdims=True)) / tau
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_policy(
    q: np.ndarray, tau: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Sample actions from the Boltzmann distribution over ``q``.

    Returns (actions, probs); scalar action for a single pair, an int8
    array for a batch. One uniform draw is consumed per decision.
    """
    probs = softmax_probs(q, tau)
    u = rng.random(probs.shape[:-1])
    actions = (u >= probs[..., Action.COOPERATE]).astype(np.int8)
    if actions.ndim == 0:
        return actions[()], probs
    return actions, probs


def greedy_action(q: np.ndarray) -> np.ndarray:
    """Argmax action(s); exact ties resolve to cooperate."""
    q = np.asarray(q, dtype=np.float64)
    if not np.all(np.isfinite(q)):
        raise ValueError("non-finite action values reached the policy")
    actions = (q[..., Action.DEFECT] > q[..., Action.COOPERATE]).astype(np.int8)
    if actions.ndim == 0:
        return actions[()]
    return actions


def exploration_strength(s: AnnealSchedule) -> float:
    """Mean temperature over the first half of the annealing window."""
    if s.t_anneal < 2:
        raise ConfigError(
            f"exploration strength needs t_anneal >= 2, got {s.t_anneal}"
        )
    k = s.t_anneal // 2
    return float(np.mean(temperatures(s, np.arange(1, k + 1))))
