"""Experience replay, Double-DQN 1-step/n-step targets, training updates,
target synchronization, and grouped-policy partitioning.

The replay buffer is a fixed-capacity FIFO ring over flat numpy arrays.
Every stored transition gets a monotonically increasing push counter;
a counter is live while ``total - capacity <= counter < total``, which
makes overwrite detection trivial. Per-agent successor links support
n-step lookups: the link from a transition to the same agent's next
transition is only followed while both ends are live and exactly one
time step apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .net import (
    LossConfig,
    NetParams,
    OptimizerState,
    clip_global_norm,
    copy_params,
    forward_batch,
    loss_and_grad,
    optimizer_step,
)


@dataclass(frozen=True)
class Transition:
    """One agent's experience tuple for a single environment step."""

    agent: int
    t: int
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray

    def __post_init__(self) -> None:
        if not np.isfinite(self.r):
            raise ConfigError(f"non-finite reward {self.r}")
        if np.shape(self.s) != np.shape(self.s_next):
            raise ConfigError("s and s_next have different dimensionality")


class ReplayBuffer:
    """FIFO ring of transitions with per-agent successor links."""

    def __init__(self, capacity: int = 90_000):
        if capacity < 1:
            raise ConfigError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._total = 0  # pushes so far; counter of the next push
        self._dim = -1
        self._agent = np.empty(capacity, dtype=np.int64)
        self._t = np.empty(capacity, dtype=np.int64)
        self._a = np.empty(capacity, dtype=np.int8)
        self._r = np.empty(capacity, dtype=np.float64)
        self._s = None
        self._s_next = None
        # successor push counter of the same agent, -1 while unknown
        self._next = np.full(capacity, -1, dtype=np.int64)
        self._last_push = np.full(16, -1, dtype=np.int64)  # grown on demand

    def __len__(self) -> int:
        return min(self._total, self.capacity)

    @property
    def oldest_live(self) -> int:
        """Smallest push counter still resident in the ring."""
        return max(0, self._total - self.capacity)

    def _ensure_dim(self, dim: int) -> None:
        if self._dim == -1:
            self._dim = dim
            self._s = np.empty((self.capacity, dim), dtype=np.float64)
            self._s_next = np.empty((self.capacity, dim), dtype=np.float64)
        elif dim != self._dim:
            raise ConfigError(
                f"state dim {dim} does not match buffer dim {self._dim}"
            )

    def _ensure_agents(self, max_agent: int) -> None:
        if max_agent >= self._last_push.size:
            grown = np.full(max(max_agent + 1, 2 * self._last_push.size), -1,
                            dtype=np.int64)
            grown[: self._last_push.size] = self._last_push
            self._last_push = grown

    def push(self, tr: Transition) -> None:
        """Append one transition, evicting the oldest entry when full."""
        s = np.asarray(tr.s, dtype=np.float64)
        self.push_many(
            np.array([tr.agent]),
            np.array([tr.t]),
            s[None, :],
            np.array([tr.a], dtype=np.int8),
            np.array([tr.r]),
            np.asarray(tr.s_next, dtype=np.float64)[None, :],
        )

    def push_many(self, agents, ts, states, actions, rewards, next_states) -> None:
        """Vectorized push of one transition per (distinct) agent."""
        agents = np.asarray(agents, dtype=np.int64)
        k = agents.size
        if k > self.capacity:
            raise ConfigError("push batch larger than buffer capacity")
        if np.unique(agents).size != k:
            raise ConfigError("duplicate agents within one push batch")
        states = np.asarray(states, dtype=np.float64)
        self._ensure_dim(states.shape[1])
        self._ensure_agents(int(agents.max(initial=0)))

        counters = self._total + np.arange(k, dtype=np.int64)
        slots = counters % self.capacity
        self._agent[slots] = agents
        self._t[slots] = np.asarray(ts, dtype=np.int64)
        self._a[slots] = np.asarray(actions, dtype=np.int8)
        self._r[slots] = np.asarray(rewards, dtype=np.float64)
        self._s[slots] = states
        self._s_next[slots] = np.asarray(next_states, dtype=np.float64)
        self._next[slots] = -1

        new_total = self._total + k
        prev = self._last_push[agents]
        # link only predecessors that exist and are still resident
        linkable = prev >= max(0, new_total - self.capacity)
        self._next[prev[linkable] % self.capacity] = counters[linkable]
        self._last_push[agents] = counters
        self._total = new_total

    def _check_live(self, counter: int) -> None:
        if not self.oldest_live <= counter < self._total:
            raise ConfigError(f"push counter {counter} is not live")

    def get(self, counter: int) -> Transition:
        """Materialize the transition stored under a live push counter."""
        self._check_live(counter)
        slot = counter % self.capacity
        return Transition(
            agent=int(self._agent[slot]),
            t=int(self._t[slot]),
            s=self._s[slot].copy(),
            a=int(self._a[slot]),
            r=float(self._r[slot]),
            s_next=self._s_next[slot].copy(),
        )

    def live_counters(self) -> np.ndarray:
        return np.arange(self.oldest_live, self._total, dtype=np.int64)

    def sample_counters(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform sample (with replacement) of live push counters."""
        if len(self) == 0:
            raise ConfigError("cannot sample from an empty buffer")
        return rng.integers(self.oldest_live, self._total, size=batch_size)

    def sample_batch(
        self, batch_size: int, rng: np.random.Generator
    ) -> list[Transition]:
        return [self.get(int(c)) for c in self.sample_counters(batch_size, rng)]

    def chain(self, start: int, n: int) -> np.ndarray | None:
        """Counters of n same-agent, consecutive-step live transitions.

        Returns None when no such chain exists starting at ``start``
        (the caller then falls back to the 1-step target).
        """
        self._check_live(start)
        cap = self.capacity
        agent = self._agent[start % cap]
        t0 = self._t[start % cap]
        out = np.empty(n, dtype=np.int64)
        out[0] = start
        c = start
        for k in range(1, n):
            nxt = self._next[c % cap]
            if nxt < self.oldest_live:  # unset (-1) or evicted
                return None
            slot = nxt % cap
            if self._agent[slot] != agent or self._t[slot] != t0 + k:
                return None
            out[k] = nxt
            c = nxt
        return out


def double_dqn_target_1step(
    tr: Transition, online: NetParams, target: NetParams, gamma: float
) -> float:
    """Bootstrapped target with decoupled action selection and evaluation."""
    q_online, _ = forward_batch(online, np.asarray(tr.s_next)[None, :])
    a_star = int(np.argmax(q_online[0]))
    q_target, _ = forward_batch(target, np.asarray(tr.s_next)[None, :])
    return tr.r + gamma * float(q_target[0, a_star])


def nstep_target(
    buf: ReplayBuffer,
    start: int,
    n: int,
    online: NetParams,
    target: NetParams,
    gamma: float,
) -> float | None:
    """n-step return target, or None when no valid chain exists.

    The discounted reward sum accumulates left to right so that n=1
    reproduces the 1-step target bit for bit.
    """
    chain = buf.chain(start, n)
    if chain is None:
        return None
    cap = buf.capacity
    y = 0.0
    g = 1.0
    for c in chain:
        y += g * float(buf._r[c % cap])
        g *= gamma
    s_boot = buf._s_next[chain[-1] % cap]
    q_online, _ = forward_batch(online, s_boot[None, :])
    a_star = int(np.argmax(q_online[0]))
    q_target, _ = forward_batch(target, s_boot[None, :])
    return y + g * float(q_target[0, a_star])


def nstep_targets_batch(
    buf: ReplayBuffer,
    counters: np.ndarray,
    n: int,
    online: NetParams,
    target: NetParams,
    gamma: float,
) -> np.ndarray:
    """Vectorized targets for a sampled batch, with per-sample fallback.

    Samples whose n-step chain is broken (evicted member or missing
    successor) use the 1-step target on the sampled transition itself.
    """
    cap = buf.capacity
    counters = np.asarray(counters, dtype=np.int64)
    lo = buf.oldest_live

    base_slots = counters % cap
    base_agent = buf._agent[base_slots]
    base_t = buf._t[base_slots]
    members = [counters]
    valid = np.ones(counters.size, dtype=bool)
    c = counters
    for k in range(1, n):
        nxt = buf._next[c % cap]
        step_ok = valid & (nxt >= lo)
        # same-agent / consecutive-step holds by construction of _next;
        # guarded anyway so stale links can never fabricate a chain
        slot = nxt % cap
        step_ok &= buf._agent[slot] == base_agent
        step_ok &= buf._t[slot] == base_t + k
        valid &= step_ok
        c = np.where(step_ok, nxt, c)
        members.append(c)

    y = 1.0 * buf._r[counters % cap]
    g = 1.0
    for k in range(1, n):
        g *= gamma
        rk = buf._r[members[k] % cap]
        y = y + np.where(valid, g * rk, 0.0)
    g *= gamma  # discount for a full n-step bootstrap

    boot_counter = np.where(valid, members[-1] if n > 1 else counters, counters)
    s_boot = buf._s_next[boot_counter % cap]
    q_online, _ = forward_batch(online, s_boot)
    a_star = np.argmax(q_online, axis=1)
    q_target, _ = forward_batch(target, s_boot)
    q_boot = q_target[np.arange(counters.size), a_star]
    disc = np.where(valid, g, gamma)
    return y + disc * q_boot


@dataclass(frozen=True)
class TDConfig:
    """Temporal-difference learning settings."""

    gamma: float = 0.99
    n_step: int = 5
    batch_size: int = 256
    target_sync_interval: int = 2_000
    grad_clip: float = 0.5
    updates_per_step: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.n_step < 1:
            raise ConfigError(f"n_step must be >= 1, got {self.n_step}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.target_sync_interval < 1:
            raise ConfigError("target_sync_interval must be >= 1")
        if self.updates_per_step < 0:
            raise ConfigError("updates_per_step must be >= 0")


@dataclass
class PolicyGroup:
    """A set of agents sharing one value network and its training state."""

    group_id: int
    members: np.ndarray
    online: NetParams
    target: NetParams
    optimizer: OptimizerState
    buffer: ReplayBuffer


def assign_groups(
    n_agents: int, n_groups: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Random partition of agents into groups of near-equal size."""
    if n_groups < 1:
        raise ConfigError(f"n_groups must be >= 1, got {n_groups}")
    if n_groups > n_agents:
        raise ConfigError(
            f"cannot split {n_agents} agents into {n_groups} groups"
        )
    perm = rng.permutation(n_agents)
    base = n_agents // n_groups
    extra = n_agents % n_groups
    sizes = [base + (1 if g < extra else 0) for g in range(n_groups)]
    out, at = [], 0
    for size in sizes:
        out.append(np.sort(perm[at : at + size]))
        at += size
    return out


def train_step(
    group: PolicyGroup,
    td: TDConfig,
    loss_cfg: LossConfig,
    rng: np.random.Generator,
) -> float | None:
    """One replayed mini-batch update of the group's online network.

    Skips (returns None) until the buffer holds a full batch. Exactly
    one optimizer step is applied per call.
    """
    buf = group.buffer
    if len(buf) < td.batch_size:
        return None
    counters = buf.sample_counters(td.batch_size, rng)
    targets = nstep_targets_batch(
        buf, counters, td.n_step, group.online, group.target, td.gamma
    )
    slots = counters % buf.capacity
    xs = buf._s[slots]
    actions = buf._a[slots]
    loss, grads = loss_and_grad(group.online, xs, actions, targets, loss_cfg)
    grads = clip_global_norm(grads, td.grad_clip)
    group.online, group.optimizer = optimizer_step(
        group.online, group.optimizer, grads
    )
    return loss


def maybe_sync_target(group: PolicyGroup, t: int, interval: int = 2_000) -> bool:
    """Copy online weights into the target network every ``interval`` steps."""
    if t < 1:
        raise ConfigError(f"step index must be >= 1, got {t}")
    if t % interval != 0:
        return False
    group.target = copy_params(group.online)
    return True
