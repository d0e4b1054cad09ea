"""Two-phase synchronous interaction protocol and multi-run sweeps.

One run executes, for a single seeded configuration: a training phase
with annealed Boltzmann exploration, replay-driven Double-DQN updates
(n-step targets with 1-step fallback) and periodic target sync; then an
evaluation phase with all learning frozen, over which the cooperation
order parameter and the representation/value diagnostics are computed.

Everything is deterministic given the config seed. Independent named
random streams are derived from it with a splitmix64 mixer, so
architecturally equivalent configurations (e.g. one shared group versus
grouped learning with a single group) consume randomness identically.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, replace

import numpy as np

from . import analysis
from .errors import ConfigError
from .explore import (
    AnnealSchedule,
    EvalPolicy,
    exploration_strength,
    greedy_action,
    softmax_policy,
    temperature,
)
from .game import AugMode, PayoffParams, build_states, cooperation_rate, step_rewards
from .learner import (
    PolicyGroup,
    ReplayBuffer,
    TDConfig,
    assign_groups,
    maybe_sync_target,
    train_step,
)
from .net import (
    LossConfig,
    OptimConfig,
    forward_batch,
    init_optimizer,
    init_params,
    copy_params,
    params_to_bytes,
)
from .topology import (
    Topology,
    make_grid,
    make_modular,
    make_random_regular,
    make_small_world,
)

# Named sub-stream identifiers for per-run randomness.
_STREAM_TOPOLOGY = 1
_STREAM_GROUPS = 2
_STREAM_NET = 3
_STREAM_INIT_ACTIONS = 4
_STREAM_ACTIONS = 5
_STREAM_REPLAY = 6
_STREAM_ACTIVATIONS = 7
_STREAM_KMEANS = 8

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """One splitmix64 scramble round (64-bit)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def derive_seed(base_seed: int, axis_indices, seed_index: int) -> int:
    """Stable 64-bit mix of a base seed, axis coordinates, and a seed label.

    Each value is folded into the state with one splitmix64 round, so
    distinct inputs yield distinct streams with overwhelming probability.
    """
    state = _splitmix64(base_seed & _MASK64)
    for value in axis_indices:
        state = _splitmix64(state ^ ((int(value) + 1) & _MASK64))
    return _splitmix64(state ^ ((int(seed_index) + 1) << 1 & _MASK64))


def _stream(seed: int, *ids: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, ids, 0))


def initial_actions(n_agents: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random step-0 action profile."""
    return rng.integers(0, 2, size=n_agents, dtype=np.int8)


@dataclass(frozen=True)
class TopologySpec:
    """Interaction graph description; built lazily per run.

    For the grid kind the population is L x L. The other kinds default
    to the same population as the corresponding grid so that structure,
    not size, is what varies.
    """

    kind: str = "grid"
    L: int = 30
    n_agents: int | None = None
    p_rewire: float = 0.1
    n_modules: int = 9
    n_cross: int = 20

    def __post_init__(self) -> None:
        if self.kind not in ("grid", "random_regular", "small_world", "modular"):
            raise ConfigError(f"unknown topology kind {self.kind!r}")

    @property
    def population(self) -> int:
        if self.kind == "grid":
            return self.L * self.L
        return self.n_agents if self.n_agents is not None else self.L * self.L

    def build(self, seed: int) -> Topology:
        if self.kind == "grid":
            return make_grid(self.L)
        n = self.population
        if self.kind == "random_regular":
            return make_random_regular(n, seed)
        if self.kind == "small_world":
            return make_small_world(n, self.p_rewire, seed)
        return make_modular(n, self.n_modules, self.n_cross, seed)


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one experiment run."""

    topology: TopologySpec = TopologySpec()
    payoff: PayoffParams = PayoffParams(0.25, 0.25)
    schedule: AnnealSchedule = AnnealSchedule(0.8, 0.10, 95_000)
    eval_policy: EvalPolicy = EvalPolicy()
    t_train: int = 95_000
    t_eval: int = 5_000
    td: TDConfig = TDConfig()
    loss: LossConfig = LossConfig()
    optim: OptimConfig = OptimConfig()
    hidden_dim: int = 96
    architecture: str = "shared"
    n_groups: int = 10
    shared_replay: bool = False
    augmentation: AugMode = AugMode.NONE
    buffer_capacity: int = 90_000
    activation_sample: int = 2_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.architecture not in ("shared", "grouped"):
            raise ConfigError(f"unknown architecture {self.architecture!r}")
        if self.t_train < 0:
            raise ConfigError(f"t_train must be >= 0, got {self.t_train}")
        if self.t_eval < 1:
            raise ConfigError(f"t_eval must be >= 1, got {self.t_eval}")
        if self.hidden_dim < 1:
            raise ConfigError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.buffer_capacity < self.td.batch_size:
            raise ConfigError(
                "buffer_capacity must be >= batch_size "
                f"({self.buffer_capacity} < {self.td.batch_size})"
            )
        if self.activation_sample < 0:
            raise ConfigError("activation_sample must be >= 0")
        n = self.topology.population
        groups = self.effective_groups
        if groups > n:
            raise ConfigError(f"{groups} groups for {n} agents")

    @property
    def total_steps(self) -> int:
        return self.t_train + self.t_eval

    @property
    def effective_groups(self) -> int:
        return 1 if self.architecture == "shared" else self.n_groups

    @property
    def input_dim(self) -> int:
        return self.augmentation.state_dim


@dataclass
class RunResult:
    """Evaluation-phase metrics, traces, and dumps for one run."""

    coop_trace: np.ndarray
    coop_mean: float
    q_mean: float
    q_gap: float
    silhouette: float
    activation_states: np.ndarray
    activation_hidden: np.ndarray
    activation_actions: np.ndarray
    activation_steps: np.ndarray
    exploration_strength: float
    param_hash: str
    param_hash_after_train: str
    optimizer_steps: tuple[int, ...]
    buffer_sizes: tuple[int, ...]
    wall_time: float = 0.0


class Simulation:
    """Mutable state of one run; drives the synchronous protocol step by step.

    All agents' step-t actions are computed from the step-(t-1) profile
    only: the next observation matrix is built in full before it
    replaces the current one.
    """

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        seed = cfg.seed
        self.topo = cfg.topology.build(derive_seed(seed, (_STREAM_TOPOLOGY,), 0))
        n = self.topo.n_agents

        members = assign_groups(
            n, cfg.effective_groups, _stream(seed, _STREAM_GROUPS)
        )
        shared_buffer = (
            ReplayBuffer(cfg.buffer_capacity)
            if (cfg.shared_replay or cfg.effective_groups == 1)
            else None
        )
        self._shared_buffer = shared_buffer
        self.groups: list[PolicyGroup] = []
        for gid, member_ids in enumerate(members):
            online = init_params(
                cfg.input_dim, cfg.hidden_dim, derive_seed(seed, (_STREAM_NET, gid), 0)
            )
            buffer = (
                shared_buffer
                if shared_buffer is not None
                else ReplayBuffer(cfg.buffer_capacity)
            )
            self.groups.append(
                PolicyGroup(
                    group_id=gid,
                    members=member_ids,
                    online=online,
                    target=copy_params(online),
                    optimizer=init_optimizer(cfg.optim, online),
                    buffer=buffer,
                )
            )
        self.group_of = np.empty(n, dtype=np.int64)
        self.pos_in_group = np.empty(n, dtype=np.int64)
        for g in self.groups:
            self.group_of[g.members] = g.group_id
            self.pos_in_group[g.members] = np.arange(g.members.size)

        self.action_rng = _stream(seed, _STREAM_ACTIONS)
        self.replay_rngs = [
            _stream(seed, _STREAM_REPLAY, g.group_id) for g in self.groups
        ]
        self.prev_actions = initial_actions(n, _stream(seed, _STREAM_INIT_ACTIONS))
        self.t = 0  # last completed environment step
        self.coop_trace = np.empty(cfg.total_steps, dtype=np.float64)
        self.states = build_states(
            self.prev_actions, self.topo, cfg.augmentation, self._aug_values(1)
        )
        self._plan_activation_capture(seed)

    # -- sampling plan for representation diagnostics --------------------

    def _plan_activation_capture(self, seed: int) -> None:
        cfg = self.cfg
        n = self.topo.n_agents
        population = cfg.t_eval * n
        k = min(cfg.activation_sample, population)
        if k > 0:
            rng = _stream(seed, _STREAM_ACTIVATIONS)
            flat = np.sort(rng.choice(population, size=k, replace=False))
            self._cap_steps = cfg.t_train + 1 + flat // n
            self._cap_agents = flat % n
        else:
            self._cap_steps = np.empty(0, dtype=np.int64)
            self._cap_agents = np.empty(0, dtype=np.int64)
        self._cap_at = 0  # next capture index
        self.activation_states = np.empty((k, cfg.input_dim), dtype=np.float64)
        self.activation_hidden = np.empty((k, cfg.hidden_dim), dtype=np.float64)
        self.activation_actions = np.empty(k, dtype=np.int8)

    def _capture(self, t: int, hidden_per_group: list[np.ndarray], actions) -> None:
        i = self._cap_at
        while i < self._cap_steps.size and self._cap_steps[i] == t:
            agent = self._cap_agents[i]
            g = self.group_of[agent]
            self.activation_states[i] = self.states[agent]
            self.activation_hidden[i] = hidden_per_group[g][self.pos_in_group[agent]]
            self.activation_actions[i] = actions[agent]
            i += 1
        self._cap_at = i

    # -- protocol --------------------------------------------------------

    def _aug_values(self, t: int) -> tuple[float, ...]:
        """Augmentation features for the state observed at step t."""
        cfg = self.cfg
        if cfg.augmentation is AugMode.NONE:
            return ()
        tau_init = cfg.schedule.tau_init
        if t > cfg.t_train:
            tau_norm = min(max(cfg.eval_policy.tau_eval / tau_init, 0.0), 1.0)
            progress = 1.0
        else:
            tau_norm = temperature(cfg.schedule, t) / tau_init
            tau_norm = min(max(tau_norm, 0.0), 1.0)
            progress = min(t / cfg.schedule.t_anneal, 1.0)
        return cfg.augmentation.select(tau_norm, progress)

    def step(self) -> None:
        """Advance one environment step (training or evaluation phase)."""
        cfg = self.cfg
        t = self.t + 1
        if t > cfg.total_steps:
            raise ConfigError("run already complete")
        training = t <= cfg.t_train

        q_all = np.empty((self.topo.n_agents, 2), dtype=np.float64)
        hidden_per_group: list[np.ndarray] = []
        for g in self.groups:
            q, h = forward_batch(g.online, self.states[g.members])
            q_all[g.members] = q
            hidden_per_group.append(h)

        if training:
            actions, _ = softmax_policy(
                q_all, temperature(cfg.schedule, t), self.action_rng
            )
        elif cfg.eval_policy.mode == "softmax":
            actions, _ = softmax_policy(
                q_all, cfg.eval_policy.tau_eval, self.action_rng
            )
        else:
            actions = greedy_action(q_all)

        rewards = step_rewards(actions, self.topo, cfg.payoff)
        self.coop_trace[t - 1] = cooperation_rate(actions)
        next_states = build_states(
            actions, self.topo, cfg.augmentation, self._aug_values(t + 1)
        )

        if training:
            ts = np.full(self.topo.n_agents, t, dtype=np.int64)
            if self._shared_buffer is not None:
                everyone = np.arange(self.topo.n_agents)
                self._shared_buffer.push_many(
                    everyone, ts, self.states, actions, rewards, next_states
                )
            else:
                for g in self.groups:
                    m = g.members
                    g.buffer.push_many(
                        m, ts[m], self.states[m], actions[m], rewards[m],
                        next_states[m],
                    )
            for g in self.groups:
                for _ in range(cfg.td.updates_per_step):
                    train_step(g, cfg.td, cfg.loss, self.replay_rngs[g.group_id])
            for g in self.groups:
                maybe_sync_target(g, t, cfg.td.target_sync_interval)
        else:
            self._capture(t, hidden_per_group, actions)

        self.prev_actions = actions
        self.states = next_states
        self.t = t

    def run_training(self) -> None:
        while self.t < self.cfg.t_train:
            self.step()

    def run_eval(self) -> None:
        while self.t < self.cfg.total_steps:
            self.step()

    # -- summaries ---------------------------------------------------------

    def param_hash(self) -> str:
        """Content hash over all groups' online and target parameters."""
        digest = hashlib.sha256()
        for g in self.groups:
            digest.update(params_to_bytes(g.online))
            digest.update(params_to_bytes(g.target))
        return digest.hexdigest()

    def _value_diagnostics(self) -> tuple[float, float, float]:
        k = self.activation_actions.size
        if k == 0:
            return float("nan"), float("nan"), float("nan")
        q_sample = np.empty((k, 2), dtype=np.float64)
        sample_groups = self.group_of[self._cap_agents]
        for g in self.groups:
            mask = sample_groups == g.group_id
            if np.any(mask):
                q_sample[mask] = forward_batch(
                    g.online, self.activation_states[mask]
                )[0]
        q_mean, q_gap = analysis.q_stats(q_sample)
        sil = float("nan")
        if k >= 2 and np.unique(self.activation_hidden, axis=0).shape[0] >= 2:
            km = analysis.kmeans2(
                self.activation_hidden,
                derive_seed(self.cfg.seed, (_STREAM_KMEANS,), 0),
            )
            sil = analysis.silhouette(self.activation_hidden, km.assignments)
        return q_mean, q_gap, sil

    def result(self, wall_time: float = 0.0, hash_after_train: str = "") -> RunResult:
        cfg = self.cfg
        if self.t != cfg.total_steps:
            raise ConfigError("run is not complete")
        q_mean, q_gap, sil = self._value_diagnostics()
        try:
            strength = exploration_strength(cfg.schedule)
        except ConfigError:
            strength = float("nan")
        return RunResult(
            coop_trace=self.coop_trace,
            coop_mean=analysis.mean_cooperation(self.coop_trace, cfg.t_eval),
            q_mean=q_mean,
            q_gap=q_gap,
            silhouette=sil,
            activation_states=self.activation_states,
            activation_hidden=self.activation_hidden,
            activation_actions=self.activation_actions,
            activation_steps=self._cap_steps.copy(),
            exploration_strength=strength,
            param_hash=self.param_hash(),
            param_hash_after_train=hash_after_train,
            optimizer_steps=tuple(g.optimizer.step_count for g in self.groups),
            buffer_sizes=tuple(len(g.buffer) for g in self.groups),
            wall_time=wall_time,
        )


def run(cfg: RunConfig) -> RunResult:
    """Execute one full two-phase run for a seeded configuration."""
    started = time.perf_counter()
    sim = Simulation(cfg)
    sim.run_training()
    hash_after_train = sim.param_hash()
    sim.run_eval()
    return sim.result(
        wall_time=time.perf_counter() - started,
        hash_after_train=hash_after_train,
    )


# -- sweeps ----------------------------------------------------------------

AXIS_ORDER = ("tau_init", "d_r", "topology", "architecture", "augmentation", "L")


def apply_axis(cfg: RunConfig, axis: str, value) -> RunConfig:
    """Return a copy of ``cfg`` with one sweep axis applied.

    A d_r axis moves d_g along with it while the base config sits on the
    diagonal d_g = d_r; an off-diagonal base pins d_g.
    """
    if axis == "tau_init":
        return replace(cfg, schedule=replace(cfg.schedule, tau_init=float(value)))
    if axis == "d_r":
        diagonal = cfg.payoff.d_r == cfg.payoff.d_g
        return replace(
            cfg,
            payoff=PayoffParams(
                d_r=float(value),
                d_g=float(value) if diagonal else cfg.payoff.d_g,
            ),
        )
    if axis == "topology":
        return replace(cfg, topology=replace(cfg.topology, kind=str(value)))
    if axis == "architecture":
        return replace(cfg, architecture=str(value))
    if axis == "augmentation":
        return replace(cfg, augmentation=AugMode(str(value)))
    if axis == "L":
        return replace(cfg, topology=replace(cfg.topology, L=int(value)))
    raise ConfigError(f"unknown sweep axis {axis!r}")


@dataclass(frozen=True)
class PlanEntry:
    """One scheduled run of a sweep."""

    index: int
    run_id: str
    axis_values: dict
    seed: int
    cfg: RunConfig


@dataclass
class RowResult:
    """Outcome of one sweep entry (result or recorded failure)."""

    entry: PlanEntry
    result: RunResult | None = None
    error: str | None = None


def plan_sweep(
    base_cfg: RunConfig, axes: dict, seeds: list[int], base_seed: int = 0
) -> list[PlanEntry]:
    """Cartesian product of axis values and seeds, in a stable order."""
    for name in axes:
        if name not in AXIS_ORDER:
            raise ConfigError(f"unknown sweep axis {name!r}")
    if not seeds:
        raise ConfigError("at least one seed required")
    active = [name for name in AXIS_ORDER if name in axes and axes[name]]
    combos: list[tuple[tuple[int, ...], dict]] = [((), {})]
    for name in active:
        combos = [
            (idx + (i,), {**values, name: v})
            for idx, values in combos
            for i, v in enumerate(axes[name])
        ]
    entries = []
    for combo_i, (idx, values) in enumerate(combos):
        cfg = base_cfg
        for name, v in values.items():
            cfg = apply_axis(cfg, name, v)
        for seed in seeds:
            run_seed = derive_seed(base_seed, idx, seed)
            entries.append(
                PlanEntry(
                    index=len(entries),
                    run_id=f"run{combo_i:04d}_s{seed}",
                    axis_values=dict(values),
                    seed=seed,
                    cfg=replace(cfg, seed=run_seed),
                )
            )
    return entries


def _execute_entry(entry: PlanEntry) -> RowResult:
    try:
        return RowResult(entry=entry, result=run(entry.cfg))
    except Exception as exc:  # noqa: BLE001 - failures become table rows
        return RowResult(entry=entry, error=f"{type(exc).__name__}: {exc}")


def sweep(
    base_cfg: RunConfig,
    axes: dict,
    seeds: list[int],
    base_seed: int = 0,
    workers: int = 1,
    on_row=None,
) -> list[RowResult]:
    """Run the full sweep; rows are delivered in plan order.

    ``on_row`` (if given) is invoked incrementally, still in plan order,
    as soon as each row and all its predecessors have finished. Failures
    of individual runs become rows with ``error`` set; the sweep
    continues.
    """
    entries = plan_sweep(base_cfg, axes, seeds, base_seed)
    return run_entries(entries, workers=workers, on_row=on_row)


def run_entries(
    entries: list[PlanEntry], workers: int = 1, on_row=None
) -> list[RowResult]:
    """Execute pre-planned sweep entries (possibly in parallel processes)."""
    results: list[RowResult | None] = [None] * len(entries)
    emitted = 0

    def flush():
        nonlocal emitted
        while emitted < len(entries) and results[emitted] is not None:
            if on_row is not None:
                on_row(results[emitted])
            emitted += 1

    if workers <= 1 or len(entries) <= 1:
        for i, entry in enumerate(entries):
            results[i] = _execute_entry(entry)
            flush()
    else:
        from concurrent.futures import ProcessPoolExecutor, as_completed

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_execute_entry, entry): pos
                for pos, entry in enumerate(entries)
            }
            for fut in as_completed(futures):
                results[futures[fut]] = fut.result()
                flush()
    return [r for r in results if r is not None]
