"""Seed-reproducible simulator of parameter-shared DQN learning in a
networked dynamic Prisoner's Dilemma, with collapse/representation
diagnostics and a sweep-oriented CLI."""

__version__ = "0.1.0"

from .analysis import (
    ClusterDiagnostic,
    ThresholdResult,
    aggregate_seeds,
    collapse_threshold,
    kmeans2,
    mean_cooperation,
    q_stats,
    silhouette,
)
from .errors import ConfigError, GenerationError
from .explore import (
    AnnealSchedule,
    EvalPolicy,
    exploration_strength,
    greedy_action,
    softmax_policy,
    softmax_probs,
    temperature,
)
from .game import (
    Action,
    AugMode,
    PayoffParams,
    build_state,
    build_states,
    cooperation_rate,
    payoff,
    step_rewards,
)
from .learner import (
    PolicyGroup,
    ReplayBuffer,
    TDConfig,
    Transition,
    assign_groups,
    double_dqn_target_1step,
    maybe_sync_target,
    nstep_target,
    train_step,
)
from .net import (
    LossConfig,
    NetParams,
    OptimConfig,
    OptimizerState,
    clip_global_norm,
    copy_params,
    forward,
    forward_batch,
    init_optimizer,
    init_params,
    loss_and_grad,
    optimizer_step,
    params_from_bytes,
    params_hash,
    params_to_bytes,
)
from .sim import (
    RunConfig,
    RunResult,
    Simulation,
    TopologySpec,
    derive_seed,
    initial_actions,
    run,
    sweep,
)
from .topology import (
    Topology,
    make_grid,
    make_modular,
    make_random_regular,
    make_small_world,
    write_edge_list,
)
