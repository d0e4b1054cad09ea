"""Experiment spec files: INI sections describing one run, sweep axes,
seeds, and output options. Unknown sections or keys are rejected, and
every default matches the reference hyperparameter table."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

from .errors import ConfigError
from .explore import AnnealSchedule, EvalPolicy
from .game import AugMode, PayoffParams
from .learner import TDConfig
from .net import LossConfig, OptimConfig
from .sim import AXIS_ORDER, RunConfig, TopologySpec

_SECTIONS = ("run", "sweep", "seeds", "output", "analysis")

_RUN_KEYS = {
    "topology": str,
    "L": int,
    "n_agents": int,
    "p_rewire": float,
    "n_modules": int,
    "n_cross": int,
    "d_r": float,
    "d_g": float,
    "tau_init": float,
    "tau_final": float,
    "t_anneal": int,
    "tau_eval": float,
    "eval_mode": str,
    "t_train": int,
    "t_eval": int,
    "gamma": float,
    "n_step": int,
    "batch_size": int,
    "buffer_capacity": int,
    "target_sync_interval": int,
    "updates_per_step": int,
    "grad_clip": float,
    "hidden_dim": int,
    "architecture": str,
    "n_groups": int,
    "shared_replay": bool,
    "augmentation": str,
    "optimizer": str,
    "lr": float,
    "weight_decay": float,
    "beta1": float,
    "beta2": float,
    "eps": float,
    "rms_decay": float,
    "loss": str,
    "huber_delta": float,
    "activation_sample": int,
}

_AXIS_TYPES = {
    "tau_init": float,
    "d_r": float,
    "topology": str,
    "architecture": str,
    "augmentation": str,
    "L": int,
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Parsed spec: a base run plus sweep axes and execution options."""

    base: RunConfig
    axes: dict
    seeds: tuple[int, ...]
    base_seed: int = 0
    out_dir: str = "out"
    workers: int = 0  # 0 = use available parallelism
    dump_trace: bool = False
    dump_activations: bool = False
    threshold_criterion: float | None = None  # None = per-architecture default


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "yes", "on", "1"):
                return True
            if lowered in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        return kind(raw.strip())
    except ValueError as exc:
        raise ConfigError(
            f"{section}.{key}: cannot parse {raw!r} as {kind.__name__}"
        ) from exc


def _value_list(section: str, key: str, raw: str, kind) -> tuple:
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    if not parts:
        raise ConfigError(f"{section}.{key}: empty value list")
    return tuple(_convert(section, key, p, kind) for p in parts)


def _build_run_config(values: dict) -> RunConfig:
    get = values.get
    d_r = get("d_r", 0.25)
    d_g = get("d_g", d_r)  # diagonal dilemma unless overridden
    topology = TopologySpec(
        kind=get("topology", "grid"),
        L=get("L", 30),
        n_agents=get("n_agents"),
        p_rewire=get("p_rewire", 0.1),
        n_modules=get("n_modules", 9),
        n_cross=get("n_cross", 20),
    )
    return RunConfig(
        topology=topology,
        payoff=PayoffParams(d_r=d_r, d_g=d_g),
        schedule=AnnealSchedule(
            tau_init=get("tau_init", 0.8),
            tau_final=get("tau_final", 0.10),
            t_anneal=get("t_anneal", 95_000),
        ),
        eval_policy=EvalPolicy(
            mode=get("eval_mode", "softmax"), tau_eval=get("tau_eval", 0.10)
        ),
        t_train=get("t_train", 95_000),
        t_eval=get("t_eval", 5_000),
        td=TDConfig(
            gamma=get("gamma", 0.99),
            n_step=get("n_step", 5),
            batch_size=get("batch_size", 256),
            target_sync_interval=get("target_sync_interval", 2_000),
            grad_clip=get("grad_clip", 0.5),
            updates_per_step=get("updates_per_step", 1),
        ),
        loss=LossConfig(
            kind=get("loss", "huber"), delta=get("huber_delta", 1.0)
        ),
        optim=OptimConfig(
            kind=get("optimizer", "adamw"),
            lr=get("lr", 1e-4),
            weight_decay=get("weight_decay"),
            beta1=get("beta1", 0.9),
            beta2=get("beta2", 0.999),
            eps=get("eps", 1e-8),
            rms_decay=get("rms_decay", 0.99),
        ),
        hidden_dim=get("hidden_dim", 96),
        architecture=get("architecture", "shared"),
        n_groups=get("n_groups", 10),
        shared_replay=get("shared_replay", False),
        augmentation=AugMode(get("augmentation", "none")),
        buffer_capacity=get("buffer_capacity", 90_000),
        activation_sample=get("activation_sample", 2_000),
        seed=0,
    )


def parse_spec_text(text: str, source: str = "<spec>") -> ExperimentSpec:
    """Parse and validate a spec document; errors name the offending key."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case (the grid-side key is "L")
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"malformed spec file: {exc}") from exc

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")

    run_values: dict = {}
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key not in _RUN_KEYS:
                raise ConfigError(f"run.{key}: unknown key")
            run_values[key] = _convert("run", key, raw, _RUN_KEYS[key])
    try:
        base = _build_run_config(run_values)
    except ConfigError as exc:
        raise ConfigError(f"run section: {exc}") from exc

    axes: dict = {}
    if parser.has_section("sweep"):
        for key, raw in parser.items("sweep"):
            if key not in _AXIS_TYPES:
                raise ConfigError(
                    f"sweep.{key}: not a sweep axis "
                    f"(choose from {', '.join(AXIS_ORDER)})"
                )
            axes[key] = _value_list("sweep", key, raw, _AXIS_TYPES[key])

    base_seed = 0
    seeds: tuple[int, ...] = (0,)
    if parser.has_section("seeds"):
        keys = dict(parser.items("seeds"))
        for key in keys:
            if key not in ("base_seed", "count", "list"):
                raise ConfigError(f"seeds.{key}: unknown key")
        if "base_seed" in keys:
            base_seed = _convert("seeds", "base_seed", keys["base_seed"], int)
        if "list" in keys and "count" in keys:
            raise ConfigError("seeds: give either count or list, not both")
        if "list" in keys:
            seeds = _value_list("seeds", "list", keys["list"], int)
        elif "count" in keys:
            count = _convert("seeds", "count", keys["count"], int)
            if count < 1:
                raise ConfigError(f"seeds.count: must be >= 1, got {count}")
            seeds = tuple(range(count))
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds.list: duplicate seed values")

    out_dir, workers = "out", 0
    dump_trace = dump_activations = False
    if parser.has_section("output"):
        keys = dict(parser.items("output"))
        for key in keys:
            if key not in ("dir", "workers", "dump_trace", "dump_activations"):
                raise ConfigError(f"output.{key}: unknown key")
        out_dir = keys.get("dir", out_dir).strip()
        if "workers" in keys:
            workers = _convert("output", "workers", keys["workers"], int)
            if workers < 0:
                raise ConfigError("output.workers: must be >= 0")
        if "dump_trace" in keys:
            dump_trace = _convert("output", "dump_trace", keys["dump_trace"], bool)
        if "dump_activations" in keys:
            dump_activations = _convert(
                "output", "dump_activations", keys["dump_activations"], bool
            )

    criterion = None
    if parser.has_section("analysis"):
        keys = dict(parser.items("analysis"))
        for key in keys:
            if key != "threshold_criterion":
                raise ConfigError(f"analysis.{key}: unknown key")
        raw = keys.get("threshold_criterion", "auto").strip()
        if raw != "auto":
            criterion = _convert("analysis", "threshold_criterion", raw, float)

    return ExperimentSpec(
        base=base,
        axes=axes,
        seeds=seeds,
        base_seed=base_seed,
        out_dir=out_dir,
        workers=workers,
        dump_trace=dump_trace,
        dump_activations=dump_activations,
        threshold_criterion=criterion,
    )


def parse_spec(path) -> ExperimentSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read spec file {path}: {exc}") from exc
    return parse_spec_text(text, source=str(path))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def spec_to_ini(spec: ExperimentSpec) -> str:
    """Canonical INI rendering; re-parsing it reproduces the spec."""
    base = spec.base
    out = io.StringIO()
    out.write("[run]\n")
    run_fields = {
        "topology": base.topology.kind,
        "L": base.topology.L,
        "p_rewire": base.topology.p_rewire,
        "n_modules": base.topology.n_modules,
        "n_cross": base.topology.n_cross,
        "d_r": base.payoff.d_r,
        "d_g": base.payoff.d_g,
        "tau_init": base.schedule.tau_init,
        "tau_final": base.schedule.tau_final,
        "t_anneal": base.schedule.t_anneal,
        "tau_eval": base.eval_policy.tau_eval,
        "eval_mode": base.eval_policy.mode,
        "t_train": base.t_train,
        "t_eval": base.t_eval,
        "gamma": base.td.gamma,
        "n_step": base.td.n_step,
        "batch_size": base.td.batch_size,
        "buffer_capacity": base.buffer_capacity,
        "target_sync_interval": base.td.target_sync_interval,
        "updates_per_step": base.td.updates_per_step,
        "grad_clip": base.td.grad_clip,
        "hidden_dim": base.hidden_dim,
        "architecture": base.architecture,
        "n_groups": base.n_groups,
        "shared_replay": base.shared_replay,
        "augmentation": base.augmentation.value,
        "optimizer": base.optim.kind,
        "lr": base.optim.lr,
        "weight_decay": base.optim.weight_decay,
        "beta1": base.optim.beta1,
        "beta2": base.optim.beta2,
        "eps": base.optim.eps,
        "rms_decay": base.optim.rms_decay,
        "loss": base.loss.kind,
        "huber_delta": base.loss.delta,
        "activation_sample": base.activation_sample,
    }
    if base.topology.n_agents is not None:
        run_fields["n_agents"] = base.topology.n_agents
    for key, value in run_fields.items():
        out.write(f"{key} = {_fmt(value)}\n")

    if spec.axes:
        out.write("\n[sweep]\n")
        for name in AXIS_ORDER:
            if name in spec.axes:
                rendered = ", ".join(_fmt(v) for v in spec.axes[name])
                out.write(f"{name} = {rendered}\n")

    out.write("\n[seeds]\n")
    out.write(f"base_seed = {spec.base_seed}\n")
    out.write(f"list = {', '.join(str(s) for s in spec.seeds)}\n")

    out.write("\n[output]\n")
    out.write(f"dir = {spec.out_dir}\n")
    out.write(f"workers = {spec.workers}\n")
    out.write(f"dump_trace = {_fmt(spec.dump_trace)}\n")
    out.write(f"dump_activations = {_fmt(spec.dump_activations)}\n")

    out.write("\n[analysis]\n")
    criterion = "auto" if spec.threshold_criterion is None else _fmt(
        spec.threshold_criterion
    )
    out.write(f"threshold_criterion = {criterion}\n")
    return out.getvalue()
