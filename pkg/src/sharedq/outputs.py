"""On-disk formats of an experiment: runs.csv, per-run trace and
activation dumps, thresholds.csv, and manifest.json.

All numeric cells use Python's shortest round-trip float rendering, so
re-reading a CSV reproduces the exact 64-bit values. A single collector
owns every file handle; workers never write directly.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import aggregate_seeds, collapse_threshold
from .errors import ConfigError
from .explore import temperatures
from .sim import PlanEntry, RunConfig, RunResult

RUNS_COLUMNS = (
    "run_id",
    "B",
    "tau_init",
    "d_r",
    "d_g",
    "topology",
    "architecture",
    "augmentation",
    "L",
    "seed",
    "coop_mean",
    "q_mean",
    "q_gap",
    "silhouette",
    "wall_time",
)

THRESHOLD_COLUMNS = (
    "B",
    "tau_init",
    "topology",
    "architecture",
    "augmentation",
    "L",
    "criterion",
    "d_r_star",
    "status",
)

# Default collapse criteria per architecture (grouped learning reaches a
# much lower cooperation baseline, so its criterion sits lower).
DEFAULT_CRITERIA = {"shared": 0.55, "grouped": 0.15}


def fmt_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def run_row(entry: PlanEntry, result: RunResult) -> dict:
    cfg = entry.cfg
    return {
        "run_id": entry.run_id,
        "B": result.exploration_strength,
        "tau_init": cfg.schedule.tau_init,
        "d_r": cfg.payoff.d_r,
        "d_g": cfg.payoff.d_g,
        "topology": cfg.topology.kind,
        "architecture": cfg.architecture,
        "augmentation": cfg.augmentation.value,
        "L": cfg.topology.L,
        "seed": entry.seed,
        "coop_mean": result.coop_mean,
        "q_mean": result.q_mean,
        "q_gap": result.q_gap,
        "silhouette": result.silhouette,
        "wall_time": result.wall_time,
    }


def behavior_temperatures(cfg: RunConfig) -> np.ndarray:
    """Per-step behavior temperature: the anneal schedule while training,
    the evaluation temperature afterwards (0 marks greedy evaluation)."""
    taus = np.empty(cfg.total_steps, dtype=np.float64)
    if cfg.t_train > 0:
        taus[: cfg.t_train] = temperatures(
            cfg.schedule, np.arange(1, cfg.t_train + 1)
        )
    taus[cfg.t_train :] = (
        cfg.eval_policy.tau_eval if cfg.eval_policy.mode == "softmax" else 0.0
    )
    return taus


class OutputBundle:
    """Writer for one experiment's output directory."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.runs_path = os.path.join(out_dir, "runs.csv")
        self.manifest_path = os.path.join(out_dir, "manifest.json")
        self.thresholds_path = os.path.join(out_dir, "thresholds.csv")

    # -- runs.csv ---------------------------------------------------------

    def existing_run_ids(self) -> set[str]:
        if not os.path.exists(self.runs_path):
            return set()
        with open(self.runs_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return set()
            if tuple(reader.fieldnames) != RUNS_COLUMNS:
                raise ConfigError(
                    f"{self.runs_path} has unexpected columns "
                    f"{reader.fieldnames}"
                )
            return {row["run_id"] for row in reader}

    def append_run(self, entry: PlanEntry, result: RunResult) -> None:
        new_file = not os.path.exists(self.runs_path)
        with open(self.runs_path, "a", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            if new_file:
                writer.writerow(RUNS_COLUMNS)
            row = run_row(entry, result)
            writer.writerow([fmt_cell(row[c]) for c in RUNS_COLUMNS])

    def read_runs(self) -> list[dict]:
        """runs.csv rows with numeric columns restored to floats/ints."""
        with open(self.runs_path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            for key in ("B", "d_r", "d_g", "tau_init", "coop_mean", "q_mean",
                        "q_gap", "silhouette", "wall_time"):
                row[key] = float(row[key])
            row["L"] = int(row["L"])
            row["seed"] = int(row["seed"])
        return rows

    # -- per-run dumps ------------------------------------------------------

    def write_trace(self, entry: PlanEntry, result: RunResult) -> None:
        taus = behavior_temperatures(entry.cfg)
        path = os.path.join(self.out_dir, f"trace-{entry.run_id}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("t", "c_t", "tau_t"))
            for t in range(result.coop_trace.size):
                writer.writerow(
                    (t + 1, fmt_cell(result.coop_trace[t]), fmt_cell(taus[t]))
                )

    def write_activations(self, entry: PlanEntry, result: RunResult) -> None:
        hidden_dim = result.activation_hidden.shape[1]
        path = os.path.join(self.out_dir, f"activations-{entry.run_id}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [f"h{i}" for i in range(hidden_dim)] + ["action", "step"]
            )
            for i in range(result.activation_hidden.shape[0]):
                writer.writerow(
                    [fmt_cell(v) for v in result.activation_hidden[i]]
                    + [int(result.activation_actions[i]),
                       int(result.activation_steps[i])]
                )

    # -- thresholds.csv ---------------------------------------------------

    def write_thresholds(self, rows: list[dict],
                         criterion: float | None) -> None:
        """Collapse thresholds per non-payoff cell, across the d_r grid."""
        with open(self.thresholds_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(THRESHOLD_COLUMNS)
            if not rows:
                return
            group_keys = ("B", "tau_init", "topology", "architecture",
                          "augmentation", "L", "d_r")
            cells = aggregate_seeds(rows, group_keys, ("coop_mean",))
            curves: dict[tuple, list] = {}
            for cell in cells:
                key = tuple(cell[k] for k in group_keys[:-1])
                curves.setdefault(key, []).append(
                    (cell["d_r"], cell["coop_mean_mean"])
                )
            for key in sorted(curves):
                pairs = sorted(curves[key])
                cell_criterion = (
                    criterion
                    if criterion is not None
                    else DEFAULT_CRITERIA[key[3]]
                )
                res = collapse_threshold(
                    [p[0] for p in pairs], [p[1] for p in pairs],
                    cell_criterion,
                )
                writer.writerow(
                    [fmt_cell(v) for v in key]
                    + [fmt_cell(cell_criterion),
                       "" if res.d_r_star is None else fmt_cell(res.d_r_star),
                       res.status]
                )

    # -- manifest ---------------------------------------------------------

    def write_manifest(self, spec_text: str, entries: list[PlanEntry],
                       statuses: dict[str, dict]) -> None:
        manifest = {
            "tool": {"name": "sharedq", "version": __version__},
            "spec": spec_text,
            "runs": {
                e.run_id: {
                    "index": e.index,
                    "axis_values": e.axis_values,
                    "seed": e.seed,
                    "run_seed": e.cfg.seed,
                    **statuses.get(e.run_id, {"status": "pending"}),
                }
                for e in entries
            },
        }
        tmp = self.manifest_path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, self.manifest_path)
