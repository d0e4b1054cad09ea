"""One-hidden-layer value network with hand-derived gradients.

Everything here is pure 64-bit numpy over value types: forward pass,
exact analytic gradients of the Huber/MSE objective on the selected
action head, global-norm clipping, and AdamW/Adam/RMSprop updates. No
function mutates its inputs; optimizer steps return fresh parameter and
state objects.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

N_ACTIONS = 2

_FIELDS = ("w1", "b1", "w2", "b2")


@dataclass(frozen=True)
class NetParams:
    """Weights of the value network (two output heads, one per action).

    Also reused as the container for gradients and optimizer moments,
    which share the parameter shapes.
    """

    w1: np.ndarray  # (hidden, input)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (2, hidden)
    b2: np.ndarray  # (2,)

    def __post_init__(self) -> None:
        h, d = self.w1.shape
        if self.b1.shape != (h,) or self.w2.shape != (N_ACTIONS, h):
            raise ConfigError("inconsistent parameter shapes")
        if self.b2.shape != (N_ACTIONS,):
            raise ConfigError(
                f"output head must have exactly {N_ACTIONS} values"
            )
        for name in _FIELDS:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ConfigError(f"non-finite values in {name}")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.b1, self.w2, self.b2)


def init_params(input_dim: int, hidden_dim: int, seed: int) -> NetParams:
    """Fan-in uniform weight init (range +-1/sqrt(fan_in)), zero biases."""
    if input_dim < 1 or hidden_dim < 1:
        raise ConfigError("network dimensions must be positive")
    rng = np.random.default_rng(seed)
    lim1 = 1.0 / np.sqrt(input_dim)
    lim2 = 1.0 / np.sqrt(hidden_dim)
    return NetParams(
        w1=rng.uniform(-lim1, lim1, size=(hidden_dim, input_dim)),
        b1=np.zeros(hidden_dim),
        w2=rng.uniform(-lim2, lim2, size=(N_ACTIONS, hidden_dim)),
        b2=np.zeros(N_ACTIONS),
    )


def copy_params(p: NetParams) -> NetParams:
    """Deep value copy; later updates to the source do not leak in."""
    return NetParams(*(a.copy() for a in p.arrays()))


def forward(p: NetParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Action values and hidden activations for a single observation."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.input_dim,):
        raise ConfigError(f"input has shape {x.shape}, expected ({p.input_dim},)")
    hidden = np.maximum(p.w1 @ x + p.b1, 0.0)
    q = p.w2 @ hidden + p.b2
    return q, hidden


def forward_batch(p: NetParams, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched forward pass: returns (n, 2) action values and (n, hidden)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != p.input_dim:
        raise ConfigError(
            f"batch has shape {xs.shape}, expected (n, {p.input_dim})"
        )
    hidden = np.maximum(xs @ p.w1.T + p.b1, 0.0)
    q = hidden @ p.w2.T + p.b2
    return q, hidden


@dataclass(frozen=True)
class LossConfig:
    """Elementwise regression loss on the selected action's value.

    huber: 0.5 r^2 for |r| <= delta, else delta (|r| - delta/2).
    mse:   r^2.
    """

    kind: str = "huber"
    delta: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("huber", "mse"):
            raise ConfigError(f"unknown loss kind {self.kind!r}")
        if self.delta <= 0.0:
            raise ConfigError(f"huber delta must be > 0, got {self.delta}")


def loss_values_and_derivs(
    residuals: np.ndarray, cfg: LossConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise loss and d(loss)/d(residual)."""
    r = np.asarray(residuals, dtype=np.float64)
    if cfg.kind == "mse":
        return r * r, 2.0 * r
    small = np.abs(r) <= cfg.delta
    values = np.where(
        small, 0.5 * r * r, cfg.delta * (np.abs(r) - 0.5 * cfg.delta)
    )
    derivs = np.where(small, r, cfg.delta * np.sign(r))
    return values, derivs


def loss_and_grad(
    p: NetParams,
    xs: np.ndarray,
    actions: np.ndarray,
    targets: np.ndarray,
    cfg: LossConfig,
) -> tuple[float, NetParams]:
    """Mean loss over the batch and its exact gradient.

    Only the selected action's output head receives gradient; the other
    head's contribution is identically zero.
    """
    xs = np.asarray(xs, dtype=np.float64)
    actions = np.asarray(actions, dtype=np.intp)
    targets = np.asarray(targets, dtype=np.float64)
    n = xs.shape[0]
    if n == 0:
        raise ConfigError("empty training batch")
    if not np.all(np.isfinite(targets)):
        raise ConfigError("non-finite targets")

    hidden = np.maximum(xs @ p.w1.T + p.b1, 0.0)  # (n, h)
    q = hidden @ p.w2.T + p.b2  # (n, 2)
    rows = np.arange(n)
    residuals = q[rows, actions] - targets
    values, derivs = loss_values_and_derivs(residuals, cfg)
    loss = float(np.mean(values))

    dq = np.zeros_like(q)
    dq[rows, actions] = derivs / n
    gw2 = dq.T @ hidden
    gb2 = dq.sum(axis=0)
    dhidden = (dq @ p.w2) * (hidden > 0.0)
    gw1 = dhidden.T @ xs
    gb1 = dhidden.sum(axis=0)
    return loss, NetParams(w1=gw1, b1=gb1, w2=gw2, b2=gb2)


def global_norm(grads: NetParams) -> float:
    """l2 norm over all parameter tensors jointly."""
    return float(np.sqrt(sum(float(np.sum(a * a)) for a in grads.arrays())))


def clip_global_norm(grads: NetParams, max_norm: float = 0.5) -> NetParams:
    """Scale all gradients down so their joint l2 norm is <= max_norm."""
    norm = global_norm(grads)
    if norm <= max_norm:
        return grads
    scale = max_norm / norm
    return NetParams(*(a * scale for a in grads.arrays()))


@dataclass(frozen=True)
class OptimConfig:
    """Optimizer kind and hyperparameters (defaults from the shared setup).

    ``weight_decay`` is decoupled for adamw and coupled (added to the
    gradient) for adam/rmsprop. When left unset it resolves to 1e-4 for
    adamw and 0.0 otherwise. rmsprop keeps a single squared-gradient
    moment with decay ``rms_decay`` and no momentum.
    """

    kind: str = "adamw"
    lr: float = 1e-4
    weight_decay: float | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rms_decay: float = 0.99

    def __post_init__(self) -> None:
        if self.kind not in ("adamw", "adam", "rmsprop"):
            raise ConfigError(f"unknown optimizer kind {self.kind!r}")
        if self.lr <= 0.0:
            raise ConfigError(f"learning rate must be > 0, got {self.lr}")
        if self.weight_decay is None:
            default = 1e-4 if self.kind == "adamw" else 0.0
            object.__setattr__(self, "weight_decay", default)


def _zeros_like_params(p: NetParams) -> NetParams:
    return NetParams(*(np.zeros_like(a) for a in p.arrays()))


@dataclass(frozen=True)
class OptimizerState:
    """First/second moment tensors plus the update counter."""

    cfg: OptimConfig
    step_count: int
    m: NetParams
    v: NetParams


def init_optimizer(cfg: OptimConfig, p: NetParams) -> OptimizerState:
    return OptimizerState(
        cfg=cfg, step_count=0, m=_zeros_like_params(p), v=_zeros_like_params(p)
    )


def optimizer_step(
    p: NetParams, st: OptimizerState, grads: NetParams
) -> tuple[NetParams, OptimizerState]:
    """One parameter update; returns new params and state, inputs untouched."""
    cfg = st.cfg
    t = st.step_count + 1
    new_p, new_m, new_v = [], [], []
    for param, g, m, v in zip(
        p.arrays(), grads.arrays(), st.m.arrays(), st.v.arrays()
    ):
        if param.shape != g.shape:
            raise ConfigError("gradient shape does not match parameters")
        if cfg.kind == "rmsprop":
            g_eff = g + cfg.weight_decay * param if cfg.weight_decay else g
            v2 = cfg.rms_decay * v + (1.0 - cfg.rms_decay) * g_eff * g_eff
            upd = param - cfg.lr * g_eff / (np.sqrt(v2) + cfg.eps)
            new_m.append(m)
            new_v.append(v2)
            new_p.append(upd)
            continue
        if cfg.kind == "adam":
            g_eff = g + cfg.weight_decay * param if cfg.weight_decay else g
        else:  # adamw: decay applied directly to the parameters
            g_eff = g
        m2 = cfg.beta1 * m + (1.0 - cfg.beta1) * g_eff
        v2 = cfg.beta2 * v + (1.0 - cfg.beta2) * g_eff * g_eff
        m_hat = m2 / (1.0 - cfg.beta1**t)
        v_hat = v2 / (1.0 - cfg.beta2**t)
        upd = param - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps)
        if cfg.kind == "adamw":
            upd = upd - cfg.lr * cfg.weight_decay * param
        new_m.append(m2)
        new_v.append(v2)
        new_p.append(upd)
    return (
        NetParams(*new_p),
        OptimizerState(
            cfg=cfg, step_count=t, m=NetParams(*new_m), v=NetParams(*new_v)
        ),
    )


_HEADER = struct.Struct("<IIQ")


def params_to_bytes(p: NetParams) -> bytes:
    """Flat little-endian float64 snapshot with a (dims, count) header."""
    flat = np.concatenate([a.ravel() for a in p.arrays()])
    header = _HEADER.pack(p.input_dim, p.hidden_dim, flat.size)
    return header + flat.astype("<f8").tobytes()


def params_from_bytes(blob: bytes) -> NetParams:
    input_dim, hidden_dim, count = _HEADER.unpack_from(blob)
    flat = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).astype(
        np.float64
    )
    if flat.size != count:
        raise ConfigError(
            f"snapshot holds {flat.size} values, header says {count}"
        )
    sizes = [hidden_dim * input_dim, hidden_dim, N_ACTIONS * hidden_dim, N_ACTIONS]
    if sum(sizes) != count:
        raise ConfigError("snapshot size does not match header dims")
    parts = np.split(flat, np.cumsum(sizes)[:-1])
    return NetParams(
        w1=parts[0].reshape(hidden_dim, input_dim),
        b1=parts[1],
        w2=parts[2].reshape(N_ACTIONS, hidden_dim),
        b2=parts[3],
    )


def params_hash(p: NetParams) -> str:
    """Stable content hash of a parameter snapshot."""
    return hashlib.sha256(params_to_bytes(p)).hexdigest()
