"""From-scratch MLP yaw regressor: forward, backprop, RMSprop, persistence.

The network maps four chamber pressures to the unit-circle encoding
(cos phi, sin phi); predictions decode through the polar angle, which
keeps the 0/360 wrap out of the loss. Hidden layers use ReLU, the output
layer is linear, and every parameter is a 64-bit float. Nothing here
depends on an ML framework — the arithmetic is plain numpy so every step
can be checked against finite differences.

Model file format (versioned, little-endian):

    magic   7 bytes  b"CUPMLP1"
    mode    u8       0 = raw inputs, 1 = standardized
    depth   u32      number of entries in layer_sizes
    sizes   u32 * depth
    stats   f64 * (2 * sizes[0])   means then stds; standardized mode only
    params  per layer: weight matrix row-major (out x in) f64, bias f64 * out

The byte length must match the header exactly; anything else is rejected.
A JSON sidecar (same path + ".json") carries training config and metrics
when the caller supplies them.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal, Mapping, Sequence

import numpy as np

from .core import EPS_ZERO, Angle, SensorFrame, wrap_angle
from .dataset import FeatureStats, LabeledSample, feature_stats
from .errors import ConfigError, InvalidInputError, ModelFormatError
from .rng import make_generator, substream

DEFAULT_LAYER_SIZES = (4, 16, 32, 16, 2)
MODEL_MAGIC = b"CUPMLP1"


@dataclass(frozen=True)
class MlpModel:
    """Weights (out x in), biases, and the input convention they expect."""

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    input_mode: Literal["raw", "standardized"] = "raw"
    stats: FeatureStats | None = None

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise InvalidInputError(f"bad layer_sizes {sizes}")
        weights = tuple(np.asarray(w, dtype=np.float64) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=np.float64) for b in self.biases)
        if len(weights) != len(sizes) - 1 or len(biases) != len(sizes) - 1:
            raise InvalidInputError("one weight matrix and bias per layer required")
        for k, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (sizes[k + 1], sizes[k]) or b.shape != (sizes[k + 1],):
                raise InvalidInputError(
                    f"layer {k} shape mismatch: W{w.shape}, b{b.shape} for sizes {sizes}"
                )
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise InvalidInputError(f"layer {k} has non-finite parameters")
        if self.input_mode not in ("raw", "standardized"):
            raise InvalidInputError(f"unknown input_mode {self.input_mode!r}")
        if self.input_mode == "standardized":
            if self.stats is None:
                raise InvalidInputError("standardized input_mode requires stats")
            if len(self.stats.mean) != sizes[0]:
                raise InvalidInputError(
                    f"stats cover {len(self.stats.mean)} channels, model takes {sizes[0]}"
                )
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)


@dataclass(frozen=True)
class RmspropState:
    """Running mean of squared gradients plus the optimizer hyperparameters."""

    v: tuple[np.ndarray, ...]
    lr: float = 1e-3
    rho: float = 0.9
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if not self.lr > 0.0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must be in (0, 1), got {self.rho}")
        if not self.eps > 0.0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")
        v = tuple(np.asarray(a, dtype=np.float64) for a in self.v)
        for a in v:
            if (a < 0.0).any():
                raise InvalidInputError("squared-gradient average must be >= 0")
        object.__setattr__(self, "v", v)

    @classmethod
    def initial(
        cls,
        params: Sequence[np.ndarray],
        lr: float = 1e-3,
        rho: float = 0.9,
        eps: float = 1e-8,
    ) -> "RmspropState":
        return cls(v=tuple(np.zeros_like(p) for p in params), lr=lr, rho=rho, eps=eps)


@dataclass(frozen=True)
class TrainConfig:
    """Training schedule and optimizer settings.

    ``standardize`` controls whether inputs are z-scored with training-set
    stats (the default) or fed as raw kPa values.
    """

    batch_size: int = 64
    max_epochs: int = 200
    patience: int = 20
    seed: int = 0
    lr: float = 1e-3
    rho: float = 0.9
    eps: float = 1e-8
    standardize: bool = True

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience < 0:
            raise ConfigError(f"patience must be >= 0, got {self.patience}")
        if not self.lr > 0.0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must be in (0, 1), got {self.rho}")
        if not self.eps > 0.0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")


@dataclass(frozen=True)
class TrainHistory:
    """Per-epoch loss curves; lengths equal the number of completed epochs.

    ``best_epoch`` is 0 when the initial parameters were never beaten,
    otherwise the 1-based epoch whose validation loss was checkpointed.
    """

    train_loss: tuple[float, ...]
    val_loss: tuple[float, ...]
    val_rmse_deg: tuple[float, ...]
    best_epoch: int = 0
    initial_val_loss: float = math.nan


def init_model(
    seed: int,
    layer_sizes: Sequence[int] = DEFAULT_LAYER_SIZES,
    input_mode: Literal["raw", "standardized"] = "raw",
    stats: FeatureStats | None = None,
) -> MlpModel:
    """Glorot-uniform weights, zero biases, deterministic in ``seed``."""
    rng = make_generator(seed)
    sizes = tuple(int(s) for s in layer_sizes)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(
        layer_sizes=sizes,
        weights=tuple(weights),
        biases=tuple(biases),
        input_mode=input_mode,
        stats=stats,
    )


def parameter_list(model: MlpModel) -> list[np.ndarray]:
    """All parameters in the fixed order weights-then-biases, layer by layer."""
    return list(model.weights) + list(model.biases)


def _forward_batch(
    weights: Sequence[np.ndarray], biases: Sequence[np.ndarray], x: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Return (activations, pre-activations); activations[0] is the input."""
    activations = [x]
    preacts = []
    last = len(weights) - 1
    for k, (w, b) in enumerate(zip(weights, biases)):
        z = activations[-1] @ w.T + b
        preacts.append(z)
        activations.append(z if k == last else np.maximum(z, 0.0))
    return activations, preacts


def forward(model: MlpModel, inputs: Sequence[float]) -> np.ndarray:
    """Network output for one input vector (ReLU hidden, linear output)."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (model.layer_sizes[0],):
        raise InvalidInputError(
            f"expected {model.layer_sizes[0]} inputs, got shape {x.shape}"
        )
    if not np.isfinite(x).all():
        raise InvalidInputError("inputs must be finite")
    activations, _ = _forward_batch(model.weights, model.biases, x[None, :])
    return activations[-1][0]


def target_encoding(phi: Angle) -> tuple[float, float]:
    """Unit-circle encoding (cos phi, sin phi)."""
    return (math.cos(phi.radians), math.sin(phi.radians))


def decode_angle(output: Sequence[float]) -> Angle | None:
    """Polar angle of a 2-vector output; None when the vector is ~zero."""
    x, y = (float(v) for v in output)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InvalidInputError(f"output must be finite, got ({x}, {y})")
    if math.hypot(x, y) <= EPS_ZERO:
        return None
    return wrap_angle(math.degrees(math.atan2(y, x)))


def loss(pred: Sequence[float], target: Sequence[float]) -> float:
    """MSE over the two components: ((p1-t1)^2 + (p2-t2)^2) / 2."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise InvalidInputError(f"shape mismatch {p.shape} vs {t.shape}")
    return float(np.mean((p - t) ** 2))


def _batch_loss(
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    x: np.ndarray,
    t: np.ndarray,
) -> float:
    activations, _ = _forward_batch(weights, biases, x)
    return float(np.mean((activations[-1] - t) ** 2))


def _backward_arrays(
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    x: np.ndarray,
    t: np.ndarray,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    activations, preacts = _forward_batch(weights, biases, x)
    n = x.shape[0]
    # d(mean over n*2 elements of (a-t)^2) / da = (a - t) / n
    grad = (activations[-1] - t) / n
    n_layers = len(weights)
    grad_w: list[np.ndarray] = [np.empty(0)] * n_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * n_layers
    for k in reversed(range(n_layers)):
        grad_w[k] = grad.T @ activations[k]
        grad_b[k] = grad.sum(axis=0)
        if k > 0:
            grad = (grad @ weights[k]) * (preacts[k - 1] > 0.0)
    return grad_w, grad_b


def backward(
    model: MlpModel, inputs: np.ndarray, targets: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Gradients of the mean batch loss w.r.t. every weight and bias.

    ReLU's subgradient at exactly 0 is taken as 0. Returns
    (grad_weights, grad_biases) with shapes matching the model.
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    t = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if x.shape[0] == 0:
        raise InvalidInputError("backward requires a non-empty batch")
    if x.shape[0] != t.shape[0]:
        raise InvalidInputError(
            f"batch size mismatch: {x.shape[0]} inputs vs {t.shape[0]} targets"
        )
    return _backward_arrays(model.weights, model.biases, x, t)


def rmsprop_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: RmspropState,
) -> tuple[list[np.ndarray], RmspropState]:
    """One update: v <- rho*v + (1-rho)*g^2; theta <- theta - lr*g/(sqrt(v)+eps)."""
    if not (len(params) == len(grads) == len(state.v)):
        raise InvalidInputError("params, grads, and state.v must align")
    new_v, new_params = [], []
    for p, g, v in zip(params, grads, state.v):
        p = np.asarray(p, dtype=np.float64)
        g = np.asarray(g, dtype=np.float64)
        if p.shape != g.shape or p.shape != v.shape:
            raise InvalidInputError(
                f"shape mismatch: param {p.shape}, grad {g.shape}, v {v.shape}"
            )
        v2 = state.rho * v + (1.0 - state.rho) * g * g
        new_v.append(v2)
        new_params.append(p - state.lr * g / (np.sqrt(v2) + state.eps))
    return new_params, replace(state, v=tuple(new_v))


def _design_matrices(
    samples: Sequence[LabeledSample], stats: FeatureStats | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(inputs, targets, true angles in degrees) for a sample list."""
    x = np.array([s.frame.p_ch for s in samples], dtype=np.float64)
    if stats is not None:
        x = (x - np.asarray(stats.mean)) / np.asarray(stats.std)
    t = np.array(
        [target_encoding(s.pose.phi) for s in samples], dtype=np.float64
    )
    phi = np.array([s.pose.phi.degrees for s in samples], dtype=np.float64)
    return x, t, phi


def _angular_rmse(outputs: np.ndarray, phi_true_deg: np.ndarray) -> float:
    """Wrap-aware RMSE of decoded outputs; ~zero vectors are skipped."""
    norms = np.hypot(outputs[:, 0], outputs[:, 1])
    defined = norms > EPS_ZERO
    if not defined.any():
        return math.nan
    pred = np.degrees(np.arctan2(outputs[defined, 1], outputs[defined, 0])) % 360.0
    diff = np.abs(pred - phi_true_deg[defined])
    err = np.minimum(diff, 360.0 - diff)
    return float(np.sqrt(np.mean(err**2)))


# Substream indices off the training seed: 0 is parameter init
# (init_model uses the seed directly), 1 drives epoch shuffling.
_SHUFFLE_STREAM = 1


def train(
    train_set: Sequence[LabeledSample],
    val_set: Sequence[LabeledSample],
    config: TrainConfig,
) -> tuple[MlpModel, TrainHistory]:
    """Mini-batch RMSprop with early stopping on validation loss.

    Epochs reshuffle the training set from a seed-derived stream. The
    returned model carries the best-validation-loss parameters seen,
    including the untrained initial model as candidate zero, so its
    validation loss never exceeds the initial one. Training stops at
    ``max_epochs`` or once more than ``patience`` consecutive epochs fail
    to improve validation loss.
    """
    if not train_set or not val_set:
        raise ConfigError("train and validation sets must both be non-empty")
    stats = feature_stats(train_set) if config.standardize else None
    x_train, t_train, _ = _design_matrices(train_set, stats)
    x_val, t_val, phi_val = _design_matrices(val_set, stats)

    model0 = init_model(
        config.seed,
        input_mode="standardized" if config.standardize else "raw",
        stats=stats,
    )
    weights = [w.copy() for w in model0.weights]
    biases = [b.copy() for b in model0.biases]
    opt = RmspropState.initial(
        weights + biases, lr=config.lr, rho=config.rho, eps=config.eps
    )
    shuffle_rng = substream(config.seed, _SHUFFLE_STREAM)

    initial_val = _batch_loss(weights, biases, x_val, t_val)
    best_val = initial_val
    best_weights = [w.copy() for w in weights]
    best_biases = [b.copy() for b in biases]
    best_epoch = 0

    n = len(train_set)
    history_train, history_val, history_rmse = [], [], []
    stale_epochs = 0
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            grad_w, grad_b = _backward_arrays(
                weights, biases, x_train[idx], t_train[idx]
            )
            updated, opt = rmsprop_step(weights + biases, grad_w + grad_b, opt)
            weights = updated[: len(weights)]
            biases = updated[len(weights) :]
        train_loss = _batch_loss(weights, biases, x_train, t_train)
        val_loss = _batch_loss(weights, biases, x_val, t_val)
        val_out, _ = _forward_batch(weights, biases, x_val)
        history_train.append(train_loss)
        history_val.append(val_loss)
        history_rmse.append(_angular_rmse(val_out[-1], phi_val))
        if val_loss < best_val:
            best_val = val_loss
            best_weights = [w.copy() for w in weights]
            best_biases = [b.copy() for b in biases]
            best_epoch = epoch
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs > config.patience:
                break

    model = MlpModel(
        layer_sizes=model0.layer_sizes,
        weights=tuple(best_weights),
        biases=tuple(best_biases),
        input_mode=model0.input_mode,
        stats=stats,
    )
    history = TrainHistory(
        train_loss=tuple(history_train),
        val_loss=tuple(history_val),
        val_rmse_deg=tuple(history_rmse),
        best_epoch=best_epoch,
        initial_val_loss=initial_val,
    )
    return model, history


def network_output(model: MlpModel, frame: SensorFrame) -> np.ndarray:
    """Raw 2-vector output for a frame, standardizing if the model expects it."""
    x = np.asarray(frame.p_ch, dtype=np.float64)
    if model.input_mode == "standardized":
        assert model.stats is not None  # enforced by MlpModel
        x = (x - np.asarray(model.stats.mean)) / np.asarray(model.stats.std)
    return forward(model, x)


def predict_angle(model: MlpModel, frame: SensorFrame) -> Angle | None:
    """Standardize if the model expects it, run forward, decode the angle."""
    return decode_angle(network_output(model, frame))


def save_model(
    model: MlpModel, path: str | Path, metadata: Mapping | None = None
) -> None:
    """Write the binary model file; optionally a JSON sidecar at path+'.json'."""
    parts = [MODEL_MAGIC]
    parts.append(struct.pack("<B", 1 if model.input_mode == "standardized" else 0))
    parts.append(struct.pack("<I", len(model.layer_sizes)))
    parts.append(struct.pack(f"<{len(model.layer_sizes)}I", *model.layer_sizes))
    if model.input_mode == "standardized":
        assert model.stats is not None
        parts.append(np.asarray(model.stats.mean, dtype="<f8").tobytes())
        parts.append(np.asarray(model.stats.std, dtype="<f8").tobytes())
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))
    if metadata is not None:
        sidecar = Path(str(path) + ".json")
        sidecar.write_text(
            json.dumps(metadata, indent=2, sort_keys=False) + "\n", encoding="utf-8"
        )


class _Cursor:
    """Sequential reader that turns under/overruns into format errors."""

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise ModelFormatError(
                f"truncated model file: wanted {n} bytes at offset {self.pos}, "
                f"file has {len(self.buf)}"
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def f64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").copy()


def load_model(path: str | Path) -> MlpModel:
    """Read a model file, validating magic, shapes, and exact byte length."""
    buf = Path(path).read_bytes()
    cur = _Cursor(buf)
    magic = cur.take(len(MODEL_MAGIC))
    if magic != MODEL_MAGIC:
        raise ModelFormatError(
            f"bad magic {magic!r}; not a {MODEL_MAGIC.decode()} model file"
        )
    (mode_byte,) = struct.unpack("<B", cur.take(1))
    if mode_byte not in (0, 1):
        raise ModelFormatError(f"unknown input-mode byte {mode_byte}")
    (depth,) = struct.unpack("<I", cur.take(4))
    if not 2 <= depth <= 64:
        raise ModelFormatError(f"implausible layer count {depth}")
    sizes = struct.unpack(f"<{depth}I", cur.take(4 * depth))
    if any(s < 1 for s in sizes):
        raise ModelFormatError(f"non-positive layer size in {sizes}")
    stats = None
    if mode_byte == 1:
        mean = cur.f64(sizes[0])
        std = cur.f64(sizes[0])
        if sizes[0] != 4:
            raise ModelFormatError(
                f"standardized models must take 4 inputs, file says {sizes[0]}"
            )
        stats = FeatureStats(mean=tuple(mean), std=tuple(std))
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(cur.f64(fan_out * fan_in).reshape(fan_out, fan_in))
        biases.append(cur.f64(fan_out))
    if cur.pos != len(buf):
        raise ModelFormatError(
            f"{len(buf) - cur.pos} trailing bytes after parameters"
        )
    try:
        return MlpModel(
            layer_sizes=sizes,
            weights=tuple(weights),
            biases=tuple(biases),
            input_mode="standardized" if mode_byte == 1 else "raw",
            stats=stats,
        )
    except InvalidInputError as exc:
        raise ModelFormatError(f"invalid parameters in model file: {exc}") from exc
