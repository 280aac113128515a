"""Attention-based regressor for next-day adjusted realized variance.

A small pre-norm encoder reads a window of T consecutive trading days,
each described by a handful of factor features, and regresses the
following day's adjusted realized variance:

    embed -> L x (layer norm, multi-head self-attention, residual;
                  layer norm, feed-forward, residual)
          -> closing layer norm -> mean-pool over the T positions
          -> two-layer head -> scalar

The closing norm is the usual companion of pre-norm blocks: without it
the residual stream reaches the head unnormalized and plain gradient
descent at the default step size overshoots.

Attention weights are softmax(Q K^T / sqrt(d_k)); each head carries
its own query/key/value projections and the concatenated heads pass
through a shared output projection. There is no positional encoding,
so the network is permutation-invariant across the window by
construction; the mean pool makes that explicit. The nonlinearity is
the smooth ramp ln(1 + e^x).

Training is plain mini-batch gradient descent (an adaptive variant is
available behind a flag) on mean squared error, with features and
target z-scored by training statistics. Gradients come from the exact
reverse-mode machinery in :mod:`mfvol.autodiff`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from typing import Mapping, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import (
    BadShape,
    DivergedLoss,
    EmptyDataset,
    LengthMismatch,
    NonFiniteGradient,
    NonFiniteInput,
    ZeroVariance,
)

LN_EPS = 1e-5


@dataclass(frozen=True)
class ModelConfig:
    n_features: int
    d_model: int = 12
    n_heads: int = 3
    n_layers: int = 2
    d_ff: int = 24

    def __post_init__(self):
        if self.n_features < 1 or self.d_model < 1 or self.n_layers < 1:
            raise BadShape("model dimensions must be positive")
        if self.d_model % self.n_heads != 0:
            raise BadShape(
                f"d_model={self.d_model} not divisible by "
                f"n_heads={self.n_heads}")

    @property
    def d_head(self) -> int:
        return self.d_model // self.n_heads


@dataclass(frozen=True)
class TrainConfig:
    window: int = 5
    learning_rate: float = 0.05
    batch_size: int = 32
    max_epochs: int = 200
    seed: int = 0
    shuffle: bool = False
    patience: int | None = None
    optimizer: str = "sgd"

    def __post_init__(self):
        if self.window < 1 or self.batch_size < 1 or self.max_epochs < 0:
            raise BadShape("window, batch_size and max_epochs must be positive")
        if self.optimizer not in ("sgd", "adam"):
            raise BadShape(f"unknown optimizer {self.optimizer!r}")


@dataclass
class WindowedDataset:
    """Chronological samples: T rows of features, next row's target."""

    X: np.ndarray               # (n, T, F)
    y: np.ndarray               # (n,)
    dates: list[str]            # target dates
    feature_names: list[str]

    def __len__(self) -> int:
        return len(self.y)


@dataclass
class TransformerModel:
    config: ModelConfig
    weights: dict[str, np.ndarray]
    feature_names: list[str]
    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: float
    target_std: float
    train_config: TrainConfig | None = None


# ----------------------------------------------------------------------
# Weights
# ----------------------------------------------------------------------

def weight_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Ordered name -> shape map for every trainable array."""
    d, dk, dff = config.d_model, config.d_head, config.d_ff
    shapes: dict[str, tuple[int, ...]] = {
        "embed.w": (config.n_features, d),
        "embed.b": (d,),
    }
    for i in range(config.n_layers):
        shapes[f"layer{i}.ln1.gain"] = (d,)
        shapes[f"layer{i}.ln1.bias"] = (d,)
        for j in range(config.n_heads):
            shapes[f"layer{i}.head{j}.wq"] = (d, dk)
            shapes[f"layer{i}.head{j}.wk"] = (d, dk)
            shapes[f"layer{i}.head{j}.wv"] = (d, dk)
        shapes[f"layer{i}.attn.wo"] = (d, d)
        shapes[f"layer{i}.ln2.gain"] = (d,)
        shapes[f"layer{i}.ln2.bias"] = (d,)
        shapes[f"layer{i}.ff1.w"] = (d, dff)
        shapes[f"layer{i}.ff1.b"] = (dff,)
        shapes[f"layer{i}.ff2.w"] = (dff, d)
        shapes[f"layer{i}.ff2.b"] = (d,)
    shapes["final_ln.gain"] = (d,)
    shapes["final_ln.bias"] = (d,)
    shapes["mlp1.w"] = (d, d)
    shapes["mlp1.b"] = (d,)
    shapes["mlp2.w"] = (d, 1)
    shapes["mlp2.b"] = (1,)
    return shapes


def init_weights(config: ModelConfig, seed: int = 0) -> dict[str, np.ndarray]:
    """Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)) for matrices;
    zero biases; unit layer-norm gains."""
    rng = np.random.default_rng(seed)
    weights: dict[str, np.ndarray] = {}
    for name, shape in weight_shapes(config).items():
        if name.endswith(".gain"):
            weights[name] = np.ones(shape)
        elif len(shape) == 1:
            weights[name] = np.zeros(shape)
        else:
            limit = math.sqrt(6.0 / (shape[0] + shape[1]))
            weights[name] = rng.uniform(-limit, limit, size=shape)
    return weights


def _param_tensors(weights: Mapping[str, np.ndarray],
                   requires_grad: bool) -> dict[str, Tensor]:
    return {k: Tensor(v, requires_grad=requires_grad)
            for k, v in weights.items()}


# ----------------------------------------------------------------------
# Forward graph
# ----------------------------------------------------------------------

def _layer_norm(x: Tensor, gain: Tensor, bias: Tensor) -> Tensor:
    mu = ad.tmean(x, axis=-1, keepdims=True)
    centered = ad.sub(x, mu)
    var = ad.tmean(ad.power(centered, 2.0), axis=-1, keepdims=True)
    inv = ad.power(ad.add(var, LN_EPS), -0.5)
    return ad.add(ad.mul(ad.mul(centered, inv), gain), bias)


def _attention_t(q: Tensor, k: Tensor, v: Tensor) -> Tensor:
    d_k = q.shape[-1]
    scores = ad.mul(ad.matmul(q, ad.transpose_last(k)),
                    1.0 / math.sqrt(d_k))
    return ad.matmul(ad.softmax(scores, axis=-1), v)


def _encoder_t(params: Mapping[str, Tensor], x: Tensor,
               config: ModelConfig) -> Tensor:
    """(..., T, F) -> (...,) regression output."""
    h = ad.add(ad.matmul(x, params["embed.w"]), params["embed.b"])
    for i in range(config.n_layers):
        normed = _layer_norm(h, params[f"layer{i}.ln1.gain"],
                             params[f"layer{i}.ln1.bias"])
        heads = []
        for j in range(config.n_heads):
            q = ad.matmul(normed, params[f"layer{i}.head{j}.wq"])
            k = ad.matmul(normed, params[f"layer{i}.head{j}.wk"])
            v = ad.matmul(normed, params[f"layer{i}.head{j}.wv"])
            heads.append(_attention_t(q, k, v))
        attn = ad.matmul(ad.concat(heads, axis=-1),
                         params[f"layer{i}.attn.wo"])
        h = ad.add(h, attn)
        normed = _layer_norm(h, params[f"layer{i}.ln2.gain"],
                             params[f"layer{i}.ln2.bias"])
        ff = ad.softplus(ad.add(ad.matmul(normed, params[f"layer{i}.ff1.w"]),
                                params[f"layer{i}.ff1.b"]))
        ff = ad.add(ad.matmul(ff, params[f"layer{i}.ff2.w"]),
                    params[f"layer{i}.ff2.b"])
        h = ad.add(h, ff)
    h = _layer_norm(h, params["final_ln.gain"], params["final_ln.bias"])
    pooled = ad.tmean(h, axis=-2)
    hidden = ad.softplus(ad.add(ad.matmul(pooled, params["mlp1.w"]),
                                params["mlp1.b"]))
    out = ad.add(ad.matmul(hidden, params["mlp2.w"]), params["mlp2.b"])
    return ad.reshape(out, out.shape[:-1])


# ----------------------------------------------------------------------
# Public numeric operations
# ----------------------------------------------------------------------

def attention(q: np.ndarray, k: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Scaled dot-product attention softmax(Q K^T / sqrt(d_k)) V."""
    q, k, v = (np.asarray(a, dtype=float) for a in (q, k, v))
    if q.ndim < 2 or k.ndim < 2 or v.ndim < 2:
        raise BadShape("attention expects matrices")
    if q.shape[-1] != k.shape[-1] or k.shape[-2] != v.shape[-2]:
        raise BadShape(
            f"incompatible shapes q{q.shape} k{k.shape} v{v.shape}")
    for a in (q, k, v):
        if not np.all(np.isfinite(a)):
            raise NonFiniteInput("attention inputs must be finite")
    return _attention_t(Tensor(q), Tensor(k), Tensor(v)).data


def multi_head(x: np.ndarray,
               heads: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
               w_out: np.ndarray) -> np.ndarray:
    """Multi-head self-attention of a (T, d) block.

    ``heads`` lists (W_q, W_k, W_v) per head; concatenated head outputs
    pass through ``w_out``.
    """
    xt = Tensor(np.asarray(x, dtype=float))
    outs = []
    for wq, wk, wv in heads:
        q = ad.matmul(xt, Tensor(wq))
        k = ad.matmul(xt, Tensor(wk))
        v = ad.matmul(xt, Tensor(wv))
        outs.append(_attention_t(q, k, v))
    return ad.matmul(ad.concat(outs, axis=-1), Tensor(w_out)).data


def encoder_forward(x: np.ndarray, weights: Mapping[str, np.ndarray],
                    config: ModelConfig) -> float:
    """Scalar prediction for one (T, F) window."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != config.n_features:
        raise BadShape(f"expected (T, {config.n_features}), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("window contains non-finite values")
    out = _encoder_t(_param_tensors(weights, False), Tensor(x), config)
    return float(out.data)


def forward_batch(x: np.ndarray, weights: Mapping[str, np.ndarray],
                  config: ModelConfig) -> np.ndarray:
    """(n, T, F) -> (n,) predictions without building gradients."""
    out = _encoder_t(_param_tensors(weights, False), Tensor(x), config)
    return out.data


def loss_mse(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise LengthMismatch(f"pred {pred.shape} vs target {target.shape}")
    if pred.size == 0:
        raise EmptyDataset("empty prediction batch")
    return float(np.mean((pred - target) ** 2))


def gradient(weights: Mapping[str, np.ndarray], config: ModelConfig,
             x: np.ndarray, y: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    """Exact batch-MSE gradient with respect to every weight array."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 3 or x.shape[0] != y.shape[0]:
        raise BadShape(f"expected (n, T, F) and (n,), got {x.shape}, {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("batch contains non-finite values")
    params = _param_tensors(weights, True)
    pred = _encoder_t(params, Tensor(x), config)
    loss = ad.tmean(ad.power(ad.sub(pred, Tensor(y)), 2.0))
    loss.backward()
    grads: dict[str, np.ndarray] = {}
    for name, tensor in params.items():
        g = tensor.grad if tensor.grad is not None \
            else np.zeros_like(tensor.data)
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient for {name!r}")
        grads[name] = g
    return float(loss.data), grads


# ----------------------------------------------------------------------
# Windowing
# ----------------------------------------------------------------------

def build_windows(dates: Sequence[str], features: np.ndarray,
                  target: np.ndarray, window: int,
                  feature_names: Sequence[str] | None = None) -> WindowedDataset:
    """Slide a length-``window`` input block over consecutive rows.

    Sample i reads rows i..i+window-1 and predicts row i+window, so
    targets are strictly chronological and each row is a target at
    most once.
    """
    features = np.asarray(features, dtype=float)
    target = np.asarray(target, dtype=float)
    if features.ndim != 2 or len(features) != len(target) \
            or len(features) != len(dates):
        raise BadShape("features, target and dates must align row-wise")
    n = len(features) - window
    if n <= 0:
        raise EmptyDataset(
            f"{len(features)} rows cannot fill a window of {window} "
            "plus a target")
    X = np.stack([features[i:i + window] for i in range(n)])
    y = target[window:].copy()
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(features.shape[1])]
    return WindowedDataset(X=X, y=y, dates=list(dates[window:]),
                           feature_names=list(feature_names))


# ----------------------------------------------------------------------
# Training and prediction
# ----------------------------------------------------------------------

def train(dataset: WindowedDataset, model_config: ModelConfig | None = None,
          train_config: TrainConfig = TrainConfig()
          ) -> tuple[TransformerModel, list[float]]:
    """Fit the regressor on a windowed dataset.

    Features and target are z-scored with statistics of this dataset;
    the statistics ride along in the returned model so predictions are
    reported on the original scale. Batches walk the samples in
    chronological order unless ``shuffle`` asks for a seeded
    permutation per epoch. The loss history holds the full-dataset
    normalized MSE after each epoch.
    """
    if len(dataset) == 0:
        raise EmptyDataset("no training samples")
    if not (np.all(np.isfinite(dataset.X)) and np.all(np.isfinite(dataset.y))):
        raise NonFiniteInput("dataset contains non-finite values")
    if model_config is None:
        model_config = ModelConfig(n_features=dataset.X.shape[2])
    if model_config.n_features != dataset.X.shape[2]:
        raise BadShape(
            f"config expects {model_config.n_features} features, dataset "
            f"has {dataset.X.shape[2]}")

    flat = dataset.X.reshape(-1, dataset.X.shape[2])
    f_mean = flat.mean(axis=0)
    f_std = flat.std(axis=0)
    if np.any(f_std <= 0):
        bad = dataset.feature_names[int(np.argmax(f_std <= 0))]
        raise ZeroVariance(f"feature {bad!r} is constant")
    t_mean = float(dataset.y.mean())
    t_std = float(dataset.y.std())
    if t_std <= 0:
        raise ZeroVariance("target is constant")

    Xn = (dataset.X - f_mean) / f_std
    yn = (dataset.y - t_mean) / t_std

    weights = init_weights(model_config, train_config.seed)
    rng = np.random.default_rng(train_config.seed)
    n = len(dataset)
    lr = train_config.learning_rate
    adam_m = {k: np.zeros_like(v) for k, v in weights.items()} \
        if train_config.optimizer == "adam" else None
    adam_v = {k: np.zeros_like(v) for k, v in weights.items()} \
        if train_config.optimizer == "adam" else None
    adam_t = 0

    history: list[float] = []
    best = math.inf
    stale = 0
    for _epoch in range(train_config.max_epochs):
        order = rng.permutation(n) if train_config.shuffle else np.arange(n)
        for lo in range(0, n, train_config.batch_size):
            batch = order[lo:lo + train_config.batch_size]
            _, grads = gradient(weights, model_config, Xn[batch], yn[batch])
            if train_config.optimizer == "adam":
                adam_t += 1
                for k in weights:
                    adam_m[k] = 0.9 * adam_m[k] + 0.1 * grads[k]
                    adam_v[k] = 0.999 * adam_v[k] + 0.001 * grads[k] ** 2
                    m_hat = adam_m[k] / (1 - 0.9 ** adam_t)
                    v_hat = adam_v[k] / (1 - 0.999 ** adam_t)
                    weights[k] = weights[k] - lr * m_hat / (np.sqrt(v_hat) + 1e-8)
            else:
                for k in weights:
                    weights[k] = weights[k] - lr * grads[k]
        epoch_loss = loss_mse(forward_batch(Xn, weights, model_config), yn)
        if not math.isfinite(epoch_loss):
            raise DivergedLoss(
                f"training loss became {epoch_loss} in epoch {_epoch}")
        history.append(epoch_loss)
        if train_config.patience is not None:
            if epoch_loss < best - 1e-12:
                best = epoch_loss
                stale = 0
            else:
                stale += 1
                if stale >= train_config.patience:
                    break

    model = TransformerModel(
        config=model_config,
        weights=weights,
        feature_names=list(dataset.feature_names),
        feature_mean=f_mean,
        feature_std=f_std,
        target_mean=t_mean,
        target_std=t_std,
        train_config=train_config,
    )
    return model, history


def predict(model: TransformerModel, dataset: WindowedDataset) -> np.ndarray:
    """Predictions on the original target scale, one per sample."""
    if len(dataset) == 0:
        raise EmptyDataset("no samples to predict")
    if dataset.X.shape[2] != model.config.n_features:
        raise BadShape(
            f"model expects {model.config.n_features} features, dataset "
            f"has {dataset.X.shape[2]}")
    if not np.all(np.isfinite(dataset.X)):
        raise NonFiniteInput("dataset contains non-finite values")
    Xn = (dataset.X - model.feature_mean) / model.feature_std
    out = forward_batch(Xn, model.weights, model.config)
    return out * model.target_std + model.target_mean


# ----------------------------------------------------------------------
# Persistence
# ----------------------------------------------------------------------

def save_model(model: TransformerModel, path: str) -> None:
    doc = {
        "model_config": asdict(model.config),
        "train_config": None if model.train_config is None
        else asdict(model.train_config),
        "feature_names": model.feature_names,
        "feature_mean": model.feature_mean.tolist(),
        "feature_std": model.feature_std.tolist(),
        "target_mean": model.target_mean,
        "target_std": model.target_std,
        "weights": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in model.weights.items()
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str) -> TransformerModel:
    with open(path) as fh:
        doc = json.load(fh)
    weights = {
        name: np.array(spec["data"], dtype=float).reshape(spec["shape"])
        for name, spec in doc["weights"].items()
    }
    return TransformerModel(
        config=ModelConfig(**doc["model_config"]),
        weights=weights,
        feature_names=list(doc["feature_names"]),
        feature_mean=np.array(doc["feature_mean"], dtype=float),
        feature_std=np.array(doc["feature_std"], dtype=float),
        target_mean=float(doc["target_mean"]),
        target_std=float(doc["target_std"]),
        train_config=None if doc["train_config"] is None
        else TrainConfig(**doc["train_config"]),
    )
