"""Small from-scratch multilayer perceptron for benign/malignant scoring.

Fixed architecture 64 -> 30 -> 30 -> 2 with sigmoid hidden layers and a
softmax output, trained by mini-batch gradient descent on cross-entropy.
Per-feature z-score statistics are computed from the training data and
stored inside the model, so callers always pass raw feature vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LAYER_SIZES = (64, 30, 30, 2)
BENIGN = 0
MALIGNANT = 1
CLASS_NAMES = {BENIGN: "benign", MALIGNANT: "malignant"}

MODEL_FORMAT = "fuzzygrowcut-mlp/1"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 500
    batch_size: int = 16
    rng_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def to_json(self) -> dict:
        return {
            "learning_rate": self.learning_rate, "epochs": self.epochs,
            "batch_size": self.batch_size, "rng_seed": self.rng_seed,
        }


@dataclass
class MLPModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feat_mean: np.ndarray
    feat_std: np.ndarray

    def __post_init__(self):
        sizes = LAYER_SIZES
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("expected one weight matrix and bias per layer gap")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise ValueError(
                    f"layer {i}: weights {w.shape} / bias {b.shape} do not match "
                    f"architecture {sizes}"
                )
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError(f"layer {i}: non-finite parameters")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def zero_model(feat_mean: np.ndarray | None = None, feat_std: np.ndarray | None = None) -> MLPModel:
    """All-zero parameters (useful as a smooth reference point)."""
    sizes = LAYER_SIZES
    ws = [np.zeros((sizes[i], sizes[i + 1])) for i in range(len(sizes) - 1)]
    bs = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    mean = np.zeros(sizes[0]) if feat_mean is None else np.asarray(feat_mean, float)
    std = np.ones(sizes[0]) if feat_std is None else np.asarray(feat_std, float)
    return MLPModel(ws, bs, mean, std)


def init_model(rng: np.random.Generator, feat_mean: np.ndarray, feat_std: np.ndarray) -> MLPModel:
    """Uniform init in [-r, r] with r = 1/sqrt(fan-in), per layer."""
    sizes = LAYER_SIZES
    ws, bs = [], []
    for i in range(len(sizes) - 1):
        r = 1.0 / math.sqrt(sizes[i])
        ws.append(rng.uniform(-r, r, size=(sizes[i], sizes[i + 1])))
        bs.append(rng.uniform(-r, r, size=sizes[i + 1]))
    return MLPModel(ws, bs, np.asarray(feat_mean, float), np.asarray(feat_std, float))


def standardize(model: MLPModel, x: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - model.feat_mean) / model.feat_std


def _forward_standardized(model: MLPModel, xs: np.ndarray):
    """Activations per layer for already-standardized inputs (N, 64)."""
    acts = [xs]
    h = xs
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        h = _softmax(z) if i == last else _sigmoid(z)
        acts.append(h)
    return acts


def forward_batch(model: MLPModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities, shape (N, 2), for raw feature rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != LAYER_SIZES[0]:
        raise ValueError(f"expected (N, {LAYER_SIZES[0]}) features, got {x.shape}")
    return _forward_standardized(model, standardize(model, x))[-1]


def forward(model: MLPModel, x: np.ndarray) -> tuple[float, float]:
    """(p_benign, p_malignant) for one raw feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (LAYER_SIZES[0],):
        raise ValueError(f"expected a {LAYER_SIZES[0]}-vector, got {x.shape}")
    p = forward_batch(model, x[None, :])[0]
    return float(p[BENIGN]), float(p[MALIGNANT])


def predict(model: MLPModel, x: np.ndarray) -> np.ndarray:
    """Hard labels (0 = benign, 1 = malignant) for raw feature rows."""
    return forward_batch(model, x).argmax(axis=1)


def cross_entropy(probs: np.ndarray, y: np.ndarray) -> float:
    eps = 1e-12
    return float(-np.mean(np.log(probs[np.arange(len(y)), y] + eps)))


def _gradients(model: MLPModel, xs: np.ndarray, y: np.ndarray):
    """Backprop gradients of mean cross-entropy over a standardized batch."""
    acts = _forward_standardized(model, xs)
    n = len(y)
    onehot = np.zeros((n, LAYER_SIZES[-1]))
    onehot[np.arange(n), y] = 1.0
    delta = (acts[-1] - onehot) / n  # softmax + cross-entropy
    grads_w, grads_b = [], []
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w.append(acts[i].T @ delta)
        grads_b.append(delta.sum(axis=0))
        if i > 0:
            hidden = acts[i]
            delta = (delta @ model.weights[i].T) * hidden * (1.0 - hidden)
    return grads_w[::-1], grads_b[::-1]


def _canonical_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Deterministic sample order independent of input permutation."""
    keys = np.column_stack([x, y])
    return np.lexsort(keys.T[::-1])


def train(x: np.ndarray, y: np.ndarray, config: TrainConfig | None = None) -> MLPModel:
    """Train on raw features ``x`` (N, 64) and labels ``y`` in {0, 1}.

    Standardization statistics come from this training set and are stored
    in the model. Samples are put in a canonical order before the seeded
    shuffling, so the result does not depend on the order rows arrive in.
    """
    config = config or TrainConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[1] != LAYER_SIZES[0]:
        raise ValueError(f"expected (N, {LAYER_SIZES[0]}) features, got {x.shape}")
    if len(x) != len(y) or len(x) == 0:
        raise ValueError("features and labels must be nonempty and aligned")
    if len(np.unique(y)) < 2:
        raise ValueError("training needs both classes present")

    order = _canonical_order(x, y)
    x, y = x[order], y[order]

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    rng = np.random.default_rng(config.rng_seed)
    model = init_model(rng, mean, std)
    xs = (x - mean) / std

    n = len(xs)
    lr = config.learning_rate
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            gw, gb = _gradients(model, xs[idx], y[idx])
            for i in range(len(model.weights)):
                model.weights[i] -= lr * gw[i]
                model.biases[i] -= lr * gb[i]
    return model


def batch_loss(model: MLPModel, x: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy of raw features against labels."""
    return cross_entropy(forward_batch(model, x), np.asarray(y, dtype=np.int64))


def gradient_check(
    model: MLPModel,
    x: np.ndarray,
    y: np.ndarray,
    rng_seed: int = 0,
    n_params: int = 50,
    step: float = 1e-5,
) -> float:
    """Max relative error between backprop and central finite differences
    over a random parameter subset. Deterministic given ``rng_seed``."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    xs = standardize(model, x)
    gw, gb = _gradients(model, xs, y)
    flat: list[tuple[np.ndarray, tuple, float]] = []
    for i in range(len(model.weights)):
        for pos in np.ndindex(model.weights[i].shape):
            flat.append((model.weights[i], pos, gw[i][pos]))
        for pos in np.ndindex(model.biases[i].shape):
            flat.append((model.biases[i], pos, gb[i][pos]))
    rng = np.random.default_rng(rng_seed)
    picks = rng.choice(len(flat), size=min(n_params, len(flat)), replace=False)
    worst = 0.0
    for p in picks:
        arr, pos, analytic = flat[p]
        orig = arr[pos]
        arr[pos] = orig + step
        up = cross_entropy(_forward_standardized(model, xs)[-1], y)
        arr[pos] = orig - step
        down = cross_entropy(_forward_standardized(model, xs)[-1], y)
        arr[pos] = orig
        numeric = (up - down) / (2.0 * step)
        denom = max(abs(analytic), abs(numeric), 1e-6)
        worst = max(worst, abs(analytic - numeric) / denom)
    return worst


def save_model(model: MLPModel, path: str | Path) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "layers": list(LAYER_SIZES),
        "feat_mean": model.feat_mean.tolist(),
        "feat_std": model.feat_std.tolist(),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_model(path: str | Path) -> MLPModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {doc.get('format')!r}")
    if tuple(doc["layers"]) != LAYER_SIZES:
        raise ValueError(f"unexpected architecture {doc['layers']}")
    return MLPModel(
        weights=[np.array(w, dtype=np.float64) for w in doc["weights"]],
        biases=[np.array(b, dtype=np.float64) for b in doc["biases"]],
        feat_mean=np.array(doc["feat_mean"], dtype=np.float64),
        feat_std=np.array(doc["feat_std"], dtype=np.float64),
    )
