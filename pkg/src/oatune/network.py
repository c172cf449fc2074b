"""Feed-forward MLP in plain numpy: activations, Glorot init, forward pass,
and exact backpropagated gradients of the mean-squared loss.

Hidden layers share one activation; the output layer is identity (regression
on normalized targets). Everything is double precision so gradient checks
against central finite differences hold to tight tolerances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772
ELU_ALPHA = 1.0

ACTIVATIONS = ("relu", "elu", "selu")

MODEL_FORMAT_VERSION = 1


def activation_eval(kind: str, x):
    """Evaluate an activation elementwise; accepts scalars or arrays."""
    x = np.asarray(x, dtype=np.float64)
    if kind == "relu":
        return np.maximum(0.0, x)
    if kind == "elu":
        return np.where(x > 0, x, ELU_ALPHA * np.expm1(np.minimum(x, 0.0)))
    if kind == "selu":
        return SELU_LAMBDA * np.where(
            x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0))
        )
    raise ValueError(f"unknown activation {kind!r}, expected one of {ACTIVATIONS}")


def activation_grad(kind: str, x):
    """Exact derivative of activation_eval; x = 0 takes the positive-branch value."""
    x = np.asarray(x, dtype=np.float64)
    if kind == "relu":
        return np.where(x >= 0, 1.0, 0.0)
    if kind == "elu":
        return np.where(x >= 0, 1.0, ELU_ALPHA * np.exp(np.minimum(x, 0.0)))
    if kind == "selu":
        return SELU_LAMBDA * np.where(
            x >= 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0))
        )
    raise ValueError(f"unknown activation {kind!r}, expected one of {ACTIVATIONS}")


@dataclass
class MLPModel:
    """Weights/biases per layer plus the hidden activation kind.

    weights[l] has shape (fan_in, fan_out); biases[l] has shape (fan_out,).
    """

    sizes: tuple[int, ...]
    activation: str
    weights: list[np.ndarray] = field(repr=False)
    biases: list[np.ndarray] = field(repr=False)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def copy_params(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        return [w.copy() for w in self.weights], [b.copy() for b in self.biases]

    def set_params(self, weights: list[np.ndarray], biases: list[np.ndarray]) -> None:
        self.weights = [w.copy() for w in weights]
        self.biases = [b.copy() for b in biases]


def init_weights(sizes, activation: str, seed) -> MLPModel:
    """Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.

    `seed` may be an int, a SeedSequence, or an existing Generator; the same
    int seed always yields bit-identical parameters.
    """
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2 or any(s <= 0 for s in sizes):
        raise ValueError(f"layer sizes must be positive with >= 2 entries, got {sizes}")
    activation_eval(activation, 0.0)  # validates the kind
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MLPModel(sizes=sizes, activation=activation, weights=weights, biases=biases)


def forward(model: MLPModel, inputs: np.ndarray) -> np.ndarray:
    """Batch forward pass: affine + activation per hidden layer, identity output."""
    x = np.asarray(inputs, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != model.sizes[0]:
        raise ValueError(
            f"input width {x.shape[1]} does not match model input size {model.sizes[0]}"
        )
    h = x
    last = model.n_layers - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        h = z if l == last else activation_eval(model.activation, z)
    return h[0] if squeeze else h


def mse_loss(model: MLPModel, inputs: np.ndarray, targets: np.ndarray) -> float:
    """Mean-squared loss over all samples and output components."""
    pred = forward(model, inputs)
    return float(np.mean((pred - np.asarray(targets, dtype=np.float64)) ** 2))


def backward(
    model: MLPModel, inputs: np.ndarray, targets: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], float]:
    """Exact gradient of the mean-squared loss w.r.t. every weight and bias.

    Returns (weight grads, bias grads, loss). The loss is averaged over
    batch * output_width entries, matching mse_loss.
    """
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("backward requires a nonempty 2-D batch")
    if x.shape[1] != model.sizes[0] or y.shape != (x.shape[0], model.sizes[-1]):
        raise ValueError(
            f"shapes {x.shape}/{y.shape} inconsistent with model sizes {model.sizes}"
        )

    last = model.n_layers - 1
    acts = [x]  # post-activation outputs per layer, acts[0] = input
    pre = []  # pre-activation values per layer
    h = x
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if l == last else activation_eval(model.activation, z)
        acts.append(h)

    loss = float(np.mean((h - y) ** 2))
    delta = 2.0 * (h - y) / h.size  # dL/dz for the identity output layer

    grads_w = [np.empty(0)] * model.n_layers
    grads_b = [np.empty(0)] * model.n_layers
    for l in range(last, -1, -1):
        grads_w[l] = acts[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * activation_grad(
                model.activation, pre[l - 1]
            )
    return grads_w, grads_b, loss


def save_model(model: MLPModel, path, scaler=None) -> None:
    """Serialize to versioned JSON; include the fitted scaler when given so the
    saved file is self-contained for inference."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "oatune-mlp",
        "sizes": list(model.sizes),
        "activation": model.activation,
        "weights": [w.tolist() for w in model.weights],  # row-major, fan_in x fan_out
        "biases": [b.tolist() for b in model.biases],
        "scaler": scaler.to_dict() if scaler is not None else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path):
    """Inverse of save_model; returns (model, scaler-or-None)."""
    from .pipeline import MinMaxScaler

    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "oatune-mlp":
        raise ValueError(f"{path}: not an oatune model file")
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"{path}: unsupported model format {doc.get('format_version')!r}"
        )
    model = MLPModel(
        sizes=tuple(doc["sizes"]),
        activation=doc["activation"],
        weights=[np.asarray(w, dtype=np.float64) for w in doc["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in doc["biases"]],
    )
    scaler = MinMaxScaler.from_dict(doc["scaler"]) if doc.get("scaler") else None
    return model, scaler
