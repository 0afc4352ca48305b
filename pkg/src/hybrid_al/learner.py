"""Built-in classifier: softmax regression, or one ReLU hidden layer.

Trained by seeded mini-batch SGD on mean cross-entropy plus an L2 penalty
on the weight matrices, using a step-decay learning-rate schedule. Inputs
are standardized with statistics from the training set only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DivergenceError, ShapeError, TrainingError

STD_FLOOR = 1e-12


@dataclass(frozen=True)
class LearnerConfig:
    epochs: int = 50
    lr0: float = 0.01
    decay_factor: float = 0.1
    decay_every: int = 10
    minibatch: int = 64
    hidden_dim: int = 0  # 0 -> linear softmax model
    l2: float = 1e-4
    seed: int = 0
    warm_start: bool = False

    def __post_init__(self):
        if self.epochs < 1 or self.decay_every < 1 or self.minibatch < 1:
            raise ConfigurationError("epochs, decay_every and minibatch must be positive")
        if not (np.isfinite(self.lr0) and self.lr0 > 0):
            raise ConfigurationError(f"lr0 must be positive and finite, got {self.lr0}")
        if not 0.0 < self.decay_factor < 1.0:
            raise ConfigurationError(f"decay_factor must lie in (0, 1), got {self.decay_factor}")
        if self.hidden_dim < 0:
            raise ConfigurationError("hidden_dim must be >= 0")
        if not (np.isfinite(self.l2) and self.l2 >= 0):
            raise ConfigurationError("l2 must be finite and >= 0")


def learning_rate(cfg: LearnerConfig, epoch: int) -> float:
    """lr0 * decay_factor ** (epoch // decay_every), epochs counted from 0."""
    return cfg.lr0 * cfg.decay_factor ** (epoch // cfg.decay_every)


@dataclass(eq=False)
class Model:
    # [W, b] for the linear model, [W1, b1, W2, b2] with a hidden layer.
    params: list[np.ndarray]
    mean: np.ndarray
    std: np.ndarray
    num_classes: int
    loss_history: list[float] = field(default_factory=list)

    @property
    def hidden_dim(self) -> int:
        return 0 if len(self.params) == 2 else self.params[0].shape[1]

    @property
    def input_dim(self) -> int:
        return self.mean.shape[0]


def init_params(d: int, C: int, hidden_dim: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Weights uniform in +-1/sqrt(fan_in), biases zero."""
    dims = [d, C] if hidden_dim == 0 else [d, hidden_dim, C]
    params = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward(params, Xs):
    """Returns (logits, hidden activations or None)."""
    if len(params) == 2:
        W, b = params
        return Xs @ W + b, None
    W1, b1, W2, b2 = params
    H = np.maximum(Xs @ W1 + b1, 0.0)
    return H @ W2 + b2, H


def loss_and_grad(params, Xs, y, l2: float) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy + (l2/2) * sum of squared weights, and its gradient.

    ``Xs`` is already standardized. Biases are not penalized.
    """
    n = Xs.shape[0]
    logits, H = _forward(params, Xs)
    z = logits - logits.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(logsum - z[np.arange(n), y]))
    weights = params[0::2]
    loss += 0.5 * l2 * sum(float((W * W).sum()) for W in weights)

    delta = np.exp(z - logsum[:, None])
    delta[np.arange(n), y] -= 1.0
    delta /= n
    if H is None:
        W, _ = params
        return loss, [Xs.T @ delta + l2 * W, delta.sum(axis=0)]
    W1, _, W2, _ = params
    gW2 = H.T @ delta + l2 * W2
    gb2 = delta.sum(axis=0)
    dH = (delta @ W2.T) * (H > 0)
    gW1 = Xs.T @ dH + l2 * W1
    gb1 = dH.sum(axis=0)
    return loss, [gW1, gb1, gW2, gb2]


def _standardizer(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # Constant features keep unit scale rather than exploding off-sample inputs.
    std = np.where(std < STD_FLOOR, 1.0, std)
    return mean, std


def train(features, labels, cfg: LearnerConfig, num_classes: int | None = None,
          init: Model | None = None) -> Model:
    """Fit a model on ``(features, labels)``; deterministic per ``cfg.seed``.

    ``init`` supplies starting weights when ``cfg.warm_start`` is set.
    Raises :class:`DivergenceError` if the loss becomes non-finite.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or len(X) == 0:
        raise TrainingError("cannot train on an empty labeled set")
    if len(y) != len(X):
        raise ShapeError(f"{len(X)} rows but {len(y)} labels")
    C = int(num_classes if num_classes is not None else y.max() + 1)
    if y.min() < 0 or y.max() >= C:
        raise ConfigurationError(f"labels must lie in [0, {C})")

    rng = np.random.default_rng(cfg.seed)
    mean, std = _standardizer(X)
    Xs = (X - mean) / std
    d = X.shape[1]
    if cfg.warm_start and init is not None:
        if init.input_dim != d or init.num_classes != C or init.hidden_dim != cfg.hidden_dim:
            raise ShapeError("warm-start model does not match the data/config shape")
        params = [p.copy() for p in init.params]
    else:
        params = init_params(d, C, cfg.hidden_dim, rng)

    n = len(X)
    history = []
    # Overflow is reported as DivergenceError below, not as numpy warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.epochs):
            lr = learning_rate(cfg, epoch)
            order = rng.permutation(n)
            for start in range(0, n, cfg.minibatch):
                idx = order[start:start + cfg.minibatch]
                loss, grads = loss_and_grad(params, Xs[idx], y[idx], cfg.l2)
                if not np.isfinite(loss):
                    raise DivergenceError(epoch, loss)
                for p, g in zip(params, grads):
                    p -= lr * g
            full, _ = loss_and_grad(params, Xs, y, cfg.l2)
            if not np.isfinite(full):
                raise DivergenceError(epoch, full)
            history.append(full)
    return Model(params, mean, std, C, history)


def _standardize(model: Model, features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ShapeError(f"expected features with {model.input_dim} columns, got shape {X.shape}")
    return (X - model.mean) / model.std


def predict_proba(model: Model, features) -> np.ndarray:
    logits, _ = _forward(model.params, _standardize(model, features))
    return softmax(logits)


def embed(model: Model, features) -> np.ndarray:
    """Standardized inputs for the linear model, hidden ReLU activations otherwise."""
    Xs = _standardize(model, features)
    if model.hidden_dim == 0:
        return Xs
    W1, b1 = model.params[:2]
    return np.maximum(Xs @ W1 + b1, 0.0)


def evaluate(model: Model, features, labels) -> float:
    """Accuracy of argmax predictions (ties go to the lower class index)."""
    y = np.asarray(labels, dtype=np.int64)
    if len(y) == 0:
        raise TrainingError("cannot evaluate on an empty test set")
    return accuracy(predict_proba(model, features), y)


def accuracy(probs, labels) -> float:
    y = np.asarray(labels, dtype=np.int64)
    if len(y) == 0:
        raise TrainingError("cannot evaluate on an empty test set")
    return float(np.mean(np.argmax(probs, axis=1) == y))
