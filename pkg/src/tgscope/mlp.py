"""Numpy MLP (ReLU hidden layers, logistic output) trained with Adam on BCE."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

HIDDEN = (64, 32, 16)
MAGIC = b"TGMLP\x00"
FORMAT_VERSION = 1


class TrainingError(RuntimeError):
    pass


@dataclass
class MlpModel:
    weights: list[np.ndarray]   # layer i: (fan_in, fan_out)
    biases: list[np.ndarray]
    mean: np.ndarray
    scale: np.ndarray
    seed: int = 0

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def standardize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def logits(self, X) -> np.ndarray:
        a = self.standardize(np.atleast_2d(X))
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ W + b
            if i < len(self.weights) - 1:
                a = np.maximum(a, 0.0)
        return a[:, 0]

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.logits(X))


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def init_params(dims: Sequence[int], rng: np.random.Generator) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """He-normal weights, zero biases."""
    W, b = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        W.append(rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        b.append(np.zeros(fan_out))
    return W, b


def loss_and_grads(weights, biases, X: np.ndarray, y: np.ndarray):
    """Mean binary cross-entropy on already-standardized inputs, with backprop gradients."""
    acts = [X]
    pre = []
    a = X
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i < len(weights) - 1 else z
        acts.append(a)
    logit = acts[-1][:, 0]
    # log(1 + e^z) - y z, computed stably
    loss = float(np.mean(np.logaddexp(0.0, logit) - y * logit))
    delta = ((sigmoid(logit) - y) / X.shape[0])[:, None]
    gW = [None] * len(weights)
    gb = [None] * len(weights)
    for i in range(len(weights) - 1, -1, -1):
        gW[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ weights[i].T) * (pre[i - 1] > 0)
    return loss, gW, gb


def fit_standardizer(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return mean, sd


@dataclass
class TrainLog:
    losses: list[float] = field(default_factory=list)


def train_mlp(
    X,
    y,
    epochs: int = 50,
    seed: int = 0,
    lr: float = 1e-3,
    batch_size: Optional[int] = 32,
    hidden: Sequence[int] = HIDDEN,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[MlpModel, TrainLog]:
    """Fit the classifier; ``y`` is 1 for fake, 0 for official.

    Standardization is fitted on ``X`` only. ``batch_size=None`` trains on the
    full batch. The per-epoch loss is the sample-weighted mean over minibatches.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    classes = np.unique(y)
    if classes.size < 2:
        raise TrainingError("training data contains a single class")
    if not set(classes.tolist()) <= {0.0, 1.0}:
        raise TrainingError("labels must be 0/1")
    rng = np.random.default_rng(seed)
    mean, scale = fit_standardizer(X)
    Xs = (X - mean) / scale
    W, b = init_params([X.shape[1], *hidden, 1], rng)
    params = W + b
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    b1, b2 = betas
    step = 0
    n = X.shape[0]
    bs = n if batch_size is None else batch_size
    log = TrainLog()
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            loss, gW, gb = loss_and_grads(W, b, Xs[idx], y[idx])
            if not math.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch + 1}")
            total += loss * idx.size
            step += 1
            for p, g, mi, vi in zip(params, gW + gb, m, v):
                mi *= b1
                mi += (1 - b1) * g
                vi *= b2
                vi += (1 - b2) * g * g
                mhat = mi / (1 - b1**step)
                vhat = vi / (1 - b2**step)
                p -= lr * mhat / (np.sqrt(vhat) + eps)
        log.losses.append(total / n)
    return MlpModel(W, b, mean, scale, seed), log


def predict(model: MlpModel, x) -> tuple[float, str]:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature value")
    p = float(model.predict_proba(x[None, :])[0])
    return p, ("fake" if p > 0.5 else "official")


# ---------------------------------------------------------------------------
# evaluation

def weighted_f1(y_true, y_pred) -> float:
    """Support-weighted mean of per-class F1 (classes taken from ``y_true``)."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    total = 0.0
    for c in np.unique(y_true):
        tp = np.sum((y_pred == c) & (y_true == c))
        fp = np.sum((y_pred == c) & (y_true != c))
        fn = np.sum((y_pred != c) & (y_true == c))
        denom = 2 * tp + fp + fn
        f1 = 2 * tp / denom if denom else 0.0
        total += f1 * np.sum(y_true == c)
    return float(total / y_true.size)


def stratified_folds(y, folds: int, seed: int) -> list[np.ndarray]:
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(folds)]
    offset = 0
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        if idx.size < folds:
            raise ValueError(f"class {c} has {idx.size} samples, fewer than {folds} folds")
        idx = rng.permutation(idx)
        for j, i in enumerate(idx):
            buckets[(j + offset) % folds].append(int(i))
        offset += idx.size
    return [np.array(sorted(b)) for b in buckets]


@dataclass
class FoldMetrics:
    fold: int
    accuracy: float
    weighted_f1: float
    n_test: int


@dataclass
class CvResult:
    accuracy: float
    weighted_f1: float
    folds: list[FoldMetrics]


Trainer = Callable[[np.ndarray, np.ndarray, int], Callable[[np.ndarray], np.ndarray]]


def _mlp_trainer(epochs: int, **kw) -> Trainer:
    def fit(X, y, seed):
        model, _ = train_mlp(X, y, epochs=epochs, seed=seed, **kw)
        return model.predict_proba
    return fit


def cross_validate(
    X, y, folds: int = 5, seed: int = 0, epochs: int = 50, trainer: Optional[Trainer] = None, **train_kw
) -> CvResult:
    """Stratified k-fold evaluation at threshold 0.5; metrics are fold means."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    fit = trainer or _mlp_trainer(epochs, **train_kw)
    parts = stratified_folds(y, folds, seed)
    results = []
    for k, test in enumerate(parts):
        train = np.setdiff1d(np.arange(y.size), test)
        score = fit(X[train], y[train], seed * 1000 + k)
        pred = (score(X[test]) > 0.5).astype(float)
        results.append(FoldMetrics(k, float(np.mean(pred == y[test])), weighted_f1(y[test], pred), int(test.size)))
    return CvResult(
        float(np.mean([r.accuracy for r in results])),
        float(np.mean([r.weighted_f1 for r in results])),
        results,
    )


# ---------------------------------------------------------------------------
# attribution

def exact_shapley(model, x, background) -> np.ndarray:
    """Shapley values of ``model``'s output for ``x`` by full coalition enumeration.

    A coalition S is valued by the model output with features outside S set
    to ``background``. ``model`` is an :class:`MlpModel` (probability output) or
    any callable mapping an (n, d) array to n outputs.
    """
    f = model.predict_proba if isinstance(model, MlpModel) else model
    x = np.asarray(x, dtype=float)
    bg = np.asarray(background, dtype=float)
    d = x.size
    masks = np.arange(1 << d)
    bits = ((masks[:, None] >> np.arange(d)) & 1).astype(bool)
    values = np.asarray(f(np.where(bits, x, bg)), dtype=float)
    sizes = bits.sum(axis=1)
    fact = [math.factorial(i) for i in range(d + 1)]
    weight = np.array([fact[s] * fact[d - s - 1] / fact[d] if s < d else 0.0 for s in range(d + 1)])
    phi = np.zeros(d)
    for i in range(d):
        without = masks[~bits[:, i]]
        phi[i] = np.sum(weight[sizes[without]] * (values[without | (1 << i)] - values[without]))
    return phi


# ---------------------------------------------------------------------------
# binary layout: magic, version, layer count, dims, weights (row-major f64),
# biases, standardization mean and scale; all little-endian

def save_model(model: MlpModel, path) -> None:
    dims = model.dims
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(model.weights)))
        fh.write(struct.pack(f"<{len(dims)}I", *dims))
        fh.write(struct.pack("<q", model.seed))
        for W in model.weights:
            fh.write(np.ascontiguousarray(W, dtype="<f8").tobytes())
        for b in model.biases:
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.mean, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.scale, dtype="<f8").tobytes())


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(MAGIC):
        raise ValueError(f"{path}: not a model file")
    pos = len(MAGIC)
    version, n_layers = struct.unpack_from("<II", data, pos)
    pos += 8
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model version {version}")
    dims = struct.unpack_from(f"<{n_layers + 1}I", data, pos)
    pos += 4 * (n_layers + 1)
    (seed,) = struct.unpack_from("<q", data, pos)
    pos += 8

    def take(count, shape):
        nonlocal pos
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=pos).astype(float).reshape(shape)
        pos += 8 * count
        return arr

    W = [take(a * b, (a, b)) for a, b in zip(dims[:-1], dims[1:])]
    B = [take(b, (b,)) for b in dims[1:]]
    mean = take(dims[0], (dims[0],))
    scale = take(dims[0], (dims[0],))
    if pos != len(data):
        raise ValueError(f"{path}: trailing bytes in model file")
    return MlpModel(W, B, mean, scale, seed)
