"""Noise-ignorant training of regularized multinomial linear classifiers.

The trainer fits scores s = Wx + b by full-batch deterministic optimization
(L-BFGS-B with line search, started from the zero model) of one of three
losses on softmax probabilities p:

* cross_entropy: -ln p_y
* mae:           sum_j |p_j - 1{j=y}| = 2 (1 - p_y)
* sigmoid:       1 / (1 + exp(m)) with margin m = s_y - ln sum_{j!=y} e^{s_j}

plus an L2 penalty lambda * ||W||^2 / 2 (bias unregularized).  The sigmoid
loss reduces to the usual binary sigmoid loss at K = 2.  Iteration caps are
hyperparameters (implicit regularization), not failures.

Hyperparameters are chosen by stratified cross-validation on the (noisy)
training labels; ties in mean validation accuracy go to the larger penalty,
then the smaller iteration cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from . import rng
from .simplex import SimplexVector, ValidationError

__all__ = [
    "Loss",
    "LinearModel",
    "TrainConfig",
    "CvReport",
    "OptimizationError",
    "loss_and_gradient",
    "fit",
    "predict_proba",
    "predict_proba_matrix",
    "predict_labels",
    "accuracy",
    "cross_validate",
    "stratified_folds",
]

Loss = Literal["cross_entropy", "mae", "sigmoid"]

DEFAULT_LAMBDA_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_ITER_GRID = (10, 20, 50, 100)


class OptimizationError(RuntimeError):
    """The optimizer hit a non-finite objective; carries diagnostics."""


@dataclass(frozen=True)
class LinearModel:
    """Weights (K x d) and bias (K,) of a linear score model."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ValidationError(f"inconsistent shapes: weights {w.shape}, bias {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValidationError("model parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def k(self) -> int:
        return int(self.weights.shape[0])

    @property
    def d(self) -> int:
        return int(self.weights.shape[1])

    def scores(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim == 1:
            features = features[None, :]
        if features.shape[1] != self.d:
            raise ValidationError(f"feature dim {features.shape[1]} != model d={self.d}")
        return features @ self.weights.T + self.bias

    @classmethod
    def zero(cls, k: int, d: int) -> "LinearModel":
        return cls(np.zeros((k, d)), np.zeros(k))

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "d": self.d,
            "weights": [float(v) for v in self.weights.ravel()],
            "bias": [float(v) for v in self.bias],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "LinearModel":
        k, d = int(doc["k"]), int(doc["d"])
        return cls(np.asarray(doc["weights"], dtype=np.float64).reshape(k, d),
                   np.asarray(doc["bias"], dtype=np.float64))


@dataclass(frozen=True)
class TrainConfig:
    """Loss choice, hyperparameter grids, and cross-validation settings."""

    loss: Loss = "cross_entropy"
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    max_iter_grid: tuple[int, ...] = DEFAULT_ITER_GRID
    folds: int = 5
    seed: int = 0
    grad_tol: float = 1e-8

    def __post_init__(self):
        if not self.lambda_grid or not self.max_iter_grid:
            raise ValidationError("hyperparameter grids must be nonempty")
        if any(lam < 0 for lam in self.lambda_grid):
            raise ValidationError("lambda values must be >= 0")
        if self.folds < 2:
            raise ValidationError(f"folds must be >= 2, got {self.folds}")


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _check_batch(model: LinearModel, features: np.ndarray, labels: np.ndarray) -> tuple:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2:
        raise ValidationError(f"features must be 2-D, got shape {x.shape}")
    if x.shape[0] == 0:
        raise ValidationError("empty batch")
    if x.shape[0] != y.shape[0]:
        raise ValidationError(f"batch size mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[1] != model.d:
        raise ValidationError(f"feature dim {x.shape[1]} != model d={model.d}")
    if y.min() < 0 or y.max() >= model.k:
        raise ValidationError(f"labels out of range [0, {model.k})")
    return x, y


def loss_and_gradient(
    model: LinearModel,
    features: np.ndarray,
    labels: np.ndarray,
    loss: Loss = "cross_entropy",
    lam: float = 0.0,
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Mean per-example loss plus the L2 penalty, with its exact gradient.

    Returns (value, (grad_weights, grad_bias)).
    """
    x, y = _check_batch(model, features, labels)
    n, k = x.shape[0], model.k
    scores = model.scores(x)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0

    if loss == "cross_entropy":
        shifted = scores - scores.max(axis=1, keepdims=True)
        logz = np.log(np.exp(shifted).sum(axis=1))
        data_loss = float(np.mean(logz - shifted[np.arange(n), y]))
        probs = _softmax(scores)
        grad_scores = (probs - onehot) / n
    elif loss == "mae":
        probs = _softmax(scores)
        p_y = probs[np.arange(n), y]
        data_loss = float(np.mean(2.0 * (1.0 - p_y)))
        grad_scores = -2.0 * p_y[:, None] * (onehot - probs) / n
    elif loss == "sigmoid":
        masked = scores.copy()
        masked[np.arange(n), y] = -np.inf
        top = masked.max(axis=1, keepdims=True)
        rest = np.exp(masked - top)
        logz_rest = top[:, 0] + np.log(rest.sum(axis=1))
        margin = scores[np.arange(n), y] - logz_rest
        ell = expit(-margin)
        data_loss = float(np.mean(ell))
        q = rest / rest.sum(axis=1, keepdims=True)
        q[np.arange(n), y] = 0.0
        dldm = -ell * (1.0 - ell)
        grad_scores = dldm[:, None] * (onehot - q) / n
    else:
        raise ValidationError(f"unknown loss {loss!r}")

    value = data_loss + lam * float(np.sum(model.weights**2)) / 2.0
    grad_w = grad_scores.T @ x + lam * model.weights
    grad_b = grad_scores.sum(axis=0)
    return value, (grad_w, grad_b)


def fit(
    features: np.ndarray,
    labels: np.ndarray,
    k: int,
    loss: Loss = "cross_entropy",
    lam: float = 0.0,
    max_iter: int = 100,
    grad_tol: float = 1e-8,
    seed: int | None = None,
) -> LinearModel:
    """Full-batch fit from the zero model; deterministic given inputs.

    Stops when the gradient infinity-norm falls below ``grad_tol`` or after
    ``max_iter`` L-BFGS iterations, whichever comes first.  ``seed`` is
    accepted for interface uniformity; the optimization itself has no
    randomness.
    """
    return _fit(features, labels, k, loss, lam, max_iter, grad_tol, history=None)


def fit_with_history(
    features: np.ndarray,
    labels: np.ndarray,
    k: int,
    loss: Loss = "cross_entropy",
    lam: float = 0.0,
    max_iter: int = 100,
    grad_tol: float = 1e-8,
) -> tuple[LinearModel, list[float]]:
    """Like :func:`fit` but also returns the objective after each accepted step."""
    history: list[float] = []
    model = _fit(features, labels, k, loss, lam, max_iter, grad_tol, history=history)
    return model, history


def _fit(
    features: np.ndarray,
    labels: np.ndarray,
    k: int,
    loss: Loss,
    lam: float,
    max_iter: int,
    grad_tol: float,
    history: list[float] | None,
) -> LinearModel:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValidationError(f"need a nonempty 2-D feature matrix, got shape {x.shape}")
    if y.size and (y.min() < 0 or y.max() >= k):
        raise ValidationError(f"labels out of range [0, {k})")
    d = x.shape[1]

    def unpack(theta: np.ndarray) -> LinearModel:
        return LinearModel(theta[: k * d].reshape(k, d), theta[k * d :])

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        m = unpack(theta)
        value, (gw, gb) = loss_and_gradient(m, x, y, loss, lam)
        if not math.isfinite(value):
            raise OptimizationError(
                f"non-finite objective (loss={loss}, lambda={lam}, "
                f"|w|_max={np.abs(m.weights).max()})"
            )
        return value, np.concatenate([gw.ravel(), gb])

    callback = None
    if history is not None:
        callback = lambda theta: history.append(objective(theta)[0])
    result = minimize(
        objective,
        np.zeros(k * d + k),
        jac=True,
        method="L-BFGS-B",
        callback=callback,
        options={"maxiter": max_iter, "gtol": grad_tol},
    )
    return unpack(result.x)


def predict_proba(model: LinearModel, x: np.ndarray) -> SimplexVector:
    """Softmax class probabilities at a single feature vector."""
    return SimplexVector(_softmax(model.scores(x))[0])


def predict_proba_matrix(model: LinearModel, features: np.ndarray) -> np.ndarray:
    """Softmax class probabilities for each row of a feature matrix."""
    return _softmax(model.scores(features))


def predict_labels(model: LinearModel, features: np.ndarray) -> np.ndarray:
    """Argmax-score predictions (lowest index wins ties)."""
    return model.scores(features).argmax(axis=1)


def accuracy(model: LinearModel, features: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of argmax-score predictions equal to the given labels."""
    labels = np.asarray(labels, dtype=np.int64)
    return float(np.mean(predict_labels(model, features) == labels))


def stratified_folds(labels: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Deal each class's (shuffled) indices round-robin into ``folds`` folds."""
    labels = np.asarray(labels, dtype=np.int64)
    assignment = np.empty(labels.size, dtype=np.int64)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < folds:
            raise ValidationError(
                f"class {cls} has {idx.size} members, fewer than {folds} folds"
            )
        gen = rng.stream(seed, "stratified_folds", int(cls))
        gen.shuffle(idx)
        assignment[idx] = np.arange(idx.size) % folds
    return [np.flatnonzero(assignment == f) for f in range(folds)]


@dataclass(frozen=True)
class CvReport:
    """Grid of mean validation accuracies with the selected cell and model."""

    table: tuple[tuple[float, int, float], ...]  # (lambda, max_iter, mean accuracy)
    chosen_lambda: float
    chosen_max_iter: int
    model: LinearModel
    folds: int

    def mean_accuracy(self, lam: float, cap: int) -> float:
        for row_lam, row_cap, acc in self.table:
            if row_lam == lam and row_cap == cap:
                return acc
        raise KeyError((lam, cap))

    def to_json_dict(self) -> dict:
        return {
            "table": [
                {"lambda": lam, "max_iter": cap, "accuracy": acc}
                for lam, cap, acc in self.table
            ],
            "chosen": {"lambda": self.chosen_lambda, "max_iter": self.chosen_max_iter},
            "folds": self.folds,
        }


def cross_validate(
    features: np.ndarray,
    noisy_labels: np.ndarray,
    config: TrainConfig,
    k: int | None = None,
) -> CvReport:
    """Stratified K-fold selection over the (lambda, iteration cap) grid.

    Folds are stratified on the given labels with a seeded shuffle.  The
    winner maximizes mean validation accuracy; exact ties prefer stronger
    regularization (larger lambda), then the smaller iteration cap.  The
    final model is refit on all data with the winning cell.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(noisy_labels, dtype=np.int64)
    n_classes = int(k if k is not None else y.max() + 1)
    fold_indices = stratified_folds(y, config.folds, config.seed)
    all_idx = np.arange(y.size)
    rows: list[tuple[float, int, float]] = []
    for lam in config.lambda_grid:
        for cap in config.max_iter_grid:
            accs = []
            for val_idx in fold_indices:
                train_mask = np.ones(y.size, dtype=bool)
                train_mask[val_idx] = False
                train_idx = all_idx[train_mask]
                model = fit(
                    x[train_idx], y[train_idx], n_classes,
                    loss=config.loss, lam=lam, max_iter=cap, grad_tol=config.grad_tol,
                )
                accs.append(accuracy(model, x[val_idx], y[val_idx]))
            rows.append((float(lam), int(cap), float(np.mean(accs))))
    # max accuracy, then larger lambda, then smaller cap
    best_lam, best_cap, _ = max(rows, key=lambda r: (r[2], r[0], -r[1]))
    final = fit(
        x, y, n_classes,
        loss=config.loss, lam=best_lam, max_iter=best_cap, grad_tol=config.grad_tol,
    )
    return CvReport(
        table=tuple(rows),
        chosen_lambda=best_lam,
        chosen_max_iter=best_cap,
        model=final,
        folds=config.folds,
    )
