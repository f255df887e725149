"""Gaussian naive Bayes with the maximum a-posteriori decision rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTrainingError, DomainError


@dataclass(frozen=True)
class NaiveBayesModel:
    """Per-class priors and per-class, per-feature Gaussian (mean, variance).

    Rows of ``means``/``variances`` follow ``classes``; classes absent from
    training data are never predicted.
    """

    classes: tuple[int, ...]
    class_priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    variance_floor: float
    n_classes: int

    def __post_init__(self):
        p = self.class_priors
        if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-12:
            raise DomainError("class priors must be nonnegative and sum to 1")
        if not self.variance_floor > 0 or np.any(self.variances < self.variance_floor):
            raise DomainError("variances must be >= variance_floor > 0")

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {X.shape[1]}")
        jll = np.empty((X.shape[0], len(self.classes)))
        for k in range(len(self.classes)):
            v = self.variances[k]
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * v) + (X - self.means[k]) ** 2 / v, axis=1)
            jll[:, k] = np.log(self.class_priors[k]) + ll
        return jll

    def posterior(self, X: np.ndarray) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        z = np.exp(jll - jll.max(axis=1, keepdims=True))
        return z / z.sum(axis=1, keepdims=True)

    def predict(self, X: np.ndarray) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return np.asarray(self.classes, dtype=np.int64)[np.argmax(jll, axis=1)]


def train_nb(X: np.ndarray, classes: np.ndarray, variance_floor_scale: float = 1e-9,
             n_classes: int | None = None) -> NaiveBayesModel:
    X = np.asarray(X, dtype=float)
    classes = np.asarray(classes, dtype=np.int64)
    if X.shape[0] == 0:
        raise DegenerateTrainingError("naive Bayes needs at least one training sample")
    present = np.unique(classes)
    overall = float(np.var(X, axis=0).max()) if X.shape[1] else 0.0
    floor = variance_floor_scale * overall
    if not floor > 0:
        floor = variance_floor_scale if variance_floor_scale > 0 else 1e-9
    means = np.empty((len(present), X.shape[1]))
    variances = np.empty_like(means)
    counts = np.empty(len(present))
    for k, c in enumerate(present):
        Xc = X[classes == c]
        counts[k] = Xc.shape[0]
        means[k] = Xc.mean(axis=0)
        variances[k] = np.maximum(Xc.var(axis=0), floor)
    priors = counts / counts.sum()
    return NaiveBayesModel(
        classes=tuple(int(c) for c in present),
        class_priors=priors,
        means=means,
        variances=variances,
        variance_floor=floor,
        n_classes=int(n_classes if n_classes is not None else present[-1] + 1),
    )


def predict_nb(model: NaiveBayesModel, x) -> tuple[int, np.ndarray]:
    """Class index plus the posterior over ``model.classes``."""
    jll = model.joint_log_likelihood(x)[0]
    z = np.exp(jll - jll.max())
    return int(model.classes[int(np.argmax(jll))]), z / z.sum()
