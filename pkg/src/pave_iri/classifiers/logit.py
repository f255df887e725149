"""Multinomial logistic regression fitted by penalised maximum likelihood.

The last class is the reference: its coefficients are fixed at zero, which
removes the softmax's shift redundancy. The objective is the mean negative
log-likelihood plus ``lam/2`` times the squared norm of the non-intercept
coefficients, minimised by full-batch gradient descent with an Armijo
backtracking line search, Nesterov momentum and restart on objective
increase.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTrainingError, DomainError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogitModel:
    """``coefficients`` has shape (n_features + 1, n_classes - 1); row 0 holds
    the intercepts and the reference class (last) is implicit zeros."""

    classes: tuple[int, ...]
    coefficients: np.ndarray
    regularization: float
    n_classes: int
    n_iter: int = 0
    converged: bool = True
    threshold: float | None = None

    @property
    def n_features(self) -> int:
        return self.coefficients.shape[0] - 1

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {X.shape[1]}")
        B = self.coefficients
        S = X @ B[1:] + B[0]
        return np.hstack([S, np.zeros((X.shape[0], 1))])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(self.scores(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        P = self.predict_proba(X)
        return np.asarray(self.classes, dtype=np.int64)[np.argmax(P, axis=1)]


def softmax(S: np.ndarray) -> np.ndarray:
    Z = np.exp(S - S.max(axis=1, keepdims=True))
    return Z / Z.sum(axis=1, keepdims=True)


def _log_softmax(S: np.ndarray) -> np.ndarray:
    m = S.max(axis=1, keepdims=True)
    return S - m - np.log(np.exp(S - m).sum(axis=1, keepdims=True))


def objective(theta: np.ndarray, X: np.ndarray, Y: np.ndarray, lam: float) -> float:
    """Penalised mean NLL. ``theta`` is (p+1, K-1), ``Y`` one-hot (n, K)."""
    S = X @ theta[1:] + theta[0]
    S = np.hstack([S, np.zeros((X.shape[0], 1))])
    nll = -np.sum(Y * _log_softmax(S)) / X.shape[0]
    return float(nll + 0.5 * lam * np.sum(theta[1:] ** 2))


def objective_and_gradient(theta: np.ndarray, X: np.ndarray, Y: np.ndarray,
                           lam: float) -> tuple[float, np.ndarray]:
    n = X.shape[0]
    S = X @ theta[1:] + theta[0]
    S = np.hstack([S, np.zeros((n, 1))])
    L = _log_softmax(S)
    f = -np.sum(Y * L) / n + 0.5 * lam * np.sum(theta[1:] ** 2)
    R = (np.exp(L) - Y)[:, :-1] / n
    g = np.empty_like(theta)
    g[0] = R.sum(axis=0)
    g[1:] = X.T @ R + lam * theta[1:]
    return float(f), g


def _one_hot(classes: np.ndarray, present: np.ndarray) -> np.ndarray:
    Y = np.zeros((classes.shape[0], present.shape[0]))
    Y[np.arange(classes.shape[0]), np.searchsorted(present, classes)] = 1.0
    return Y


def _minimize(theta, X, Y, lam, tol, max_iters):
    """Accelerated gradient descent with Armijo backtracking and
    function-value restart. Returns (theta, iterations, converged)."""
    f, g = objective_and_gradient(theta, X, Y, lam)
    if np.max(np.abs(g)) < tol:
        return theta, 0, True
    z, fz, gz = theta, f, g
    t = 1.0
    step = 1.0
    for it in range(1, max_iters + 1):
        gg = float(np.sum(gz * gz))
        step = min(step * 1.5, 1e6)
        while True:
            cand = z - step * gz
            fc, gc = objective_and_gradient(cand, X, Y, lam)
            if fc <= fz - 0.5 * step * gg or step < 1e-16:
                break
            step *= 0.5
        if step < 1e-16:
            log.warning("logit line search stalled at iteration %d", it)
            return theta, it, False
        if np.max(np.abs(gc)) < tol:
            return cand, it, True
        if fc > f:
            # momentum overshot: restart from the best iterate
            t = 1.0
            z, fz, gz = theta, f, g
            continue
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = cand + ((t - 1.0) / t_next) * (cand - theta)
        theta, f, g = cand, fc, gc
        t = t_next
        fz, gz = objective_and_gradient(z, X, Y, lam)
    return theta, max_iters, False


def train_logit(X: np.ndarray, classes: np.ndarray, lam: float = 1e-4, tol: float = 1e-5,
                max_iters: int = 5000, n_classes: int | None = None) -> LogitModel:
    X = np.asarray(X, dtype=float)
    classes = np.asarray(classes, dtype=np.int64)
    if lam < 0:
        raise DomainError("lambda must be >= 0")
    present = np.unique(classes)
    if len(present) < 2:
        raise DegenerateTrainingError(f"logistic regression needs >= 2 classes, found {present.tolist()}")
    Y = _one_hot(classes, present)
    theta0 = np.zeros((X.shape[1] + 1, len(present) - 1))
    theta, it, converged = _minimize(theta0, X, Y, lam, tol, max_iters)
    if not converged:
        g = objective_and_gradient(theta, X, Y, lam)[1]
        log.warning("logit stopped after %d iterations, |grad|_inf = %.3g", it, np.max(np.abs(g)))
    return LogitModel(
        classes=tuple(int(c) for c in present),
        coefficients=theta,
        regularization=float(lam),
        n_classes=int(n_classes if n_classes is not None else present[-1] + 1),
        n_iter=it,
        converged=converged,
    )


def train_binary_logit(X: np.ndarray, labels_iri: np.ndarray, iri_threshold: float = 100.0,
                       lam: float = 1e-4, tol: float = 1e-5, max_iters: int = 5000) -> LogitModel:
    """Two groups: IRI <= threshold (class 0) and IRI > threshold (class 1)."""
    labels_iri = np.asarray(labels_iri, dtype=float)
    y = (labels_iri > iri_threshold).astype(np.int64)
    n_hi = int(y.sum())
    n_lo = int(y.shape[0] - n_hi)
    if n_hi == 0 or n_lo == 0:
        raise DegenerateTrainingError(
            f"threshold {iri_threshold} leaves one side empty (<= threshold: {n_lo}, > threshold: {n_hi})"
        )
    m = train_logit(X, y, lam=lam, tol=tol, max_iters=max_iters, n_classes=2)
    return LogitModel(m.classes, m.coefficients, m.regularization, 2, m.n_iter, m.converged,
                      float(iri_threshold))


def predict_logit(model: LogitModel, x) -> tuple[int, np.ndarray]:
    P = model.predict_proba(np.atleast_2d(x))[0]
    return int(model.classes[int(np.argmax(P))]), P


def rough_side_coefficients(model: LogitModel) -> np.ndarray:
    """Per-feature log-odds weight toward class 1 for a two-class model.

    With class 1 as the pinned reference, the log-odds of class 1 over
    class 0 is the negated class-0 score.
    """
    if len(model.classes) != 2:
        raise DomainError("rough-side coefficients need a two-class model")
    return -model.coefficients[1:, 0]
