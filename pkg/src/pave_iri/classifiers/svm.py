"""Soft-margin kernel SVM: binary training by SMO and one-vs-one voting."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTrainingError, DomainError
from .kernels import KernelKind, KernelSpec, gram, gram_symmetric
from .smo import solve_dual

log = logging.getLogger(__name__)

SV_THRESHOLD = 1e-8
FEASIBILITY_TOL = 1e-6
TIE_RULE = "lowest_class_index"


@dataclass(frozen=True)
class SvmBinaryModel:
    """Decision function ``f(x) = sum_i coef_i K(sv_i, x) + bias``.

    ``label_pair[0]`` is the +1 class and wins when ``f(x) >= 0``.
    """

    support_vectors: np.ndarray
    dual_coefficients: np.ndarray
    bias: float
    kernel: KernelSpec
    label_pair: tuple[int, int]
    C: float
    n_iter: int = 0
    converged: bool = True
    support_index: np.ndarray | None = None

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.support_vectors.shape[1]:
            raise DomainError(f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}")
        return gram(X, self.support_vectors, self.kernel) @ self.dual_coefficients + self.bias

    def check_feasibility(self, tol: float = FEASIBILITY_TOL) -> None:
        a = np.abs(self.dual_coefficients)
        if np.any(a > self.C) or np.any(a < 0):
            raise AssertionError("box constraint 0 <= alpha <= C violated")
        s = float(np.sum(self.dual_coefficients))
        if abs(s) > tol:
            raise AssertionError(f"equality constraint violated: sum(alpha*y) = {s:g}")


def check_dual_feasibility(alpha: np.ndarray, y: np.ndarray, C: float, tol: float = FEASIBILITY_TOL) -> None:
    if np.any(alpha < 0) or np.any(alpha > C):
        raise AssertionError("box constraint 0 <= alpha <= C violated")
    s = float(alpha @ y)
    if abs(s) > tol:
        raise AssertionError(f"equality constraint violated: sum(alpha*y) = {s:g}")


def train_svm_binary(X: np.ndarray, y: np.ndarray, spec: KernelSpec, C: float = 1.0,
                     tol: float = 1e-3, max_passes: int | None = None,
                     label_pair: tuple[int, int] = (1, -1), K: np.ndarray | None = None) -> SvmBinaryModel:
    """Train on labels in {-1, +1}.

    ``max_passes`` caps the number of working-pair updates (default 10*n);
    the returned model records whether the KKT tolerance was met first.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if not C > 0:
        raise DomainError("C must be > 0")
    if set(np.unique(y)) - {-1.0, 1.0}:
        raise DomainError("labels must be -1 or +1")
    if not ((y > 0).any() and (y < 0).any()):
        raise DegenerateTrainingError("binary SVM needs both classes present")
    if K is None:
        K = gram_symmetric(X, spec)
    sol = solve_dual(K, y, C, tol=tol, max_iter=max_passes)
    check_dual_feasibility(sol.alpha, y, C)
    if not sol.converged:
        log.warning("SMO for pair %s stopped at the iteration cap (%d) before reaching tol %g",
                    label_pair, sol.n_iter, tol)
    keep = np.flatnonzero(sol.alpha > SV_THRESHOLD)
    model = SvmBinaryModel(
        support_vectors=X[keep],
        dual_coefficients=sol.alpha[keep] * y[keep],
        bias=-sol.rho,
        kernel=spec,
        label_pair=label_pair,
        C=float(C),
        n_iter=sol.n_iter,
        converged=sol.converged,
        support_index=keep,
    )
    return model


@dataclass(frozen=True)
class SvmOvoModel:
    binaries: tuple[SvmBinaryModel, ...]
    n_classes: int
    classes: tuple[int, ...]
    tie_rule: str = TIE_RULE

    def __post_init__(self):
        k = len(self.classes)
        if len(self.binaries) != k * (k - 1) // 2:
            raise DomainError("one binary model per class pair required")

    @property
    def n_features(self) -> int:
        return self.binaries[0].support_vectors.shape[1]

    def votes(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DomainError(f"expected {self.n_features} features, got {X.shape[1]}")
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for b in self.binaries:
            f = b.decision_function(X)
            winner = np.where(f >= 0, b.label_pair[0], b.label_pair[1])
            np.add.at(votes, (rows, winner), 1)
        return votes

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax returns the first maximum: ties go to the lowest class index
        return np.argmax(self.votes(X), axis=1)


def default_gamma(X: np.ndarray) -> float:
    """``1 / (p * mean feature variance)``; 1.0 for constant data."""
    v = float(np.mean(np.var(X, axis=0)))
    return 1.0 / (X.shape[1] * v) if v > 0 else 1.0


def train_svm_ovo(X: np.ndarray, classes: np.ndarray, spec: KernelSpec, C: float = 1.0,
                  n_classes: int | None = None, tol: float = 1e-3,
                  max_passes_per_sample: int = 10) -> SvmOvoModel:
    X = np.asarray(X, dtype=float)
    classes = np.asarray(classes, dtype=np.int64)
    present = tuple(int(c) for c in np.unique(classes))
    if len(present) < 2:
        raise DegenerateTrainingError(f"one-vs-one SVM needs >= 2 classes, found {list(present)}")
    if n_classes is None:
        n_classes = present[-1] + 1
    binaries = []
    for a, b in itertools.combinations(present, 2):
        idx = np.flatnonzero((classes == a) | (classes == b))
        y = np.where(classes[idx] == a, 1.0, -1.0)
        m = train_svm_binary(X[idx], y, spec, C, tol=tol, max_passes=max_passes_per_sample * len(idx),
                             label_pair=(a, b))
        binaries.append(m)
    return SvmOvoModel(tuple(binaries), int(n_classes), present)


def predict_svm(model: SvmOvoModel, x) -> int:
    return int(model.predict(np.atleast_2d(x))[0])


def grid_candidates(kind: KernelKind, base_gamma: float, degree: int = 3):
    for C in (0.1, 1.0, 10.0):
        if KernelKind(kind) is KernelKind.RBF:
            for g in (0.5 * base_gamma, base_gamma, 2.0 * base_gamma):
                yield C, KernelSpec(KernelKind.RBF, g, degree)
        else:
            for d in (2, 3, 4):
                yield C, KernelSpec(KernelKind.POLYNOMIAL, base_gamma, d)


def grid_search(X: np.ndarray, classes: np.ndarray, kind: KernelKind, n_classes: int,
                score, folds: int = 5, seed: int = 0) -> tuple[float, KernelSpec, list]:
    """Pick (C, kernel) by k-fold cross-validation on the given (training) rows.

    ``score(pred_classes, true_rows)`` returns a number to maximise.
    Ties keep the earlier candidate.
    """
    from ..preprocess import seeded_permutation

    n = X.shape[0]
    perm = seeded_permutation(n, seed)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[perm] = np.arange(n) % folds
    results = []
    best = None
    for C, spec in grid_candidates(kind, default_gamma(X)):
        s = 0.0
        for f in range(folds):
            tr = fold_of != f
            te = ~tr
            if len(np.unique(classes[tr])) < 2:
                continue
            m = train_svm_ovo(X[tr], classes[tr], spec, C, n_classes=n_classes)
            s += score(m.predict(X[te]), np.flatnonzero(te))
        s /= folds
        results.append((C, spec, s))
        if best is None or s > best[2]:
            best = (C, spec, s)
    return best[0], best[1], results
