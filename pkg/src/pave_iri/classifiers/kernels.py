from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DomainError


class KernelKind(str, enum.Enum):
    RBF = "rbf"
    POLYNOMIAL = "poly"


@dataclass(frozen=True)
class KernelSpec:
    """RBF ``exp(-gamma*|x-z|^2)`` or polynomial ``(x.z + 1)^degree``."""

    kind: KernelKind = KernelKind.RBF
    gamma: float = 1.0
    degree: int = 3

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError("gamma must be > 0")
        if int(self.degree) != self.degree or self.degree < 1:
            raise DomainError("degree must be an integer >= 1")
        object.__setattr__(self, "degree", int(self.degree))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "gamma": self.gamma, "degree": self.degree}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(KernelKind(d["kind"]), float(d["gamma"]), int(d["degree"]))


def kernel_eval(x, x2, spec: KernelSpec) -> float:
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape or x.ndim != 1:
        raise DomainError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    if spec.kind is KernelKind.RBF:
        d = x - x2
        return math.exp(-spec.gamma * float(np.dot(d, d)))
    return (float(np.dot(x, x2)) + 1.0) ** spec.degree


def gram(A: np.ndarray, B: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix K[i, j] = k(A[i], B[j])."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DomainError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.kind is KernelKind.RBF:
        return np.exp(-spec.gamma * cdist(A, B, "sqeuclidean"))
    return (A @ B.T + 1.0) ** spec.degree


def gram_symmetric(A: np.ndarray, spec: KernelSpec) -> np.ndarray:
    K = gram(A, A, spec)
    if spec.kind is KernelKind.POLYNOMIAL:
        # BLAS may round the two triangles differently
        K = np.triu(K) + np.triu(K, 1).T
    return K
