"""The three learners (naive Bayes, one-vs-one kernel SVM, multinomial logit)
plus the :class:`TrainedModel` envelope that ties a fitted learner to its
feature schema, binning and standardisation for serialisation."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..domain import FeatureSchema, IriBinning
from ..errors import DomainError, SchemaError
from ..preprocess import Dataset, Standardization
from .kernels import KernelKind, KernelSpec, gram, kernel_eval
from .logit import LogitModel, predict_logit, rough_side_coefficients
from .logit import train_binary_logit as _train_binary_logit
from .logit import train_logit as _train_logit
from .naive_bayes import NaiveBayesModel, predict_nb
from .naive_bayes import train_nb as _train_nb
from .svm import SvmBinaryModel, SvmOvoModel, default_gamma, predict_svm, train_svm_binary
from .svm import train_svm_ovo as _train_svm_ovo

__all__ = [
    "KernelKind",
    "KernelSpec",
    "LogitModel",
    "NaiveBayesModel",
    "SvmBinaryModel",
    "SvmOvoModel",
    "TrainedModel",
    "default_gamma",
    "gram",
    "kernel_eval",
    "load_model",
    "predict_logit",
    "predict_nb",
    "predict_svm",
    "rough_side_coefficients",
    "save_model",
    "train_binary_logit",
    "train_logit",
    "train_nb",
    "train_svm_binary",
    "train_svm_ovo",
]

MODEL_FORMAT = "pave-iri-model/1"


def train_nb(train: Dataset, variance_floor_scale: float = 1e-9) -> NaiveBayesModel:
    return _train_nb(train.X, train.classes, variance_floor_scale, n_classes=train.binning.n_classes)


def train_svm_ovo(train: Dataset, spec: KernelSpec, C: float = 1.0, tol: float = 1e-3) -> SvmOvoModel:
    return _train_svm_ovo(train.X, train.classes, spec, C, n_classes=train.binning.n_classes, tol=tol)


def train_logit(train: Dataset, lam: float = 1e-4, tol: float = 1e-5, max_iters: int = 5000) -> LogitModel:
    return _train_logit(train.X, train.classes, lam, tol, max_iters, n_classes=train.binning.n_classes)


def train_binary_logit(train: Dataset, iri_threshold: float = 100.0, lam: float = 1e-4,
                       tol: float = 1e-5, max_iters: int = 5000) -> LogitModel:
    return _train_binary_logit(train.X, train.labels, iri_threshold, lam, tol, max_iters)


# ---------------------------------------------------------------------------
# envelope + serialisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    learner: NaiveBayesModel | SvmOvoModel | LogitModel
    schema: FeatureSchema
    binning: IriBinning
    standardization: Standardization | None
    tag: str = ""
    config_digest: str = ""
    extra: dict = field(default_factory=dict)

    def predict_classes(self, X: np.ndarray) -> np.ndarray:
        return self.learner.predict(X)

    def check_schema(self, schema: FeatureSchema) -> None:
        if schema.fingerprint() != self.schema.fingerprint():
            raise SchemaError(
                f"model schema fingerprint {self.schema.fingerprint()} does not match "
                f"dataset fingerprint {schema.fingerprint()}"
            )

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "kind": self.kind,
            "tag": self.tag,
            "schema_fingerprint": self.schema.fingerprint(),
            "config_digest": self.config_digest,
            "schema": self.schema.to_dict(),
            "binning": self.binning.to_dict(),
            "standardization": None if self.standardization is None else self.standardization.to_dict(),
            "learner": learner_to_dict(self.learner),
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT:
            raise SchemaError(f"unsupported model format {d.get('format')!r}")
        schema = FeatureSchema.from_dict(d["schema"])
        if schema.fingerprint() != d["schema_fingerprint"]:
            raise SchemaError("model file schema does not match its recorded fingerprint")
        st = d["standardization"]
        return cls(
            kind=d["kind"],
            learner=learner_from_dict(d["learner"]),
            schema=schema,
            binning=IriBinning(**d["binning"]),
            standardization=None if st is None else Standardization.from_dict(st),
            tag=d.get("tag", ""),
            config_digest=d.get("config_digest", ""),
            extra=d.get("extra", {}),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def learner_to_dict(m) -> dict:
    if isinstance(m, NaiveBayesModel):
        return {
            "type": "naive_bayes",
            "classes": list(m.classes),
            "n_classes": m.n_classes,
            "class_priors": _floats(m.class_priors),
            "means": _floats(m.means),
            "variances": _floats(m.variances),
            "variance_floor": m.variance_floor,
        }
    if isinstance(m, LogitModel):
        return {
            "type": "logit",
            "classes": list(m.classes),
            "n_classes": m.n_classes,
            "coefficients": _floats(m.coefficients),
            "regularization": m.regularization,
            "n_iter": m.n_iter,
            "converged": m.converged,
            "threshold": m.threshold,
        }
    if isinstance(m, SvmOvoModel):
        # support vectors shared between pairs are stored once
        pool: dict[bytes, int] = {}
        rows = []
        binaries = []
        for b in m.binaries:
            idx = []
            for sv in b.support_vectors:
                key = sv.tobytes()
                if key not in pool:
                    pool[key] = len(rows)
                    rows.append(sv)
                idx.append(pool[key])
            binaries.append({
                "label_pair": list(b.label_pair),
                "support": idx,
                "dual_coefficients": _floats(b.dual_coefficients),
                "bias": b.bias,
                "C": b.C,
                "n_iter": b.n_iter,
                "converged": b.converged,
            })
        return {
            "type": "svm_ovo",
            "classes": list(m.classes),
            "n_classes": m.n_classes,
            "tie_rule": m.tie_rule,
            "kernel": m.binaries[0].kernel.to_dict(),
            "n_features": m.n_features,
            "support_pool": [_floats(r) for r in rows],
            "binaries": binaries,
        }
    raise DomainError(f"cannot serialise {type(m).__name__}")


def learner_from_dict(d: dict):
    t = d["type"]
    if t == "naive_bayes":
        return NaiveBayesModel(
            classes=tuple(d["classes"]),
            class_priors=np.array(d["class_priors"]),
            means=np.array(d["means"]),
            variances=np.array(d["variances"]),
            variance_floor=float(d["variance_floor"]),
            n_classes=int(d["n_classes"]),
        )
    if t == "logit":
        return LogitModel(
            classes=tuple(d["classes"]),
            coefficients=np.array(d["coefficients"]),
            regularization=float(d["regularization"]),
            n_classes=int(d["n_classes"]),
            n_iter=int(d["n_iter"]),
            converged=bool(d["converged"]),
            threshold=d["threshold"],
        )
    if t == "svm_ovo":
        kernel = KernelSpec.from_dict(d["kernel"])
        pool = np.array(d["support_pool"], dtype=float).reshape(-1, int(d["n_features"]))
        binaries = tuple(
            SvmBinaryModel(
                support_vectors=pool[np.asarray(b["support"], dtype=np.int64)],
                dual_coefficients=np.array(b["dual_coefficients"], dtype=float),
                bias=float(b["bias"]),
                kernel=kernel,
                label_pair=tuple(b["label_pair"]),
                C=float(b["C"]),
                n_iter=int(b["n_iter"]),
                converged=bool(b["converged"]),
            )
            for b in d["binaries"]
        )
        return SvmOvoModel(binaries, int(d["n_classes"]), tuple(d["classes"]), d["tie_rule"])
    raise SchemaError(f"unknown learner type {t!r}")


def save_model(model: TrainedModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(model.dumps())


def load_model(path: str | os.PathLike, expected_schema: FeatureSchema | None = None) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        model = TrainedModel.from_dict(json.load(fh))
    if expected_schema is not None:
        model.check_schema(expected_schema)
    return model
