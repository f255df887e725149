"""Tolerance-banded accuracy, model comparison tables and binary-logit
coefficient importance."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from .classifiers import LogitModel, TrainedModel, rough_side_coefficients
from .domain import classes_of, representatives
from .errors import DomainError, StateError
from .preprocess import Dataset, StatsSource, standardize

DEFAULT_TOLERANCES = (20.0, 30.0, 50.0)


def accuracy_under_tolerance(predicted, actual, T: float) -> float:
    """Fraction of predictions with ``|pred - act| < T`` (strict)."""
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise DomainError("predicted and actual must be 1-D arrays of equal length")
    if predicted.shape[0] == 0:
        raise DomainError("no observations")
    if not T > 0:
        raise DomainError("tolerance must be > 0")
    return int(np.count_nonzero(np.abs(predicted - actual) < T)) / predicted.shape[0]


def testset_digest(test: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(test.record_ids, dtype=np.int64).tobytes())
    h.update(np.ascontiguousarray(test.labels, dtype=float).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class EvaluationReport:
    model_tag: str
    tolerances: tuple[float, ...]
    accuracies: tuple[float, ...]
    n_test: int
    confusion: tuple[tuple[int, ...], ...]
    config_digest: str = ""
    test_digest: str = ""

    def __post_init__(self):
        if len(self.tolerances) != len(self.accuracies):
            raise DomainError("one accuracy per tolerance")
        if any(not 0.0 <= a <= 1.0 for a in self.accuracies):
            raise DomainError("accuracy outside [0, 1]")
        order = np.argsort(self.tolerances, kind="stable")
        acc = np.asarray(self.accuracies)[order]
        if np.any(np.diff(acc) < 0):
            raise AssertionError("accuracy decreased as tolerance grew")
        if sum(map(sum, self.confusion)) != self.n_test:
            raise DomainError("confusion counts do not sum to n_test")

    def accuracy_at(self, T: float) -> float:
        return self.accuracies[self.tolerances.index(float(T))]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = list(self.tolerances)
        d["accuracies"] = list(self.accuracies)
        d["confusion"] = [list(r) for r in self.confusion]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        return cls(
            model_tag=d["model_tag"],
            tolerances=tuple(float(t) for t in d["tolerances"]),
            accuracies=tuple(float(a) for a in d["accuracies"]),
            n_test=int(d["n_test"]),
            confusion=tuple(tuple(int(c) for c in r) for r in d["confusion"]),
            config_digest=d.get("config_digest", ""),
            test_digest=d.get("test_digest", ""),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _model_space(model: TrainedModel, test: Dataset) -> np.ndarray:
    st = model.standardization
    if not test.standardized:
        if st is None:
            return test.X
        return standardize(test, StatsSource.REUSE, st).X
    if st is not None and test.standardization is not None:
        if not (np.array_equal(st.mean, test.standardization.mean)
                and np.array_equal(st.scale, test.standardization.scale)):
            raise StateError("test set was standardized with statistics other than the model's")
    return test.X


def evaluate_model(model: TrainedModel, test: Dataset, tolerances=DEFAULT_TOLERANCES,
                   config_digest: str = "") -> EvaluationReport:
    model.check_schema(test.schema)
    if len(test) == 0:
        raise DomainError("empty test set")
    X = _model_space(model, test)
    pred = model.predict_classes(X)
    pred_iri = representatives(pred, model.binning)
    accs = tuple(accuracy_under_tolerance(pred_iri, test.labels, float(T)) for T in tolerances)
    k = model.binning.n_classes
    actual = classes_of(test.labels, model.binning)
    conf = np.zeros((k, k), dtype=np.int64)
    np.add.at(conf, (actual, pred), 1)
    return EvaluationReport(
        model_tag=model.tag or model.kind,
        tolerances=tuple(float(t) for t in tolerances),
        accuracies=accs,
        n_test=len(test),
        confusion=tuple(tuple(int(c) for c in r) for r in conf),
        config_digest=config_digest or model.config_digest,
        test_digest=testset_digest(test),
    )


def compare_models(reports) -> list[dict]:
    """One row per report in input order; all reports must share tolerances
    and test set."""
    reports = list(reports)
    if not reports:
        raise DomainError("no reports to compare")
    tol = reports[0].tolerances
    for r in reports[1:]:
        if r.tolerances != tol:
            raise DomainError(f"tolerances differ: {r.tolerances} vs {tol}")
        if r.test_digest != reports[0].test_digest or r.n_test != reports[0].n_test:
            raise DomainError("reports were computed on different test sets")
    return [
        {"model": r.model_tag, "n_test": r.n_test, **{f"AC_T{_fmt_t(t)}": a for t, a in zip(tol, r.accuracies)}}
        for r in reports
    ]


def _fmt_t(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t))


def format_table(rows: list[dict]) -> str:
    """Comma-delimited table: model, n_test, then AC_T<tolerance> columns."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r.values()])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# importance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ImportanceRow:
    feature_id: str
    coefficient: float
    magnitude: float
    sign: int


@dataclass(frozen=True)
class ImportanceReport:
    threshold: float | None
    rows: tuple[ImportanceRow, ...]
    config_digest: str = ""

    def to_dict(self) -> dict:
        return {"threshold": self.threshold, "config_digest": self.config_digest,
                "rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "ImportanceReport":
        return cls(d["threshold"], tuple(ImportanceRow(**r) for r in d["rows"]), d.get("config_digest", ""))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "feature_id", "coefficient", "magnitude", "sign"])
        for i, r in enumerate(self.rows, start=1):
            w.writerow([i, r.feature_id, repr(r.coefficient), repr(r.magnitude), r.sign])
        return buf.getvalue()


def importance_report(model: LogitModel, dataset: Dataset, config_digest: str = "") -> ImportanceReport:
    """Rank features by |coefficient| scaled by the feature's spread in
    ``dataset``. Positive sign pushes toward the rough (above-threshold) group."""
    if len(model.classes) != 2:
        raise DomainError(f"importance needs a two-class model, got {len(model.classes)} classes")
    if model.n_features != dataset.schema.dimension:
        raise DomainError("model and dataset dimensions differ")
    coef = rough_side_coefficients(model)
    spread = dataset.X.std(axis=0, ddof=1) if len(dataset) > 1 else np.ones(len(coef))
    mag = np.abs(coef) * spread
    order = np.argsort(-mag, kind="stable")
    ids = dataset.schema.feature_ids
    rows = tuple(
        ImportanceRow(ids[j], float(coef[j]), float(mag[j]), int(np.sign(coef[j]))) for j in order
    )
    return ImportanceReport(model.threshold, rows, config_digest)
