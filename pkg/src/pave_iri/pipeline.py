"""End-to-end helpers shared by the CLI and the acceptance suite."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .classifiers import (
    KernelKind,
    KernelSpec,
    TrainedModel,
    default_gamma,
    train_binary_logit,
    train_logit,
    train_nb,
    train_svm_ovo,
)
from .classifiers.svm import grid_search
from .domain import IriBinning, default_schema, representatives
from .evaluate import (
    DEFAULT_TOLERANCES,
    EvaluationReport,
    ImportanceReport,
    accuracy_under_tolerance,
    evaluate_model,
    importance_report,
)
from .ingest import Corpus
from .preprocess import (
    Dataset,
    SplitSpec,
    StatsSource,
    aggregate,
    encode,
    remove_outliers,
    split,
    standardize,
)

log = logging.getLogger(__name__)

MODEL_KINDS = ("nb", "svm", "logit")


@dataclass(frozen=True)
class ModelParams:
    kind: str = "nb"
    kernel: str = "rbf"
    gamma: float | None = None
    degree: int = 3
    C: float = 1.0
    lam: float = 1e-4
    grid_search: bool = False
    seed: int = 42

    @property
    def tag(self) -> str:
        if self.kind == "svm":
            return "SVM-RBF" if KernelKind(self.kernel) is KernelKind.RBF else "SVM-Polynomial"
        return {"nb": "NaiveBayes", "logit": "Logit"}[self.kind]


def prepare(corpus: Corpus, aggregate_length: float | None = 0.1,
            outlier_threshold: float | None = 300.0, raw_outlier_filter: bool = False) -> Corpus:
    """Aggregate, then drop outliers. ``None`` skips a step."""
    if raw_outlier_filter and outlier_threshold is not None:
        corpus = remove_outliers(corpus, outlier_threshold)
    if aggregate_length is not None:
        corpus = aggregate(corpus, aggregate_length)
    if outlier_threshold is not None:
        corpus = remove_outliers(corpus, outlier_threshold)
    return corpus


def make_binning(width: float = 20.0, origin: float = 0.0, upper: float = 300.0) -> IriBinning:
    return IriBinning.covering(origin, width, upper)


def encode_and_split(corpus: Corpus, binning: IriBinning, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    return split(encode(corpus, default_schema(), binning), spec)


def _band_score(train: Dataset, T: float = 20.0):
    def score(pred, rows):
        return accuracy_under_tolerance(representatives(pred, train.binning), train.labels[rows], T)
    return score


def fit_model(params: ModelParams, train: Dataset, config_digest: str = "") -> TrainedModel:
    if params.kind == "nb":
        learner = train_nb(train)
    elif params.kind == "logit":
        learner = train_logit(train, lam=params.lam)
    elif params.kind == "svm":
        kind = KernelKind(params.kernel)
        if params.grid_search:
            C, spec, _ = grid_search(train.X, train.classes, kind, train.binning.n_classes,
                                     _band_score(train), seed=params.seed)
            log.info("grid search picked C=%g kernel=%s", C, spec)
        else:
            gamma = params.gamma if params.gamma is not None else default_gamma(train.X)
            C, spec = params.C, KernelSpec(kind, gamma, params.degree)
        learner = train_svm_ovo(train, spec, C)
    else:
        raise ValueError(f"unknown model kind {params.kind!r}")
    return TrainedModel(params.kind, learner, train.schema, train.binning, train.standardization,
                        tag=params.tag, config_digest=config_digest)


COMPARE_MODELS = (
    ModelParams("nb"),
    ModelParams("svm", kernel="rbf"),
    ModelParams("svm", kernel="poly", degree=3),
    ModelParams("logit"),
)


def compare(train: Dataset, test: Dataset, tolerances=DEFAULT_TOLERANCES, C: float = 1.0,
            lam: float = 1e-4, degree: int = 3, gamma: float | None = None,
            grid: bool = False, seed: int = 42, config_digest: str = "") -> list[EvaluationReport]:
    reports = []
    for base in COMPARE_MODELS:
        p = ModelParams(base.kind, base.kernel, gamma, degree, C, lam, grid, seed)
        m = fit_model(p, train, config_digest)
        reports.append(evaluate_model(m, test, tolerances, config_digest))
    return reports


def importance(corpus: Corpus, threshold: float = 100.0, lam: float = 1e-4,
               config_digest: str = "") -> ImportanceReport:
    ds = standardize(encode(corpus, default_schema()), StatsSource.FIT_HERE)
    model = train_binary_logit(ds, threshold, lam=lam)
    return importance_report(model, ds, config_digest)


def corpus_arrays(corpus: Corpus) -> np.ndarray:
    return np.array([r.iri for r in corpus.records])
