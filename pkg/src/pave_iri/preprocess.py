"""Corpus -> model-ready dataset: windowed aggregation, outlier removal,
feature encoding, standardisation and the seeded train/test split."""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .domain import (
    EXTENT_KIND,
    CrackFamily,
    CrackObservation,
    ExtentKind,
    FeatureSchema,
    FeatureVector,
    IriBinning,
    SegmentRecord,
    Severity,
    classes_of,
    default_schema,
)
from .errors import DomainError, SchemaError, SplitError, StateError
from .ingest import Corpus

log = logging.getLogger(__name__)

LENGTH_EPS = 1e-9
CONSTANT_STD = 1e-12


# ---------------------------------------------------------------------------
# aggregation and outliers
# ---------------------------------------------------------------------------


def _merge_window(window: list[SegmentRecord]) -> SegmentRecord:
    first = window[0]
    lengths = [r.length for r in window]
    total = sum(lengths)

    def wmean(values):
        return sum(l * v for l, v in zip(lengths, values)) / total

    acc: dict[tuple[CrackFamily, Severity], list[float]] = {}
    for l, r in zip(lengths, window):
        for c in r.cracks:
            a = acc.setdefault(c.key, [0.0, 0.0, 0.0])
            a[0] += c.extent if c.extent_kind is ExtentKind.FEET else l * c.extent
            a[1] += l * c.width
            a[2] += l * c.depth
    cracks = []
    for key, (ext, wid, dep) in acc.items():
        if EXTENT_KIND[key[0]] is ExtentKind.PERCENT:
            ext /= total
        cracks.append(CrackObservation(key[0], key[1], ext, wid / total, dep / total))
    return SegmentRecord(
        route_id=first.route_id,
        start_milepost=first.start_milepost,
        length=total,
        surface_type=first.surface_type,
        functional_class=first.functional_class,
        iri=sum(r.iri for r in window) / len(window),
        rut_depth=wmean(r.rut_depth for r in window),
        faulting=wmean(r.faulting for r in window),
        cracks=tuple(cracks),
    )


def aggregate(corpus: Corpus, target_length: float = 0.1) -> Corpus:
    """Merge consecutive same-route records into windows of ``target_length``.

    IRI is the plain mean; rutting, faulting, widths, depths and percent
    extents are length-weighted means; foot extents are summed. A window is
    cut short at a surface/functional-class change or a gap in coverage, and
    any piece shorter than ``target_length`` is dropped.
    """
    if not target_length > 0:
        raise DomainError("target_length must be > 0")
    if corpus.records:
        ratio = target_length / corpus.records[0].length
        if ratio < 1 - 1e-9 or abs(ratio - round(ratio)) > 1e-6:
            raise DomainError(
                f"target_length {target_length} is not a positive integer multiple of record length "
                f"{corpus.records[0].length}"
            )

    out: list[SegmentRecord] = []
    dropped_records = 0
    split_events = 0
    window: list[SegmentRecord] = []
    acc_len = 0.0

    def drop(reason: str):
        nonlocal dropped_records, window, acc_len
        if window:
            dropped_records += len(window)
            log.info("aggregate: dropped partial window of %d records on %s at %r (%s)",
                     len(window), window[0].route_id, window[0].start_milepost, reason)
        window, acc_len = [], 0.0

    for r in corpus.records:
        if window:
            prev = window[-1]
            if r.route_id != prev.route_id:
                drop("end of route")
            elif r.surface_type != prev.surface_type or r.functional_class != prev.functional_class:
                split_events += 1
                drop("attribute change")
            elif r.start_milepost > prev.end_milepost + LENGTH_EPS:
                drop("coverage gap")
        window.append(r)
        acc_len += r.length
        if acc_len > target_length * (1 + 1e-6):
            raise DomainError(f"record lengths do not tile windows of {target_length}")
        if acc_len >= target_length - LENGTH_EPS:
            out.append(_merge_window(window))
            window, acc_len = [], 0.0
    drop("trailing partial window")

    step = {
        "step": "aggregate",
        "target_length": target_length,
        "records_in": len(corpus),
        "records_out": len(out),
        "records_dropped": dropped_records,
        "attribute_splits": split_events,
    }
    log.info("%s", format_step(step))
    return corpus.with_records(out, step)


def remove_outliers(corpus: Corpus, threshold: float = 300.0) -> Corpus:
    """Drop records with IRI strictly greater than ``threshold``."""
    if not threshold > 0:
        raise DomainError("threshold must be > 0")
    kept = [r for r in corpus.records if not r.iri > threshold]
    step = {
        "step": "remove_outliers",
        "threshold": threshold,
        "records_in": len(corpus),
        "records_out": len(kept),
        "outliers_removed": len(corpus) - len(kept),
    }
    log.info("%s", format_step(step))
    return corpus.with_records(kept, step)


def format_step(step: dict) -> str:
    return json.dumps(step, sort_keys=False)


def format_provenance(steps) -> str:
    return "".join(format_step(s) + "\n" for s in steps)


# ---------------------------------------------------------------------------
# encoding and standardisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Standardization:
    """Per-feature affine transform ``(x - mean) / scale``.

    One-hot and constant features carry the identity (mean 0, scale 1).
    """

    mean: np.ndarray
    scale: np.ndarray
    constant: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "constant": [bool(c) for c in self.constant],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardization":
        return cls(np.array(d["mean"], dtype=float), np.array(d["scale"], dtype=float),
                   np.array(d["constant"], dtype=bool))


@dataclass(frozen=True)
class Dataset:
    """Design matrix plus the metadata needed to interpret it.

    ``record_ids`` index into the corpus the dataset was encoded from and
    survive shuffling, so train/test membership is traceable.
    """

    schema: FeatureSchema
    X: np.ndarray
    labels: np.ndarray
    binning: IriBinning
    record_ids: np.ndarray
    standardization: Standardization | None = None
    standardized: bool = False
    provenance: tuple[dict, ...] = field(default=())

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] != self.schema.dimension:
            raise DomainError("design matrix does not match schema dimension")
        if not (len(self.labels) == len(self.record_ids) == self.X.shape[0]):
            raise DomainError("row count mismatch")
        if not np.all(np.isfinite(self.X)):
            raise DomainError("design matrix contains NaN or infinite entries")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def classes(self) -> np.ndarray:
        return classes_of(self.labels, self.binning)

    @property
    def vectors(self) -> list[FeatureVector]:
        return [FeatureVector(x, float(y)) for x, y in zip(self.X, self.labels)]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return replace(self, X=self.X[idx], labels=self.labels[idx], record_ids=self.record_ids[idx])


class StatsSource(str, enum.Enum):
    FIT_HERE = "FitHere"
    REUSE = "Reuse"


def default_binning(width: float = 20.0, origin: float = 0.0, upper: float = 300.0) -> IriBinning:
    return IriBinning.covering(origin, width, upper)


def encode(corpus: Corpus, schema: FeatureSchema | None = None, binning: IriBinning | None = None) -> Dataset:
    schema = schema or default_schema()
    binning = binning or default_binning()
    d = schema.dimension
    families = set(schema.families)
    field_cols: list[tuple[int, str]] = []
    crack_cols: dict[tuple[CrackFamily, Severity], list[tuple[int, str]]] = {}
    onehot_cols: dict[tuple[str, str], int] = {}
    for j, e in enumerate(schema.entries):
        parts = e.source.split(":")
        if parts[0] == "field":
            field_cols.append((j, parts[1]))
        elif parts[0] == "crack":
            crack_cols.setdefault((CrackFamily(parts[1]), Severity(parts[2])), []).append((j, parts[3]))
        elif parts[0] == "onehot":
            onehot_cols[(parts[1], parts[2])] = j
        else:
            raise SchemaError(f"unknown feature source {e.source!r}")

    X = np.zeros((len(corpus), d))
    labels = np.empty(len(corpus))
    for i, r in enumerate(corpus.records):
        row = X[i]
        for j, name in field_cols:
            row[j] = getattr(r, name)
        for c in r.cracks:
            if c.family not in families:
                raise SchemaError(f"record {i} ({r.route_id}@{r.start_milepost}) has crack family "
                                  f"{c.family.value} absent from the schema")
            for j, m in crack_cols.get(c.key, ()):
                row[j] = getattr(c, m)
        for attr in ("surface_type", "functional_class"):
            j = onehot_cols.get((attr, getattr(r, attr).value))
            if j is not None:
                row[j] = 1.0
        labels[i] = r.iri
    step = {"step": "encode", "records_in": len(corpus), "dimension": d, "fingerprint": schema.fingerprint()}
    return Dataset(schema, X, labels, binning, np.arange(len(corpus), dtype=np.int64),
                   provenance=tuple(corpus.provenance) + (step,))


def fit_standardization(X: np.ndarray, numeric_mask: np.ndarray) -> Standardization:
    n = X.shape[0]
    mean = np.zeros(X.shape[1])
    scale = np.ones(X.shape[1])
    constant = np.zeros(X.shape[1], dtype=bool)
    if n >= 2:
        m = X.mean(axis=0)
        s = X.std(axis=0, ddof=1)
    else:
        m = X.mean(axis=0) if n else mean
        s = np.zeros(X.shape[1])
    const = numeric_mask & (s < CONSTANT_STD)
    use = numeric_mask & ~const
    mean[use] = m[use]
    scale[use] = s[use]
    constant[const] = True
    return Standardization(mean, scale, constant)


def standardize(dataset: Dataset, stats_source: StatsSource = StatsSource.FIT_HERE,
                stats: Standardization | None = None) -> Dataset:
    """Scale numeric features to zero mean, unit (n-1) standard deviation.

    ``Reuse`` applies ``stats`` (or the stats already attached to the
    dataset) without looking at this dataset's values.
    """
    stats_source = StatsSource(stats_source)
    if stats_source is StatsSource.FIT_HERE:
        stats = fit_standardization(dataset.X, dataset.schema.numeric_mask)
    else:
        stats = stats or dataset.standardization
        if stats is None:
            raise StateError("Reuse requested but no standardization statistics are present")
    if stats.mean.shape[0] != dataset.schema.dimension:
        raise StateError("standardization statistics do not match the schema dimension")
    step = {"step": "standardize", "source": stats_source.value,
            "constant_features": int(stats.constant.sum())}
    return replace(dataset, X=stats.apply(dataset.X), standardization=stats, standardized=True,
                   provenance=dataset.provenance + (step,))


# ---------------------------------------------------------------------------
# split
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def splitmix64(seed: int):
    """SplitMix64 generator yielding unsigned 64-bit integers."""
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def seeded_permutation(n: int, seed: int) -> np.ndarray:
    """Fisher-Yates shuffle of 0..n-1; for i from n-1 down to 1 swap i with
    ``next() mod (i+1)``."""
    perm = list(range(n))
    rng = splitmix64(seed)
    for i in range(n - 1, 0, -1):
        j = next(rng) % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 42

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise DomainError("train_fraction must lie in (0, 1)")


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    if n < 2:
        raise SplitError(f"need at least 2 rows to split, got {n}")
    perm = seeded_permutation(n, spec.seed)
    n_train = min(n - 1, max(1, math.ceil(n * spec.train_fraction - 1e-9)))
    return perm[:n_train], perm[n_train:]


def split(dataset: Dataset, spec: SplitSpec = SplitSpec()) -> tuple[Dataset, Dataset]:
    """Seeded partition; standardisation is fitted on the train half only and
    the same transform is applied to the test half."""
    if dataset.standardized:
        raise StateError("split expects an unstandardized dataset")
    tr, te = split_indices(len(dataset), spec)
    step = {"step": "split", "seed": spec.seed, "train_fraction": spec.train_fraction,
            "n_train": len(tr), "n_test": len(te)}
    train = replace(dataset.subset(tr), provenance=dataset.provenance + (step,))
    test = replace(dataset.subset(te), provenance=dataset.provenance + (step,))
    train = standardize(train, StatsSource.FIT_HERE)
    test = standardize(test, StatsSource.REUSE, train.standardization)
    return train, test
