"""Core value types: survey records, crack observations, the feature registry
and IRI binning.

Nothing in here does I/O or learning.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SchemaError, ValidationError


class SurfaceType(str, enum.Enum):
    ASPHALT = "Asphalt"
    JOINTED_CONCRETE = "JointedConcrete"
    CONTINUOUS_CONCRETE = "ContinuousConcrete"
    COMPOSITE = "Composite"


class FunctionalClass(str, enum.Enum):
    INTERSTATE = "Interstate"
    US_ROUTE = "USRoute"
    STATE_ROUTE = "StateRoute"


class CrackFamily(str, enum.Enum):
    NON_WP_LONGITUDINAL = "NonWPLongitudinal"
    WP_LONGITUDINAL = "WPLongitudinal"
    WP_ALLIGATOR = "WPAlligator"
    EDGE_LONGITUDINAL = "EdgeLongitudinal"
    EDGE_ALLIGATOR = "EdgeAlligator"
    TRANSVERSE = "Transverse"
    BLOCK = "Block"
    LONGITUDINAL_SPALL = "LongitudinalSpall"
    TRANSVERSE_SPALL = "TransverseSpall"
    SHOULDER = "Shoulder"
    CORNER = "Corner"


class Severity(str, enum.Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


class ExtentKind(str, enum.Enum):
    FEET = "feet"
    PERCENT = "percent"


class FeatureKind(str, enum.Enum):
    NUMERIC = "Numeric"
    ONE_HOT = "OneHot"


# Area-type distresses are reported as percent of the segment; everything else
# as crack length in feet.
EXTENT_KIND: dict[CrackFamily, ExtentKind] = {
    f: ExtentKind.PERCENT
    if f in (CrackFamily.WP_ALLIGATOR, CrackFamily.EDGE_ALLIGATOR, CrackFamily.BLOCK)
    else ExtentKind.FEET
    for f in CrackFamily
}

MEASURES = ("extent", "width", "depth")


@dataclass(frozen=True)
class CrackObservation:
    family: CrackFamily
    severity: Severity
    extent: float = 0.0
    width: float = 0.0
    depth: float = 0.0

    def __post_init__(self):
        for name in MEASURES:
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(
                    f"{self.family.value}_{self.severity.value}_{name} must be a finite value >= 0, got {v!r}"
                )

    @property
    def key(self) -> tuple[CrackFamily, Severity]:
        return (self.family, self.severity)

    @property
    def extent_kind(self) -> ExtentKind:
        return EXTENT_KIND[self.family]


@dataclass(frozen=True)
class SegmentRecord:
    """One surveyed pavement segment.

    Units: mileposts and length in miles, IRI in inches/mile, rutting and
    faulting in inches. ``cracks`` is kept sorted by (family, severity) in
    registry order so equal records compare equal.
    """

    route_id: str
    start_milepost: float
    length: float
    surface_type: SurfaceType
    functional_class: FunctionalClass
    iri: float
    rut_depth: float
    faulting: float
    cracks: tuple[CrackObservation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "surface_type", SurfaceType(self.surface_type))
        object.__setattr__(self, "functional_class", FunctionalClass(self.functional_class))
        for name in ("start_milepost", "length", "iri", "rut_depth", "faulting"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.length <= 0:
            raise ValidationError(f"length must be > 0, got {self.length!r}")
        if self.iri < 0:
            raise ValidationError(f"iri must be >= 0, got {self.iri!r}")
        if self.rut_depth < 0:
            raise ValidationError(f"rut_depth must be >= 0, got {self.rut_depth!r}")
        keys = [c.key for c in self.cracks]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate (family, severity) crack observation")
        object.__setattr__(self, "cracks", tuple(sorted(self.cracks, key=_crack_order)))

    def crack(self, family: CrackFamily, severity: Severity) -> CrackObservation | None:
        for c in self.cracks:
            if c.family is family and c.severity is severity:
                return c
        return None

    @property
    def end_milepost(self) -> float:
        return self.start_milepost + self.length


_FAMILY_INDEX = {f: i for i, f in enumerate(CrackFamily)}
_SEVERITY_INDEX = {s: i for i, s in enumerate(Severity)}


def _crack_order(c: CrackObservation) -> tuple[int, int]:
    return (_FAMILY_INDEX[c.family], _SEVERITY_INDEX[c.severity])


# ---------------------------------------------------------------------------
# Feature registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureEntry:
    """One column of the design matrix.

    ``source`` is a colon-separated locator: ``field:<attr>``,
    ``crack:<family>:<severity>:<measure>`` or ``onehot:<attr>:<value>``.
    """

    feature_id: str
    kind: FeatureKind
    source: str


@dataclass(frozen=True)
class FeatureSchema:
    entries: tuple[FeatureEntry, ...]
    families: tuple[CrackFamily, ...] = tuple(CrackFamily)

    def __post_init__(self):
        ids = [e.feature_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise SchemaError("feature ids must be unique")

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def feature_ids(self) -> list[str]:
        return [e.feature_id for e in self.entries]

    @property
    def numeric_mask(self) -> np.ndarray:
        return np.array([e.kind is FeatureKind.NUMERIC for e in self.entries])

    def one_hot_groups(self) -> dict[str, list[int]]:
        groups: dict[str, list[int]] = {}
        for i, e in enumerate(self.entries):
            if e.kind is FeatureKind.ONE_HOT:
                groups.setdefault(e.source.split(":")[1], []).append(i)
        return groups

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for e in self.entries:
            h.update(f"{e.feature_id}|{e.kind.value}|{e.source}\n".encode())
        h.update(",".join(f.value for f in self.families).encode())
        return h.hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "entries": [[e.feature_id, e.kind.value, e.source] for e in self.entries],
            "families": [f.value for f in self.families],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSchema":
        return cls(
            entries=tuple(FeatureEntry(i, FeatureKind(k), s) for i, k, s in d["entries"]),
            families=tuple(CrackFamily(f) for f in d["families"]),
        )


def crack_feature_id(family: CrackFamily, severity: Severity, measure: str) -> str:
    return f"{family.value}_{severity.value}_{measure}"


# Width/depth features retained in the default registry: the crack types whose
# geometry the survey vendor reports reliably enough to model.
_WIDTH_FAMILIES = (
    CrackFamily.WP_LONGITUDINAL,
    CrackFamily.WP_ALLIGATOR,
    CrackFamily.EDGE_ALLIGATOR,
    CrackFamily.LONGITUDINAL_SPALL,
)
_DEPTH_KEYS = (
    (CrackFamily.LONGITUDINAL_SPALL, Severity.MEDIUM),
    (CrackFamily.LONGITUDINAL_SPALL, Severity.HIGH),
    (CrackFamily.TRANSVERSE_SPALL, Severity.MEDIUM),
    (CrackFamily.TRANSVERSE_SPALL, Severity.HIGH),
)


def default_schema() -> FeatureSchema:
    """The 58-feature registry: 51 numeric distress features + 7 one-hots."""
    entries: list[FeatureEntry] = [
        FeatureEntry("rut_depth", FeatureKind.NUMERIC, "field:rut_depth"),
        FeatureEntry("faulting", FeatureKind.NUMERIC, "field:faulting"),
    ]
    for fam in CrackFamily:
        for sev in Severity:
            entries.append(
                FeatureEntry(crack_feature_id(fam, sev, "extent"), FeatureKind.NUMERIC,
                             f"crack:{fam.value}:{sev.value}:extent")
            )
    for fam in _WIDTH_FAMILIES:
        for sev in Severity:
            entries.append(
                FeatureEntry(crack_feature_id(fam, sev, "width"), FeatureKind.NUMERIC,
                             f"crack:{fam.value}:{sev.value}:width")
            )
    for fam, sev in _DEPTH_KEYS:
        entries.append(
            FeatureEntry(crack_feature_id(fam, sev, "depth"), FeatureKind.NUMERIC,
                         f"crack:{fam.value}:{sev.value}:depth")
        )
    for st in SurfaceType:
        entries.append(FeatureEntry(f"surface_type={st.value}", FeatureKind.ONE_HOT,
                                    f"onehot:surface_type:{st.value}"))
    for fc in FunctionalClass:
        entries.append(FeatureEntry(f"functional_class={fc.value}", FeatureKind.ONE_HOT,
                                    f"onehot:functional_class:{fc.value}"))
    return FeatureSchema(tuple(entries))


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    label_iri: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise DomainError("feature vector must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise ValidationError("feature vector contains NaN or infinite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def check_schema(self, schema: FeatureSchema) -> None:
        if self.values.shape[0] != schema.dimension:
            raise DomainError(f"vector length {self.values.shape[0]} != schema dimension {schema.dimension}")
        for group, idx in schema.one_hot_groups().items():
            if self.values[idx].sum() != 1.0:
                raise ValidationError(f"one-hot group {group} does not sum to 1")


# ---------------------------------------------------------------------------
# IRI binning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IriBinning:
    """Half-open contiguous bins [origin + k*width, origin + (k+1)*width)."""

    origin: float = 0.0
    width: float = 20.0
    n_classes: int = 15

    def __post_init__(self):
        if not (math.isfinite(self.width) and self.width > 0):
            raise DomainError("bin width must be > 0")
        if int(self.n_classes) != self.n_classes or self.n_classes < 1:
            raise DomainError("n_classes must be a positive integer")
        if not math.isfinite(self.origin):
            raise DomainError("origin must be finite")

    @property
    def upper(self) -> float:
        return self.origin + self.width * self.n_classes

    def edges(self) -> np.ndarray:
        return self.origin + self.width * np.arange(self.n_classes + 1)

    def to_dict(self) -> dict:
        return {"origin": self.origin, "width": self.width, "n_classes": self.n_classes}

    @classmethod
    def covering(cls, origin: float, width: float, upper: float) -> "IriBinning":
        """Smallest binning from ``origin`` whose range reaches ``upper``."""
        return cls(origin, width, max(1, int(math.ceil((upper - origin) / width - 1e-12))))


def class_of(iri: float, binning: IriBinning) -> int:
    if not iri >= binning.origin:
        raise DomainError(f"iri {iri!r} below binning origin {binning.origin!r}")
    k = int(math.floor((iri - binning.origin) / binning.width))
    # guard against division rounding across an edge
    if k > 0 and binning.origin + k * binning.width > iri:
        k -= 1
    elif binning.origin + (k + 1) * binning.width <= iri:
        k += 1
    return min(k, binning.n_classes - 1)


def classes_of(iri: np.ndarray, binning: IriBinning) -> np.ndarray:
    """Vectorised :func:`class_of`."""
    iri = np.asarray(iri, dtype=float)
    if np.any(~(iri >= binning.origin)):
        raise DomainError("iri below binning origin")
    k = np.floor((iri - binning.origin) / binning.width).astype(np.int64)
    k = np.where((k > 0) & (binning.origin + k * binning.width > iri), k - 1, k)
    k = np.where(binning.origin + (k + 1) * binning.width <= iri, k + 1, k)
    return np.minimum(k, binning.n_classes - 1)


def representative_of(k: int, binning: IriBinning) -> float:
    if int(k) != k or not 0 <= k < binning.n_classes:
        raise DomainError(f"class {k!r} outside 0..{binning.n_classes - 1}")
    return binning.origin + (k + 0.5) * binning.width


def representatives(classes: np.ndarray, binning: IriBinning) -> np.ndarray:
    classes = np.asarray(classes)
    if np.any((classes < 0) | (classes >= binning.n_classes)):
        raise DomainError("class index out of range")
    return binning.origin + (classes + 0.5) * binning.width
