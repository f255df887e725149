"""Seeded synthetic survey corpora with a planted distress -> IRI relation.

Each 0.1-mile segment gets a latent condition score that drives how often
and how severely it cracks and ruts. Twenty 0.005-mile records are drawn
per segment; their aggregate features feed a linear model

    IRI_segment = baseline(surface, class) + sum_j w_j * feature_j

clipped to ``iri_range``. Every raw record then reports the segment IRI
plus Gaussian noise, and with probability ``spike_rate`` an isolated spike
in (300, 600].
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .domain import (
    EXTENT_KIND,
    CrackFamily,
    CrackObservation,
    ExtentKind,
    FeatureKind,
    FunctionalClass,
    SegmentRecord,
    Severity,
    SurfaceType,
    crack_feature_id,
    default_schema,
)
from .errors import DomainError
from .ingest import Corpus
from .preprocess import _merge_window

RECORD_LENGTH = 0.005
RECORDS_PER_SEGMENT = 20
ROUTES = (
    # route id, P(functional class), P(surface type)
    ("I-70", (0.85, 0.0, 0.15), (0.45, 0.35, 0.10, 0.10)),
    ("US-52", (0.0, 0.80, 0.20), (0.60, 0.20, 0.05, 0.15)),
    ("US-41", (0.0, 0.60, 0.40), (0.65, 0.15, 0.05, 0.15)),
)

# Per-record probability that a (family, severity) crack is present on a
# segment in the worst condition; scaled down linearly for better segments.
_FAMILY_RATE = {
    CrackFamily.NON_WP_LONGITUDINAL: 0.55,
    CrackFamily.WP_LONGITUDINAL: 0.45,
    CrackFamily.WP_ALLIGATOR: 0.25,
    CrackFamily.EDGE_LONGITUDINAL: 0.45,
    CrackFamily.EDGE_ALLIGATOR: 0.15,
    CrackFamily.TRANSVERSE: 0.50,
    CrackFamily.BLOCK: 0.10,
    CrackFamily.LONGITUDINAL_SPALL: 0.15,
    CrackFamily.TRANSVERSE_SPALL: 0.15,
    CrackFamily.SHOULDER: 0.20,
    CrackFamily.CORNER: 0.08,
}
_SEVERITY_SHARE = {Severity.LOW: 1.0, Severity.MEDIUM: 0.6, Severity.HIGH: 0.3}
_DEPTH_MEANS = (0.10, 0.25, 0.45)

DEFAULT_WEIGHTS = {
    "rut_depth": 750.0,
    "WPAlligator_High_width": 135.0,
    "WPAlligator_Medium_width": 75.0,
    "EdgeAlligator_High_width": 120.0,
    "WPLongitudinal_High_width": 105.0,
    "WPLongitudinal_Medium_width": 45.0,
    "LongitudinalSpall_High_width": 90.0,
    "LongitudinalSpall_High_depth": 120.0,
    "LongitudinalSpall_Medium_depth": 60.0,
    "WPAlligator_High_extent": 2.4,
    "WPAlligator_Medium_extent": 1.2,
    "EdgeAlligator_High_extent": 1.8,
    "Block_High_extent": 1.5,
    "Transverse_High_extent": 0.24,
    "Transverse_Medium_extent": 0.12,
    "WPLongitudinal_High_extent": 0.18,
    "NonWPLongitudinal_Low_extent": -0.03,
}
DEFAULT_SURFACE_OFFSETS = {
    "Asphalt": -8.0,
    "JointedConcrete": 12.0,
    "ContinuousConcrete": 0.0,
    "Composite": 2.0,
}
DEFAULT_CLASS_OFFSETS = {"Interstate": -8.0, "USRoute": 2.0, "StateRoute": 6.0}


@dataclass(frozen=True)
class GeneratorProfile:
    n_segments: int = 2520
    seed: int = 42
    iri_range: tuple[float, float] = (30.0, 300.0)
    rut_range: tuple[float, float] = (0.02, 0.2)
    fault_spread: float = 0.08
    crack_width_means: tuple[float, float, float] = (0.21, 0.44, 0.52)
    crack_extent_decay: float = 0.12
    planted_weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    base_iri: float = 50.0
    surface_offsets: dict = field(default_factory=lambda: dict(DEFAULT_SURFACE_OFFSETS))
    class_offsets: dict = field(default_factory=lambda: dict(DEFAULT_CLASS_OFFSETS))
    noise_sigma: float = 20.0
    spike_rate: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "iri_range", tuple(float(v) for v in self.iri_range))
        object.__setattr__(self, "rut_range", tuple(float(v) for v in self.rut_range))
        object.__setattr__(self, "crack_width_means", tuple(float(v) for v in self.crack_width_means))
        if int(self.n_segments) != self.n_segments or self.n_segments < 1:
            raise DomainError(f"n_segments must be a positive integer, got {self.n_segments!r}")
        lo, hi = self.iri_range
        if not 0 < lo < hi:
            raise DomainError("iri_range must satisfy 0 < low < high")
        lo, hi = self.rut_range
        if not 0 < lo < hi:
            raise DomainError("rut_range must satisfy 0 < low < high")
        if not self.fault_spread > 0 or not self.crack_extent_decay > 0:
            raise DomainError("fault_spread and crack_extent_decay must be > 0")
        if any(w <= 0 for w in self.crack_width_means):
            raise DomainError("crack width means must be > 0")
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be >= 0")
        if not 0 <= self.spike_rate <= 0.05:
            raise DomainError("spike_rate must lie in [0, 0.05]")
        numeric = set(_numeric_ids())
        unknown = set(self.planted_weights) - numeric
        if unknown:
            raise DomainError(f"planted weights for unknown features: {sorted(unknown)}")
        if set(self.surface_offsets) - {s.value for s in SurfaceType}:
            raise DomainError("unknown surface type in surface_offsets")
        if set(self.class_offsets) - {c.value for c in FunctionalClass}:
            raise DomainError("unknown functional class in class_offsets")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["iri_range"] = list(self.iri_range)
        d["rut_range"] = list(self.rut_range)
        d["crack_width_means"] = list(self.crack_width_means)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorProfile":
        return cls(**d)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "GeneratorProfile":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def baseline(self, surface: SurfaceType, fclass: FunctionalClass) -> float:
        return (self.base_iri + self.surface_offsets.get(surface.value, 0.0)
                + self.class_offsets.get(fclass.value, 0.0))


def _numeric_ids() -> list[str]:
    return [e.feature_id for e in default_schema().entries if e.kind is FeatureKind.NUMERIC]


def ground_truth(profile: GeneratorProfile) -> dict:
    """The exact planted coefficients keyed by numeric feature id, plus the
    baseline for every (surface, functional class) pair."""
    return {
        "weights": {fid: float(profile.planted_weights.get(fid, 0.0)) for fid in _numeric_ids()},
        "baselines": {
            f"{s.value}/{c.value}": profile.baseline(s, c) for s in SurfaceType for c in FunctionalClass
        },
        "base_iri": profile.base_iri,
        "surface_offsets": {s.value: float(profile.surface_offsets.get(s.value, 0.0)) for s in SurfaceType},
        "class_offsets": {c.value: float(profile.class_offsets.get(c.value, 0.0)) for c in FunctionalClass},
    }


def _segment_features(merged: SegmentRecord, lookup: dict) -> np.ndarray:
    x = np.zeros(len(lookup["ids"]))
    for j, name in lookup["fields"]:
        x[j] = getattr(merged, name)
    for c in merged.cracks:
        for j, m in lookup["cracks"].get(c.key, ()):
            x[j] = getattr(c, m)
    return x


def _feature_lookup() -> dict:
    ids, fields, cracks = [], [], {}
    for e in default_schema().entries:
        if e.kind is not FeatureKind.NUMERIC:
            continue
        j = len(ids)
        ids.append(e.feature_id)
        parts = e.source.split(":")
        if parts[0] == "field":
            fields.append((j, parts[1]))
        else:
            cracks.setdefault((CrackFamily(parts[1]), Severity(parts[2])), []).append((j, parts[3]))
    return {"ids": ids, "fields": fields, "cracks": cracks}


def _sections(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    """Split n segments into runs of 8..60 segments sharing attributes."""
    out, start = [], 0
    while start < n:
        L = int(rng.integers(8, 61))
        out.append((start, min(n, start + L)))
        start += L
    return out


def generate_corpus(profile: GeneratorProfile) -> Corpus:
    rng = np.random.default_rng(profile.seed)
    lookup = _feature_lookup()
    w = np.array([float(profile.planted_weights.get(fid, 0.0)) for fid in lookup["ids"]])
    families = list(CrackFamily)
    severities = list(Severity)
    rec_feet = RECORD_LENGTH * 5280.0
    lo_iri, hi_iri = profile.iri_range
    rut_lo, rut_hi = profile.rut_range

    n_routes = len(ROUTES)
    per_route = [profile.n_segments // n_routes + (1 if r < profile.n_segments % n_routes else 0)
                 for r in range(n_routes)]
    surfaces = list(SurfaceType)
    fclasses = list(FunctionalClass)

    records: list[SegmentRecord] = []
    for (route_id, p_class, p_surface), n_seg in zip(ROUTES, per_route):
        if n_seg == 0:
            continue
        for s0, s1 in _sections(rng, n_seg):
            fclass = fclasses[int(rng.choice(3, p=p_class))]
            surface = surfaces[int(rng.choice(4, p=p_surface))]
            base = profile.baseline(surface, fclass)
            for seg in range(s0, s1):
                cond = float(rng.beta(1.6, 2.4))
                rut_level = rut_lo + (rut_hi - rut_lo) * cond
                ruts = np.clip(rut_level + rng.normal(0.0, 0.01, RECORDS_PER_SEGMENT), 0.0, None)
                faults = rng.normal(0.0, profile.fault_spread, RECORDS_PER_SEGMENT)
                if surface is SurfaceType.ASPHALT:
                    faults = faults * 0.25
                cracks_per_record: list[list[CrackObservation]] = [[] for _ in range(RECORDS_PER_SEGMENT)]
                for fam in families:
                    for si, sev in enumerate(severities):
                        p = _FAMILY_RATE[fam] * _SEVERITY_SHARE[sev] * (0.15 + 0.85 * cond) ** (1 + si)
                        present = rng.random(RECORDS_PER_SEGMENT) < p
                        k = int(present.sum())
                        if k == 0:
                            continue
                        if EXTENT_KIND[fam] is ExtentKind.FEET:
                            ext = np.minimum(rng.exponential(profile.crack_extent_decay * rec_feet, k), rec_feet)
                        else:
                            ext = np.minimum(rng.exponential(15.0 * (0.5 + cond), k), 100.0)
                        wm = profile.crack_width_means[si]
                        wid = np.clip(rng.normal(wm, 0.25 * wm, k), 0.01, None)
                        dep = np.clip(rng.normal(_DEPTH_MEANS[si], 0.25 * _DEPTH_MEANS[si], k), 0.01, None)
                        for t, r_idx in enumerate(np.flatnonzero(present)):
                            cracks_per_record[r_idx].append(
                                CrackObservation(fam, sev, float(ext[t]), float(wid[t]), float(dep[t]))
                            )
                noise = rng.normal(0.0, 1.0, RECORDS_PER_SEGMENT)
                spikes = rng.random(RECORDS_PER_SEGMENT) < profile.spike_rate
                spike_vals = 600.0 - 300.0 * rng.random(RECORDS_PER_SEGMENT)

                raw = [
                    SegmentRecord(
                        route_id=route_id,
                        start_milepost=round((seg * RECORDS_PER_SEGMENT + i) * RECORD_LENGTH, 6),
                        length=RECORD_LENGTH,
                        surface_type=surface,
                        functional_class=fclass,
                        iri=0.0,
                        rut_depth=float(ruts[i]),
                        faulting=float(faults[i]),
                        cracks=tuple(cracks_per_record[i]),
                    )
                    for i in range(RECORDS_PER_SEGMENT)
                ]
                x = _segment_features(_merge_window(raw), lookup)
                seg_iri = float(np.clip(base + float(w @ x), lo_iri, hi_iri))
                for i, r in enumerate(raw):
                    if spikes[i]:
                        iri = float(spike_vals[i])
                    else:
                        iri = max(0.0, seg_iri + profile.noise_sigma * float(noise[i]))
                    records.append(SegmentRecord(
                        r.route_id, r.start_milepost, r.length, r.surface_type, r.functional_class,
                        iri, r.rut_depth, r.faulting, r.cracks,
                    ))
    records.sort(key=lambda r: (r.route_id, r.start_milepost))
    return Corpus(tuple(records), source="synthetic")
