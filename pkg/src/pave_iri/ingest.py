"""Read and write survey corpora as comma-delimited text.

Layout: a fixed header of segment columns followed by
``<family>_<severity>_{extent,width,depth}`` for every registered crack family
and severity. Absent crack columns and all-zero triples mean "no distress".
"""

from __future__ import annotations

import csv
import io
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from .domain import (
    MEASURES,
    CrackFamily,
    CrackObservation,
    FunctionalClass,
    SegmentRecord,
    Severity,
    SurfaceType,
    crack_feature_id,
)
from .errors import EmptyCorpusError, RowError, SchemaError, ValidationError

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
OVERLAP_EPS = 1e-9

BASE_COLUMNS = (
    "route_id",
    "start_milepost",
    "length",
    "surface_type",
    "functional_class",
    "iri",
    "rut_depth",
    "faulting",
)
CRACK_COLUMNS = tuple(
    crack_feature_id(f, s, m) for f in CrackFamily for s in Severity for m in MEASURES
)
HEADER = BASE_COLUMNS + CRACK_COLUMNS


@dataclass(frozen=True)
class Corpus:
    records: tuple[SegmentRecord, ...]
    source: str = "synthetic"
    schema_version: str = SCHEMA_VERSION
    provenance: tuple[dict, ...] = ()
    rejected: tuple[tuple[int, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        check_order(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def with_records(self, records, step: dict | None = None) -> "Corpus":
        prov = self.provenance + ((step,) if step else ())
        return Corpus(tuple(records), self.source, self.schema_version, prov)


def sort_key(r: SegmentRecord) -> tuple[str, float]:
    return (r.route_id, r.start_milepost)


def check_order(records) -> None:
    prev = None
    for r in records:
        if prev is not None:
            if sort_key(r) < sort_key(prev):
                raise ValidationError("records are not sorted by (route_id, start_milepost)")
            if r.route_id == prev.route_id and r.start_milepost < prev.start_milepost + prev.length - OVERLAP_EPS:
                raise ValidationError(
                    f"route {r.route_id}: record at milepost {r.start_milepost!r} overlaps the previous one"
                )
        prev = r


def _parse_float(cell: str, column: str, line: int) -> float:
    try:
        return float(cell.strip().replace("−", "-"))
    except ValueError:
        raise RowError(f"column {column!r}: non-numeric value {cell!r}", line) from None


def _parse_row(row: list[str], index: dict[str, int], crack_index: list, line: int) -> SegmentRecord:
    if len(row) != len(index):
        raise RowError(f"expected {len(index)} cells, found {len(row)}", line)
    try:
        surface = SurfaceType(row[index["surface_type"]].strip())
    except ValueError:
        raise RowError(f"unknown surface_type {row[index['surface_type']]!r}", line) from None
    try:
        fclass = FunctionalClass(row[index["functional_class"]].strip())
    except ValueError:
        raise RowError(f"unknown functional_class {row[index['functional_class']]!r}", line) from None
    num = {c: _parse_float(row[index[c]], c, line) for c in BASE_COLUMNS[5:] + ("start_milepost", "length")}
    cracks = []
    for fam, sev, cols in crack_index:
        vals = [0.0 if i is None else _parse_float(row[i], name, line) for i, name in cols]
        if vals[0] or vals[1] or vals[2]:
            try:
                cracks.append(CrackObservation(fam, sev, *vals))
            except ValidationError as e:
                raise ValidationError(str(e), line) from None
    try:
        return SegmentRecord(
            route_id=row[index["route_id"]].strip(),
            start_milepost=num["start_milepost"],
            length=num["length"],
            surface_type=surface,
            functional_class=fclass,
            iri=num["iri"],
            rut_depth=num["rut_depth"],
            faulting=num["faulting"],
            cracks=tuple(cracks),
        )
    except ValidationError as e:
        raise ValidationError(str(e), line) from None


def parse_corpus(path: str | os.PathLike, strict: bool = True) -> Corpus:
    """Parse a corpus file.

    In strict mode the first invalid row raises. In lenient mode invalid rows
    are skipped and reported in ``Corpus.rejected`` as (line, message).
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyCorpusError(f"{path}: empty file")
        header = [h.strip() for h in header]
        index = {name: i for i, name in enumerate(header)}
        for col in BASE_COLUMNS:
            if col not in index:
                raise SchemaError(f"{path}: missing required column {col!r}")
        unknown = set(index) - set(HEADER)
        if unknown:
            raise SchemaError(f"{path}: unknown columns {sorted(unknown)}")
        crack_index = [
            (f, s, [(index.get(crack_feature_id(f, s, m)), crack_feature_id(f, s, m)) for m in MEASURES])
            for f in CrackFamily
            for s in Severity
        ]
        crack_index = [c for c in crack_index if any(i is not None for i, _ in c[2])]

        records = []
        rejected = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                records.append(_parse_row(row, index, crack_index, line))
            except ValidationError as e:
                if strict:
                    raise
                rejected.append((line, str(e)))
                log.warning("%s: skipped %s", path, e)
    if not records:
        if rejected:
            raise EmptyCorpusError(f"{path}: no valid rows ({len(rejected)} rejected)")
        raise EmptyCorpusError(f"{path}: no data rows")
    records.sort(key=sort_key)
    return Corpus(tuple(records), source=str(path), rejected=tuple(rejected))


def _fmt(x: float) -> str:
    return repr(float(x))


def format_corpus(corpus: Corpus) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    zero = ("0", "0", "0")
    for r in corpus.records:
        row = [
            r.route_id,
            _fmt(r.start_milepost),
            _fmt(r.length),
            r.surface_type.value,
            r.functional_class.value,
            _fmt(r.iri),
            _fmt(r.rut_depth),
            _fmt(r.faulting),
        ]
        by_key = {c.key: c for c in r.cracks}
        for f in CrackFamily:
            for s in Severity:
                c = by_key.get((f, s))
                row.extend(zero if c is None else (_fmt(c.extent), _fmt(c.width), _fmt(c.depth)))
        w.writerow(row)
    return buf.getvalue()


def write_corpus(corpus: Corpus, path: str | os.PathLike) -> None:
    text = format_corpus(corpus)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
