import csv

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pave_iri.domain import CrackFamily, Severity, SurfaceType, FunctionalClass
from pave_iri.errors import EmptyCorpusError, RowError, SchemaError, ValidationError
from pave_iri.ingest import BASE_COLUMNS, CRACK_COLUMNS, HEADER, Corpus, format_corpus, parse_corpus, write_corpus

from conftest import crack, make_record, run_of

BASE_ROW = {"route_id": "US-52", "start_milepost": "0", "length": "0.005", "surface_type": "Asphalt",
            "functional_class": "USRoute", "iri": "95", "rut_depth": "0.1", "faulting": "0"}


def write_rows(path, rows, header=BASE_COLUMNS):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([r.get(h, "0") for h in header])
    return path


def test_two_rows_are_parsed_and_sorted(tmp_path):
    rows = [dict(BASE_ROW, start_milepost="0.005", iri="80"), dict(BASE_ROW)]
    c = parse_corpus(write_rows(tmp_path / "c.csv", rows))
    assert len(c) == 2
    assert [r.start_milepost for r in c.records] == [0.0, 0.005]
    assert c.records[0].iri == 95.0


def test_header_only_is_empty_corpus(tmp_path):
    with pytest.raises(EmptyCorpusError):
        parse_corpus(write_rows(tmp_path / "c.csv", []))
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(EmptyCorpusError):
        parse_corpus(tmp_path / "e.csv")


@pytest.mark.parametrize("value", ["-5", "−5"])
def test_negative_iri_cites_row(tmp_path, value):
    rows = [dict(BASE_ROW), dict(BASE_ROW, start_milepost="0.005", iri=value)]
    with pytest.raises(ValidationError, match="line 3"):
        parse_corpus(write_rows(tmp_path / "c.csv", rows))


def test_non_numeric_cell_is_row_error(tmp_path):
    rows = [dict(BASE_ROW, rut_depth="deep")]
    with pytest.raises(RowError, match="line 2.*rut_depth"):
        parse_corpus(write_rows(tmp_path / "c.csv", rows))


def test_missing_column_is_named(tmp_path):
    header = tuple(h for h in BASE_COLUMNS if h != "faulting")
    with pytest.raises(SchemaError, match="faulting"):
        parse_corpus(write_rows(tmp_path / "c.csv", [BASE_ROW], header))


def test_unknown_column_rejected(tmp_path):
    with pytest.raises(SchemaError, match="mystery"):
        parse_corpus(write_rows(tmp_path / "c.csv", [BASE_ROW], BASE_COLUMNS + ("mystery",)))


def test_missing_crack_columns_mean_absent(tmp_path):
    c = parse_corpus(write_rows(tmp_path / "c.csv", [BASE_ROW]))
    assert c.records[0].cracks == ()


def test_partial_crack_columns(tmp_path):
    header = BASE_COLUMNS + ("Block_High_extent",)
    c = parse_corpus(write_rows(tmp_path / "c.csv", [dict(BASE_ROW, Block_High_extent="12.5")], header))
    (obs,) = c.records[0].cracks
    assert obs.key == (CrackFamily.BLOCK, Severity.HIGH)
    assert obs.extent == 12.5 and obs.width == 0.0


def test_overlapping_records_rejected(tmp_path):
    rows = [dict(BASE_ROW), dict(BASE_ROW, start_milepost="0.003")]
    with pytest.raises(ValidationError, match="overlap"):
        parse_corpus(write_rows(tmp_path / "c.csv", rows))


def test_lenient_mode_collects_rejections(tmp_path):
    rows = [dict(BASE_ROW), dict(BASE_ROW, start_milepost="0.005", iri="-1"),
            dict(BASE_ROW, start_milepost="0.01", length="x")]
    c = parse_corpus(write_rows(tmp_path / "c.csv", rows), strict=False)
    assert len(c) == 1
    assert [line for line, _ in c.rejected] == [3, 4]


def test_empty_corpus_writes_header_only(tmp_path):
    p = tmp_path / "c.csv"
    write_corpus(Corpus(()), p)
    assert p.read_text() == ",".join(HEADER) + "\n"


def test_crack_column_count():
    assert len(CRACK_COLUMNS) == 3 * 11 * 3
    assert len(HEADER) == 8 + 99


def test_all_families_populated_round_trip(tmp_path):
    cracks = [crack(f.value, s.value, 1.5 + i, 0.25, 0.125)
              for i, (f, s) in enumerate((f, s) for f in CrackFamily for s in Severity)]
    c = Corpus((make_record(cracks=cracks),))
    p = tmp_path / "c.csv"
    write_corpus(c, p)
    header = p.read_text().splitlines()[0].split(",")
    assert header[:8] == list(BASE_COLUMNS)
    assert sum(h.endswith(("_extent", "_width", "_depth")) for h in header[8:]) == 99
    assert parse_corpus(p).records == c.records


def test_one_record_round_trip(tmp_path):
    c = Corpus((make_record(iri=123.456789012345, fault=-0.0123, cracks=(crack("Corner", "Medium", 3, 0.4, 0.2),)),))
    p = tmp_path / "c.csv"
    write_corpus(c, p)
    assert parse_corpus(p).records == c.records


def test_output_uses_lf_line_endings(small_corpus, tmp_path):
    p = tmp_path / "c.csv"
    write_corpus(small_corpus, p)
    assert b"\r" not in p.read_bytes()


pos = st.floats(0.0, 1e4, allow_nan=False, allow_infinity=False)
crack_st = st.builds(
    lambda f, s, e, w, d: crack(f.value, s.value, e, w, d),
    st.sampled_from(list(CrackFamily)), st.sampled_from(list(Severity)), pos, pos, pos,
)
record_st = st.builds(
    lambda iri, rut, fault, surface, fclass, cracks: dict(
        iri=iri, rut=rut, fault=fault, surface=surface, fclass=fclass,
        cracks=tuple({c.key: c for c in cracks if (c.extent, c.width, c.depth) != (0, 0, 0)}.values())),
    pos, st.floats(0, 5, allow_nan=False), st.floats(-1, 1, allow_nan=False),
    st.sampled_from([s.value for s in SurfaceType]), st.sampled_from([f.value for f in FunctionalClass]),
    st.lists(crack_st, max_size=6),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(record_st, min_size=1, max_size=8))
def test_round_trip_property(tmp_path_factory, specs):
    recs = tuple(make_record("R", i * 0.005, 0.005, **s) for i, s in enumerate(specs))
    c = Corpus(recs)
    p = tmp_path_factory.mktemp("rt") / "c.csv"
    write_corpus(c, p)
    back = parse_corpus(p)
    assert back.records == c.records
    assert format_corpus(back) == format_corpus(c)


def test_run_helper_is_contiguous():
    recs = run_of(3)
    Corpus(tuple(recs))
