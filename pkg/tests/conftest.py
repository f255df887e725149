import numpy as np
import pytest

from pave_iri.domain import CrackFamily, CrackObservation, SegmentRecord, Severity
from pave_iri.ingest import Corpus


def make_record(route="R1", start=0.0, length=0.005, surface="Asphalt", fclass="Interstate",
                iri=100.0, rut=0.1, fault=0.0, cracks=()):
    return SegmentRecord(route, start, length, surface, fclass, iri, rut, fault, tuple(cracks))


def run_of(n, route="R1", start=0.0, length=0.005, **kw):
    """``n`` contiguous records; per-record keyword values may be callables of the index."""
    out = []
    for i in range(n):
        args = {k: (v(i) if callable(v) else v) for k, v in kw.items()}
        out.append(make_record(route, round(start + i * length, 9), length, **args))
    return out


def crack(family, severity, extent=0.0, width=0.0, depth=0.0):
    return CrackObservation(CrackFamily(family), Severity(severity), extent, width, depth)


@pytest.fixture
def small_corpus():
    recs = run_of(40, iri=lambda i: 60.0 + i, rut=lambda i: 0.05 + 0.001 * i,
                  cracks=lambda i: (crack("WPLongitudinal", "Low", 2.0, 0.2),) if i % 2 else ())
    return Corpus(tuple(recs))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERION_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
