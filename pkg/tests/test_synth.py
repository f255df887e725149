import json
import math

import numpy as np
import pytest

from pave_iri.domain import FeatureKind, FunctionalClass, SurfaceType, default_schema
from pave_iri.errors import DomainError
from pave_iri.ingest import format_corpus, parse_corpus, write_corpus
from pave_iri.preprocess import aggregate
from pave_iri.synth import RECORDS_PER_SEGMENT, GeneratorProfile, generate_corpus, ground_truth


def test_record_count_and_geometry():
    c = generate_corpus(GeneratorProfile(n_segments=30, seed=1))
    assert len(c) == 30 * RECORDS_PER_SEGMENT
    assert {r.length for r in c.records} == {0.005}
    assert {r.route_id for r in c.records} == {"I-70", "US-52", "US-41"}
    assert len(aggregate(c)) == 30


def test_same_profile_bitwise_identical():
    p = GeneratorProfile(n_segments=25, seed=3)
    assert format_corpus(generate_corpus(p)) == format_corpus(generate_corpus(p))
    assert format_corpus(generate_corpus(GeneratorProfile(n_segments=25, seed=4))) != format_corpus(generate_corpus(p))


def test_degenerate_generator_hits_baselines():
    p = GeneratorProfile(n_segments=60, seed=2, noise_sigma=0.0, spike_rate=0.0, planted_weights={})
    for r in generate_corpus(p).records:
        assert r.iri == p.baseline(r.surface_type, r.functional_class)


def test_spike_count_within_three_sigma():
    p = GeneratorProfile(n_segments=1000, seed=5, noise_sigma=0.0, planted_weights={}, spike_rate=0.01)
    c = generate_corpus(p)
    spikes = sum(r.iri > 300 for r in c.records)
    n, q = 20_000, 0.01
    sd = math.sqrt(n * q * (1 - q))
    assert n * q - 3 * sd <= spikes <= n * q + 3 * sd
    assert all(r.iri <= 600 for r in c.records)


def test_generated_corpus_passes_ingest(tmp_path):
    c = generate_corpus(GeneratorProfile(n_segments=40, seed=8))
    p = tmp_path / "c.csv"
    write_corpus(c, p)
    assert parse_corpus(p).records == c.records


def test_segment_iri_within_range_without_noise():
    p = GeneratorProfile(n_segments=150, seed=6, noise_sigma=0.0, spike_rate=0.0)
    for r in generate_corpus(p).records:
        assert 30.0 <= r.iri <= 300.0


def test_metadata_mix():
    c = generate_corpus(GeneratorProfile(n_segments=600, seed=9))
    assert len({r.surface_type for r in c.records}) >= 3
    assert len({r.functional_class for r in c.records}) == 3
    ruts = np.array([r.rut_depth for r in c.records])
    assert ruts.min() >= 0.0
    faults = np.array([r.faulting for r in c.records])
    assert abs(faults.mean()) < 0.01  # zero-centred


def test_ground_truth_keys_and_zero_table():
    numeric = [e.feature_id for e in default_schema().entries if e.kind is FeatureKind.NUMERIC]
    gt = ground_truth(GeneratorProfile(planted_weights={}))
    assert list(gt["weights"]) == numeric
    assert all(w == 0.0 for w in gt["weights"].values())
    assert len(gt["baselines"]) == len(SurfaceType) * len(FunctionalClass)
    gt = ground_truth(GeneratorProfile())
    assert gt["weights"]["rut_depth"] > 0
    assert gt["surface_offsets"]["Asphalt"] < 0 < gt["surface_offsets"]["JointedConcrete"]


@pytest.mark.parametrize("kwargs", [
    {"n_segments": 0},
    {"spike_rate": 0.06},
    {"iri_range": (300, 30)},
    {"rut_range": (0.0, 0.2)},
    {"noise_sigma": -1.0},
    {"planted_weights": {"not_a_feature": 1.0}},
    {"surface_offsets": {"Gravel": 1.0}},
])
def test_invalid_profiles(kwargs):
    with pytest.raises(DomainError):
        GeneratorProfile(**kwargs)


def test_profile_round_trip(tmp_path):
    p = GeneratorProfile(n_segments=12, noise_sigma=3.5)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_dict()))
    assert GeneratorProfile.load(path) == p
