import json

import pytest

from pave_iri.cli import RunConfig, main
from pave_iri.ingest import Corpus, write_corpus

from conftest import run_of


@pytest.fixture(scope="module")
def raw(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--segments", "100", "--seed", "7", "--out", str(d / "c.csv")]) == 0
    return d


@pytest.fixture(scope="module")
def prepared(raw):
    assert main(["prep", "--in", str(raw / "c.csv"), "--out", str(raw / "p.csv")]) == 0
    return raw / "p.csv"


def _lines(path):
    return path.read_text().splitlines()


def test_synth_record_count(raw, capsys, tmp_path):
    assert len(_lines(raw / "c.csv")) == 1 + 2000
    assert main(["synth", "--segments", "100", "--seed", "7", "--out", str(tmp_path / "again.csv")]) == 0
    out = capsys.readouterr().out
    assert "records: 2000" in out and "digest: " in out
    assert (tmp_path / "again.csv").read_bytes() == (raw / "c.csv").read_bytes()


@pytest.mark.parametrize("argv", [
    ["synth", "--segments", "0", "--out", "x.csv"],
    ["synth", "--segments", "5", "--spike-rate", "0.5", "--out", "x.csv"],
    ["synth", "--bogus"],
    ["train", "--in", "p.csv", "--out", "m.json", "--model", "forest"],
    ["compare", "--in", "p.csv", "--out", "t.csv", "--tolerances", "20,abc"],
    ["prep", "--out", "x.csv"],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_prep_aggregates_and_logs(raw, prepared):
    assert len(_lines(prepared)) == 1 + 100
    steps = [json.loads(line) for line in _lines(raw / "p.csv.provenance.jsonl")]
    assert [s["step"] for s in steps] == ["config", "aggregate", "remove_outliers"]
    assert steps[-1]["outliers_removed"] == 0


def test_prep_identity(raw):
    out = raw / "same.csv"
    assert main(["prep", "--in", str(raw / "c.csv"), "--out", str(out), "--no-aggregate", "--no-outlier-filter"]) == 0
    assert out.read_bytes() == (raw / "c.csv").read_bytes()


def test_prep_drops_one_aggregated_outlier(tmp_path):
    recs = run_of(40, iri=lambda i: 310.0 if i < 20 else 120.0)
    write_corpus(Corpus(tuple(recs)), tmp_path / "in.csv")
    assert main(["prep", "--in", str(tmp_path / "in.csv"), "--out", str(tmp_path / "out.csv")]) == 0
    assert len(_lines(tmp_path / "out.csv")) == 1 + 1
    last = json.loads(_lines(tmp_path / "out.csv.provenance.jsonl")[-1])
    assert last["outliers_removed"] == 1


def test_prep_reports_bad_row_with_line(tmp_path, capsys):
    recs = run_of(2)
    write_corpus(Corpus(tuple(recs)), tmp_path / "in.csv")
    text = (tmp_path / "in.csv").read_text().replace(",100.0,", ",abc,", 1)
    (tmp_path / "in.csv").write_text(text)
    assert main(["prep", "--in", str(tmp_path / "in.csv"), "--out", str(tmp_path / "o.csv")]) == 1
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize("extra", [["--model", "nb"], ["--model", "svm", "--kernel", "poly", "--degree", "3"],
                                   ["--model", "logit"]])
def test_train_then_eval(prepared, tmp_path, extra):
    m1 = tmp_path / "m1.json"
    assert main(["train", "--in", str(prepared), "--out", str(m1), *extra]) == 0
    first = m1.read_bytes()
    assert main(["train", "--in", str(prepared), "--out", str(m1), *extra]) == 0
    assert m1.read_bytes() == first
    doc = json.loads(m1.read_text())
    assert len(doc["extra"]["test_record_ids"]) == 20
    if "svm" in extra:
        assert doc["learner"]["type"] == "svm_ovo" and doc["learner"]["kernel"]["degree"] == 3
    r1 = tmp_path / "r1.json"
    assert main(["eval", "--in", str(prepared), "--model", str(m1), "--out", str(r1)]) == 0
    first = r1.read_bytes()
    assert main(["eval", "--in", str(prepared), "--model", str(m1), "--out", str(r1)]) == 0
    assert r1.read_bytes() == first
    rep = json.loads(r1.read_text())
    assert rep["tolerances"] == [20.0, 30.0, 50.0] and rep["n_test"] == 20
    assert _lines(tmp_path / "r1.json.csv")[0] == "model,n_test,AC_T20,AC_T30,AC_T50"


def test_eval_single_tolerance(prepared, tmp_path):
    m = tmp_path / "m.json"
    main(["train", "--in", str(prepared), "--out", str(m)])
    assert main(["eval", "--in", str(prepared), "--model", str(m), "--tolerances", "50", "--out", str(tmp_path / "r.json")]) == 0
    assert _lines(tmp_path / "r.json.csv")[0] == "model,n_test,AC_T50"


def test_eval_on_other_corpus_fails(prepared, raw, tmp_path):
    m = tmp_path / "m.json"
    main(["train", "--in", str(prepared), "--out", str(m)])
    assert main(["eval", "--in", str(raw / "c.csv"), "--model", str(m), "--out", str(tmp_path / "r.json")]) == 1


def test_eval_schema_mismatch_fails(prepared, tmp_path):
    m = tmp_path / "m.json"
    main(["train", "--in", str(prepared), "--out", str(m)])
    doc = json.loads(m.read_text())
    doc["schema"]["entries"] = doc["schema"]["entries"][:-1]
    m.write_text(json.dumps(doc))
    assert main(["eval", "--in", str(prepared), "--model", str(m), "--out", str(tmp_path / "r.json")]) == 1


def test_compare_shape(prepared, tmp_path):
    out = tmp_path / "t.csv"
    assert main(["compare", "--in", str(prepared), "--out", str(out)]) == 0
    lines = _lines(out)
    assert lines[0] == "model,n_test,AC_T20,AC_T30,AC_T50"
    assert [l.split(",")[0] for l in lines[1:]] == ["NaiveBayes", "SVM-RBF", "SVM-Polynomial", "Logit"]
    assert {l.split(",")[1] for l in lines[1:]} == {"20"}
    doc = json.loads((tmp_path / "t.csv.json").read_text())
    assert all(r["config_digest"] == doc["config_digest"] for r in doc["reports"])


@pytest.mark.parametrize("threshold", ["100", "200"])
def test_importance_thresholds(prepared, tmp_path, threshold):
    out = tmp_path / "imp.csv"
    assert main(["importance", "--in", str(prepared), "--threshold", threshold, "--out", str(out)]) == 0
    lines = _lines(out)
    assert lines[0] == "rank,feature_id,coefficient,magnitude,sign" and len(lines) == 1 + 58


def test_importance_one_sided_is_data_error(prepared, tmp_path, capsys):
    assert main(["importance", "--in", str(prepared), "--threshold", "5000", "--out", str(tmp_path / "i.csv")]) == 1
    assert "> threshold: 0" in capsys.readouterr().err


def test_config_file_and_env_seed(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"segments": 3, "seed": 11}))
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "a.csv")]) == 0
    assert main(["synth", "--segments", "3", "--seed", "11", "--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    # explicit flags beat the config file
    assert main(["synth", "--config", str(cfg), "--seed", "12", "--out", str(tmp_path / "c.csv")]) == 0
    assert (tmp_path / "c.csv").read_bytes() != (tmp_path / "a.csv").read_bytes()
    monkeypatch.setenv("PAVE_IRI_SEED", "11")
    assert main(["synth", "--segments", "3", "--out", str(tmp_path / "d.csv")]) == 0
    assert (tmp_path / "d.csv").read_bytes() == (tmp_path / "a.csv").read_bytes()
    monkeypatch.setenv("PAVE_IRI_SEED", "eleven")
    assert main(["synth", "--segments", "3", "--out", str(tmp_path / "e.csv")]) == 2
    cfg.write_text(json.dumps({"unknown_key": 1}))
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "f.csv")]) == 2


def test_config_digest_tracks_every_parameter():
    base = RunConfig()
    seen = {base.config_digest}
    for name, value in [("seed", 1), ("bin_width", 30.0), ("C", 2.0), ("lam", 0.1), ("tolerances", (20.0,)),
                        ("threshold", 200.0), ("kernel", "poly"), ("train_fraction", 0.7)]:
        d = RunConfig(**{name: value}).config_digest
        assert d not in seen
        seen.add(d)
    assert RunConfig().config_digest == base.config_digest
