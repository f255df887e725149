"""Command-line front end: ``pave-iri {synth,prep,train,eval,compare,importance}``.

Parameters resolve in this order: built-in default, ``PAVE_IRI_SEED`` (seed
only), ``--config`` JSON file, explicit flags. Every artifact records the
digest of the resolved :class:`RunConfig`.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields, replace

from . import __version__
from .classifiers import TrainedModel, load_model, save_model
from .errors import PaveIriError
from .evaluate import DEFAULT_TOLERANCES, compare_models, evaluate_model, format_table
from .ingest import parse_corpus, write_corpus
from .pipeline import ModelParams, compare, encode_and_split, fit_model, importance, make_binning, prepare
from .preprocess import SplitSpec, StatsSource, encode, format_provenance, standardize
from .synth import GeneratorProfile, generate_corpus

log = logging.getLogger("pave_iri")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 42


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str = ""
    input: str | None = None
    out: str | None = None
    model_path: str | None = None
    profile: str | None = None
    seed: int = DEFAULT_SEED
    segments: int = 2520
    noise_sigma: float | None = None
    spike_rate: float | None = None
    aggregate_length: float = 0.1
    aggregate: bool = True
    outlier_threshold: float = 300.0
    outlier_filter: bool = True
    raw_outlier_filter: bool = False
    bin_width: float = 20.0
    bin_origin: float = 0.0
    bin_upper: float = 300.0
    train_fraction: float = 0.8
    model: str = "nb"
    kernel: str = "rbf"
    gamma: float | None = None
    degree: int = 3
    C: float = 1.0
    lam: float = 1e-4
    grid_search: bool = False
    tolerances: tuple[float, ...] = DEFAULT_TOLERANCES
    threshold: float = 100.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = list(self.tolerances)
        return d

    @property
    def config_digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def model_params(self) -> ModelParams:
        return ModelParams(self.model, self.kernel, self.gamma, self.degree, self.C, self.lam,
                           self.grid_search, self.seed)


_FIELDS = {f.name for f in fields(RunConfig)}


def _env_seed() -> int:
    raw = os.environ.get("PAVE_IRI_SEED")
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PAVE_IRI_SEED must be an integer, got {raw!r}") from None


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    if "lambda" in data:
        data["lam"] = data.pop("lambda")
    unknown = set(data) - _FIELDS - {"command"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {"command": args.command, "seed": _env_seed()}
    if args.config:
        file_values = _load_config_file(args.config)
        file_values.pop("command", None)
        values.update(file_values)
    for name in _FIELDS - {"command"}:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if "tolerances" in values:
        values["tolerances"] = tuple(float(t) for t in values["tolerances"])
    try:
        cfg = RunConfig(**values)
    except TypeError as e:
        raise UsageError(str(e)) from None
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.segments < 1:
        raise UsageError("--segments must be >= 1")
    if cfg.noise_sigma is not None and cfg.noise_sigma < 0:
        raise UsageError("--noise-sigma must be >= 0")
    if cfg.aggregate_length <= 0 or cfg.outlier_threshold <= 0:
        raise UsageError("aggregation length and outlier threshold must be > 0")
    if cfg.bin_width <= 0 or cfg.bin_upper <= cfg.bin_origin:
        raise UsageError("bin width must be > 0 and bin upper must exceed bin origin")
    if not 0 < cfg.train_fraction < 1:
        raise UsageError("--train-fraction must lie in (0, 1)")
    if cfg.model not in ("nb", "svm", "logit"):
        raise UsageError(f"unknown model {cfg.model!r}")
    if cfg.kernel not in ("rbf", "poly"):
        raise UsageError(f"unknown kernel {cfg.kernel!r}")
    if cfg.degree < 1 or cfg.C <= 0 or cfg.lam < 0:
        raise UsageError("degree must be >= 1, C > 0 and lambda >= 0")
    if cfg.gamma is not None and cfg.gamma <= 0:
        raise UsageError("--gamma must be > 0")
    if not cfg.tolerances or any(t <= 0 for t in cfg.tolerances):
        raise UsageError("tolerances must be a non-empty list of positive numbers")


def _require(cfg: RunConfig, *names: str) -> None:
    for n in names:
        if getattr(cfg, n) is None:
            raise UsageError(f"missing required option --{n.replace('_', '-')}")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _sha(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:16]


def _split(cfg: RunConfig, corpus):
    return encode_and_split(corpus, make_binning(cfg.bin_width, cfg.bin_origin, cfg.bin_upper),
                            SplitSpec(cfg.train_fraction, cfg.seed))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_synth(cfg: RunConfig) -> int:
    _require(cfg, "out")
    overrides = {"n_segments": cfg.segments, "seed": cfg.seed}
    if cfg.noise_sigma is not None:
        overrides["noise_sigma"] = cfg.noise_sigma
    if cfg.spike_rate is not None:
        overrides["spike_rate"] = cfg.spike_rate
    try:
        if cfg.profile:
            # the profile sets the shape; size and seed always come from the run config
            base = GeneratorProfile.load(cfg.profile).to_dict()
            base.update(overrides)
            profile = GeneratorProfile.from_dict(base)
        else:
            profile = GeneratorProfile(**overrides)
    except (PaveIriError, TypeError, OSError, json.JSONDecodeError) as e:
        raise UsageError(f"invalid generator profile: {e}") from None
    corpus = generate_corpus(profile)
    write_corpus(corpus, cfg.out)
    print(f"records: {len(corpus)}")
    print(f"digest: {_sha(cfg.out)}")
    print(f"config_digest: {cfg.config_digest}")
    return EXIT_OK


def cmd_prep(cfg: RunConfig) -> int:
    _require(cfg, "input", "out")
    corpus = parse_corpus(cfg.input)
    prepared = prepare(
        corpus,
        aggregate_length=cfg.aggregate_length if cfg.aggregate else None,
        outlier_threshold=cfg.outlier_threshold if cfg.outlier_filter else None,
        raw_outlier_filter=cfg.raw_outlier_filter,
    )
    write_corpus(prepared, cfg.out)
    header = {"step": "config", "config_digest": cfg.config_digest, "input_digest": _sha(cfg.input)}
    _write_text(cfg.out + ".provenance.jsonl", format_provenance((header,) + tuple(prepared.provenance)))
    print(f"records_in: {len(corpus)}")
    print(f"records_out: {len(prepared)}")
    return EXIT_OK


def cmd_train(cfg: RunConfig) -> int:
    _require(cfg, "input", "out")
    corpus = parse_corpus(cfg.input)
    train, test = _split(cfg, corpus)
    params = cfg.model_params()
    try:
        model = fit_model(params, train, cfg.config_digest)
    except PaveIriError as e:
        raise type(e)(f"training {params.tag}: {e}") from e
    model = replace(model, extra={
        "corpus_digest": _sha(cfg.input),
        "n_train": len(train),
        "test_record_ids": [int(i) for i in test.record_ids],
        "run_config": cfg.to_dict(),
    })
    save_model(model, cfg.out)
    print(f"model: {params.tag}")
    print(f"digest: {model.digest()}")
    return EXIT_OK


def _held_out(model: TrainedModel, cfg: RunConfig):
    corpus = parse_corpus(cfg.input)
    ds = encode(corpus, model.schema, model.binning)
    model.check_schema(ds.schema)
    extra = model.extra or {}
    if "test_record_ids" not in extra:
        raise PaveIriError("model file carries no held-out test indices")
    if extra.get("corpus_digest") not in (None, _sha(cfg.input)):
        raise PaveIriError("corpus differs from the one the model was trained on")
    ids = extra["test_record_ids"]
    if ids and max(ids) >= len(ds):
        raise PaveIriError("held-out indices exceed the corpus size")
    return standardize(ds.subset(ids), StatsSource.REUSE, model.standardization)


def cmd_eval(cfg: RunConfig) -> int:
    _require(cfg, "input", "model_path", "out")
    model = load_model(cfg.model_path)
    test = _held_out(model, cfg)
    report = evaluate_model(model, test, cfg.tolerances, cfg.config_digest)
    _write_text(cfg.out, report.dumps())
    _write_text(cfg.out + ".csv", format_table(compare_models([report])))
    print(format_table(compare_models([report])), end="")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    _require(cfg, "input", "out")
    corpus = parse_corpus(cfg.input)
    train, test = _split(cfg, corpus)
    reports = compare(train, test, cfg.tolerances, C=cfg.C, lam=cfg.lam, degree=cfg.degree,
                      gamma=cfg.gamma, grid=cfg.grid_search, seed=cfg.seed,
                      config_digest=cfg.config_digest)
    table = format_table(compare_models(reports))
    _write_text(cfg.out, table)
    doc = {"config_digest": cfg.config_digest, "run_config": cfg.to_dict(),
           "reports": [r.to_dict() for r in reports]}
    _write_text(cfg.out + ".json", json.dumps(doc, indent=2) + "\n")
    print(table, end="")
    return EXIT_OK


def cmd_importance(cfg: RunConfig) -> int:
    _require(cfg, "input", "out")
    corpus = parse_corpus(cfg.input)
    report = importance(corpus, cfg.threshold, cfg.lam, cfg.config_digest)
    _write_text(cfg.out, report.table())
    _write_text(cfg.out + ".json", report.dumps())
    print(report.table(), end="")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "prep": cmd_prep,
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "importance": cmd_importance,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _tolerances(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pave-iri", description="Pavement IRI class estimation from distress data.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inp=True):
        sp.add_argument("--config", help="JSON file of parameters (keys match long option names)")
        sp.add_argument("--seed", type=int, help="global seed (default: $PAVE_IRI_SEED, else 42)")
        sp.add_argument("--out", help="output path")
        if inp:
            sp.add_argument("--in", dest="input", help="input corpus CSV")

    def binning(sp):
        sp.add_argument("--bin-width", type=float, help="IRI class width (default 20)")
        sp.add_argument("--bin-origin", type=float, help="left edge of class 0 (default 0)")
        sp.add_argument("--bin-upper", type=float, help="upper edge covered by the classes (default 300)")
        sp.add_argument("--train-fraction", type=float, help="train share of the split (default 0.8)")

    def svm(sp):
        sp.add_argument("--kernel", choices=["rbf", "poly"])
        sp.add_argument("--gamma", type=float, help="RBF width (default 1/(p*mean variance))")
        sp.add_argument("--degree", type=int, help="polynomial degree (default 3)")
        sp.add_argument("--C", dest="C", type=float, help="SVM box constraint (default 1)")
        sp.add_argument("--lambda", dest="lam", type=float, help="logit L2 penalty (default 1e-4)")
        sp.add_argument("--grid-search", action="store_const", const=True,
                        help="cross-validate C and the kernel parameter")

    s = sub.add_parser("synth", help="generate a synthetic raw corpus")
    common(s, inp=False)
    s.add_argument("--segments", type=int, help="number of 0.1-mile segments (default 2520)")
    s.add_argument("--noise-sigma", type=float, help="per-record IRI noise")
    s.add_argument("--spike-rate", type=float, help="probability of an IRI spike per record")
    s.add_argument("--profile", help="generator profile JSON")

    s = sub.add_parser("prep", help="aggregate and drop outliers")
    common(s)
    s.add_argument("--aggregate-length", type=float, help="target segment length in miles (default 0.1)")
    s.add_argument("--no-aggregate", dest="aggregate", action="store_const", const=False)
    s.add_argument("--outlier-threshold", type=float, help="drop IRI above this (default 300)")
    s.add_argument("--no-outlier-filter", dest="outlier_filter", action="store_const", const=False)
    s.add_argument("--raw-outlier-filter", action="store_const", const=True,
                   help="also drop raw records above the threshold before aggregating")

    s = sub.add_parser("train", help="train one model on the seeded split")
    common(s)
    binning(s)
    s.add_argument("--model", choices=["nb", "svm", "logit"])
    svm(s)

    s = sub.add_parser("eval", help="evaluate a model on its stored held-out split")
    common(s)
    s.add_argument("--model", dest="model_path", help="model file from 'train'")
    s.add_argument("--tolerances", type=_tolerances, help="e.g. '20,30,50'")

    s = sub.add_parser("compare", help="train and evaluate NB, SVM-RBF, SVM-poly and logit")
    common(s)
    binning(s)
    svm(s)
    s.add_argument("--tolerances", type=_tolerances, help="e.g. '20,30,50'")

    s = sub.add_parser("importance", help="rank features by binary-logit coefficients")
    common(s)
    s.add_argument("--threshold", type=float, help="IRI split point (default 100)")
    s.add_argument("--lambda", dest="lam", type=float, help="L2 penalty (default 1e-4)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as e:
        print(f"pave-iri {args.command}: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PaveIriError, OSError, ValueError) as e:
        print(f"pave-iri {args.command}: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
