"""Command-line front end: stats, select, detect, categorize, compare, synth.

Every flag can also be set through an environment variable named
``IDSCAT_<FLAG>`` (for example ``IDSCAT_SEED=7`` or ``IDSCAT_INCLUDE_FUZZERS=1``);
an explicit flag wins over the environment.  Exit codes: 0 on success, 2 for
input or data errors, 3 for training failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .categorization import (
    CategorizationReport,
    build_default_cascade_spec,
    compare_strategies,
    evaluate_cascade,
    evaluate_single_type,
    format_cascade_spec,
    read_cascade_spec,
    train_cascade,
    train_single_type_set,
)
from .dataset import class_stats, format_synth_spec, read_synth_spec, write_csv, write_schema
from .dataset.core import relabel_binary, restrict_labels
from .dataset.labels import TEST_COUNTS, TRAIN_COUNTS, parse_labels
from .dataset.synthetic import default_labels, scaled_counts, separable_spec, synthesize
from .errors import DataError, TrainingError
from .learners import TrainConfig, dumps
from .pipeline import (
    PhaseTimer,
    detection,
    encode_pair,
    load_split,
    read_subset,
    resolve_schema,
)
from .seeding import derive_seed
from .selection import SelectionCriterion, best_first_select, sweep_feature_counts, sweep_to_csv

ENV_PREFIX = "IDSCAT_"
EXIT_DATA, EXIT_TRAINING = 2, 3

log = logging.getLogger("stepwise_ids")

LEARNERS = {"rf": "forest", "lr": "logistic", "tree": "tree"}


@dataclass
class RunConfig:
    command: str
    train: Optional[str] = None
    test: Optional[str] = None
    schema: str = "auto"
    label_column: str = "attack_cat"
    out: Optional[str] = None
    seed: int = 0
    learner: str = "rf"
    trees: int = 100
    max_depth: int = 25
    max_categories: int = 32
    threads: int = 1
    features: Optional[str] = None
    criterion: str = "error"
    criterion_split: str = "holdout"
    cascade_spec: Optional[str] = None
    include_fuzzers: bool = False
    standardize: bool = False
    extra: dict = field(default_factory=dict)  # subcommand-specific options

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        values = vars(args).copy()
        known = {k: values.pop(k) for k in list(values) if k in cls.__dataclass_fields__}
        values.pop("handler", None)
        cfg = cls(**known, extra=values)
        for name in ("train", "test", "schema", "out", "features", "cascade_spec"):
            value = getattr(cfg, name)
            if value and (name != "schema" or value not in ("auto", "unsw")):
                setattr(cfg, name, str(Path(value).resolve()))
        return cfg

    @property
    def learner_kind(self) -> str:
        return LEARNERS[self.learner]

    def train_config(self) -> TrainConfig:
        return TrainConfig(kind=self.learner_kind, tree_count=self.trees, max_depth=self.max_depth,
                           seed=self.seed, threads=self.threads)

    @property
    def standardized(self) -> bool:
        # gradient descent needs comparable feature scales
        return self.standardize or self.learner_kind == "logistic"


class Run:
    """Output directory, phase timings and the manifest of one command."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.timer = PhaseTimer()
        self.datasets = {}
        self.outputs = []
        self.out = Path(cfg.out) if cfg.out else None
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def note_dataset(self, name, d):
        self.datasets[name] = {"rows": len(d), "fingerprint": d.fingerprint(), "provenance": d.provenance}

    def write(self, name: str, content) -> None:
        if not self.out:
            return
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, bytes):
            path.write_bytes(content)
        else:
            path.write_text(content, encoding="utf-8")
        self.outputs.append(name)

    def write_json(self, name: str, data) -> None:
        self.write(name, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def finish(self) -> None:
        if not self.out:
            return
        manifest = {
            "tool": "stepwise-ids",
            "version": __version__,
            "command": self.cfg.command,
            "seed": self.cfg.seed,
            "config": asdict(self.cfg),
            "datasets": self.datasets,
            "phase_times_s": self.timer.times,
            "outputs": sorted(self.outputs),
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                                encoding="utf-8")


# data preparation shared by the training commands

def _require(cfg: RunConfig, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if not getattr(cfg, n)]
    if missing:
        raise DataError(f"{cfg.command} needs {', '.join(missing)}")


def _load(run: Run, need_test=True):
    cfg = run.cfg
    _require(cfg, "train", *(["test"] if need_test else []))
    with run.timer.phase("load"):
        schema = resolve_schema(cfg.schema, cfg.train, cfg.label_column)
        train_set = load_split(cfg.train, schema, cfg.include_fuzzers)
        test_set = load_split(cfg.test, schema, cfg.include_fuzzers) if cfg.test else None
    run.note_dataset("train", train_set)
    if test_set is not None:
        run.note_dataset("test", test_set)
    with run.timer.phase("encode"):
        train_e, test_e, enc = encode_pair(train_set, test_set, cfg.max_categories, cfg.standardized)
    run.write_json("encoding.json", enc.to_dict())
    return train_e, test_e


def _features(cfg: RunConfig):
    return read_subset(cfg.features) if cfg.features else None


def _emit(run: Run, stem: str, text: str, data: dict) -> None:
    print(text)
    run.write(f"{stem}.txt", text + "\n")
    run.write_json(f"{stem}.json", data)


# commands

def cmd_stats(run: Run) -> None:
    cfg = run.cfg
    _require(cfg, "train")
    schema = resolve_schema(cfg.schema, cfg.train, cfg.label_column)
    out, texts = {}, []
    for name, path in (("train", cfg.train), ("test", cfg.test)):
        if not path:
            continue
        with run.timer.phase(f"load_{name}"):
            # the statistics cover every class, Fuzzers included
            d = load_split(path, schema, include_fuzzers=True)
        run.note_dataset(name, d)
        stats = class_stats(d)
        out[name] = stats.to_dict()
        texts.append(stats.to_text(f"{name}: {path}"))
    _emit(run, "stats", "\n\n".join(texts), out)


def parse_counts(text: str, limit: int) -> list:
    """``a..b`` or a comma list; values above ``limit`` are dropped with a warning."""
    if ".." in text:
        lo, hi = (int(x) for x in text.split("..", 1))
        counts = list(range(lo, hi + 1))
    else:
        counts = sorted({int(x) for x in text.split(",") if x.strip()})
    kept = [c for c in counts if c <= limit]
    if len(kept) < len(counts):
        log.warning("only %d feature groups available; counts above it are skipped", limit)
    if not kept:
        raise DataError(f"no usable feature counts in {text!r}")
    return kept


def cmd_select(run: Run) -> None:
    cfg = run.cfg
    counts = cfg.extra.get("counts")
    needs_test = cfg.criterion_split == "test" or bool(counts)
    train_e, test_e = _load(run, need_test=needs_test)
    features = _features(cfg)
    if features is not None:
        train_e = train_e.select_features(features)
        test_e = test_e.select_features(features) if test_e is not None else None
    criterion = SelectionCriterion.parse(cfg.criterion, cfg.criterion_split)
    learner = cfg.train_config()
    with run.timer.phase("select"):
        subset, trace = best_first_select(train_e, criterion, learner, cfg.extra.get("max_features"),
                                          test_e)
    run.write("subset.txt", "".join(f"{n}\n" for n in subset))
    # wall times vary between runs, so they live apart from the reproducible trace
    run.write("selection_trace.csv", trace.to_csv(timing=False))
    run.write_json("selection_trace.json", trace.deterministic_view())
    run.write("selection_timing.csv", trace.to_csv())
    lines = [f"criterion: {trace.criterion} ({cfg.criterion_split} split)",
             f"all-features baseline: {trace.baseline_criterion:.4f}%",
             f"{'Iter':>4}  {'Feature':<20}{'Criterion':>11}"]
    # relative times are in selection_timing.csv; this report stays reproducible
    for s in trace.steps:
        lines.append(f"{s.iteration:>4}  {s.feature:<20}{s.criterion_pct:>10.4f}%")
    lines.append(f"stopped: {trace.stop_reason}; {len(subset)} features selected")
    text = "\n".join(lines)
    print(text)
    run.write("selection.txt", text + "\n")
    if counts:
        with run.timer.phase("sweep"):
            rows = sweep_feature_counts(train_e, test_e, learner,
                                        parse_counts(counts, len(train_e.schema.groups())), criterion)
        run.write("sweep.csv", sweep_to_csv(rows))
        for r in rows:
            print(f"{r.count:>4} features  error {r.error_pct:8.4f}%  relative time {r.relative_time:.3f}")


def cmd_detect(run: Run) -> None:
    cfg = run.cfg
    train_e, test_e = _load(run)
    with run.timer.phase("train_and_evaluate"):
        model, report = detection(train_e, test_e, cfg.train_config(), _features(cfg))
    run.write("model.bin", dumps(model))
    _emit(run, "detection", report.to_text(f"Anomaly detection ({cfg.learner})"), report.to_dict())


def _per_stage_selection(train_e, specs, criterion, learner):
    """Replace each stage's feature subset by best-first selection on its own population."""
    out = []
    for spec in specs:
        sub = relabel_binary(restrict_labels(train_e, spec.population), spec.positives)
        stage_cfg = learner.with_seed(derive_seed(learner.seed, "select", spec.stage_id))
        subset, _ = best_first_select(sub, criterion, stage_cfg)
        log.info("stage %s: %d features", spec.stage_id, len(subset))
        out.append(spec.with_features(subset))
    return out


def _cascade_report(run: Run, train_e, test_e) -> CategorizationReport:
    cfg = run.cfg
    specs = read_cascade_spec(cfg.cascade_spec) if cfg.cascade_spec else build_default_cascade_spec(train_e)
    if cfg.extra.get("per_stage_selection"):
        criterion = SelectionCriterion.parse(cfg.criterion, "holdout")
        with run.timer.phase("stage_selection"):
            specs = _per_stage_selection(train_e, specs, criterion, cfg.train_config())
    run.write("cascade_spec.ini", format_cascade_spec(specs))
    with run.timer.phase("train_cascade"):
        model = train_cascade(train_e, specs, cfg.train_config(), _features(cfg))
    for stage in model.stages:
        run.write(f"models/cascade_stage_{stage.spec.stage_id}.bin", dumps(stage.model))
    with run.timer.phase("evaluate_cascade"):
        report = evaluate_cascade(model, test_e)
    return report


def _single_report(run: Run, train_e, test_e) -> CategorizationReport:
    cfg = run.cfg
    order = cfg.extra.get("order")
    order = [t.strip() for t in order.split(",") if t.strip()] if order else None
    with run.timer.phase("train_single_type"):
        models = train_single_type_set(train_e, cfg.train_config(), order=order, attacks=order,
                                       features=_features(cfg))
    for label, model in models.models.items():
        run.write(f"models/single_{label.value}.bin", dumps(model))
    with run.timer.phase("evaluate_single_type"):
        return evaluate_single_type(models, test_e)


def cmd_categorize(run: Run) -> None:
    strategy = run.cfg.extra.get("strategy", "both")
    train_e, test_e = _load(run)
    reports = {}
    if strategy in ("single", "both"):
        reports["single"] = _single_report(run, train_e, test_e)
    if strategy in ("cascade", "both"):
        reports["cascade"] = _cascade_report(run, train_e, test_e)
    for name, report in reports.items():
        _emit(run, f"categorize_{name}", report.to_text(), report.to_dict())
        print()
    if len(reports) == 2:
        comparison = compare_strategies(reports["single"], reports["cascade"])
        _emit(run, "comparison", comparison.to_text(), comparison.to_dict())


def cmd_compare(run: Run) -> None:
    a, b = (CategorizationReport.from_json(Path(p).read_text(encoding="utf-8"))
            for p in (run.cfg.extra["single_report"], run.cfg.extra["cascade_report"]))
    comparison = compare_strategies(a, b)
    _emit(run, "comparison", comparison.to_text(), comparison.to_dict())


def cmd_synth(run: Run) -> None:
    cfg, extra = run.cfg, run.cfg.extra
    if not cfg.out:
        raise DataError("synth needs --out")
    divisor = extra["divisor"]
    labels = default_labels(cfg.include_fuzzers)
    if extra.get("spec"):
        train_spec = test_spec = read_synth_spec(extra["spec"])
    else:
        shared = parse_labels(extra["shared"]) if extra.get("shared") else ()
        if extra["preset"] == "confusable" and not shared:
            shared = parse_labels("Exploits,DoS")
        kwargs = dict(shared=sorted(shared), n_noise=extra["noise"], off_axis_std=extra["off_axis_std"])
        train_spec = separable_spec(scaled_counts(TRAIN_COUNTS, divisor, labels), **kwargs)
        test_spec = separable_spec(scaled_counts(TEST_COUNTS, divisor, labels), **kwargs)
    train_set = synthesize(train_spec, derive_seed(cfg.seed, "synth", "train"))
    test_set = synthesize(test_spec, derive_seed(cfg.seed, "synth", "test"))
    out = Path(cfg.out)
    write_csv(train_set, out / "train.csv")
    write_csv(test_set, out / "test.csv")
    write_schema(train_set.schema, out / "schema.txt")
    run.outputs += ["train.csv", "test.csv", "schema.txt"]
    run.write("synth_spec.txt", format_synth_spec(train_spec))
    run.note_dataset("train", train_set)
    run.note_dataset("test", test_set)
    print(f"wrote {len(train_set)} training and {len(test_set)} testing records to {out}")


# argument parsing

def _common(p: argparse.ArgumentParser, data=True, training=True) -> None:
    p.add_argument("--out", help="output directory for reports, models and the run manifest")
    p.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    p.add_argument("--include-fuzzers", action="store_true", help="keep Fuzzers records (dropped by default)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    if data:
        p.add_argument("--train", help="training CSV")
        p.add_argument("--test", help="testing CSV")
        p.add_argument("--schema", default="auto", help="schema file, 'unsw' or 'auto' (default)")
        p.add_argument("--label-column", default="attack_cat")
        p.add_argument("--max-categories", type=int, default=32,
                       help="one-hot columns kept per categorical feature")
    if training:
        p.add_argument("--learner", choices=sorted(LEARNERS), default="rf")
        p.add_argument("--trees", type=int, default=100)
        p.add_argument("--max-depth", type=int, default=25)
        p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
        p.add_argument("--features", help="file listing the feature subset to use, one per line")
        p.add_argument("--standardize", action="store_true",
                       help="z-score numeric columns (always on for --learner lr)")
        p.add_argument("--criterion", default="error", help="error, far, und or attack:<label>")
        p.add_argument("--criterion-split", choices=("holdout", "test"), default="holdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stepwise-ids", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="per-class counts and percentages")
    _common(p, training=False)
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("select", help="best-first feature selection")
    _common(p)
    p.add_argument("--max-features", type=int)
    p.add_argument("--counts", help="also sweep greedy prefixes, e.g. 1..43 or 1,5,11")
    p.set_defaults(handler=cmd_select)

    p = sub.add_parser("detect", help="train and evaluate an anomaly detector")
    _common(p)
    p.set_defaults(handler=cmd_detect)

    p = sub.add_parser("categorize", help="single-type and/or step-wise attack categorization")
    _common(p)
    p.add_argument("--strategy", choices=("single", "cascade", "both"), default="both")
    p.add_argument("--cascade-spec", help="cascade stage file (default: built from training counts)")
    p.add_argument("--order", help="single-type checking order, comma separated")
    p.add_argument("--per-stage-selection", action="store_true",
                   help="run feature selection separately for every cascade stage")
    p.set_defaults(handler=cmd_categorize)

    p = sub.add_parser("compare", help="side-by-side table of two categorization reports")
    p.add_argument("single_report")
    p.add_argument("cascade_report")
    _common(p, data=False, training=False)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("synth", help="write a seeded synthetic train/test pair")
    _common(p, data=False, training=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--spec", help="synthetic spec file")
    src.add_argument("--preset", choices=("separable", "confusable"), default="separable")
    p.add_argument("--divisor", type=float, default=100.0, help="scale published class counts down by this")
    p.add_argument("--shared", help="labels drawn from one distribution (confusable preset)")
    p.add_argument("--noise", type=int, default=1, help="pure-noise features to add")
    p.add_argument("--off-axis-std", type=float, default=1.0)
    p.set_defaults(handler=cmd_synth)
    return parser


def _env_value(action: argparse.Action, raw: str):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(action, argparse._CountAction):
        return int(raw)
    value = action.type(raw) if action.type else raw
    if action.choices is not None and value not in action.choices:
        raise DataError(f"{ENV_PREFIX}{action.dest.upper()}={raw!r} is not one of {sorted(action.choices)}")
    return value


def apply_env_defaults(parser: argparse.ArgumentParser, environ=None) -> None:
    """Let ``IDSCAT_<DEST>`` variables override the defaults of matching options."""
    environ = os.environ if environ is None else environ
    subparsers = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    for group in subparsers:
        for p in group.choices.values():
            for action in p._actions:
                if not action.option_strings or action.dest in ("help", "version"):
                    continue
                raw = environ.get(ENV_PREFIX + action.dest.upper())
                if raw is not None:
                    p.set_defaults(**{action.dest: _env_value(action, raw)})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        apply_env_defaults(parser)
        args = parser.parse_args(argv)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    verbose = args.__dict__.pop("verbose", 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = args.handler
    cfg = RunConfig.from_args(args)
    run = Run(cfg)
    try:
        handler(run)
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except (DataError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    finally:
        run.finish()
    return 0


if __name__ == "__main__":
    sys.exit(main())
