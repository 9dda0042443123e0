"""``harkit`` command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys

from .dataset import (drop_features, load_features, load_raw, save_features,
                      summarize, write_summary)
from .evaluation import (REPORT_HEADER, ExperimentSpec, elbow_sweep, format_report,
                         features_from_raw, info_gain_rank, is_raw_csv,
                         run_experiment, write_report_csv)
from .exceptions import (ConfigurationError, ExtractionError, HarError, InputError,
                         LoadError, ModelFormatError)
from .features import REDUCED_DROP
from .models import ModelConfig, load_model, save_model, train, train_hierarchical
from .signal import FilterConfig
from .stream import DebounceState, buffered, event_log, replay, streaming_predict

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3
DEFAULT_SEED = 1

log = logging.getLogger("harkit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _add_filter_flags(p):
    p.add_argument("--filters", choices=("none", "median", "mean"), default="none",
                   help="smoothing applied to every axis before extraction")
    p.add_argument("--kernel", type=int, default=11, help="odd smoothing kernel size")
    p.add_argument("--gravity-alpha", type=float, default=0.8,
                   help="accelerometer gravity low-pass factor; negative disables")
    p.add_argument("--highpass-alpha", type=float, default=-1.0,
                   help="gyroscope/magnetometer high-pass factor; negative disables")


def _add_model_flags(p):
    p.add_argument("--model", choices=("rf", "bagging", "tree", "knn", "nb", "hier"), default="rf")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--nfeat", type=int, default=10)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--min-leaf", type=int, default=1)


def _add_common(p, schema=True):
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=1)
    if schema:
        p.add_argument("--schema", choices=("full103", "reduced94"), default="reduced94")


def build_parser():
    parser = _Parser(prog="harkit", description="Inertial-sensor activity recognition toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("extract", help="raw sample CSV -> feature CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--schema", choices=("full103", "reduced94"), default="full103")
    _add_filter_flags(p)

    p = sub.add_parser("train", help="feature CSV (or raw CSV) -> model file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    _add_model_flags(p)
    _add_filter_flags(p)
    _add_common(p)

    p = sub.add_parser("eval", help="cross-validate an experiment")
    p.add_argument("--spec", help="experiment TOML file")
    p.add_argument("--in", dest="inp", help="dataset when no --spec is given")
    p.add_argument("--out", help="machine-readable report CSV")
    p.add_argument("--folds", type=int, default=10)
    _add_model_flags(p)
    _add_filter_flags(p)
    _add_common(p)

    p = sub.add_parser("rank", help="info-gain feature ranking")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bins", type=int, default=10)

    p = sub.add_parser("replay", help="stream a raw CSV through a model")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--model-file", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rate", type=float, default=50.0)
    p.add_argument("--realtime", action="store_true")
    p.add_argument("--quiet-ms", type=int, default=1000)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("summarize", help="per-feature distribution summary")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("elbow", help="accuracy versus forest size")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tree-counts", default="10,25,50,75,100,129,150",
                   help="comma-separated forest sizes")
    p.add_argument("--folds", type=int, default=10)
    _add_model_flags(p)
    _add_common(p)
    return parser


def _filters(args) -> FilterConfig:
    return FilterConfig(
        gravity_alpha=None if args.gravity_alpha < 0 else args.gravity_alpha,
        highpass_alpha=None if args.highpass_alpha < 0 else args.highpass_alpha,
        smoothing_kind=args.filters, kernel_size=args.kernel)


def _model_config(args) -> ModelConfig:
    kind = "hierarchical" if args.model == "hier" else args.model
    return ModelConfig(kind=kind, trees=args.trees, n_features=args.nfeat, k=args.k,
                       min_leaf=args.min_leaf, seed=args.seed, threads=args.threads)


def _echo(config: dict):
    print("# config: " + json.dumps(config, sort_keys=True), file=sys.stderr)


def _feature_dataset(args, filters, hierarchical=False):
    """Load features from a feature CSV, or extract them from a raw CSV."""
    if is_raw_csv(args.inp):
        ds = features_from_raw(args.inp, filters, "hierarchical" if hierarchical else "full103")
    else:
        if hierarchical:
            ds = load_features(args.inp)
            if ds.schema != "hierarchical":
                raise ConfigurationError("--model hier needs a raw CSV input")
        else:
            ds = load_features(args.inp)
        filters = None
    schema = getattr(args, "schema", None)
    if schema == "reduced94" and all(n in ds.feature_names for n in REDUCED_DROP):
        ds = drop_features(ds, REDUCED_DROP)
    elif schema == "full103" and not all(n in ds.feature_names for n in REDUCED_DROP):
        raise ConfigurationError("input has the reduced94 schema; cannot use --schema full103")
    return ds, filters


def cmd_extract(args):
    filters = _filters(args)
    _echo({"command": "extract", "in": args.inp, "schema": args.schema,
           "filters": dataclasses.asdict(filters)})
    ds = features_from_raw(args.inp, filters, "full103")
    if args.schema == "reduced94":
        ds = drop_features(ds, REDUCED_DROP)
    save_features(ds, args.out)
    log.info("wrote %d rows x %d attributes to %s", len(ds), ds.n_attributes, args.out)


def cmd_train(args):
    config = _model_config(args)
    filters = _filters(args)
    _echo({"command": "train", "in": args.inp, "schema": args.schema, "threads": args.threads,
           "model": config.to_dict(), "filters": dataclasses.asdict(filters)})
    hier = config.kind == "hierarchical"
    ds, used_filters = _feature_dataset(args, filters, hierarchical=hier)
    model = train_hierarchical(config, ds, used_filters) if hier else train(config, ds, used_filters)
    save_model(model, args.out)


def cmd_eval(args):
    if args.spec:
        spec = ExperimentSpec.from_toml(args.spec)
        if args.threads != 1:
            spec = dataclasses.replace(spec, threads=args.threads)
    else:
        if not args.inp:
            raise UsageError("eval needs --spec or --in")
        raw = is_raw_csv(args.inp)
        spec = ExperimentSpec(dataset=args.inp, name="cli", schema=args.schema, folds=args.folds,
                              seed=args.seed, threads=args.threads,
                              filters=_filters(args) if raw else None,
                              model=_model_config(args))
    _echo({"command": "eval", "threads": spec.threads, **spec.to_dict()})
    result = run_experiment(spec)
    text = format_report(result.report, title=f"experiment: {spec.name}")
    for name, part in result.parts.items():
        text += "\n" + format_report(part, title=f"{name} model")
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_report_csv(result, fh)


def cmd_rank(args):
    _echo({"command": "rank", "in": args.inp, "bins": args.bins})
    ranked = info_gain_rank(load_features(args.inp), bins=args.bins)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(REPORT_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature", "info_gain"])
        for i, (name, score) in enumerate(ranked.entries, start=1):
            w.writerow([i, name, f"{score:.6f}"])


def cmd_replay(args):
    model = load_model(args.model_file)
    _echo({"command": "replay", "in": args.inp, "model_file": args.model_file,
           "rate": args.rate, "realtime": args.realtime, "quiet_ms": args.quiet_ms})
    feed = replay(args.inp, rate=args.rate, realtime=args.realtime)
    if args.realtime:
        feed = buffered(feed)
    events = streaming_predict(feed, model, debounce=DebounceState(args.quiet_ms))
    n = event_log(events, args.out)
    log.info("logged %d events to %s", n, args.out)


def cmd_summarize(args):
    _echo({"command": "summarize", "in": args.inp})
    summary = summarize(load_features(args.inp))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(REPORT_HEADER + "\n")
        write_summary(summary, fh)
        w = csv.writer(fh, lineterminator="\n")
        for label, n in summary.class_counts.items():
            w.writerow([f"class_count:{label}", n])


def cmd_elbow(args):
    try:
        counts = [int(c) for c in args.tree_counts.split(",") if c.strip()]
    except ValueError:
        raise UsageError(f"--tree-counts must be comma-separated integers, got {args.tree_counts!r}")
    config = _model_config(args)
    _echo({"command": "elbow", "in": args.inp, "tree_counts": counts, "folds": args.folds,
           "threads": args.threads,
           "model": config.to_dict(), "schema": args.schema})
    ds, _ = _feature_dataset(args, FilterConfig())
    curve = elbow_sweep(ds, counts, config, k=args.folds, seed=args.seed, threads=args.threads)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(REPORT_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trees", "accuracy"])
        for trees, acc in curve:
            w.writerow([trees, f"{100 * acc:.2f}"])


COMMANDS = {
    "extract": cmd_extract, "train": cmd_train, "eval": cmd_eval, "rank": cmd_rank,
    "replay": cmd_replay, "summarize": cmd_summarize, "elbow": cmd_elbow,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_help())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return EXIT_USAGE
    except (LoadError, InputError, ExtractionError, ModelFormatError, ConfigurationError) as exc:
        sys.stderr.write(f"harkit: data error: {exc}\n")
        return EXIT_DATA
    except (HarError, OSError) as exc:
        sys.stderr.write(f"harkit: error: {exc}\n")
        return EXIT_RUNTIME
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
