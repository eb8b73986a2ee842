"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 strict-mode parse failure,
3 empty analytical population, 4 corpus generation failure,
5 round-trip verification failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import export
from .archive import load_archive, save_archive
from .contagion import (
    Mode,
    adoption_events,
    adoption_timeseries,
    adoptions_from_store,
    class_conditional,
    per_class_engagement,
    population_r0,
    reproduction_scores,
    uses_mention_fallback,
)
from .errors import DacflowError, EventError, UnreachableTarget
from .ingest import ingest_files, iter_records, load_seed_set, parse_event_line
from .metrics import CLASS_ORDER, class_counts, dac_grid
from .pipeline import seed_classes
from .timeline import (
    Granularity,
    series_from_daily,
    suspension_timeline,
    volume_from_store,
    volume_timeseries,
)

EXIT_OK, EXIT_INPUT, EXIT_STRICT, EXIT_EMPTY, EXIT_SYNTH, EXIT_VERIFY = range(6)

ARCHIVE_NAME = "aggregates.dac"
FALLBACK_NOTE = ("mention-mode fallback: no reply linkage in log; "
                 "T = distinct out-of-sample mentioners, RT = out-of-sample mentions")

log = logging.getLogger("dacflow")


class InputError(Exception):
    pass


def _require(*paths):
    for p in paths:
        if p is not None and not os.path.isfile(p):
            raise InputError(f"input file not found: {p}")


def _out(args, name):
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _load(args):
    path = args.archive or os.path.join(args.out_dir, ARCHIVE_NAME)
    _require(path)
    return load_archive(path)


# ------------------------------------------------------------- commands


def cmd_ingest(args):
    _require(args.events, args.seeds, args.snapshots)
    seeds = load_seed_set(args.seeds)
    store, report = ingest_files(args.events, seeds, args.snapshots, workers=args.workers)
    for msg in report.messages:
        print(f"warning: {msg}", file=sys.stderr)
    if report.errors and args.strict:
        print(f"error: {report.errors} record(s) failed to parse (--strict)", file=sys.stderr)
        return EXIT_STRICT
    path = _out(args, args.archive_name)
    save_archive(path, store, seeds)
    print(f"events={report.events} snapshots={report.snapshots} users={len(store.users)} "
          f"seeds={len(seeds)} parse_errors={report.errors}")
    print(f"archive={path}")
    return EXIT_OK


def cmd_map(args):
    store, seeds = _load(args)
    points, classes = seed_classes(store, seeds)
    if not points:
        print("error: no seed user both mentioned and was mentioned", file=sys.stderr)
        return EXIT_EMPTY
    grid = dac_grid(points, args.nx, args.ny)
    stamp = not args.no_header
    export.write_grid(_out(args, "dac_grid.csv"), grid, stamp)
    export.write_classes(_out(args, "classes.csv"), points, classes, stamp)
    if args.engagement:
        dists = per_class_engagement(store.users, store.tweets, classes, args.include_in_sample)
        export.write_engagement(_out(args, "engagement.csv"), dists, stamp)
    counts = class_counts(classes)
    print(f"active={len(points)} " + " ".join(f"{c.value}={counts[c]}" for c in CLASS_ORDER))
    return EXIT_OK


def _read_counts(values):
    if not values:
        values = sys.stdin.read().replace(",", " ").replace("/", " ").split()
    if len(values) != 2:
        raise InputError("--counts-only needs two integers: N_SEEDS N_ADOPTERS")
    try:
        return int(values[0]), int(values[1])
    except ValueError:
        raise InputError(f"--counts-only needs integers, got {values}") from None


def cmd_adoption(args):
    if args.counts_only is not None:
        n_seeds, n_adopters = _read_counts(args.counts_only)
        if n_seeds < 1:
            print("error: zero seeds", file=sys.stderr)
            return EXIT_INPUT
        print(f"R0={population_r0(n_seeds, n_adopters):.2f}")
        return EXIT_OK

    if args.events is not None:
        _require(args.events, args.seeds)
        if args.seeds is None:
            raise InputError("--events requires --seeds")
        seeds = load_seed_set(args.seeds)
        errors = []
        adoptions = adoption_events(
            iter_records(args.events, parse_event_line, errors.append), seeds)
        for exc in errors[:20]:
            print(f"warning: {exc}", file=sys.stderr)
        if errors and args.strict:
            return EXIT_STRICT
    else:
        store, seeds = _load(args)
        adoptions = adoptions_from_store(store)
    if len(seeds) == 0:
        print("error: zero seeds", file=sys.stderr)
        return EXIT_INPUT
    series = adoption_timeseries(adoptions)
    if args.densify:
        series = series.densify()
    stamp = not args.no_header
    export.write_adoptions(_out(args, "adoptions.csv"), adoptions, stamp)
    export.write_timeseries(_out(args, "adoption_timeseries.csv"), series, stamp)
    print(f"seeds={len(seeds)} adopters={len(adoptions)}")
    print(f"R0={population_r0(len(seeds), len(adoptions)):.2f}")
    return EXIT_OK


def cmd_r0(args):
    store, seeds = _load(args)
    mode = Mode(args.mode)
    _, classes = seed_classes(store, seeds)
    scores = reproduction_scores(store, seeds, mode, args.include_in_sample)
    comments = []
    if mode is Mode.MENTION and uses_mention_fallback(store):
        comments.append(FALLBACK_NOTE)
    freqs = class_conditional(scores, classes, args.bin_width, mode)
    stamp = not args.no_header
    export.write_scores(_out(args, f"scores_{mode.value}.csv"), scores, classes, stamp, comments)
    export.write_frequencies(_out(args, f"r0_frequency_{mode.value}.csv"), freqs, stamp)
    print(f"mode={mode.value} scored={len(scores)}")
    for cls in CLASS_ORDER:
        vals = freqs.values[cls]
        mean = f"{freqs.mean(cls):.4f}" if vals else "nan"
        print(f"{cls.value}: n={len(vals)} mean_r0={mean}")
    return EXIT_OK


def cmd_timeline(args):
    gran = Granularity(args.granularity)
    kind = args.kind or ("suspensions" if args.seeds and not args.events else "volume")
    if kind == "suspensions":
        if args.seeds:
            _require(args.seeds)
            seeds = load_seed_set(args.seeds)
        else:
            _, seeds = _load(args)
        if len(seeds) == 0:
            print("error: empty seed set", file=sys.stderr)
            return EXIT_EMPTY
        series = suspension_timeline(seeds)
        if gran is Granularity.WEEK:
            series = series_from_daily(series.as_dict(), gran)
    elif args.events:
        _require(args.events, args.seeds)
        if args.seeds is None:
            raise InputError("--events requires --seeds")
        seeds = load_seed_set(args.seeds)
        errors = []
        events = iter_records(args.events, parse_event_line, errors.append)
        series = volume_timeseries(events, seeds, gran, args.posts_only)
        if errors and args.strict:
            return EXIT_STRICT
    else:
        store, _ = _load(args)
        series = volume_from_store(store, gran, args.posts_only)
    if args.densify:
        series = series.densify()
    path = _out(args, f"timeline_{kind}_{gran.value}.csv")
    export.write_timeseries(path, series, not args.no_header)
    print(f"periods={len(series)} total={series.total}")
    print(f"timeline={path}")
    return EXIT_OK


def cmd_synth(args):
    from . import synth

    os.makedirs(args.out_dir, exist_ok=True)
    if args.scale:
        paths = {name: os.path.join(args.out_dir, f) for name, f in (
            ("events", synth.EVENTS_FILE), ("seeds", synth.SEEDS_FILE),
            ("snapshots", synth.SNAPSHOTS_FILE))}
        counts = synth.generate_scale(paths["events"], args.scale, n_users=args.users,
                                      n_seeds=args.seed_users, rng_seed=args.seed,
                                      seeds_path=paths["seeds"],
                                      snapshots_path=paths["snapshots"])
        print(" ".join(f"{k}={counts.get(k, 0)}" for k in ("post", "retweet", "mention")))
    else:
        cfg = synth.SynthConfig(n_per_class=args.per_class, n_outsiders=args.outsiders,
                                horizon_days=args.horizon, margin=args.margin,
                                rng_seed=args.seed, n_chatter=args.chatter)
        try:
            corpus = synth.generate(cfg)
        except UnreachableTarget as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SYNTH
        paths = synth.write_corpus(corpus, args.out_dir)
        print(f"seeds={len(corpus.seeds)} events={len(corpus.events)} "
              f"adopters={len(corpus.truth.adoptions)}")
    for name in sorted(paths):
        print(f"{name}={paths[name]}")
    return EXIT_OK


def cmd_verify(args):
    from .synth import load_ground_truth, verify_roundtrip

    truth_dir = args.truth_dir or args.out_dir
    store, seeds = _load(args)
    try:
        truth = load_ground_truth(truth_dir)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from None
    _, classes = seed_classes(store, seeds)
    scores = reproduction_scores(store, seeds, Mode.RETWEET)
    report = verify_roundtrip(truth, classes, adoptions_from_store(store), scores)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY


# --------------------------------------------------------------- parser


def _global_flags(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out-dir", default=d("."), help="directory for output files")
    parser.add_argument("--seed", type=int, default=d(42), help="random seed")
    parser.add_argument("--workers", type=int, default=d(1), help="parallel ingestion workers")
    parser.add_argument("--strict", action="store_true", default=d(False),
                        help="fail (exit 2) on any malformed record")
    parser.add_argument("--no-header", action="store_true", default=d(False),
                        help="omit the generated_at line from CSV outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dacflow", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="fold logs into an aggregate archive")
    p.add_argument("--events", required=True)
    p.add_argument("--seeds", required=True)
    p.add_argument("--snapshots")
    p.add_argument("--archive-name", default=ARCHIVE_NAME)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("map", parents=[common], help="DAC density grid and class assignment")
    p.add_argument("--archive")
    p.add_argument("--nx", type=int, default=40)
    p.add_argument("--ny", type=int, default=40)
    p.add_argument("--engagement", action="store_true",
                   help="also write per-class engagement distributions")
    p.add_argument("--include-in-sample", action="store_true")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("adoption", parents=[common], help="content adoptions and population R0")
    p.add_argument("--archive")
    p.add_argument("--events")
    p.add_argument("--seeds")
    p.add_argument("--counts-only", nargs="*", metavar="N",
                   help="N_SEEDS N_ADOPTERS (read from stdin when omitted)")
    p.add_argument("--densify", action="store_true")
    p.set_defaults(func=cmd_adoption)

    p = sub.add_parser("r0", parents=[common], help="per-user reproduction scores")
    p.add_argument("--archive")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="retweet")
    p.add_argument("--include-in-sample", action="store_true")
    p.add_argument("--bin-width", type=float)
    p.set_defaults(func=cmd_r0)

    p = sub.add_parser("timeline", parents=[common], help="suspension or volume time series")
    p.add_argument("--archive")
    p.add_argument("--seeds")
    p.add_argument("--events")
    p.add_argument("--kind", choices=["suspensions", "volume"])
    p.add_argument("--granularity", choices=[g.value for g in Granularity], default="day")
    p.add_argument("--densify", action="store_true")
    p.add_argument("--posts-only", action="store_true")
    p.set_defaults(func=cmd_timeline)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--outsiders", type=int, default=50)
    p.add_argument("--horizon", type=int, default=120)
    p.add_argument("--margin", type=float, default=0.3)
    p.add_argument("--chatter", type=int, default=200)
    p.add_argument("--scale", type=int, nargs="?", const=3_400_000, default=None,
                   help="emit a large uniform-random log with this many events")
    p.add_argument("--users", type=int, default=100_000, help="scale mode: distinct users")
    p.add_argument("--seed-users", type=int, default=25_538, help="scale mode: seed users")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", parents=[common], help="round-trip check against ground truth")
    p.add_argument("--archive")
    p.add_argument("--truth-dir")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EventError as exc:
        # seed-file problems are input errors regardless of --strict
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DacflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
