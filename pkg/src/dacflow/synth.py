"""Synthetic corpora with planted ground truth.

Seed users are planted at target (x, y) points inside their class quadrant
and the generator solves backwards for integer follower/friend deltas and
mention counts that realize those points. Outsiders adopt on an explicit
schedule, so every analytic stage can be checked for exact recovery.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
import os
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .contagion import Mode
from .errors import UnreachableTarget
from .events import (
    SECONDS_PER_DAY,
    Event,
    EventKind,
    FollowerSnapshot,
    SeedRecord,
    SeedSet,
    day_index,
    day_to_date,
    format_time,
    parse_date,
    validate_event,
)
from .metrics import CLASS_ORDER, DynClass

MAX_ATTEMPTS = 100
MAX_COUNT = 10**9  # largest follower/friend delta planted
MAX_MENTIONS = 100_000  # per user; each one becomes an event

DEFAULT_MEAN_R0 = {
    DynClass.COMMON: 1.5,
    DynClass.BROADCASTER: 3.0,
    DynClass.INFLUENTIAL: 4.0,
    DynClass.HIDDEN_INFLUENTIAL: 2.0,
}
# Posts per active day; adjacent rates differ by 2x while activity periods
# vary by at most 1.5x, so per-class post-count medians keep this order.
DEFAULT_POST_RATE = {
    DynClass.HIDDEN_INFLUENTIAL: 0.2,
    DynClass.INFLUENTIAL: 0.4,
    DynClass.COMMON: 0.8,
    DynClass.BROADCASTER: 1.6,
}

# Quadrant sign of (log10 x, log10 y) per class.
_QUADRANT = {
    DynClass.COMMON: (-1, -1),
    DynClass.BROADCASTER: (1, -1),
    DynClass.INFLUENTIAL: (1, 1),
    DynClass.HIDDEN_INFLUENTIAL: (-1, 1),
}


@dataclass
class SynthConfig:
    n_per_class: object = 100  # int, or {DynClass: int}
    n_outsiders: int = 50
    horizon_days: int = 120
    margin: float = 0.3  # log10 distance of planted points from x=1 and y=1
    mean_r0: dict = field(default_factory=lambda: dict(DEFAULT_MEAN_R0))
    rng_seed: int = 42
    post_rate: dict = field(default_factory=lambda: dict(DEFAULT_POST_RATE))
    n_chatter: int = 200
    retweet_prob: float = 0.5
    in_sample_retweet_prob: float = 0.05
    reply_fraction: float = 0.5
    spread: float = 1.0  # width in log10 of the band targets are drawn from
    start_date: str = "2015-01-01"

    def __post_init__(self):
        if self.horizon_days < 1:
            raise ValueError("horizon_days must be >= 1")
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.n_outsiders < 0 or self.n_chatter < 0:
            raise ValueError("counts must be non-negative")
        if any(n < 0 for n in self.class_sizes().values()):
            raise ValueError("counts must be non-negative")

    def class_sizes(self) -> dict:
        if isinstance(self.n_per_class, dict):
            return {c: int(self.n_per_class.get(c, 0)) for c in CLASS_ORDER}
        return {c: int(self.n_per_class) for c in CLASS_ORDER}


@dataclass
class GroundTruth:
    classes: dict = field(default_factory=dict)  # user -> DynClass
    targets: dict = field(default_factory=dict)  # user -> (x, y), realized exactly
    adoptions: dict = field(default_factory=dict)  # adopter -> epoch seconds
    expected_r0: dict = field(default_factory=dict)  # user -> Fraction or None
    seed_posts_daily: Counter = field(default_factory=Counter)
    seed_retweets_daily: Counter = field(default_factory=Counter)

    def adoption_pairs(self) -> set:
        return {(a, day_index(t)) for a, t in self.adoptions.items()}


@dataclass
class Corpus:
    events: list
    snapshots: list
    seeds: SeedSet
    truth: GroundTruth


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _solve_ratio(rng, sign: int, magnitude: float, base: int, free_lo: int, free_hi: int):
    """Integers ``(a, b)`` with ``(base+a)/(base+b)`` close to ``10**(sign*magnitude)``.

    The delta on the smaller side is drawn from ``[free_lo, free_hi]``; the
    other one is solved for.
    """
    free = int(rng.integers(free_lo, free_hi + 1))
    try:
        solved = int(round(10.0 ** magnitude * (base + free) - base))
    except OverflowError:
        solved = MAX_COUNT + 1
    return (solved, free) if sign > 0 else (free, solved)


def _plant_point(rng, cls: DynClass, t: int, cfg: SynthConfig):
    sx, sy = _QUADRANT[cls]
    for _ in range(MAX_ATTEMPTS):
        mag_x = cfg.margin + float(rng.uniform(0.05, cfg.spread))
        mag_y = cfg.margin + float(rng.uniform(0.05, cfg.spread))
        d_f, d_F = _solve_ratio(rng, sx, mag_x, t, 0, t)
        # y = (1+m)/(1+M) with m, M >= 1
        m, M = _solve_ratio(rng, sy, mag_y, 1, 1, 8)
        if (min(d_f, d_F) < 0 or m < 1 or M < 1 or max(d_f, d_F) > MAX_COUNT
                or max(m, M) > MAX_MENTIONS):
            continue
        x = Fraction(t + d_f, t + d_F)
        y = Fraction(1 + m, 1 + M)
        if sx * math.log10(x) >= cfg.margin and sy * math.log10(y) >= cfg.margin:
            return d_f, d_F, m, M, x, y
    raise UnreachableTarget(
        f"could not place a {cls.value} user within margin {cfg.margin} after {MAX_ATTEMPTS} draws"
    )


class _Emitter:
    def __init__(self):
        self.records = []
        self._next = 0

    def tweet_id(self) -> str:
        self._next += 1
        return f"t{self._next:09d}"

    def emit(self, kind, actor, tweet_id, time, target_user=None, target_tweet_id=None):
        raw = {"kind": kind.value, "actor": actor, "tweet_id": tweet_id, "time": int(time)}
        if target_user is not None:
            raw["target_user"] = target_user
        if target_tweet_id is not None:
            raw["target_tweet_id"] = target_tweet_id
        ev = validate_event(raw)
        self.records.append(ev)
        return ev


_KIND_ORDER = {EventKind.POST: 0, EventKind.MENTION: 1, EventKind.RETWEET: 2}


def generate(config: SynthConfig) -> Corpus:
    """Build a corpus deterministically from ``config.rng_seed``."""
    cfg = config
    rng = np.random.default_rng(cfg.rng_seed)
    base = parse_date(cfg.start_date)
    H = cfg.horizon_days
    t_lo = max(1, math.ceil(0.6 * H))
    t_hi = max(t_lo, math.floor(0.9 * H))

    out = _Emitter()
    truth = GroundTruth()
    snapshots = []
    seed_records = []
    chatter = [f"c{i:06d}" for i in range(1, cfg.n_chatter + 1)] or ["c000001"]
    outsiders = [f"o{i:06d}" for i in range(1, cfg.n_outsiders + 1)]

    seeds = []  # (user, cls, window_start, window_end)
    posts = []  # (time, tweet_id, author)
    posts_by_user = {}
    uid = 0
    for cls in CLASS_ORDER:
        for _ in range(cfg.class_sizes()[cls]):
            uid += 1
            user = f"s{uid:06d}"
            t = int(rng.integers(t_lo, t_hi + 1))
            start = base + int(rng.integers(0, H - t + 1)) * SECONDS_PER_DAY
            end = start + t * SECONDS_PER_DAY
            d_f, d_F, m, M, x, y = _plant_point(rng, cls, t, cfg)
            f0 = int(rng.integers(10, 1000))
            F0 = int(rng.integers(10, 500))
            snapshots.append(FollowerSnapshot(user, start, f0, F0))
            snapshots.append(FollowerSnapshot(user, end, f0 + d_f, F0 + d_F))
            seed_records.append(SeedRecord(user, end, f0 + d_f))
            truth.classes[user] = cls
            truth.targets[user] = (float(x), float(y))
            seeds.append((user, cls, start, end))

            n_posts = max(M, int(round(cfg.post_rate[cls] * t)), 1)
            times = sorted(int(v) for v in rng.integers(start, end, size=n_posts))
            mention_slots = set(rng.choice(n_posts, size=M, replace=False).tolist())
            mine = []
            for i, ts in enumerate(times):
                tid = out.tweet_id()
                out.emit(EventKind.POST, user, tid, ts)
                truth.seed_posts_daily[day_index(ts)] += 1
                if i in mention_slots:
                    target = chatter[int(rng.integers(len(chatter)))]
                    out.emit(EventKind.MENTION, user, tid, ts, target_user=target)
                mine.append((ts, tid))
                posts.append((ts, tid, user))
            posts_by_user[user] = mine

            for _ in range(m):
                ts = int(rng.integers(start, end))
                actor = chatter[int(rng.integers(len(chatter)))]
                tid = out.tweet_id()
                reply_to = None
                earlier = [p for p in mine if p[0] <= ts]
                if earlier and rng.random() < cfg.reply_fraction:
                    reply_to = earlier[int(rng.integers(len(earlier)))][1]
                out.emit(EventKind.POST, actor, tid, ts)
                out.emit(EventKind.MENTION, actor, tid, ts, target_user=user,
                         target_tweet_id=reply_to)

    # adoption schedule: each outsider's first retweet
    received = Counter()
    adopt_times = []
    if posts:
        for o in outsiders:
            ts, ptid, author = posts[int(rng.integers(len(posts)))]
            when = ts + int(rng.integers(60, 2 * SECONDS_PER_DAY))
            out.emit(EventKind.RETWEET, o, out.tweet_id(), when, target_user=author,
                     target_tweet_id=ptid)
            truth.adoptions[o] = when
            received[ptid] += 1
            adopt_times.append((when, o))
    adopt_times.sort()
    adopt_keys = [a[0] for a in adopt_times]

    seed_cls = {u: c for u, c, _, _ in seeds}
    windows = [(u, s, e) for u, _, s, e in seeds]
    for ts, ptid, author in posts:
        if adopt_times and rng.random() < cfg.retweet_prob:
            lam = max(0.0, cfg.mean_r0[seed_cls[author]] - 1.0)
            k = 1 + int(rng.poisson(lam))
            for _ in range(k):
                when = ts + int(rng.integers(60, 3 * SECONDS_PER_DAY))
                eligible = bisect_left(adopt_keys, when)  # adopted strictly earlier
                if eligible == 0:
                    continue
                o = adopt_times[int(rng.integers(eligible))][1]
                out.emit(EventKind.RETWEET, o, out.tweet_id(), when, target_user=author,
                         target_tweet_id=ptid)
                received[ptid] += 1
        if len(windows) > 1 and rng.random() < cfg.in_sample_retweet_prob:
            who, s, e = windows[int(rng.integers(len(windows)))]
            when = ts + int(rng.integers(60, SECONDS_PER_DAY))
            if who != author and s <= when < e:
                out.emit(EventKind.RETWEET, who, out.tweet_id(), when, target_user=author,
                         target_tweet_id=ptid)
                truth.seed_retweets_daily[day_index(when)] += 1

    for user, mine in posts_by_user.items():
        hits = [received[tid] for _, tid in mine if received[tid] > 0]
        truth.expected_r0[user] = Fraction(sum(hits), len(hits)) if hits else None

    events = sorted(out.records, key=lambda e: (e.time, e.tweet_id, _KIND_ORDER[e.kind],
                                                e.target_user or ""))
    snapshots.sort(key=lambda s: (s.time, s.user))
    return Corpus(events, snapshots, SeedSet.from_records(seed_records), truth)


# ------------------------------------------------------------------ files

EVENTS_FILE = "events.jsonl"
SNAPSHOTS_FILE = "snapshots.jsonl"
SEEDS_FILE = "seeds.csv"
TRUTH_FILE = "ground_truth.csv"
TRUTH_ADOPTIONS_FILE = "ground_truth_adoptions.csv"


def event_record(ev: Event) -> dict:
    raw = {"kind": ev.kind.value, "actor": ev.actor, "tweet_id": ev.tweet_id,
           "time": format_time(ev.time)}
    if ev.target_user is not None:
        raw["target_user"] = ev.target_user
    if ev.target_tweet_id is not None:
        raw["target_tweet_id"] = ev.target_tweet_id
    return raw


def write_events(path, events) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(json.dumps(event_record(ev), separators=(",", ":")) + "\n")


def write_snapshots(path, snapshots) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in snapshots:
            fh.write(json.dumps({"user": s.user, "time": format_time(s.time),
                                 "followers": s.followers, "friends": s.friends},
                                separators=(",", ":")) + "\n")


def write_seeds(path, seeds: SeedSet) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "suspension_date", "followers_at_suspension"])
        for uid in sorted(seeds.records):
            rec = seeds.records[uid]
            day = dt.datetime.fromtimestamp(rec.suspension_date, dt.timezone.utc).date()
            w.writerow([uid, day.isoformat(), rec.followers_at_suspension])


def write_corpus(corpus: Corpus, out_dir) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, fname) for name, fname in (
        ("events", EVENTS_FILE), ("snapshots", SNAPSHOTS_FILE), ("seeds", SEEDS_FILE),
        ("truth", TRUTH_FILE), ("truth_adoptions", TRUTH_ADOPTIONS_FILE))}
    write_events(paths["events"], corpus.events)
    write_snapshots(paths["snapshots"], corpus.snapshots)
    write_seeds(paths["seeds"], corpus.seeds)
    truth = corpus.truth
    with open(paths["truth"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "class", "x_target", "y_target", "expected_r0"])
        for user in sorted(truth.classes):
            x, y = truth.targets[user]
            r0 = truth.expected_r0.get(user)
            w.writerow([user, truth.classes[user].value, _fmt_float(x), _fmt_float(y),
                        "" if r0 is None else f"{r0.numerator}/{r0.denominator}"])
    with open(paths["truth_adoptions"], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["adopter_id", "day", "time"])
        for adopter in sorted(truth.adoptions):
            ts = truth.adoptions[adopter]
            w.writerow([adopter, dt.datetime.fromtimestamp(ts, dt.timezone.utc).date().isoformat(),
                        format_time(ts)])
    return paths


def load_ground_truth(directory) -> GroundTruth:
    from .events import parse_time

    truth = GroundTruth()
    with open(os.path.join(directory, TRUTH_FILE), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            user = row["user_id"]
            truth.classes[user] = DynClass(row["class"])
            truth.targets[user] = (float(row["x_target"]), float(row["y_target"]))
            truth.expected_r0[user] = Fraction(row["expected_r0"]) if row["expected_r0"] else None
    path = os.path.join(directory, TRUTH_ADOPTIONS_FILE)
    if os.path.exists(path):
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                truth.adoptions[row["adopter_id"]] = parse_time(row["time"])
    return truth


# ------------------------------------------------------------- scale mode

FULL_SCALE_EVENTS = 3_395_901
FULL_SCALE_SEEDS = 25_538


def generate_scale(path, n_events: int = FULL_SCALE_EVENTS, n_users: int = 100_000,
                   n_seeds: int = FULL_SCALE_SEEDS, n_posts: Optional[int] = None,
                   rng_seed: int = 42, seeds_path=None, snapshots_path=None,
                   chunk: int = 200_000) -> dict:
    """Stream a large uniform-random event log for throughput testing.

    The first ``n_posts`` events are seed posts; the rest are retweets and
    mentions referencing that fixed tweet pool, so store size depends on
    ``n_users`` and ``n_posts`` only. Returns per-kind event counts.
    """
    if n_users <= n_seeds:
        raise ValueError("n_users must exceed n_seeds")
    rng = np.random.default_rng(rng_seed)
    n_posts = max(1, min(n_events, int(round(n_events * 0.35)) if n_posts is None else n_posts))
    t0 = parse_date("2014-01-01")
    t1 = parse_date("2015-06-09")
    width = len(str(n_users))
    counts = Counter()

    def uid(i):
        return f"{'s' if i < n_seeds else 'u'}{i:0{width}d}"

    post_authors = rng.integers(0, n_seeds, size=n_posts)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        done = 0
        while done < n_events:
            size = min(chunk, n_events - done)
            times = rng.integers(t0, t1, size=size)
            kinds = rng.random(size)
            actors = rng.integers(0, n_users, size=size)
            shift = rng.integers(1, n_users, size=size)
            ptarget = rng.integers(0, n_posts, size=size)
            linked = rng.random(size) < 0.3
            lines = []
            for j in range(size):
                i = done + j
                ts = format_time(int(times[j]))
                if i < n_posts:
                    raw = {"kind": "post", "actor": uid(int(post_authors[i])),
                           "tweet_id": f"p{i:09d}", "time": ts}
                else:
                    actor = int(actors[j])
                    p = int(ptarget[j])
                    if kinds[j] < 0.7:
                        author = int(post_authors[p])
                        if author == actor:
                            actor = (actor + int(shift[j])) % n_users
                        raw = {"kind": "retweet", "actor": uid(actor), "tweet_id": f"e{i:09d}",
                               "time": ts, "target_user": uid(author),
                               "target_tweet_id": f"p{p:09d}"}
                    else:
                        target = (actor + int(shift[j])) % n_users
                        raw = {"kind": "mention", "actor": uid(actor), "tweet_id": f"e{i:09d}",
                               "time": ts, "target_user": uid(target)}
                        if linked[j] and target < n_seeds:
                            raw["target_tweet_id"] = f"p{p:09d}"
                validate_event(raw)
                counts[raw["kind"]] += 1
                lines.append(json.dumps(raw, separators=(",", ":")))
            fh.write("\n".join(lines))
            fh.write("\n")
            done += size

    if seeds_path is not None:
        lo, hi = day_index(parse_date("2015-03-17")), day_index(parse_date("2015-06-09"))
        days = rng.integers(lo, hi + 1, size=n_seeds)
        followers = rng.integers(0, 5000, size=n_seeds)
        with open(seeds_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["user_id", "suspension_date", "followers_at_suspension"])
            for i in range(n_seeds):
                w.writerow([uid(i), day_to_date(int(days[i])).isoformat(),
                            int(followers[i])])
    if snapshots_path is not None:
        with open(snapshots_path, "w", encoding="utf-8", newline="\n") as fh:
            for i in range(n_seeds):
                for when in (t0, t1):
                    fh.write(json.dumps({"user": uid(i), "time": format_time(when),
                                         "followers": int(rng.integers(0, 5000)),
                                         "friends": int(rng.integers(0, 2000))},
                                        separators=(",", ":")) + "\n")
    return dict(counts)


# ------------------------------------------------------------- round trip


@dataclass
class Check:
    name: str
    passed: bool
    details: list = field(default_factory=list)


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)
    class_pairs: dict = field(default_factory=dict)  # user -> (planted, recovered)
    r0_pairs: dict = field(default_factory=dict)  # user -> (planted, empirical)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name) -> Check:
        return next(c for c in self.checks if c.name == name)

    def lines(self):
        for c in self.checks:
            yield f"{'PASS' if c.passed else 'FAIL'} {c.name}"
            for d in c.details[:50]:
                yield f"  {d}"


def verify_roundtrip(truth: GroundTruth, classes: dict, adoptions, scores) -> VerifyReport:
    """Compare recovered classes, adoptions and retweet-mode r0 with the planted truth."""
    report = VerifyReport()

    bad = []
    for user in sorted(truth.classes):
        planted, got = truth.classes[user], classes.get(user)
        report.class_pairs[user] = (planted, got)
        if planted != got:
            bad.append(f"{user}: planted {planted.value}, recovered {got.value if got else 'none'}")
    report.checks.append(Check("classes", not bad, bad))

    planted = {(a, t) for a, t in truth.adoptions.items()}
    got = {(a.adopter, a.time) for a in adoptions}
    details = [f"missing adopter {a} at {format_time(t)}" for a, t in sorted(planted - got)]
    details += [f"unexpected adopter {a} at {format_time(t)}" for a, t in sorted(got - planted)]
    report.checks.append(Check("adoptions", planted == got, details))

    empirical = {s.user: s.exact for s in scores if Mode(s.mode) is Mode.RETWEET}
    bad = []
    for user in sorted(truth.expected_r0):
        want, have = truth.expected_r0[user], empirical.get(user)
        report.r0_pairs[user] = (want, have)
        if want != have:
            bad.append(f"{user}: planted r0 {want}, empirical {have}")
    report.checks.append(Check("r0", not bad, bad))
    return report
