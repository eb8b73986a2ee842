"""Streaming ingestion: parse event/snapshot/seed files and fold them into
mergeable per-user and per-tweet aggregates.

A store built from any partition of a log and combined with :func:`merge`
is field-for-field identical to the single-pass store. Memory grows with the
number of distinct users and seed-authored tweets, never with event count.
"""

from __future__ import annotations

import csv
import gc
import json
import logging
import os
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .errors import DuplicateSeed, EventError, MalformedRecord
from .events import (
    Event,
    EventKind,
    FollowerSnapshot,
    SeedRecord,
    SeedSet,
    UserId,
    day_index,
    parse_date,
    validate_event,
    validate_snapshot,
)

log = logging.getLogger(__name__)

POST, RETWEET, MENTION = EventKind.POST, EventKind.RETWEET, EventKind.MENTION


@dataclass(slots=True)
class UserAggregate:
    user: UserId
    n_posts: int = 0
    n_retweets_made: int = 0
    m: int = 0  # mentions received
    M: int = 0  # mentions made
    m_outside: int = 0  # mentions received from non-seed users
    f_min: Optional[int] = None
    f_max: Optional[int] = None
    F_min: Optional[int] = None
    F_max: Optional[int] = None
    first_seen: Optional[int] = None
    last_seen: Optional[int] = None
    activity_days: Optional[int] = None  # set by finalize()

    def absorb(self, other: "UserAggregate") -> None:
        self.n_posts += other.n_posts
        self.n_retweets_made += other.n_retweets_made
        self.m += other.m
        self.M += other.M
        self.m_outside += other.m_outside
        self.f_min = _nmin(self.f_min, other.f_min)
        self.f_max = _nmax(self.f_max, other.f_max)
        self.F_min = _nmin(self.F_min, other.F_min)
        self.F_max = _nmax(self.F_max, other.F_max)
        self.first_seen = _nmin(self.first_seen, other.first_seen)
        self.last_seen = _nmax(self.last_seen, other.last_seen)
        self.activity_days = None

    def copy(self) -> "UserAggregate":
        return UserAggregate(
            self.user, self.n_posts, self.n_retweets_made, self.m, self.M,
            self.m_outside, self.f_min, self.f_max, self.F_min, self.F_max,
            self.first_seen, self.last_seen, self.activity_days,
        )


@dataclass(slots=True)
class TweetTally:
    """Per-tweet reception counts; only kept for seed-authored tweets."""

    tweet_id: str
    author: UserId
    posted_at: Optional[int] = None
    out_retweets: int = 0
    in_retweets: int = 0
    out_reply_mentions: int = 0
    in_reply_mentions: int = 0

    def copy(self) -> "TweetTally":
        return TweetTally(
            self.tweet_id, self.author, self.posted_at, self.out_retweets,
            self.in_retweets, self.out_reply_mentions, self.in_reply_mentions,
        )


def _nmin(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a if a <= b else b


def _nmax(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a if a >= b else b


@dataclass
class AggregateStore:
    users: dict = field(default_factory=dict)
    tweets: dict = field(default_factory=dict)
    event_count: int = 0
    snapshot_count: int = 0
    duplicate_posts: int = 0
    # Mention events that reply to a seed-authored tweet. While zero, the
    # distinct mentioners of each seed are kept for the mention-mode fallback.
    linked_mentions: int = 0
    mentioners: dict = field(default_factory=dict)
    # adopter -> (time, retweeted tweet, retweet id, seed author)
    adoptions: dict = field(default_factory=dict)
    seed_posts_daily: Counter = field(default_factory=Counter)
    seed_retweets_daily: Counter = field(default_factory=Counter)

    def _touch(self, user: UserId, t: int) -> UserAggregate:
        agg = self.users.get(user)
        if agg is None:
            agg = self.users[user] = UserAggregate(user, first_seen=t, last_seen=t)
        else:
            if t < agg.first_seen:
                agg.first_seen = t
            if t > agg.last_seen:
                agg.last_seen = t
        return agg

    def _tally(self, tweet_id: str, author: UserId) -> TweetTally:
        tally = self.tweets.get(tweet_id)
        if tally is None:
            tally = self.tweets[tweet_id] = TweetTally(tweet_id, author)
        elif tally.posted_at is None and author < tally.author:
            # conflicting attributions before the post is seen: smallest id wins
            tally.author = author
        return tally

    def fold(self, ev: Event, seeds: SeedSet) -> "AggregateStore":
        seed_ids = seeds.records
        kind, actor, t = ev.kind, ev.actor, ev.time
        actor_is_seed = actor in seed_ids

        if kind is POST and actor_is_seed:
            tally = self.tweets.get(ev.tweet_id)
            if tally is None:
                self.tweets[ev.tweet_id] = TweetTally(ev.tweet_id, actor, t)
            elif tally.posted_at is not None:
                self.duplicate_posts += 1
                return self
            else:
                tally.posted_at = t
                tally.author = actor
            self.seed_posts_daily[t // 86400] += 1

        # actor side, inlined _touch
        agg = self.users.get(actor)
        if agg is None:
            agg = self.users[actor] = UserAggregate(actor, first_seen=t, last_seen=t)
        elif t < agg.first_seen:
            agg.first_seen = t
        elif t > agg.last_seen:
            agg.last_seen = t
        self.event_count += 1

        if kind is POST:
            agg.n_posts += 1
            return self

        target = ev.target_user
        recv = self._touch(target, t)
        if kind is RETWEET:
            agg.n_retweets_made += 1
            if actor_is_seed:
                self.seed_retweets_daily[t // 86400] += 1
            if target in seed_ids:
                tally = self._tally(ev.target_tweet_id, target)
                if actor_is_seed:
                    tally.in_retweets += 1
                else:
                    tally.out_retweets += 1
                    key = (t, ev.target_tweet_id, ev.tweet_id, target)
                    prev = self.adoptions.get(actor)
                    if prev is None or key < prev:
                        self.adoptions[actor] = key
            return self

        agg.M += 1
        recv.m += 1
        if not actor_is_seed:
            recv.m_outside += 1
        if target in seed_ids:
            if ev.target_tweet_id is not None:
                tally = self._tally(ev.target_tweet_id, target)
                if actor_is_seed:
                    tally.in_reply_mentions += 1
                else:
                    tally.out_reply_mentions += 1
                if self.linked_mentions == 0:
                    self.mentioners.clear()
                self.linked_mentions += 1
            elif self.linked_mentions == 0:
                bucket = self.mentioners.get(target)
                if bucket is None:
                    bucket = self.mentioners[target] = set()
                bucket.add(actor)
        return self

    def fold_snapshot(self, snap: FollowerSnapshot) -> "AggregateStore":
        agg = self._touch(snap.user, snap.time)
        fo, fr = snap.followers, snap.friends
        if agg.f_min is None:
            agg.f_min = agg.f_max = fo
            agg.F_min = agg.F_max = fr
        else:
            if fo < agg.f_min:
                agg.f_min = fo
            if fo > agg.f_max:
                agg.f_max = fo
            if fr < agg.F_min:
                agg.F_min = fr
            if fr > agg.F_max:
                agg.F_max = fr
        self.snapshot_count += 1
        return self

    def merge_from(self, other: "AggregateStore") -> "AggregateStore":
        """Absorb ``other`` into this store in place."""
        for uid, agg in other.users.items():
            mine = self.users.get(uid)
            if mine is None:
                self.users[uid] = agg.copy()
            else:
                mine.absorb(agg)
        self.event_count += other.event_count
        self.snapshot_count += other.snapshot_count
        self.duplicate_posts += other.duplicate_posts
        self.seed_posts_daily.update(other.seed_posts_daily)
        self.seed_retweets_daily.update(other.seed_retweets_daily)

        for tid, theirs in other.tweets.items():
            mine = self.tweets.get(tid)
            if mine is None:
                self.tweets[tid] = theirs.copy()
                continue
            mine.out_retweets += theirs.out_retweets
            mine.in_retweets += theirs.in_retweets
            mine.out_reply_mentions += theirs.out_reply_mentions
            mine.in_reply_mentions += theirs.in_reply_mentions
            if theirs.posted_at is None:
                if mine.posted_at is None and theirs.author < mine.author:
                    mine.author = theirs.author
                continue
            if mine.posted_at is None:
                mine.posted_at = theirs.posted_at
                mine.author = theirs.author
                continue
            # Same seed tweet posted in both parts: keep the earlier post and
            # undo the counts the later one contributed.
            dropped = max(mine.posted_at, theirs.posted_at)
            if theirs.posted_at < mine.posted_at:
                mine.posted_at, mine.author = theirs.posted_at, theirs.author
            self.users[mine.author].n_posts -= 1
            self.event_count -= 1
            self.duplicate_posts += 1
            day = dropped // 86400
            self.seed_posts_daily[day] -= 1
            if not self.seed_posts_daily[day]:
                del self.seed_posts_daily[day]

        for adopter, key in other.adoptions.items():
            prev = self.adoptions.get(adopter)
            if prev is None or key < prev:
                self.adoptions[adopter] = key

        if self.linked_mentions == 0 and other.linked_mentions == 0:
            for uid, who in other.mentioners.items():
                self.mentioners.setdefault(uid, set()).update(who)
        else:
            self.mentioners.clear()
        self.linked_mentions += other.linked_mentions
        return self

    def copy(self) -> "AggregateStore":
        return AggregateStore().merge_from(self)


def fold(store: AggregateStore, event: Event, seeds: SeedSet) -> AggregateStore:
    return store.fold(event, seeds)


def fold_snapshot(store: AggregateStore, snap: FollowerSnapshot) -> AggregateStore:
    return store.fold_snapshot(snap)


def merge(a: AggregateStore, b: AggregateStore) -> AggregateStore:
    """Combine two partial stores into a new one; inputs are left untouched.

    Merging clears ``activity_days``; call :func:`finalize` on the result.
    """
    return a.copy().merge_from(b)


def finalize(store: AggregateStore, seeds: SeedSet) -> AggregateStore:
    """Fill in activity periods and default follower counts, in place.

    Seed users are measured from first observation to suspension, everyone
    else from first to last observation; both floor at one day.
    """
    seed_ids = seeds.records
    for uid, agg in store.users.items():
        rec = seed_ids.get(uid)
        if agg.f_min is None:
            base = rec.followers_at_suspension if rec is not None else 0
            agg.f_min = agg.f_max = base
            agg.F_min = agg.F_max = 0
        first = day_index(agg.first_seen)
        if rec is not None:
            days = day_index(rec.suspension_date) - first
            if days < 0:
                log.warning("seed %s suspended before first observation; activity_days=1", uid)
        else:
            days = day_index(agg.last_seen) - first
        agg.activity_days = max(1, days)
    return store


# ---------------------------------------------------------------- parsing


def _attach_line(exc: EventError, lineno):
    return type(exc)(str(exc), line=lineno)


_raw_decode = json.JSONDecoder().raw_decode


def _load_object(line: str, lineno):
    try:
        raw, end = _raw_decode(line)
        if end != len(line) and not line[end:].isspace():
            raise ValueError("trailing data")
    except ValueError:
        # slow path: leading whitespace, or a genuinely bad line
        try:
            raw = json.loads(line)
        except ValueError as exc:
            raise MalformedRecord(f"bad JSON ({exc.msg})", line=lineno) from None
    if type(raw) is not dict:
        raise MalformedRecord("record is not an object", line=lineno)
    return raw


def parse_event_line(line: str, lineno: Optional[int] = None) -> Event:
    raw = _load_object(line, lineno)
    try:
        return validate_event(raw)
    except EventError as exc:
        raise _attach_line(exc, lineno) from None


def parse_snapshot_line(line: str, lineno: Optional[int] = None) -> FollowerSnapshot:
    raw = _load_object(line, lineno)
    try:
        return validate_snapshot(raw)
    except EventError as exc:
        raise _attach_line(exc, lineno) from None


SEED_COLUMNS = ("user_id", "suspension_date", "followers_at_suspension")


def load_seed_set(path) -> SeedSet:
    records = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header[:3]) != SEED_COLUMNS:
            raise MalformedRecord(f"seed file header must be {','.join(SEED_COLUMNS)}", line=1)
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 3:
                raise MalformedRecord("expected 3 columns", line=lineno)
            user = row[0].strip()
            if not user:
                raise MalformedRecord("empty user_id", line=lineno)
            try:
                susp = parse_date(row[1])
            except EventError as exc:
                raise _attach_line(exc, lineno) from None
            try:
                followers = int(row[2])
            except ValueError:
                raise MalformedRecord(f"bad follower count {row[2]!r}", line=lineno) from None
            if followers < 0:
                raise MalformedRecord("negative follower count", line=lineno)
            if user in records:
                raise DuplicateSeed(f"duplicate seed user {user!r}", line=lineno)
            records[user] = SeedRecord(user, susp, followers)
    return SeedSet(records)


def iter_records(path, parser, on_error: Optional[Callable] = None,
                 start: int = 0, end: Optional[int] = None, first_line: int = 1) -> Iterator:
    """Yield parsed records from a line-delimited file.

    Bad lines are passed to ``on_error`` (or re-raised when it is None).
    ``start``/``end`` are byte offsets aligned to line starts.
    """
    with open(path, "rb") as fh:
        fh.seek(start)
        pos = start
        lineno = first_line
        for raw in fh:
            if end is not None and pos >= end:
                break
            pos += len(raw)
            if raw.strip():
                try:
                    yield parser(raw.decode("utf-8"), lineno)
                except EventError as exc:
                    if on_error is None:
                        raise
                    on_error(exc)
                except UnicodeDecodeError:
                    exc = MalformedRecord("invalid UTF-8", line=lineno)
                    if on_error is None:
                        raise exc from None
                    on_error(exc)
            lineno += 1


def shard_bounds(path, k: int) -> list:
    """Split a file into ``k`` line-aligned byte ranges with their first line numbers."""
    size = os.path.getsize(path)
    if k <= 1 or size == 0:
        return [(0, size, 1)]
    cuts = [0]
    with open(path, "rb") as fh:
        for i in range(1, k):
            fh.seek(max(cuts[-1], size * i // k))
            if fh.tell() > 0:
                fh.seek(fh.tell() - 1)
                fh.readline()
            cuts.append(min(fh.tell(), size))
    cuts.append(size)
    bounds = []
    line = 1
    with open(path, "rb") as fh:
        for lo, hi in zip(cuts, cuts[1:]):
            if hi <= lo:
                continue
            bounds.append((lo, hi, line))
            fh.seek(lo)
            remaining = hi - lo
            while remaining:
                chunk = fh.read(min(remaining, 1 << 24))
                line += chunk.count(b"\n")
                remaining -= len(chunk)
    return bounds or [(0, size, 1)]


@dataclass
class IngestReport:
    events: int = 0
    snapshots: int = 0
    errors: int = 0
    messages: list = field(default_factory=list)

    def record(self, exc: Exception, keep: int = 20) -> None:
        self.errors += 1
        if len(self.messages) < keep:
            self.messages.append(str(exc))

    def absorb(self, other: "IngestReport") -> None:
        self.errors += other.errors
        self.messages.extend(other.messages[: max(0, 20 - len(self.messages))])


@contextmanager
def _gc_paused():
    # Folding allocates millions of long-lived objects; generational GC
    # passes over them cost far more than they reclaim.
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def fold_events(events: Iterable[Event], seeds: SeedSet,
                store: Optional[AggregateStore] = None) -> AggregateStore:
    store = AggregateStore() if store is None else store
    fold_one = store.fold
    with _gc_paused():
        for ev in events:
            fold_one(ev, seeds)
    return store


def _fold_shard(args):
    path, start, end, first_line, seeds = args
    report = IngestReport()
    store = AggregateStore()
    fold_one = store.fold
    lineno = first_line - 1
    remaining = end - start
    # Hot loop: same semantics as iter_records + parse_event_line, minus the
    # generator and wrapper-call overhead.
    with open(path, "rb") as fh, _gc_paused():
        fh.seek(start)
        for data in fh:
            if remaining <= 0:
                break
            remaining -= len(data)
            lineno += 1
            try:
                line = data.decode("utf-8")
                if line.isspace():
                    continue
                ev = validate_event(_load_object(line, lineno))
            except EventError as exc:
                report.record(exc if exc.line is not None else _attach_line(exc, lineno))
                continue
            except UnicodeDecodeError:
                report.record(MalformedRecord("invalid UTF-8", line=lineno))
                continue
            fold_one(ev, seeds)
    return store, report


def ingest_files(events_path, seeds: SeedSet, snapshots_path=None, workers: int = 1,
                 finalize_store: bool = True):
    """Fold an event log (and optional snapshot log) into a store.

    With ``workers > 1`` the event log is split into line ranges folded by
    separate processes and merged afterwards.
    """
    report = IngestReport()
    bounds = shard_bounds(events_path, workers)
    jobs = [(events_path, lo, hi, line, seeds) for lo, hi, line in bounds]
    if workers > 1 and len(jobs) > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(min(workers, len(jobs))) as pool:
            parts = pool.map(_fold_shard, jobs)
    else:
        parts = [_fold_shard(job) for job in jobs]
    store, first_report = parts[0]
    report.absorb(first_report)
    for part, part_report in parts[1:]:
        store.merge_from(part)
        report.absorb(part_report)

    if snapshots_path is not None:
        for snap in iter_records(snapshots_path, parse_snapshot_line, report.record):
            store.fold_snapshot(snap)
    report.events = store.event_count
    report.snapshots = store.snapshot_count
    if store.duplicate_posts:
        report.errors += store.duplicate_posts
        report.messages.append(f"{store.duplicate_posts} duplicate post(s) rejected")
    if finalize_store:
        finalize(store, seeds)
    return store, report
