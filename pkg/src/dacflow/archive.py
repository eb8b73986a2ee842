"""On-disk dump of a finalized :class:`AggregateStore` plus its seed set.

Layout: a magic first line ``DACFLOW-AGG <version>`` followed by one JSON
array per line, tagged by its first element:

    ["meta", event_count, snapshot_count, duplicate_posts, linked_mentions]
    ["seed", user_id, suspension_epoch, followers_at_suspension]
    ["user", user_id, n_posts, n_retweets_made, m, M, m_outside,
             f_min, f_max, F_min, F_max, first_seen, last_seen, activity_days]
    ["tweet", tweet_id, author, posted_at, out_rt, in_rt, out_reply, in_reply]
    ["adopt", adopter, time, retweeted_tweet_id, retweet_id, source_seed]
    ["mentioners", seed_id, [user_id, ...]]
    ["daily", day_index, seed_posts, seed_retweets]

Records are sorted so identical stores produce identical bytes. Files with a
different version number are rejected.
"""

from __future__ import annotations

import json
from collections import Counter

from .errors import ArchiveError
from .events import SeedRecord, SeedSet
from .ingest import AggregateStore, TweetTally, UserAggregate

MAGIC = "DACFLOW-AGG"
VERSION = 1


_encode = json.JSONEncoder(separators=(",", ":"), ensure_ascii=False).encode


def _line(obj) -> str:
    return _encode(obj) + "\n"


def save_archive(path, store: AggregateStore, seeds: SeedSet) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{MAGIC} {VERSION}\n")
        fh.write(_line(["meta", store.event_count, store.snapshot_count,
                        store.duplicate_posts, store.linked_mentions]))
        for uid in sorted(seeds.records):
            rec = seeds.records[uid]
            fh.write(_line(["seed", uid, rec.suspension_date, rec.followers_at_suspension]))
        for uid in sorted(store.users):
            a = store.users[uid]
            fh.write(_line(["user", uid, a.n_posts, a.n_retweets_made, a.m, a.M, a.m_outside,
                            a.f_min, a.f_max, a.F_min, a.F_max, a.first_seen, a.last_seen,
                            a.activity_days]))
        for tid in sorted(store.tweets):
            t = store.tweets[tid]
            fh.write(_line(["tweet", tid, t.author, t.posted_at, t.out_retweets, t.in_retweets,
                            t.out_reply_mentions, t.in_reply_mentions]))
        for adopter in sorted(store.adoptions):
            fh.write(_line(["adopt", adopter, *store.adoptions[adopter]]))
        for uid in sorted(store.mentioners):
            fh.write(_line(["mentioners", uid, sorted(store.mentioners[uid])]))
        days = sorted(set(store.seed_posts_daily) | set(store.seed_retweets_daily))
        for day in days:
            fh.write(_line(["daily", day, store.seed_posts_daily.get(day, 0),
                            store.seed_retweets_daily.get(day, 0)]))


def load_archive(path):
    """Return ``(store, seeds)`` from an archive written by :func:`save_archive`."""
    store = AggregateStore()
    seeds = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != MAGIC:
            raise ArchiveError(f"{path}: not an aggregate archive")
        if header[1] != str(VERSION):
            raise ArchiveError(f"{path}: archive version {header[1]} unsupported (expected {VERSION})")
        for lineno, line in enumerate(fh, start=2):
            try:
                rec = json.loads(line)
                tag = rec[0]
                if tag == "user":
                    store.users[rec[1]] = UserAggregate(*rec[1:])
                elif tag == "tweet":
                    store.tweets[rec[1]] = TweetTally(*rec[1:])
                elif tag == "adopt":
                    store.adoptions[rec[1]] = tuple(rec[2:])
                elif tag == "seed":
                    seeds[rec[1]] = SeedRecord(rec[1], rec[2], rec[3])
                elif tag == "mentioners":
                    store.mentioners[rec[1]] = set(rec[2])
                elif tag == "daily":
                    if rec[2]:
                        store.seed_posts_daily[rec[1]] = rec[2]
                    if rec[3]:
                        store.seed_retweets_daily[rec[1]] = rec[3]
                elif tag == "meta":
                    (store.event_count, store.snapshot_count,
                     store.duplicate_posts, store.linked_mentions) = rec[1:5]
                else:
                    raise ValueError(f"unknown record tag {tag!r}")
            except (ValueError, IndexError, TypeError) as exc:
                raise ArchiveError(f"{path}: line {lineno}: {exc}") from None
    store.seed_posts_daily = Counter(store.seed_posts_daily)
    store.seed_retweets_daily = Counter(store.seed_retweets_daily)
    return store, SeedSet(seeds)
