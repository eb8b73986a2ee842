"""Content adoption, population and per-user reproduction numbers, and
class-conditional cascade distributions.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional

from .errors import UnknownUser, ZeroSeeds
from .events import Event, EventKind, SeedSet, day_index
from .metrics import CLASS_ORDER, DynClass, ProbDist, probability_distribution
from .timeline import Granularity, TimeSeries, series_from_daily


class Mode(str, Enum):
    RETWEET = "retweet"
    MENTION = "mention"


DEFAULT_BIN_WIDTH = {Mode.RETWEET: Fraction(1, 2), Mode.MENTION: Fraction(1, 5)}


class AdoptionEvent(NamedTuple):
    adopter: str
    time: int
    source_seed: str
    tweet_id: str  # the retweeted seed tweet


# ---------------------------------------------------------------- adoption

def _adoption_key(ev: Event) -> tuple:
    # Earliest time wins; same-second ties go to the smaller retweeted tweet id,
    # then the smaller retweet id.
    return (ev.time, ev.target_tweet_id, ev.tweet_id, ev.target_user)


def local_adoption_minima(events: Iterable[Event], seeds: SeedSet) -> dict:
    """Per-adopter earliest qualifying retweet; shard-local minima reduce with
    :func:`reduce_adoption_minima`."""
    seed_ids = seeds.records
    best = {}
    for ev in events:
        if ev.kind is not EventKind.RETWEET:
            continue
        if ev.actor in seed_ids or ev.target_user not in seed_ids:
            continue
        key = _adoption_key(ev)
        prev = best.get(ev.actor)
        if prev is None or key < prev:
            best[ev.actor] = key
    return best


def reduce_adoption_minima(parts: Iterable[dict]) -> dict:
    out = {}
    for part in parts:
        for adopter, key in part.items():
            prev = out.get(adopter)
            if prev is None or key < prev:
                out[adopter] = key
    return out


def _to_events(minima: dict) -> list:
    out = [AdoptionEvent(adopter, key[0], key[3], key[1]) for adopter, key in minima.items()]
    out.sort(key=lambda a: (a.time, a.adopter))
    return out


def adoption_events(events: Iterable[Event], seeds: SeedSet) -> list:
    """One adoption per out-of-sample user: their first retweet of any seed tweet."""
    return _to_events(local_adoption_minima(events, seeds))


def adoptions_from_store(store) -> list:
    return _to_events(store.adoptions)


def adoption_timeseries(adoptions: Iterable[AdoptionEvent]) -> TimeSeries:
    daily = defaultdict(int)
    for a in adoptions:
        daily[day_index(a.time)] += 1
    return series_from_daily(daily, Granularity.DAY)


def population_r0(n_seeds: int, n_adopters: int) -> float:
    """Distinct adopters per seed account."""
    if n_seeds < 1:
        raise ZeroSeeds("population R0 needs at least one seed")
    if n_adopters < 0:
        raise ValueError("adopter count cannot be negative")
    return n_adopters / n_seeds


# ------------------------------------------------------ per-user scores


class ReproductionScore(NamedTuple):
    user: str
    mode: Mode
    RT: int
    T: int

    @property
    def r0(self) -> float:
        return self.RT / self.T

    @property
    def exact(self) -> Fraction:
        return Fraction(self.RT, self.T)


def tallies_by_author(store) -> dict:
    index = defaultdict(list)
    for tally in store.tweets.values():
        index[tally.author].append(tally)
    return index


def uses_mention_fallback(store) -> bool:
    """True when no mention in the log links back to a seed tweet."""
    return store.linked_mentions == 0


def user_reproduction(store, user: str, mode: Mode, seeds: SeedSet,
                      include_in_sample: bool = False,
                      index: Optional[dict] = None) -> Optional[ReproductionScore]:
    """RT/T for one seed user, or None if none of their content drew a response.

    Retweet mode: T counts the user's tweets retweeted at least once by an
    out-of-sample user, RT the total such retweets. Mention mode uses replies
    that mention the user; without any reply linkage in the log it falls
    back to distinct out-of-sample mentioners (T) and their mentions (RT).
    """
    mode = Mode(mode)
    if user not in seeds or user not in store.users:
        raise UnknownUser(user)
    if index is None:
        index = tallies_by_author(store)
    tallies = index.get(user, ())

    if mode is Mode.RETWEET:
        if include_in_sample:
            per_tweet = [t.out_retweets + t.in_retweets for t in tallies]
        else:
            per_tweet = [t.out_retweets for t in tallies]
    elif not uses_mention_fallback(store):
        if include_in_sample:
            per_tweet = [t.out_reply_mentions + t.in_reply_mentions for t in tallies]
        else:
            per_tweet = [t.out_reply_mentions for t in tallies]
    else:
        agg = store.users[user]
        who = store.mentioners.get(user, ())
        if include_in_sample:
            RT, T = agg.m, len(who)
        else:
            RT, T = agg.m_outside, sum(1 for u in who if u not in seeds)
        return ReproductionScore(user, mode, RT, T) if T else None

    hits = [c for c in per_tweet if c > 0]
    if not hits:
        return None
    return ReproductionScore(user, mode, sum(hits), len(hits))


def reproduction_scores(store, seeds: SeedSet, mode: Mode,
                        include_in_sample: bool = False) -> list:
    """Scores for every observed seed user, sorted by user id."""
    index = tallies_by_author(store)
    out = []
    for user in sorted(u for u in seeds if u in store.users):
        score = user_reproduction(store, user, mode, seeds, include_in_sample, index)
        if score is not None:
            out.append(score)
    return out


# ---------------------------------------------------- per-class outputs


@dataclass
class ClassFrequencies:
    mode: Mode
    width: Fraction
    tables: dict = field(default_factory=dict)  # DynClass -> {bin index: count}
    values: dict = field(default_factory=dict)  # DynClass -> [r0, ...]

    def rows(self):
        """Yield ``(class, bin_lo, bin_hi, count)`` for every occupied bin."""
        for cls in CLASS_ORDER:
            for k in sorted(self.tables[cls]):
                yield (cls.value, float(k * self.width), float((k + 1) * self.width),
                       self.tables[cls][k])

    def mean(self, cls: DynClass) -> float:
        vals = self.values[cls]
        return math.fsum(vals) / len(vals) if vals else math.nan


def r0_bin(score: ReproductionScore, width: Fraction) -> int:
    # exact rational arithmetic so r0 = 1.2 lands in [1.2, 1.4), not [1.0, 1.2)
    return math.floor(score.exact / width)


def class_conditional(scores: Iterable[ReproductionScore], classes: dict,
                      width=None, mode: Optional[Mode] = None) -> ClassFrequencies:
    """Histogram r0 per dynamical class with fixed-width bins ``[k*w, (k+1)*w)``.

    Users without a class assignment are skipped.
    """
    scores = list(scores)
    if mode is None:
        mode = scores[0].mode if scores else Mode.RETWEET
    mode = Mode(mode)
    width = DEFAULT_BIN_WIDTH[mode] if width is None else Fraction(str(width))
    out = ClassFrequencies(mode, width, {c: {} for c in CLASS_ORDER},
                           {c: [] for c in CLASS_ORDER})
    for s in scores:
        cls = classes.get(s.user)
        if cls is None:
            continue
        k = r0_bin(s, width)
        table = out.tables[cls]
        table[k] = table.get(k, 0) + 1
        out.values[cls].append(s.r0)
    return out


ENGAGEMENT_FIELDS = ("tweets", "retweets", "followers", "mentions")


def engagement_samples(users: dict, tweets: dict, classes: dict,
                       include_in_sample: bool = False) -> dict:
    """Per class, per-user posted tweets, retweets received, max followers
    and mentions received (users in id order)."""
    received = defaultdict(int)
    for t in tweets.values():
        received[t.author] += t.out_retweets + (t.in_retweets if include_in_sample else 0)
    out = {c: {f: [] for f in ENGAGEMENT_FIELDS} for c in CLASS_ORDER}
    for user, cls in sorted(classes.items()):
        agg = users[user]
        out[cls]["tweets"].append(agg.n_posts)
        out[cls]["retweets"].append(received.get(user, 0))
        out[cls]["followers"].append(agg.f_max)
        out[cls]["mentions"].append(agg.m)
    return out


def per_class_engagement(users: dict, tweets: dict, classes: dict,
                         include_in_sample: bool = False) -> dict:
    """Distributions of :func:`engagement_samples`, as ``{DynClass: {field: ProbDist}}``.

    Empty classes get empty distributions.
    """
    samples = engagement_samples(users, tweets, classes, include_in_sample)
    return {
        cls: {f: probability_distribution(v) if v else ProbDist({}, 0) for f, v in fields.items()}
        for cls, fields in samples.items()
    }
