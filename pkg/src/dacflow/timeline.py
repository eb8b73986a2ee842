"""Daily and weekly count series with running totals."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import accumulate
from typing import Iterable

from .errors import EmptyInput
from .events import Event, EventKind, SeedSet, day_index, day_to_date


class Granularity(str, Enum):
    DAY = "day"
    WEEK = "week"


def period_start(day: int, granularity: Granularity) -> int:
    """First day (epoch-day index) of the period holding ``day``; weeks start Monday."""
    if granularity is Granularity.WEEK:
        # epoch day 0 was a Thursday
        return day - (day + 3) % 7
    return day


@dataclass
class TimeSeries:
    granularity: Granularity
    periods: list = field(default_factory=list)  # epoch-day index of each period start
    counts: list = field(default_factory=list)

    @property
    def cumulative(self) -> list:
        return list(accumulate(self.counts))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __len__(self) -> int:
        return len(self.periods)

    def as_dict(self) -> dict:
        return dict(zip(self.periods, self.counts))

    def dates(self) -> list:
        return [day_to_date(d) for d in self.periods]

    def densify(self) -> "TimeSeries":
        """Zero-fill the periods missing between the first and last one."""
        if not self.periods:
            return TimeSeries(self.granularity)
        step = 7 if self.granularity is Granularity.WEEK else 1
        have = self.as_dict()
        periods = list(range(self.periods[0], self.periods[-1] + 1, step))
        return TimeSeries(self.granularity, periods, [have.get(p, 0) for p in periods])

    def rows(self):
        """Yield ``(period_start ISO date, count, cumulative)``."""
        for day, count, cum in zip(self.periods, self.counts, self.cumulative):
            yield day_to_date(day).isoformat(), count, cum


def series_from_daily(daily: dict, granularity: Granularity = Granularity.DAY) -> TimeSeries:
    """Bucket a ``{epoch_day: count}`` mapping; periods with zero count are omitted."""
    buckets = Counter()
    for day, count in daily.items():
        if count:
            buckets[period_start(day, granularity)] += count
    periods = sorted(p for p, c in buckets.items() if c)
    return TimeSeries(granularity, periods, [buckets[p] for p in periods])


def suspension_timeline(seeds: SeedSet) -> TimeSeries:
    if len(seeds) == 0:
        raise EmptyInput("suspension timeline of an empty seed set")
    daily = Counter(day_index(rec.suspension_date) for rec in seeds.records.values())
    return series_from_daily(daily, Granularity.DAY)


def volume_timeseries(events: Iterable[Event], who: SeedSet,
                      granularity: Granularity = Granularity.WEEK,
                      posts_only: bool = False) -> TimeSeries:
    """Posts (and, unless ``posts_only``, retweets) authored by seed users per period."""
    kinds = {EventKind.POST} if posts_only else {EventKind.POST, EventKind.RETWEET}
    seed_ids = who.records
    daily = Counter(
        day_index(ev.time) for ev in events if ev.kind in kinds and ev.actor in seed_ids
    )
    return series_from_daily(daily, granularity)


def volume_from_store(store, granularity: Granularity = Granularity.WEEK,
                      posts_only: bool = False) -> TimeSeries:
    """Same series as :func:`volume_timeseries`, read from a folded store."""
    daily = Counter(store.seed_posts_daily)
    if not posts_only:
        daily.update(store.seed_retweets_daily)
    return series_from_daily(daily, granularity)
