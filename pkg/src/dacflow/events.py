"""Domain vocabulary: events, seed records and follower snapshots.

Timestamps are carried as integer seconds since the Unix epoch (UTC).
Sub-second precision is truncated on parse.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, NamedTuple, Optional

from .errors import (
    DuplicateSeed,
    KindTargetMismatch,
    MalformedRecord,
    MalformedTimestamp,
    MissingField,
    SelfInteraction,
)

UserId = str
Timestamp = int

SECONDS_PER_DAY = 86_400
_UTC = _dt.timezone.utc
_EPOCH_ORDINAL = _dt.date(1970, 1, 1).toordinal()


class EventKind(str, Enum):
    POST = "post"
    RETWEET = "retweet"
    MENTION = "mention"


class Event(NamedTuple):
    kind: EventKind
    actor: UserId
    tweet_id: str
    time: Timestamp
    target_tweet_id: Optional[str] = None
    target_user: Optional[UserId] = None


class FollowerSnapshot(NamedTuple):
    user: UserId
    time: Timestamp
    followers: int
    friends: int


@dataclass(frozen=True)
class SeedRecord:
    user: UserId
    suspension_date: Timestamp
    followers_at_suspension: int


@dataclass(frozen=True)
class SeedSet:
    """Roster of flagged accounts keyed by user id."""

    records: Mapping[UserId, SeedRecord] = field(default_factory=dict)

    @classmethod
    def from_records(cls, records) -> "SeedSet":
        out = {}
        for rec in records:
            if rec.user in out:
                raise DuplicateSeed(f"duplicate seed user {rec.user!r}")
            out[rec.user] = rec
        return cls(out)

    def __contains__(self, user) -> bool:
        return user in self.records

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[UserId]:
        return iter(self.records)

    def __getitem__(self, user: UserId) -> SeedRecord:
        return self.records[user]

    def get(self, user, default=None):
        return self.records.get(user, default)


def _parse_time_slow(value) -> Timestamp:
    if isinstance(value, bool):
        raise MalformedTimestamp(f"not a timestamp: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return int(value // 1)
    if isinstance(value, _dt.datetime):
        dt = value
    elif isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            dt = _dt.datetime.fromisoformat(text)
        except ValueError:
            raise MalformedTimestamp(f"unparseable timestamp {value!r}") from None
    else:
        raise MalformedTimestamp(f"not a timestamp: {value!r}")
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=_UTC)
    return int(dt.timestamp() // 1)


# "YYYY-MM-DDTHH:" -> epoch second of that hour; bounded by the log's time span
_HOUR_CACHE: dict = {}


def parse_time(value) -> Timestamp:
    """Parse an ISO-8601 instant (``Z``, offset or naive-as-UTC) to epoch seconds."""
    if type(value) is str and len(value) == 20 and value[19] == "Z" and value[16] == ":":
        base = _HOUR_CACHE.get(value[:14])
        if base is None:
            base = _parse_time_slow(value[:14] + "00:00Z")
            if len(_HOUR_CACHE) > 200_000:
                _HOUR_CACHE.clear()
            _HOUR_CACHE[value[:14]] = base
        mm, ss = value[14:16], value[17:19]
        if mm.isdigit() and ss.isdigit():
            minutes, seconds = int(mm), int(ss)
            if minutes < 60 and seconds < 60:
                return base + minutes * 60 + seconds
    return _parse_time_slow(value)


def parse_date(value) -> Timestamp:
    """Parse a calendar date (or full instant) to the epoch second of UTC midnight."""
    if isinstance(value, str) and len(value.strip()) == 10:
        try:
            d = _dt.date.fromisoformat(value.strip())
        except ValueError:
            raise MalformedTimestamp(f"unparseable date {value!r}") from None
        return (d.toordinal() - _EPOCH_ORDINAL) * SECONDS_PER_DAY
    return parse_time(value)


def format_time(ts: Timestamp) -> str:
    return _dt.datetime.fromtimestamp(ts, _UTC).strftime("%Y-%m-%dT%H:%M:%SZ")


def day_index(ts: Timestamp) -> int:
    """Days since the epoch of the UTC calendar day containing ``ts``."""
    return ts // SECONDS_PER_DAY


def day_to_date(day: int) -> _dt.date:
    return _dt.date.fromordinal(day + _EPOCH_ORDINAL)


def date_to_day(d: _dt.date) -> int:
    return d.toordinal() - _EPOCH_ORDINAL


_KINDS = {k.value: k for k in EventKind}


def _text(raw, name, required=True):
    value = raw.get(name)
    if value is None or value == "":
        if required:
            raise MissingField(f"missing field {name!r}")
        return None
    if not isinstance(value, str):
        # numeric ids are common in exports
        if isinstance(value, bool) or not isinstance(value, int):
            raise MalformedRecord(f"field {name!r} must be a string, got {value!r}")
        value = str(value)
    return value


def validate_event(raw: Mapping) -> Event:
    """Build an :class:`Event` from a field bundle, enforcing the kind/target rules."""
    get = raw.get
    kind_raw = get("kind")
    kind = _KINDS.get(kind_raw) if type(kind_raw) is str else None
    if kind is None:
        if kind_raw is None or kind_raw == "":
            raise MissingField("missing field 'kind'")
        kind = kind_raw if isinstance(kind_raw, EventKind) else _KINDS.get(str(kind_raw).lower())
        if kind is None:
            raise KindTargetMismatch(f"unknown event kind {kind_raw!r}")
    actor = get("actor")
    if type(actor) is not str or not actor:
        actor = _text(raw, "actor")
    tweet_id = get("tweet_id")
    if type(tweet_id) is not str or not tweet_id:
        tweet_id = _text(raw, "tweet_id")
    time = get("time")
    if time is None:
        raise MissingField("missing field 'time'")
    time = parse_time(time)
    target_user = get("target_user")
    if target_user is not None and (type(target_user) is not str or not target_user):
        target_user = _text(raw, "target_user", required=False)
    target_tweet = get("target_tweet_id")
    if target_tweet is not None and (type(target_tweet) is not str or not target_tweet):
        target_tweet = _text(raw, "target_tweet_id", required=False)

    if kind is EventKind.POST:
        if target_user is not None or target_tweet is not None:
            raise KindTargetMismatch("post events carry no target")
    else:
        if target_user is None:
            raise KindTargetMismatch(f"{kind.value} without target_user")
        if target_tweet is None and kind is EventKind.RETWEET:
            raise KindTargetMismatch("retweet without target_tweet_id")
        if target_user == actor:
            raise SelfInteraction(f"{kind.value} by {actor!r} targets itself")
    return Event(kind, actor, tweet_id, time, target_tweet, target_user)


def validate_snapshot(raw: Mapping) -> FollowerSnapshot:
    user = _text(raw, "user")
    if raw.get("time") is None:
        raise MissingField("missing field 'time'")
    time = parse_time(raw["time"])
    counts = []
    for name in ("followers", "friends"):
        value = raw.get(name)
        if value is None:
            raise MissingField(f"missing field {name!r}")
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise MalformedRecord(f"field {name!r} must be a non-negative integer, got {value!r}")
        counts.append(value)
    return FollowerSnapshot(user, time, counts[0], counts[1])
