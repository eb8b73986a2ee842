import datetime as dt

import pytest
from hypothesis import given, strategies as st

from dacflow.errors import (
    DuplicateSeed,
    KindTargetMismatch,
    MalformedRecord,
    MalformedTimestamp,
    MissingField,
    SelfInteraction,
)
from dacflow.events import (
    EventKind,
    SeedRecord,
    SeedSet,
    day_index,
    format_time,
    parse_date,
    parse_time,
    validate_event,
    validate_snapshot,
)


def test_minimal_post():
    ev = validate_event({"kind": "post", "actor": "u1", "tweet_id": "t1",
                         "time": "2015-03-01T00:00:00Z"})
    assert ev.kind is EventKind.POST
    assert ev.actor == "u1" and ev.tweet_id == "t1"
    assert ev.time == int(dt.datetime(2015, 3, 1, tzinfo=dt.timezone.utc).timestamp())
    assert ev.target_user is None and ev.target_tweet_id is None


def test_retweet_without_target_user():
    with pytest.raises(KindTargetMismatch):
        validate_event({"kind": "retweet", "actor": "u1", "tweet_id": "t2",
                        "target_tweet_id": "t1", "time": "2015-03-01T00:00:00Z"})


def test_retweet_without_target_tweet():
    with pytest.raises(KindTargetMismatch):
        validate_event({"kind": "retweet", "actor": "u1", "tweet_id": "t2",
                        "target_user": "u2", "time": "2015-03-01T00:00:00Z"})


def test_self_mention():
    with pytest.raises(SelfInteraction):
        validate_event({"kind": "mention", "actor": "u1", "tweet_id": "t2",
                        "target_user": "u1", "time": "2015-03-01T00:00:00Z"})


def test_post_with_target_rejected():
    with pytest.raises(KindTargetMismatch):
        validate_event({"kind": "post", "actor": "u1", "tweet_id": "t2",
                        "target_user": "u2", "time": "2015-03-01T00:00:00Z"})


def test_mention_reply_link_optional():
    ev = validate_event({"kind": "mention", "actor": "u1", "tweet_id": "t2",
                         "target_user": "u2", "time": "2015-03-01T00:00:00Z"})
    assert ev.target_tweet_id is None
    ev = validate_event({"kind": "mention", "actor": "u1", "tweet_id": "t2", "target_user": "u2",
                         "target_tweet_id": "t0", "time": "2015-03-01T00:00:00Z"})
    assert ev.target_tweet_id == "t0"


@pytest.mark.parametrize("drop", ["kind", "actor", "tweet_id", "time"])
def test_missing_fields(drop):
    raw = {"kind": "post", "actor": "u1", "tweet_id": "t1", "time": "2015-03-01T00:00:00Z"}
    del raw[drop]
    with pytest.raises(MissingField):
        validate_event(raw)


def test_unknown_kind_and_bad_types():
    base = {"actor": "u1", "tweet_id": "t1", "time": "2015-03-01T00:00:00Z"}
    with pytest.raises(KindTargetMismatch):
        validate_event({**base, "kind": "like"})
    with pytest.raises(MalformedRecord):
        validate_event({**base, "kind": "post", "actor": ["u1"]})
    with pytest.raises(MalformedTimestamp):
        validate_event({**base, "kind": "post", "time": "yesterday"})


def test_numeric_ids_become_text():
    ev = validate_event({"kind": "retweet", "actor": 7, "tweet_id": 99, "target_user": 8,
                         "target_tweet_id": 12, "time": 1425168000})
    assert (ev.actor, ev.tweet_id, ev.target_user, ev.target_tweet_id) == ("7", "99", "8", "12")
    assert ev.time == 1425168000


def test_validation_is_pure():
    raw = {"kind": "mention", "actor": "u1", "tweet_id": "t2", "target_user": "u2",
           "time": "2015-03-01T00:00:00Z"}
    copy = dict(raw)
    assert validate_event(raw) == validate_event(raw)
    assert raw == copy


def test_time_formats_agree():
    want = parse_time("2015-03-01T12:30:15Z")
    assert parse_time("2015-03-01T12:30:15+00:00") == want
    assert parse_time("2015-03-01T14:30:15+02:00") == want
    assert parse_time("2015-03-01T12:30:15") == want
    assert parse_time("2015-03-01T12:30:15.999Z") == want
    assert format_time(want) == "2015-03-01T12:30:15Z"


@given(st.integers(min_value=0, max_value=4_000_000_000))
def test_time_roundtrip(ts):
    assert parse_time(format_time(ts)) == ts


def test_parse_date_is_midnight():
    ts = parse_date("2015-03-17")
    assert ts % 86400 == 0
    assert format_time(ts) == "2015-03-17T00:00:00Z"
    assert day_index(ts + 86399) == day_index(ts)
    with pytest.raises(MalformedTimestamp):
        parse_date("2015-02-30")


def test_snapshot_validation():
    snap = validate_snapshot({"user": "u1", "time": "2015-03-01T00:00:00Z",
                              "followers": 10, "friends": 3})
    assert (snap.followers, snap.friends) == (10, 3)
    with pytest.raises(MalformedRecord):
        validate_snapshot({"user": "u1", "time": 0, "followers": -1, "friends": 3})
    with pytest.raises(MissingField):
        validate_snapshot({"user": "u1", "time": 0, "followers": 1})


def test_seed_set_rejects_duplicates():
    recs = [SeedRecord("a", 0, 1), SeedRecord("b", 0, 1), SeedRecord("a", 5, 2)]
    with pytest.raises(DuplicateSeed):
        SeedSet.from_records(recs)
    seeds = SeedSet.from_records(recs[:2])
    assert len(seeds) == 2 and "a" in seeds and "c" not in seeds
    assert seeds["b"].followers_at_suspension == 1


def test_error_carries_line():
    err = MalformedRecord("bad", line=12)
    assert err.line == 12 and str(err).startswith("line 12:")
