import os
import subprocess
import sys

import pytest

from dacflow.events import Event, EventKind, SeedRecord, SeedSet, parse_date, parse_time

POST, RT, MEN = EventKind.POST, EventKind.RETWEET, EventKind.MENTION


def post(actor, tid, when):
    return Event(POST, actor, tid, parse_time(when))


def retweet(actor, tid, when, author, target_tid):
    return Event(RT, actor, tid, parse_time(when), target_tid, author)


def mention(actor, tid, when, target, reply_to=None):
    return Event(MEN, actor, tid, parse_time(when), reply_to, target)


def seed_set(*users, suspended="2015-06-01", followers=100):
    return SeedSet.from_records(SeedRecord(u, parse_date(suspended), followers) for u in users)


def store_fields(store):
    """Comparable view of every field of an AggregateStore."""
    return {
        "users": {u: tuple(getattr(a, f) for f in a.__slots__) for u, a in store.users.items()},
        "tweets": {t: tuple(getattr(x, f) for f in x.__slots__) for t, x in store.tweets.items()},
        "event_count": store.event_count,
        "snapshot_count": store.snapshot_count,
        "duplicate_posts": store.duplicate_posts,
        "linked_mentions": store.linked_mentions,
        "mentioners": {u: frozenset(s) for u, s in store.mentioners.items()},
        "adoptions": dict(store.adoptions),
        "seed_posts_daily": {k: v for k, v in store.seed_posts_daily.items() if v},
        "seed_retweets_daily": {k: v for k, v in store.seed_retweets_daily.items() if v},
    }


def run_cli(*args, stdin=None, cwd=None):
    env = dict(os.environ)
    return subprocess.run([sys.executable, "-m", "dacflow", *map(str, args)],
                          capture_output=True, text=True, input=stdin, cwd=cwd, env=env)


@pytest.fixture
def hand_log():
    """Six events over three users: seed u1, outsiders o1 and o2."""
    return [
        post("u1", "t1", "2015-03-01T00:00:00Z"),
        retweet("o1", "r1", "2015-03-02T10:00:00Z", "u1", "t1"),
        mention("o1", "m1", "2015-03-02T11:00:00Z", "u1"),
        retweet("o2", "r2", "2015-03-03T09:00:00Z", "u1", "t1"),
        post("u1", "t2", "2015-03-04T12:00:00Z"),
        mention("u1", "t2", "2015-03-04T12:00:00Z", "o2"),
    ]


# One PASS/FAIL line per acceptance criterion, printed after the run.
_CRITERIA = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        name = report.nodeid.split("::test_criterion_")[1]
        _CRITERIA[name] = _CRITERIA.get(name, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[0])):
        number, _, title = name.partition("_")
        status = "PASS" if _CRITERIA[name] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {title.replace('_', ' ')}")
