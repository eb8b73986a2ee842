"""CSV writers for every analysis output.

Files use a header row and RFC-4180 quoting. An optional leading
``# generated_at=...`` comment carries the run time; pass ``stamp=False``
for byte-reproducible output. Additional ``#`` comment lines are part of
the content and always written.
"""

from __future__ import annotations

import csv
import datetime as dt

from .events import format_time


def _num(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, header, rows, stamp=True, comments=()):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if stamp:
            now = dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
            fh.write(f"# generated_at={now}\r\n")
        for line in comments:
            fh.write(f"# {line}\r\n")
        w = csv.writer(fh)
        w.writerow(header)
        n = 0
        for row in rows:
            w.writerow([_num(v) for v in row])
            n += 1
    return n


def read_csv(path):
    """Rows of a CSV written by :func:`write_csv` as dicts, skipping comment lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_grid(path, grid, stamp=True):
    return write_csv(path, ["x_lo", "x_hi", "y_lo", "y_hi", "density", "count"],
                     grid.rows(), stamp)


def write_timeseries(path, series, stamp=True):
    return write_csv(path, ["period_start", "count", "cumulative"], series.rows(), stamp)


def write_classes(path, points, classes, stamp=True):
    rows = ((p.user, p.x, p.y, classes[p.user].value) for p in sorted(points))
    return write_csv(path, ["user_id", "x", "y", "class"], rows, stamp)


def write_adoptions(path, adoptions, stamp=True):
    rows = ((a.adopter, format_time(a.time), a.source_seed, a.tweet_id) for a in adoptions)
    return write_csv(path, ["adopter_id", "time", "source_seed", "tweet_id"], rows, stamp)


def write_scores(path, scores, classes, stamp=True, comments=()):
    rows = []
    for s in scores:
        cls = classes.get(s.user)
        rows.append((s.user, s.mode.value, s.RT, s.T, s.r0, cls.value if cls else ""))
    return write_csv(path, ["user_id", "mode", "RT", "T", "r0", "class"], rows, stamp, comments)


def write_frequencies(path, freqs, stamp=True):
    return write_csv(path, ["class", "bin_lo", "bin_hi", "count"], freqs.rows(), stamp)


def write_engagement(path, dists, stamp=True):
    rows = []
    for cls, fields in dists.items():
        for name, dist in fields.items():
            for value, p in dist.items():
                rows.append((cls.value, name, value, p))
    return write_csv(path, ["class", "quantity", "value", "probability"], rows, stamp)
