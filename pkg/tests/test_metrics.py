import math
import statistics
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dacflow.errors import EmptyInput
from dacflow.ingest import UserAggregate
from dacflow.metrics import (
    DacPoint,
    DynClass,
    activity_rate,
    classify,
    connectivity_growth,
    dac_grid,
    dac_points,
    filter_active,
    probability_distribution,
    summary_stats,
)


def agg(f=(0, 0), F=(0, 0), m=0, M=0, t=1, user="u"):
    return UserAggregate(user, m=m, M=M, f_min=f[0], f_max=f[1], F_min=F[0], F_max=F[1],
                         activity_days=t)


# ------------------------------------------------------ coordinates


def test_no_variation_is_one():
    assert connectivity_growth(agg(f=(40, 40), F=(7, 7), t=30)) == 1.0


def test_growth_hand_values():
    assert connectivity_growth(agg(f=(10, 110), F=(50, 60), t=10)) == pytest.approx(5.5, rel=1e-15)
    assert connectivity_growth(agg(f=(100, 100), F=(0, 200), t=10)) == pytest.approx(1 / 21, rel=1e-15)


def test_activity_hand_values():
    assert activity_rate(agg()) == 1.0
    assert activity_rate(agg(m=3, M=1)) == 2.0
    assert activity_rate(agg(m=0, M=9)) == pytest.approx(0.1, rel=1e-15)


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6), st.integers(1, 3000))
def test_growth_monotone_in_follower_gain(df, extra, dF, t):
    lo = connectivity_growth(agg(f=(0, df), F=(0, dF), t=t))
    hi = connectivity_growth(agg(f=(0, df + extra), F=(0, dF), t=t))
    assert hi >= lo > 0


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(1, 10**4))
def test_activity_monotone(m, M, extra):
    y = activity_rate(agg(m=m, M=M))
    assert activity_rate(agg(m=m + extra, M=M)) > y
    assert activity_rate(agg(m=m, M=M + extra)) < y


def test_filter_active():
    users = [agg(m=5, M=0, user="a"), agg(m=1, M=1, user="b"), agg(m=0, M=3, user="c")]
    assert [a.user for a in filter_active(users)] == ["b"]


# ------------------------------------------------------ classes


@pytest.mark.parametrize("x, y, cls", [
    (0.5, 0.5, DynClass.COMMON),
    (5.5, 2.0, DynClass.INFLUENTIAL),
    (1.0, 1.0, DynClass.INFLUENTIAL),
    (1.0, 0.99, DynClass.BROADCASTER),
    (0.99, 1.0, DynClass.HIDDEN_INFLUENTIAL),
    (3.0, 0.1, DynClass.BROADCASTER),
])
def test_classify_examples(x, y, cls):
    assert classify(x, y) is cls


positive = st.floats(min_value=1e-9, max_value=1e9, allow_nan=False)


@given(positive, positive)
def test_classify_quadrants(x, y):
    c = classify(x, y)
    assert (c in (DynClass.BROADCASTER, DynClass.INFLUENTIAL)) == (x >= 1)
    assert (c in (DynClass.HIDDEN_INFLUENTIAL, DynClass.INFLUENTIAL)) == (y >= 1)


def test_dac_points_compose():
    assert dac_points([]) == []
    users = [agg(f=(10, 110), F=(50, 60), t=10, m=3, M=1, user="a"), agg(m=0, M=9, user="b")]
    pts = dac_points(users)
    assert pts == [DacPoint("a", connectivity_growth(users[0]), activity_rate(users[0])),
                   DacPoint("b", connectivity_growth(users[1]), activity_rate(users[1]))]


def test_dac_points_positive_on_synthetic_users():
    from dacflow.synth import SynthConfig, generate
    from dacflow.ingest import finalize, fold_events, fold_snapshot

    corpus = generate(SynthConfig(n_per_class=25, n_outsiders=0))
    store = fold_events(corpus.events, corpus.seeds)
    for s in corpus.snapshots:
        fold_snapshot(store, s)
    finalize(store, corpus.seeds)
    pts = dac_points(store.users[u] for u in corpus.seeds)
    assert len(pts) == 100
    assert all(p.x > 0 and p.y > 0 for p in pts)


# ------------------------------------------------------ grid


def test_identical_points_single_cell():
    grid = dac_grid([(2.0, 3.0)] * 7, 5, 5)
    assert np.count_nonzero(grid.counts) == 1
    i, j = np.argwhere(grid.counts)[0]
    assert grid.density[i, j] * grid.cell_areas()[i, j] == pytest.approx(1.0, abs=1e-12)


def test_four_corner_points():
    grid = dac_grid([(0.1, 0.1), (0.1, 10), (10, 0.1), (10, 10)], 2, 2)
    mass = grid.density * grid.cell_areas()
    assert np.allclose(mass, 0.25, rtol=0, atol=1e-12)
    assert grid.counts.tolist() == [[1, 1], [1, 1]]


def test_edges_cover_extremes():
    pts = [(0.01, 5), (100, 0.2), (1, 1)]
    grid = dac_grid(pts, 4, 3)
    assert grid.x_edges[0] < 0.01 and grid.x_edges[-1] > 100
    assert grid.y_edges[0] < 0.2 and grid.y_edges[-1] > 5
    assert len(list(grid.rows())) == 12


def test_grid_rejects_bad_input():
    with pytest.raises(EmptyInput):
        dac_grid([])
    with pytest.raises(ValueError):
        dac_grid([(0.0, 1.0)])
    with pytest.raises(ValueError):
        dac_grid([(1.0, 1.0)], 1, 3)


def _scan_bin(v, edges):
    for k in range(len(edges) - 1):
        if edges[k] <= v < edges[k + 1]:
            return k
    return len(edges) - 2 if v >= edges[-1] else 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-4, 1e4), st.floats(1e-4, 1e4)), min_size=1, max_size=300),
       st.integers(2, 12), st.integers(2, 12))
def test_grid_matches_scan_and_normalizes(pts, nx, ny):
    grid = dac_grid(pts, nx, ny)
    want = Counter((_scan_bin(math.log10(x), grid.log_x_edges),
                    _scan_bin(math.log10(y), grid.log_y_edges)) for x, y in pts)
    got = {(i, j): int(c) for (i, j), c in np.ndenumerate(grid.counts) if c}
    assert got == dict(want)
    assert grid.total_mass() == pytest.approx(1.0, abs=1e-9)


# ------------------------------------------------------ distributions


def test_distribution_examples():
    d = probability_distribution([1, 1, 2])
    assert d.probs == {1: 2 / 3, 2: 1 / 3}
    assert probability_distribution([7]).probs == {7: 1.0}
    with pytest.raises(EmptyInput):
        probability_distribution([])


def test_distribution_counting_oracle():
    rng = np.random.default_rng(3)
    values = rng.zipf(1.8, size=10_000).tolist()
    d = probability_distribution(values)
    for v in set(values):
        assert d[v] == values.count(v) / len(values)
    assert abs(d.total() - 1) <= 1e-12
    assert list(d.probs) == sorted(d.probs)


@given(st.lists(st.integers(0, 50), min_size=1, max_size=500))
def test_distribution_sums_to_one(values):
    assert abs(probability_distribution(values).total() - 1) <= 1e-12


def test_summary_examples():
    s = summary_stats([5, 5, 5, 5])
    assert (s.mean, s.std, s.q1, s.q2, s.q3) == (5, 0, 5, 5, 5)
    s = summary_stats([1, 2, 3, 4, 5])
    assert (s.q1, s.q2, s.q3) == (1.5, 3, 4.5)
    s = summary_stats([0, 10])
    assert (s.mean, s.std) == (5, 5)
    with pytest.raises(EmptyInput):
        summary_stats([])


@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=200))
def test_summary_ordering(values):
    s = summary_stats(values)
    assert min(values) <= s.q1 <= s.q2 <= s.q3 <= max(values)
    assert s.q2 == statistics.median(values)
    assert s.std >= 0
