import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enwalk.dynamics import (DynamicsCache, node_stats, pair_common_time,
                             pair_fraud, pair_mentions, pair_success)
from enwalk.graph import SpamGraph, UserRecord


def rec(followers=0, followings=0, days=(), fraud=0, total=0, mentions=()):
    return UserRecord(followers=followers, followings=followings,
                      active_days=frozenset(days), fraud_tweets=fraud,
                      total_tweets=total,
                      mentions={m: 1 for m in mentions})


# -- per-node statistics ------------------------------------------------

def test_success_rate():
    assert node_stats(rec(followers=10, followings=5)).success_rate == 2.0
    assert node_stats(rec(followers=7, followings=7)).success_rate == 1.0
    assert node_stats(rec(followers=3, followings=0)).success_rate == 3.0


def test_fraudulence_degenerate_denominator():
    assert node_stats(rec(fraud=0, total=0)).fraudulence == 0.0
    assert node_stats(rec(fraud=1, total=4)).fraudulence == 0.25


def test_activity_window():
    assert node_stats(rec(days=[3, 9, 5])).activity_window == 7
    assert node_stats(rec()).activity_window == 0


# -- pairwise features ----------------------------------------------------

def test_common_time():
    a, b = rec(days=[1, 2, 3]), rec(days=[2, 3, 4])
    assert pair_common_time(a, b) == 0.5
    assert pair_common_time(a, a) == 1.0
    assert pair_common_time(rec(), rec(days=[5])) == 0.0
    assert pair_common_time(rec(), rec()) == 0.0


def test_pair_success():
    two = node_stats(rec(followers=2, followings=1))
    assert pair_success(two, two) == 1.0
    # both below 1 collapse to the clamp
    half = node_stats(rec(followers=1, followings=2))
    point8 = node_stats(rec(followers=4, followings=5))
    assert pair_success(half, point8) == 1.0
    # raw value -1.5 clamps to zero
    one = node_stats(rec(followers=1, followings=1))
    x35 = node_stats(rec(followers=7, followings=2))
    assert pair_success(one, x35) == 0.0


def test_pair_fraud():
    s03 = node_stats(rec(fraud=3, total=10))
    assert pair_fraud(s03, s03) == 1.0
    s0 = node_stats(rec(fraud=0, total=10))
    s1 = node_stats(rec(fraud=10, total=10))
    assert pair_fraud(s0, s1) == 0.0
    vig = node_stats(rec(fraud=34, total=100))
    flood = node_stats(rec(fraud=86, total=100))
    assert pair_fraud(vig, flood) == pytest.approx(0.48)


def test_pair_mentions():
    assert pair_mentions(rec(mentions="ab"), rec(mentions="bc")) == pytest.approx(1 / 3)
    assert pair_mentions(rec(mentions="ab"), rec(mentions="ab")) == 1.0
    assert pair_mentions(rec(), rec(mentions="x")) == 0.0
    assert pair_mentions(rec(), rec()) == 0.0


# -- the cache ------------------------------------------------------------

def graph_of(records):
    n = len(records)
    edges = [(i, j, 1.0) for i in range(n) for j in range(n) if i != j]
    return SpamGraph([f"n{i}" for i in range(n)], records, edges)


def test_self_pair_identity():
    g = graph_of([rec(followers=2, followings=1, days=[1, 2], fraud=1, total=3,
                      mentions="a"), rec()])
    d = DynamicsCache(g).pair(0, 0)
    assert (d.ct, d.sr, d.fr, d.me) == (1.0, 1.0, 1.0, 1.0)


def test_fraud_gap_reaches_zero():
    g = graph_of([rec(fraud=0, total=5), rec(fraud=5, total=5)])
    assert DynamicsCache(g).pair(0, 1).fr == 0.0


def test_pair_matches_independent_recompute():
    rng = np.random.default_rng(42)
    records = []
    for _ in range(12):
        total = int(rng.integers(0, 50))
        records.append(rec(
            followers=int(rng.integers(0, 100)),
            followings=int(rng.integers(0, 100)),
            days=[int(d) for d in rng.integers(0, 60, size=rng.integers(0, 10))],
            fraud=int(rng.integers(0, total + 1)),
            total=total,
            mentions=[chr(97 + int(c)) for c in rng.integers(0, 10,
                                                             size=rng.integers(0, 6))],
        ))
    g = graph_of(records)
    cache = DynamicsCache(g)
    for a in range(len(records)):
        for b in range(len(records)):
            d = cache.pair(a, b)
            sa, sb = node_stats(records[a]), node_stats(records[b])
            assert d.ct == pair_common_time(records[a], records[b])
            assert d.sr == pair_success(sa, sb)
            assert d.fr == pair_fraud(sa, sb)
            assert d.me == pair_mentions(records[a], records[b])


def test_edge_table_matches_pair(synth_small):
    g, _ = synth_small
    cache = DynamicsCache(g)
    view = g.view("out")
    table = cache.edge_components(view)
    src = np.repeat(np.arange(g.n_nodes), np.diff(view.indptr))
    for k in range(0, view.n_edges, 7):
        d = cache.pair(int(src[k]), int(view.indices[k]))
        assert np.allclose(table[k], d.as_tuple())


# -- property tests ---------------------------------------------------------

records_st = st.builds(
    rec,
    followers=st.integers(0, 10**6),
    followings=st.integers(0, 10**6),
    days=st.frozensets(st.integers(0, 400), max_size=20),
    total=st.integers(0, 10**4),
    mentions=st.frozensets(st.text("abcdefgh", min_size=1, max_size=2),
                           max_size=8),
).map(lambda r: UserRecord(followers=r.followers, followings=r.followings,
                           active_days=r.active_days,
                           fraud_tweets=min(r.fraud_tweets, r.total_tweets),
                           total_tweets=r.total_tweets, mentions=r.mentions))


@st.composite
def record_pairs(draw):
    a = draw(records_st)
    b = draw(records_st)
    # fraud counts are drawn as zero above; resample within total
    a.fraud_tweets = draw(st.integers(0, a.total_tweets))
    b.fraud_tweets = draw(st.integers(0, b.total_tweets))
    return a, b


@settings(max_examples=200, deadline=None)
@given(record_pairs())
def test_components_bounded_and_symmetric(pair):
    a, b = pair
    g = graph_of([a, b])
    cache = DynamicsCache(g)
    forward = cache.pair(0, 1)
    backward = DynamicsCache(graph_of([b, a])).pair(0, 1)
    for x, y in zip(forward.as_tuple(), backward.as_tuple()):
        assert 0.0 <= x <= 1.0
        assert x == y


@settings(max_examples=100, deadline=None)
@given(records_st)
def test_self_similarity(record):
    record.fraud_tweets = 0
    g = graph_of([record, UserRecord()])
    d = DynamicsCache(g).pair(0, 0)
    assert d.sr == 1.0 and d.fr == 1.0
    if record.active_days:
        assert d.ct == 1.0
