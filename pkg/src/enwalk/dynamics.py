"""Per-node behavior statistics and pairwise equivalence features.

Each node gets a success rate (followers over followings), a fraudulence
ratio (fraud tweets over total tweets) and an activity window. Pairs of
nodes are compared along four axes, each scaled to [0, 1] where higher
means more alike:

    ct  common activity time (Jaccard of active-day sets)
    sr  closeness of follow-back success (clamped ratios)
    fr  closeness of fraudulence
    me  overlap of mentioned tokens (Jaccard of distinct tokens)

Degenerate denominators use max(1, .) so everything is total; the sr
difference can exceed 1, so it is clamped into [0, 1]. Empty-versus-empty
activity or mention sets score 0 (absence of evidence is not similarity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SpamGraph, UserRecord


@dataclass(frozen=True)
class NodeStats:
    success_rate: float
    fraudulence: float
    activity_window: int
    clamped_ratio: float  # max(1, success_rate), memoized for pair_success


@dataclass(frozen=True)
class PairDynamics:
    ct: float
    sr: float
    fr: float
    me: float

    def as_tuple(self):
        return (self.ct, self.sr, self.fr, self.me)


def node_stats(record: UserRecord) -> NodeStats:
    """Success rate, fraudulence and activity window for one record."""
    sr = record.followers / max(1, record.followings)
    fr = record.fraud_tweets / max(1, record.total_tweets)
    if record.active_days:
        window = max(record.active_days) - min(record.active_days) + 1
    else:
        window = 0
    return NodeStats(success_rate=sr, fraudulence=fr, activity_window=window,
                     clamped_ratio=max(1.0, sr))


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 0.0
    inter = len(a & b)
    if inter == 0:
        return 0.0
    return inter / len(a | b)


def pair_common_time(a: UserRecord, b: UserRecord) -> float:
    """Fraction of either node's active days on which both were active."""
    return _jaccard(a.active_days, b.active_days)


def pair_success(a: NodeStats, b: NodeStats) -> float:
    """Closeness of clamped success ratios, clamped into [0, 1]."""
    raw = 1.0 - abs(a.clamped_ratio - b.clamped_ratio)
    return min(1.0, max(0.0, raw))


def pair_fraud(a: NodeStats, b: NodeStats) -> float:
    """Closeness of fraudulence ratios (already within [0, 1])."""
    return 1.0 - abs(a.fraudulence - b.fraudulence)


def pair_mentions(a: UserRecord, b: UserRecord) -> float:
    """Jaccard overlap of the distinct mention tokens of both nodes."""
    return _jaccard(frozenset(a.mentions), frozenset(b.mentions))


class DynamicsCache:
    """Node stats plus memoized pairwise features for one loaded graph.

    Pairs are computed lazily and cached per unordered pair; only pairs
    actually touched by walks (graph edges, mostly) are materialized.
    Safe for concurrent readers: inserts are plain dict assignments.
    """

    def __init__(self, graph: SpamGraph):
        self.graph = graph
        self.stats = [node_stats(rec) for rec in graph.records]
        self.clamped_ratio = np.array([s.clamped_ratio for s in self.stats])
        self.fraudulence = np.array([s.fraudulence for s in self.stats])
        self._day_sets = [rec.active_days for rec in graph.records]
        self._mention_sets = [frozenset(rec.mentions) for rec in graph.records]
        self._pair_memo: dict[tuple[int, int], PairDynamics] = {}
        self._edge_tables: dict[str, np.ndarray] = {}

    def pair(self, a: int, b: int) -> PairDynamics:
        """All four features for the unordered pair (a, b), memoized."""
        key = (a, b) if a <= b else (b, a)
        got = self._pair_memo.get(key)
        if got is None:
            got = PairDynamics(
                ct=_jaccard(self._day_sets[a], self._day_sets[b]),
                sr=pair_success(self.stats[a], self.stats[b]),
                fr=pair_fraud(self.stats[a], self.stats[b]),
                me=_jaccard(self._mention_sets[a], self._mention_sets[b]),
            )
            self._pair_memo[key] = got
        return got

    def combined(self, a: int, b: int, p: float, q: float, r: float, s: float) -> float:
        """p*ct + q*sr + r*fr + s*me for the pair (a, b)."""
        d = self.pair(a, b)
        return p * d.ct + q * d.sr + r * d.fr + s * d.me

    def edge_components(self, view) -> np.ndarray:
        """(E, 4) array of (ct, sr, fr, me) aligned with the view's CSR edges."""
        if view.direction not in self._edge_tables:
            src = np.repeat(np.arange(self.graph.n_nodes),
                            np.diff(view.indptr))
            dst = view.indices
            table = np.empty((len(dst), 4))
            table[:, 1] = 1.0 - np.abs(self.clamped_ratio[src] - self.clamped_ratio[dst])
            np.clip(table[:, 1], 0.0, 1.0, out=table[:, 1])
            table[:, 2] = 1.0 - np.abs(self.fraudulence[src] - self.fraudulence[dst])
            days, ments = self._day_sets, self._mention_sets
            for k in range(len(dst)):
                a, b = src[k], dst[k]
                table[k, 0] = _jaccard(days[a], days[b])
                table[k, 3] = _jaccard(ments[a], ments[b])
            self._edge_tables[view.direction] = table
        return self._edge_tables[view.direction]


def dump_pair_table(graph: SpamGraph, path):
    """Write pairs.tsv: per directed edge, the four pair features."""
    cache = DynamicsCache(graph)
    order = np.lexsort((graph.edge_dst, graph.edge_src))
    with open(path, "w", encoding="utf-8") as fh:
        for k in order:
            a, b = int(graph.edge_src[k]), int(graph.edge_dst[k])
            d = cache.pair(a, b)
            fh.write(f"{graph.ids[a]}\t{graph.ids[b]}\t"
                     f"{d.ct:.6g}\t{d.sr:.6g}\t{d.fr:.6g}\t{d.me:.6g}\n")
