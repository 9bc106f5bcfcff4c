"""Synthetic follower networks with planted spammer cohorts.

Normal users grow a preferential-attachment backbone with occasional
follow-backs. Two spammer cohorts are planted on top:

  * follow-flood: many outgoing follows, few reciprocated, short burst
    of activity, very high fraudulence, heavy mentioning from a shared
    token pool;
  * vigilant: few, carefully chosen follows that mostly get reciprocated
    plus extra earned followers, long activity windows, moderate
    fraudulence, lighter mentioning.

Success-rate separation is enforced structurally: after wiring, every
follow-flood node has followings > followers and every vigilant node has
followers >= followings (repaired by adding edges if sampling fell
short). Follower/following counters equal the realized graph degrees.
Everything is drawn from one seeded generator, so output is a pure
function of the config.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .graph import SpamGraph, UserRecord


@dataclass
class SynthConfig:
    n_nodes: int = 2000
    spam_fraction: float = 0.05
    vigilant_fraction: float = 0.5  # share of spammers that are vigilant
    rng_seed: int = 0
    epoch_days: int = 210
    attach_m: int = 4               # backbone follows per arriving normal user
    reciprocation: float = 0.3      # normal users following back
    mention_vocab: int = 500
    cohort_pool_size: int = 12      # shared mention tokens per spammer cohort

    # population parameters (window days, fraudulence)
    vigilant_window: tuple = (138.0, 19.0)
    vigilant_fraud: tuple = (0.34, 0.05)
    vigilant_mention_rate: float = 5.0
    flood_window: tuple = (35.0, 12.0)
    flood_fraud: tuple = (0.86, 0.05)
    flood_mention_rate: float = 10.0
    normal_fraud_mean: float = 0.02

    def validate(self):
        if self.n_nodes < 10:
            raise ConfigError("n_nodes must be >= 10")
        for name, frac in (("spam_fraction", self.spam_fraction),
                           ("vigilant_fraction", self.vigilant_fraction)):
            if not 0.0 <= frac <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.spam_fraction > 0 and round(self.spam_fraction * self.n_nodes) < 1:
            raise ConfigError("spam_fraction * n_nodes rounds to zero spammers")
        if self.attach_m < 1 or self.epoch_days < 30:
            raise ConfigError("attach_m must be >= 1 and epoch_days >= 30")


class _Wiring:
    """Edge set with degree bookkeeping."""

    def __init__(self):
        self.edges = {}
        self.out_deg = {}
        self.in_deg = {}

    def add(self, src: int, dst: int) -> bool:
        if src == dst or (src, dst) in self.edges:
            return False
        self.edges[(src, dst)] = True
        self.out_deg[src] = self.out_deg.get(src, 0) + 1
        self.in_deg[dst] = self.in_deg.get(dst, 0) + 1
        return True

    def out_of(self, v):
        return self.out_deg.get(v, 0)

    def in_of(self, v):
        return self.in_deg.get(v, 0)


def _active_days(rng, start: int, window: int, density: float) -> frozenset:
    """Day set spanning exactly `window` days (endpoints always present)."""
    days = {start, start + window - 1}
    if window > 2:
        interior = np.arange(start + 1, start + window - 1)
        days.update(int(d) for d in interior[rng.random(len(interior)) < density])
    return frozenset(days)


def _sample_window(rng, mean, sd, lo, hi):
    return int(round(min(hi, max(lo, rng.normal(mean, sd)))))


def _cohort_mentions(rng, pool_tokens, global_tokens, rate, pool_prob=0.9):
    count = int(rng.poisson(rate)) + 1
    mentions = {}
    for _ in range(count):
        if pool_tokens and rng.random() < pool_prob:
            tok = pool_tokens[int(rng.integers(len(pool_tokens)))]
        else:
            tok = global_tokens[int(rng.integers(len(global_tokens)))]
        mentions[tok] = mentions.get(tok, 0) + int(rng.integers(1, 4))
    return mentions


def generate(config: SynthConfig):
    """Build (SpamGraph, labels) with planted spammers; deterministic per seed."""
    config.validate()
    rng = np.random.default_rng(config.rng_seed % 2**63)
    n = config.n_nodes
    width = len(str(n - 1))
    ids = [f"u{i:0{width}d}" for i in range(n)]

    n_spam = round(config.spam_fraction * n)
    n_vig = round(n_spam * config.vigilant_fraction)
    perm = rng.permutation(n)
    vigilant = sorted(int(v) for v in perm[:n_vig])
    flood = sorted(int(v) for v in perm[n_vig:n_spam])
    normals = sorted(int(v) for v in perm[n_spam:])
    if not normals:
        raise ConfigError("spam_fraction leaves no normal users")
    vig_set, flood_set = set(vigilant), set(flood)

    wiring = _Wiring()

    # --- backbone: preferential attachment among normal users ---------
    arrival = list(normals)
    rng.shuffle(arrival)
    seed_count = min(config.attach_m + 1, len(arrival))
    prefs = []
    for i in range(seed_count):
        nxt = arrival[(i + 1) % seed_count]
        if wiring.add(arrival[i], nxt):
            prefs.extend([arrival[i], nxt])
    for u in arrival[seed_count:]:
        wanted = min(config.attach_m, seed_count)
        chosen = set()
        guard = 0
        while len(chosen) < wanted and guard < 50 * wanted:
            guard += 1
            t = prefs[int(rng.integers(len(prefs)))]
            if t == u or t in chosen:
                continue
            chosen.add(t)
            wiring.add(u, t)
            prefs.append(t)
            if rng.random() < config.reciprocation and wiring.add(t, u):
                prefs.append(u)
        prefs.append(u)

    normals_arr = np.array(normals)

    def random_normals(count):
        take = min(count, len(normals_arr))
        return [int(v) for v in rng.choice(normals_arr, size=take, replace=False)]

    def popular_normals(count):
        # spammers chase visibility: targets drawn degree-proportionally
        chosen = set()
        guard = 0
        while len(chosen) < count and guard < 50 * count:
            guard += 1
            chosen.add(prefs[int(rng.integers(len(prefs)))])
        return sorted(chosen)

    # --- follow-flood spammers ----------------------------------------
    for v in flood:
        cohort = [u for u in flood if u != v]
        n_cohort = min(int(rng.integers(3, 7)), len(cohort))
        targets = ([cohort[i] for i in rng.choice(len(cohort), n_cohort, replace=False)]
                   if n_cohort else [])
        targets += popular_normals(int(rng.integers(12, 26)) - n_cohort)
        for t in targets:
            wiring.add(v, t)
            back = 0.5 if t in flood_set else 0.08
            if rng.random() < back:
                wiring.add(t, v)

    # --- vigilant spammers ---------------------------------------------
    for v in vigilant:
        cohort = [u for u in vigilant if u != v]
        n_cohort = min(int(rng.integers(2, 5)), len(cohort))
        targets = ([cohort[i] for i in rng.choice(len(cohort), n_cohort, replace=False)]
                   if n_cohort else [])
        targets += popular_normals(int(rng.integers(2, 6)))
        for t in targets:
            wiring.add(v, t)
            back = 0.7 if t in vig_set else 0.5
            if rng.random() < back:
                wiring.add(t, v)
        for u in random_normals(int(rng.integers(3, 16))):
            wiring.add(u, v)

    # --- structural success-rate repair --------------------------------
    for v in flood:
        guard = 0
        while wiring.in_of(v) >= wiring.out_of(v) and guard < 10 * n:
            guard += 1
            wiring.add(v, int(rng.choice(normals_arr)))
    for v in vigilant:
        guard = 0
        while wiring.in_of(v) < wiring.out_of(v) and guard < 10 * n:
            guard += 1
            wiring.add(int(rng.choice(normals_arr)), v)

    # --- records ---------------------------------------------------------
    global_tokens = [f"h{i:04d}" for i in range(config.mention_vocab)]
    vig_pool = [f"vc{i:03d}" for i in range(config.cohort_pool_size)]
    flood_pool = [f"fc{i:03d}" for i in range(config.cohort_pool_size)]
    flood_anchor = int(rng.integers(0, max(1, config.epoch_days - 60)))

    records = []
    for v in range(n):
        followers = wiring.in_of(v)
        followings = wiring.out_of(v)
        if v in vig_set:
            window = _sample_window(rng, *config.vigilant_window, 60,
                                    config.epoch_days)
            start = int(rng.integers(0, config.epoch_days - window + 1))
            days = _active_days(rng, start, window, density=0.9)
            total = int(rng.poisson(60)) + 20
            fraud_rate = min(1.0, max(0.0, rng.normal(*config.vigilant_fraud)))
            mentions = _cohort_mentions(rng, vig_pool, global_tokens,
                                        config.vigilant_mention_rate)
            trust = (float(rng.poisson(4)), float(total),
                     float(sum(mentions.values())), float(rng.poisson(5)),
                     float(rng.poisson(2)), float(rng.poisson(1)),
                     float(rng.poisson(6)), float(window))
        elif v in flood_set:
            window = _sample_window(rng, *config.flood_window, 3, 120)
            lo = max(0, min(flood_anchor + int(rng.normal(0, 6)),
                            config.epoch_days - window))
            days = _active_days(rng, lo, window, density=0.95)
            total = int(rng.poisson(90)) + 20
            fraud_rate = min(1.0, max(0.0, rng.normal(*config.flood_fraud)))
            mentions = _cohort_mentions(rng, flood_pool, global_tokens,
                                        config.flood_mention_rate)
            trust = (float(rng.poisson(8)), float(total),
                     float(sum(mentions.values())), float(rng.poisson(10)),
                     float(rng.poisson(5)), float(rng.poisson(2)),
                     float(rng.poisson(12)), float(window))
        else:
            window = _sample_window(rng, 70, 40, 5, config.epoch_days)
            start = int(rng.integers(0, config.epoch_days - window + 1))
            days = _active_days(rng, start, window, density=0.35)
            total = int(rng.poisson(40)) + 1
            fraud_rate = min(1.0, max(0.0,
                                      rng.normal(config.normal_fraud_mean, 0.02)))
            mentions = _cohort_mentions(rng, [], global_tokens, 2.0)
            trust = (float(rng.poisson(0.1)), float(total),
                     float(sum(mentions.values())), float(rng.poisson(0.3)),
                     float(rng.poisson(0.05)), float(rng.poisson(0.03)),
                     float(rng.poisson(0.2)), float(window))
        fraud = min(total, int(round(fraud_rate * total)))
        records.append(UserRecord(
            followers=followers, followings=followings, active_days=days,
            fraud_tweets=fraud, total_tweets=total, mentions=mentions,
            trust_features=trust, suspended=(v in vig_set or v in flood_set),
        ))

    edges = [(s, d, 1.0) for (s, d) in sorted(wiring.edges)]
    graph = SpamGraph(ids, records, edges)
    labels = {ids[v]: int(v in vig_set or v in flood_set) for v in range(n)}
    return graph, labels
