"""Random-walk generation: behavior-biased, uniform, and return/in-out.

The biased strategy scores each candidate step v -> x by combining the
four pair features of both the incoming pair (t, v) and the outgoing
pair (v, x) under priorities (p, q, r, s):

    score(t, v, x) = p*(ct_tv + ct_vx) + q*(sr_tv + sr_vx)
                   + r*(fr_tv + fr_vx) + s*(me_tv + me_vx)

and the transition probability is proportional to score * edge weight.
On the first step there is no previous node, so the t-dependent half is
zero. If every candidate scores zero the step falls back to a plain
weight-proportional choice.

Walks are deterministic: each walk draws from its own RNG stream keyed by
(seed, repetition, start node), so corpus content does not depend on
execution order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DynamicsCache
from .errors import ConfigError
from .graph import AdjacencyView, SpamGraph

STRATEGIES = ("enwalk", "uniform", "node2vec")


@dataclass(frozen=True)
class BiasWeights:
    """Priorities for the four pair features (ct, sr, fr, me)."""

    p: float = 0.25
    q: float = 0.25
    r: float = 0.25
    s: float = 0.25

    def validate(self):
        vals = (self.p, self.q, self.r, self.s)
        if any(v < 0 or not np.isfinite(v) for v in vals):
            raise ConfigError("bias weights must be non-negative and finite")
        if sum(vals) <= 0:
            raise ConfigError("at least one bias weight must be positive")


@dataclass
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 80
    rng_seed: int = 0
    direction: str = "out"
    strategy: str = "enwalk"
    bias: BiasWeights = field(default_factory=BiasWeights)
    rho: float = 1.0    # return weight divisor for node2vec steps
    gamma: float = 1.0  # in-out weight divisor for node2vec steps
    workers: int = 1

    def validate(self):
        if self.walks_per_node < 1 or self.walk_length < 1:
            raise ConfigError("walks_per_node and walk_length must be >= 1")
        strategy = "node2vec" if self.strategy == "return-inout" else self.strategy
        if strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy: {self.strategy!r}")
        if self.direction not in ("out", "undirected"):
            raise ConfigError(f"unknown direction: {self.direction!r}")
        if strategy == "enwalk":
            self.bias.validate()
        if strategy == "node2vec" and (self.rho <= 0 or self.gamma <= 0):
            raise ConfigError("rho and gamma must be > 0")
        self.strategy = strategy


@dataclass
class WalkCorpus:
    """Ordered list of walks (node indices) plus the id mapping they use."""

    walks: list
    ids: list

    def __len__(self):
        return len(self.walks)


def alpha(t, v: int, x: int, bias: BiasWeights, dynamics: DynamicsCache) -> float:
    """Unnormalized bias score for stepping v -> x after arriving from t.

    t may be None (first step of a walk), dropping the (t, v) half.
    """
    score = dynamics.combined(v, x, bias.p, bias.q, bias.r, bias.s)
    if t is not None:
        score += dynamics.combined(t, v, bias.p, bias.q, bias.r, bias.s)
    return score


def transition_distribution(t, v: int, bias: BiasWeights, view: AdjacencyView,
                            dynamics: DynamicsCache) -> np.ndarray:
    """Probabilities over v's neighbors (aligned with view.neighbors(v)).

    Returns an empty array for a dead end.
    """
    nbrs, weights = view.neighbors(v)
    if len(nbrs) == 0:
        return np.empty(0)
    scores = np.array([alpha(t, v, int(x), bias, dynamics) for x in nbrs])
    b = scores * weights
    total = b.sum()
    if total <= 0.0:  # all-zero scores: fall back to weight-proportional
        b = weights.astype(float)
        total = b.sum()
    return b / total


class _EnwalkStepper:
    """Per-edge combined scores precomputed; the (t, v) half of the score is
    carried forward from the step that chose the (t, v) edge."""

    def __init__(self, view, dynamics, bias):
        self.view = view
        table = dynamics.edge_components(view)
        self.combo = (bias.p * table[:, 0] + bias.q * table[:, 1]
                      + bias.r * table[:, 2] + bias.s * table[:, 3])

    def weights(self, state, v, lo, hi):
        b = self.combo[lo:hi] + (0.0 if state is None else state)
        return b * self.view.weights[lo:hi]

    def next_state(self, v, edge_pos):
        return self.combo[edge_pos]


class _UniformStepper:
    def __init__(self, view):
        self.view = view

    def weights(self, state, v, lo, hi):
        return self.view.weights[lo:hi]

    def next_state(self, v, edge_pos):
        return None


class _ReturnInoutStepper:
    """Second-order reweighting: 1/rho to return, 1 to stay near t, 1/gamma out.

    The carried state is the previous node t itself.
    """

    def __init__(self, view, rho, gamma):
        self.view = view
        self.rho = rho
        self.gamma = gamma

    def weights(self, state, v, lo, hi):
        w = self.view.weights[lo:hi]
        if state is None:
            return w
        t = state
        nbrs = self.view.indices[lo:hi]
        t_lo, t_hi = self.view.indptr[t], self.view.indptr[t + 1]
        nbrs_t = self.view.indices[t_lo:t_hi]
        mult = np.full(len(nbrs), 1.0 / self.gamma)
        if len(nbrs_t):
            # CSR neighbor lists are sorted, so membership by binary search
            pos = nbrs_t.searchsorted(nbrs)
            pos[pos == len(nbrs_t)] = len(nbrs_t) - 1
            mult[nbrs_t[pos] == nbrs] = 1.0
        mult[nbrs == t] = 1.0 / self.rho
        return mult * w

    def next_state(self, v, edge_pos):
        return v


def _make_stepper(config: WalkConfig, view, dynamics):
    if config.strategy == "enwalk":
        return _EnwalkStepper(view, dynamics, config.bias)
    if config.strategy == "uniform":
        return _UniformStepper(view)
    return _ReturnInoutStepper(view, config.rho, config.gamma)


def _walk(stepper, view, start: int, steps: int, rng) -> list:
    walk = [start]
    state = None
    v = start
    indptr, indices = view.indptr, view.indices
    for _ in range(steps):
        lo, hi = indptr[v], indptr[v + 1]
        if hi == lo:
            break  # dead end: truncate
        b = stepper.weights(state, v, lo, hi)
        cum = b.cumsum()
        total = cum[-1]
        if total <= 0.0:  # all-zero scores: weight-proportional fallback
            b = view.weights[lo:hi]
            cum = b.cumsum()
            total = cum[-1]
        j = int(cum.searchsorted(rng.random() * total, side="right"))
        if j >= hi - lo:  # guard against r*total landing past the end
            j = hi - lo - 1
        x = int(indices[lo + j])
        walk.append(x)
        state = stepper.next_state(v, lo + j)
        v = x
    return walk


def _walk_rng(seed: int, repetition: int, node: int):
    return np.random.default_rng([seed % 2**63, repetition, node])


def sample_walk(start: int, config: WalkConfig, graph: SpamGraph,
                dynamics: DynamicsCache | None = None, repetition: int = 0) -> list:
    """One walk from `start`; deterministic in (seed, start, repetition)."""
    config.validate()
    view = graph.view(config.direction)
    if config.strategy == "enwalk" and dynamics is None:
        dynamics = DynamicsCache(graph)
    stepper = _make_stepper(config, view, dynamics)
    rng = _walk_rng(config.rng_seed, repetition, start)
    return _walk(stepper, view, start, config.walk_length, rng)


def generate_corpus(config: WalkConfig, graph: SpamGraph,
                    dynamics: DynamicsCache | None = None) -> WalkCorpus:
    """walks_per_node walks from every node, start order shuffled per pass."""
    config.validate()
    view = graph.view(config.direction)
    if config.strategy == "enwalk" and dynamics is None:
        dynamics = DynamicsCache(graph)
    stepper = _make_stepper(config, view, dynamics)
    steps = config.walk_length
    seed = config.rng_seed

    walks = []
    for rep in range(config.walks_per_node):
        order = np.arange(graph.n_nodes)
        np.random.default_rng([seed % 2**63, rep]).shuffle(order)

        def one(node, _rep=rep):
            return _walk(stepper, view, int(node), steps,
                         _walk_rng(seed, _rep, int(node)))

        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                walks.extend(pool.map(one, order))
        else:
            walks.extend(one(node) for node in order)
    return WalkCorpus(walks=walks, ids=list(graph.ids))


def save_walks(corpus: WalkCorpus, path):
    """walks.txt: one walk per line, space-separated original node ids."""
    ids = corpus.ids
    with open(path, "w", encoding="utf-8") as fh:
        for walk in corpus.walks:
            fh.write(" ".join(ids[v] for v in walk) + "\n")


def load_walks(path) -> WalkCorpus:
    """Read walks.txt; vocabulary indexed by first occurrence."""
    index: dict[str, int] = {}
    ids: list[str] = []
    walks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = line.split()
            if not tokens:
                continue
            walk = []
            for tok in tokens:
                if tok not in index:
                    index[tok] = len(ids)
                    ids.append(tok)
                walk.append(index[tok])
            walks.append(walk)
    return WalkCorpus(walks=walks, ids=ids)
