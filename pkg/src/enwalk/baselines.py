"""Ranking baselines: PageRank variants, trust regression, 3-state MRF.

The trust model maps the 8 per-user trust features to a trustworthiness
score in [0, 1] (0 = spammer-like) by clamped linear regression. PageRank
runs in two flavors: traditional (uniform teleport, plain out-edge
transitions) and trust-reweighted (transition mass into v scaled by
trust(v), trust-proportional teleport). The MRF assigns each node one of
three hidden states (spammer / mixed / non-spammer), couples neighbors
through a fixed propagation matrix, and infers marginals by damped
sum-product loopy belief propagation on the undirected view.

All rankers are converted to spamicity scores where higher = more spammy.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ValidationError
from .graph import SpamGraph

logger = logging.getLogger(__name__)

STATES = ("spammer", "mixed", "nonspammer")

# Column = a node's state, row = its neighbor's state; columns sum to 1.
# Spammers mostly follow spammers; non-spammers mostly follow non-spammers.
DEFAULT_PROPAGATION = np.array([
    [0.80, 0.40, 0.025],
    [0.15, 0.50, 0.125],
    [0.05, 0.10, 0.850],
])


# ---------------------------------------------------------------------
# Trust regression
# ---------------------------------------------------------------------

@dataclass
class TrustModel:
    """Linear trustworthiness scorer; predictions clamped to [0, 1]."""

    weights: np.ndarray
    intercept: float

    def predict(self, features) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        raw = features @ self.weights + self.intercept
        return np.clip(raw, 0.0, 1.0)

    def score_graph(self, graph: SpamGraph) -> np.ndarray:
        feats = np.array([rec.trust_features for rec in graph.records])
        return self.predict(feats)


def fit_trust(features, targets, ridge: float = 1e-6) -> TrustModel:
    """Least-squares fit of trust scores in [0, 1] to trust features.

    Falls back to a ridge-regularized solve (with a warning) when the
    design matrix is rank deficient.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise ConfigError("features must be 2-D and aligned with targets")
    if len(x) < 2 or len(np.unique(x, axis=0)) < 2:
        raise ConfigError("need at least 2 distinct labeled examples")

    design = np.hstack([x, np.ones((len(x), 1))])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        warnings.warn("rank-deficient trust design matrix; using ridge fit")
        gram = design.T @ design + ridge * np.eye(design.shape[1])
        coef = np.linalg.solve(gram, design.T @ y)
    else:
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return TrustModel(weights=coef[:-1], intercept=float(coef[-1]))


def save_trust(model: TrustModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"weights": list(model.weights), "intercept": model.intercept},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_trust(path) -> TrustModel:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    return TrustModel(weights=np.asarray(obj["weights"], dtype=float),
                      intercept=float(obj["intercept"]))


def spamicity_from_trust_order(values: np.ndarray) -> np.ndarray:
    """1 - normalized rank under ascending trustworthiness.

    The least trustworthy node gets spamicity 1, the most trustworthy 0.
    Ties broken by node index for determinism.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n == 1:
        return np.array([1.0])
    order = np.lexsort((np.arange(n), values))  # ascending trust
    rank = np.empty(n)
    rank[order] = np.arange(n)
    return 1.0 - rank / (n - 1)


# ---------------------------------------------------------------------
# PageRank
# ---------------------------------------------------------------------

@dataclass
class PageRankConfig:
    damping: float = 0.15  # teleport mass multiplying the prior
    tolerance: float = 1e-12
    max_iterations: int = 1000
    variant: str = "traditional"  # or "trust"

    def validate(self):
        if not 0.0 < self.damping < 1.0:
            raise ConfigError("damping must be in (0, 1)")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise ConfigError("tolerance must be > 0 and max_iterations >= 1")
        if self.variant not in ("traditional", "trust"):
            raise ConfigError(f"unknown PageRank variant: {self.variant!r}")


@dataclass
class PageRankResult:
    scores: np.ndarray       # stationary distribution, sums to 1
    spamicity: np.ndarray    # higher = more spammy
    converged: bool
    iterations: int


def pagerank(graph: SpamGraph, config: PageRankConfig | None = None,
             trust: TrustModel | None = None) -> PageRankResult:
    """Power iteration for PR = (1 - damping) * M * PR + damping * p.

    Traditional: M spreads each node's mass evenly over its weighted
    out-edges and p is uniform. Trust variant: the mass u sends to v is
    additionally scaled by trust(v) (rows renormalized) and p is the
    normalized trust vector. Dangling mass teleports via p.
    """
    if config is None:
        config = PageRankConfig()
    config.validate()
    n = graph.n_nodes
    if n == 0:
        raise ConfigError("empty graph")

    view = graph.view("out")
    weights = view.weights.copy()
    if config.variant == "trust":
        if trust is None:
            raise ConfigError("trust variant requires a TrustModel")
        trust_scores = trust.score_graph(graph)
        weights = weights * trust_scores[view.indices]
        prior = trust_scores.astype(float)
        prior = prior / prior.sum() if prior.sum() > 0 else np.full(n, 1.0 / n)
    else:
        prior = np.full(n, 1.0 / n)

    out_mass = np.zeros(n)
    src = np.repeat(np.arange(n), np.diff(view.indptr))
    np.add.at(out_mass, src, weights)
    dangling = out_mass <= 0
    norm_w = np.where(out_mass[src] > 0, weights / out_mass[src], 0.0)

    pr = np.full(n, 1.0 / n)
    beta = 1.0 - config.damping
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        contrib = pr[src] * norm_w
        nxt = np.zeros(n)
        np.add.at(nxt, view.indices, contrib)
        teleport = config.damping + beta * pr[dangling].sum()
        nxt = beta * nxt + teleport * prior
        delta = np.abs(nxt - pr).sum()
        pr = nxt
        if delta < config.tolerance:
            converged = True
            break
    if not converged:
        logger.warning("pagerank did not converge in %d iterations",
                       config.max_iterations)

    return PageRankResult(scores=pr,
                          spamicity=spamicity_from_trust_order(pr),
                          converged=converged, iterations=iterations)


# ---------------------------------------------------------------------
# 3-state MRF with loopy belief propagation
# ---------------------------------------------------------------------

@dataclass
class MRFConfig:
    propagation: np.ndarray = field(default_factory=lambda: DEFAULT_PROPAGATION.copy())
    message_damping: float = 0.5
    tolerance: float = 1e-10
    max_iterations: int = 500

    def validate(self):
        psi = np.asarray(self.propagation, dtype=float)
        if psi.shape != (3, 3) or np.any(psi <= 0):
            raise ConfigError("propagation matrix must be 3x3 with positive entries")
        if not np.allclose(psi.sum(axis=0), 1.0, atol=1e-9):
            raise ValidationError("propagation matrix columns must sum to 1")
        if not 0.0 <= self.message_damping < 1.0:
            raise ConfigError("message damping must be in [0, 1)")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise ConfigError("tolerance must be > 0 and max_iterations >= 1")


@dataclass
class LBPResult:
    beliefs: np.ndarray  # (N, 3) marginals over STATES
    spamicity: np.ndarray
    converged: bool
    iterations: int


def trust_priors(trust_scores: np.ndarray) -> np.ndarray:
    """Map trust f in [0,1] to a 3-state prior (1-f, min(f, 1-f), f), normalized."""
    f = np.clip(np.asarray(trust_scores, dtype=float), 0.0, 1.0)
    prior = np.stack([1.0 - f, np.minimum(f, 1.0 - f), f], axis=1)
    return prior / prior.sum(axis=1, keepdims=True)


def lbp(edges: np.ndarray, priors: np.ndarray, config: MRFConfig | None = None) -> LBPResult:
    """Damped sum-product BP over undirected node pairs.

    `edges` is an (E, 2) array of unique undirected pairs; `priors` an
    (N, 3) array of node priors. The propagation matrix is symmetrized
    before use as the pairwise compatibility.
    """
    if config is None:
        config = MRFConfig()
    config.validate()
    priors = np.asarray(priors, dtype=float)
    n = len(priors)
    if np.any(priors < 0) or np.any(priors.sum(axis=1) <= 0):
        raise ConfigError("priors must be non-negative with positive mass")
    priors = priors / priors.sum(axis=1, keepdims=True)

    psi = np.asarray(config.propagation, dtype=float)
    psi = 0.5 * (psi + psi.T)

    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) == 0:
        return LBPResult(beliefs=priors.copy(), spamicity=priors[:, 0].copy(),
                         converged=True, iterations=0)

    # directed message slots: slot e sends edges_from[e] -> edges_to[e]
    msg_from = np.concatenate([edges[:, 0], edges[:, 1]])
    msg_to = np.concatenate([edges[:, 1], edges[:, 0]])
    n_msgs = len(msg_from)
    reverse = np.concatenate([np.arange(len(edges), n_msgs),
                              np.arange(0, len(edges))])

    messages = np.full((n_msgs, 3), 1.0 / 3)
    log_prior = np.log(np.where(priors > 0, priors, 1e-300))
    damp = config.message_damping
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        incoming = np.zeros((n, 3))
        np.add.at(incoming, msg_to, np.log(messages))
        # product of prior and all incoming except the reverse message
        pre = log_prior[msg_from] + incoming[msg_from] - np.log(messages[reverse])
        pre -= pre.max(axis=1, keepdims=True)
        raw = np.exp(pre) @ psi  # sum over the sender's state
        raw /= raw.sum(axis=1, keepdims=True)
        new = (1.0 - damp) * raw + damp * messages
        new /= new.sum(axis=1, keepdims=True)
        delta = np.abs(new - messages).max()
        messages = new
        if delta < config.tolerance:
            converged = True
            break
    if not converged:
        logger.warning("belief propagation did not converge in %d iterations",
                       config.max_iterations)

    incoming = np.zeros((n, 3))
    np.add.at(incoming, msg_to, np.log(messages))
    log_belief = log_prior + incoming
    log_belief -= log_belief.max(axis=1, keepdims=True)
    beliefs = np.exp(log_belief)
    beliefs /= beliefs.sum(axis=1, keepdims=True)
    return LBPResult(beliefs=beliefs, spamicity=beliefs[:, 0].copy(),
                     converged=converged, iterations=iterations)


def lbp_marginals(graph: SpamGraph, config: MRFConfig | None = None,
                  trust: TrustModel | None = None) -> LBPResult:
    """Infer 3-state marginals with priors derived from the trust model."""
    if trust is None:
        raise ConfigError("lbp_marginals requires a TrustModel for priors")
    priors = trust_priors(trust.score_graph(graph))
    return lbp(graph.undirected_edges(), priors, config)


def enumerate_marginals(edges: np.ndarray, priors: np.ndarray,
                        propagation: np.ndarray | None = None) -> np.ndarray:
    """Exact marginals by summing the joint over all 3^N states (N small)."""
    if propagation is None:
        propagation = DEFAULT_PROPAGATION
    psi = np.asarray(propagation, dtype=float)
    psi = 0.5 * (psi + psi.T)
    priors = np.asarray(priors, dtype=float)
    priors = priors / priors.sum(axis=1, keepdims=True)
    n = len(priors)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)

    grid = np.indices((3,) * n).reshape(n, -1).T  # (3^N, N)
    joint = np.ones(len(grid))
    for v in range(n):
        joint *= priors[v, grid[:, v]]
    for u, v in edges:
        joint *= psi[grid[:, u], grid[:, v]]
    joint /= joint.sum()
    marginals = np.zeros((n, 3))
    for v in range(n):
        for state in range(3):
            marginals[v, state] = joint[grid[:, v] == state].sum()
    return marginals
