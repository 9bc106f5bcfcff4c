"""Skip-gram with negative sampling over walk corpora.

Walks play the role of sentences: every pair of nodes within a window of
k positions is a (center, context) training pair, and each positive pair
is contrasted against `negatives` noise nodes drawn proportionally to
occurrence_count ** noise_exponent.

Two parameter matrices are trained (input vectors f and context vectors
f'); f is the reported node feature matrix. The per-pair update is plain
SGD with a linearly decaying step size, run by a compiled kernel in
corpus order, so training is reproducible bit-for-bit given a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigError
from .walks import WalkCorpus


@dataclass
class EmbedConfig:
    dimension: int = 128
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    step_size: float = 0.025
    noise_exponent: float = 0.75
    rng_seed: int = 0
    deterministic_mode: bool = True  # kept for interface parity; training is
    # sequential and reproducible either way at this scale

    def validate(self):
        if self.dimension < 1 or self.window < 1 or self.negatives < 1:
            raise ConfigError("dimension, window and negatives must be >= 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.step_size <= 0 or not np.isfinite(self.step_size):
            raise ConfigError("step_size must be positive")


@dataclass
class EmbeddingMatrix:
    """Learned node features: one row of `vectors` per node id."""

    ids: list
    vectors: np.ndarray           # input vectors f, the reported features
    context_vectors: np.ndarray   # output vectors f', training artifact
    epoch_losses: list = field(default_factory=list)

    @property
    def n_nodes(self):
        return len(self.ids)

    @property
    def dimension(self):
        return self.vectors.shape[1]

    def row(self, node_id: str) -> np.ndarray:
        return self.vectors[self.ids.index(node_id)]


def generate_contexts(corpus: WalkCorpus, window: int):
    """Yield (center, context) index pairs: all j != i with |i - j| <= window."""
    for walk in corpus.walks:
        length = len(walk)
        for i in range(length):
            for j in range(max(0, i - window), min(length, i + window + 1)):
                if j != i:
                    yield walk[i], walk[j]


def _context_arrays(walk: np.ndarray, window: int):
    """Vectorized generate_contexts for one walk, same pair order."""
    length = len(walk)
    if length < 2:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    deltas = np.concatenate([np.arange(-window, 0), np.arange(1, window + 1)])
    i = np.repeat(np.arange(length), len(deltas))
    j = i + np.tile(deltas, length)
    keep = (j >= 0) & (j < length)
    return walk[i[keep]], walk[j[keep]]


def count_pairs(corpus: WalkCorpus, window: int) -> int:
    total = 0
    for walk in corpus.walks:
        length = len(walk)
        for i in range(length):
            total += min(i, window) + min(length - 1 - i, window)
    return total


def noise_distribution(corpus: WalkCorpus, exponent: float) -> np.ndarray:
    """Negative-sampling distribution: occurrence_count ** exponent, normalized.

    Nodes absent from the corpus get exactly zero mass.
    """
    counts = np.zeros(len(corpus.ids))
    for walk in corpus.walks:
        np.add.at(counts, walk, 1.0)
    weights = np.where(counts > 0, counts ** exponent, 0.0)
    total = weights.sum()
    if total <= 0:
        raise ConfigError("corpus contains no tokens")
    return weights / total


def _sigmoid(x):
    return np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                    np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))


def _softplus(x):
    # log(1 + exp(x)), stable
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def sgns_pair_loss(center: int, context: int, negatives, emb: EmbeddingMatrix) -> float:
    """-log s(f'(ctx)·f(ctr)) - sum_neg log s(-f'(neg)·f(ctr))."""
    fc = emb.vectors[center]
    s_pos = float(emb.context_vectors[context] @ fc)
    s_neg = emb.context_vectors[np.asarray(negatives)] @ fc
    return float(_softplus(-s_pos) + _softplus(s_neg).sum())


def sgns_pair_step(center: int, context: int, negatives, emb: EmbeddingMatrix,
                   step_size: float) -> float:
    """One SGD update for a (center, context, negatives) triple; returns loss.

    All gradients are evaluated at the pre-update parameters, then applied.
    """
    f, fp = emb.vectors, emb.context_vectors
    negatives = np.asarray(negatives, dtype=np.int64)
    fc = f[center].copy()
    s_pos = float(fp[context] @ fc)
    s_neg = fp[negatives] @ fc
    loss = float(_softplus(-s_pos) + _softplus(s_neg).sum())

    g_pos = float(_sigmoid(np.array(s_pos))) - 1.0
    g_neg = _sigmoid(s_neg)
    grad_center = g_pos * fp[context] + g_neg @ fp[negatives]
    fp[context] -= step_size * (g_pos * fc)
    np.subtract.at(fp, negatives, step_size * g_neg[:, None] * fc[None, :])
    f[center] -= step_size * grad_center
    return loss


@njit(cache=True)
def _sgns_chunk(f, fp, centers, contexts, negatives, lr0, lr_floor,
                pair_offset, total_pairs):
    n_pairs = centers.shape[0]
    d = f.shape[1]
    m = negatives.shape[1]
    loss = 0.0
    fc_old = np.empty(d)
    gc = np.empty(d)
    sig_neg = np.empty(m)
    for i in range(n_pairs):
        lr = lr0 * (1.0 - (pair_offset + i) / total_pairs)
        if lr < lr_floor:
            lr = lr_floor
        c = centers[i]
        o = contexts[i]
        for k in range(d):
            fc_old[k] = f[c, k]
            gc[k] = 0.0

        s = 0.0
        for k in range(d):
            s += fp[o, k] * fc_old[k]
        if s >= 0.0:
            loss += np.log1p(np.exp(-s))
            sig = 1.0 / (1.0 + np.exp(-s))
        else:
            loss += -s + np.log1p(np.exp(s))
            sig = np.exp(s) / (1.0 + np.exp(s))
        g_pos = sig - 1.0
        for k in range(d):
            gc[k] += g_pos * fp[o, k]

        # score every negative against the pre-update rows before touching fp
        for j in range(m):
            neg = negatives[i, j]
            s2 = 0.0
            for k in range(d):
                s2 += fp[neg, k] * fc_old[k]
            if s2 >= 0.0:
                loss += s2 + np.log1p(np.exp(-s2))
                sig_neg[j] = 1.0 / (1.0 + np.exp(-s2))
            else:
                loss += np.log1p(np.exp(s2))
                sig_neg[j] = np.exp(s2) / (1.0 + np.exp(s2))
            for k in range(d):
                gc[k] += sig_neg[j] * fp[neg, k]

        for k in range(d):
            fp[o, k] -= lr * g_pos * fc_old[k]
        for j in range(m):
            neg = negatives[i, j]
            for k in range(d):
                fp[neg, k] -= lr * sig_neg[j] * fc_old[k]
        for k in range(d):
            f[c, k] -= lr * gc[k]
    return loss


_CHUNK_PAIRS = 1 << 17


def initial_embedding(corpus: WalkCorpus, config: EmbedConfig,
                      rng=None) -> EmbeddingMatrix:
    """Pre-training state: f uniform in [-0.5/d, 0.5/d], f' all zeros."""
    if rng is None:
        rng = np.random.default_rng(config.rng_seed % 2**63)
    n = len(corpus.ids)
    d = config.dimension
    return EmbeddingMatrix(ids=list(corpus.ids),
                           vectors=(rng.random((n, d)) - 0.5) / d,
                           context_vectors=np.zeros((n, d)))


def train(corpus: WalkCorpus, config: EmbedConfig) -> EmbeddingMatrix:
    """Train embeddings over the corpus; deterministic given config.rng_seed."""
    config.validate()
    if not corpus.walks or all(len(w) < 2 for w in corpus.walks):
        raise ConfigError("corpus has no walks with at least two nodes")

    rng = np.random.default_rng(config.rng_seed % 2**63)
    emb = initial_embedding(corpus, config, rng)
    f, fp = emb.vectors, emb.context_vectors

    noise = noise_distribution(corpus, config.noise_exponent)
    support = np.flatnonzero(noise)
    cum = np.cumsum(noise[support])
    cum[-1] = 1.0

    walks = [np.asarray(w, dtype=np.int64) for w in corpus.walks]
    pairs_per_epoch = count_pairs(corpus, config.window)
    total_pairs = pairs_per_epoch * config.epochs
    lr0 = config.step_size
    lr_floor = lr0 * 1e-4
    m = config.negatives

    offset = 0
    for _epoch in range(config.epochs):
        epoch_loss = 0.0
        buf_c, buf_o = [], []
        buffered = 0

        def flush():
            nonlocal offset, epoch_loss, buffered
            if not buffered:
                return
            centers = np.concatenate(buf_c)
            contexts = np.concatenate(buf_o)
            draws = rng.random((len(centers), m))
            negs = support[np.searchsorted(cum, draws)]
            epoch_loss += _sgns_chunk(f, fp, centers, contexts, negs,
                                      lr0, lr_floor, offset, total_pairs)
            offset += len(centers)
            buf_c.clear()
            buf_o.clear()
            buffered = 0

        for walk in walks:
            c_arr, o_arr = _context_arrays(walk, config.window)
            if len(c_arr) == 0:
                continue
            buf_c.append(c_arr)
            buf_o.append(o_arr)
            buffered += len(c_arr)
            if buffered >= _CHUNK_PAIRS:
                flush()
        flush()
        emb.epoch_losses.append(epoch_loss / max(1, pairs_per_epoch))

    if not np.all(np.isfinite(f)) or not np.all(np.isfinite(fp)):
        raise ArithmeticError("training diverged: non-finite parameters")
    return emb


# ---------------------------------------------------------------------
# Exact-softmax oracle (tiny graphs only)
# ---------------------------------------------------------------------

def softmax_prob(v: int, u: int, emb: EmbeddingMatrix) -> float:
    """P(v | u) under a full softmax over input-vector dot products."""
    scores = emb.vectors @ emb.vectors[u]
    scores -= scores.max()
    e = np.exp(scores)
    return float(e[v] / e.sum())


def full_softmax_objective(corpus: WalkCorpus, window: int,
                           emb: EmbeddingMatrix) -> float:
    """Exact log-likelihood of all context pairs with exact Z_u.

    Scores a context t for center u as f'(t).f(u), the parameterization the
    sampled updates actually train, and normalizes over all nodes. O(N^2);
    meant as a tiny-graph oracle for the negative-sampling approximation.
    """
    scores = emb.vectors @ emb.context_vectors.T  # [u, t]
    shifted = scores - scores.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1)) + scores.max(axis=1)
    total = 0.0
    for center, context in generate_contexts(corpus, window):
        total += scores[center, context] - log_z[center]
    return float(total)


# ---------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------

def save_embeddings(emb: EmbeddingMatrix, path):
    """embeddings.txt: header `N d`, then `<id> <f1> ... <fd>` per node."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{emb.n_nodes} {emb.dimension}\n")
        for node_id, row in zip(emb.ids, emb.vectors):
            fh.write(node_id + " " + " ".join(f"{x:.6g}" for x in row) + "\n")


def load_embeddings(path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ConfigError(f"{path}: bad embeddings header")
        n, d = int(header[0]), int(header[1])
        ids = []
        vectors = np.empty((n, d))
        for i in range(n):
            parts = fh.readline().split()
            if len(parts) != d + 1:
                raise ConfigError(f"{path}: bad embeddings row {i + 2}")
            ids.append(parts[0])
            vectors[i] = [float(x) for x in parts[1:]]
    return EmbeddingMatrix(ids=ids, vectors=vectors,
                           context_vectors=np.zeros_like(vectors))
