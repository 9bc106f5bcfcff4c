import numpy as np
import pytest

from enwalk.baselines import (DEFAULT_PROPAGATION, MRFConfig, PageRankConfig,
                              TrustModel, enumerate_marginals, fit_trust, lbp,
                              lbp_marginals, load_trust, pagerank, save_trust,
                              spamicity_from_trust_order, trust_priors)
from enwalk.errors import ConfigError, ValidationError
from enwalk.graph import SpamGraph, UserRecord
from oracles import dense_pagerank, random_tree_edges


def build(n, edges):
    return SpamGraph([f"n{i}" for i in range(n)],
                     [UserRecord() for _ in range(n)],
                     [(s, d, w) for s, d, w in edges])


def constant_trust(value=0.5):
    return TrustModel(weights=np.zeros(8), intercept=value)


# -- trust regression ---------------------------------------------------------

def test_exact_linear_recovery():
    rng = np.random.default_rng(0)
    x = rng.random((60, 8))
    w = rng.random(8) * 0.1
    y = np.clip(x @ w + 0.1, 0, 1)
    model = fit_trust(x, y)
    assert np.allclose(model.predict(x), y, atol=1e-6)


def test_constant_labels_give_constant_model():
    rng = np.random.default_rng(1)
    x = rng.random((30, 8))
    model = fit_trust(x, np.full(30, 0.5))
    assert np.allclose(model.predict(rng.random((10, 8))), 0.5, atol=1e-8)


def test_predictions_clamped():
    model = TrustModel(weights=np.ones(8), intercept=0.0)
    assert model.predict(np.full((1, 8), 100.0))[0] == 1.0
    assert model.predict(np.full((1, 8), -100.0))[0] == 0.0


def test_rank_deficient_falls_back_to_ridge():
    x = np.zeros((20, 8))
    x[:, 0] = np.arange(20)
    y = np.linspace(0, 1, 20)
    with pytest.warns(UserWarning, match="rank-deficient"):
        model = fit_trust(x, y)
    assert np.all(np.isfinite(model.weights))


def test_too_few_examples():
    with pytest.raises(ConfigError):
        fit_trust(np.ones((2, 8)), np.array([0.2, 0.8]))


def test_trust_round_trip(tmp_path):
    model = TrustModel(weights=np.arange(8.0), intercept=-0.5)
    save_trust(model, tmp_path / "trust.json")
    loaded = load_trust(tmp_path / "trust.json")
    assert np.allclose(loaded.weights, model.weights)
    assert loaded.intercept == model.intercept


# -- PageRank ------------------------------------------------------------------

def test_three_cycle_is_uniform():
    g = build(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
    result = pagerank(g)
    assert np.allclose(result.scores, 1 / 3, atol=1e-9)
    assert result.converged


def test_scores_sum_to_one():
    g = build(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.0), (3, 0, 1.0)])
    result = pagerank(g)
    assert abs(result.scores.sum() - 1.0) < 1e-9
    assert np.all(result.scores >= 0)


def test_star_matches_dense_oracle():
    g = build(4, [(1, 0, 1.0), (2, 0, 1.0), (3, 0, 1.0)])
    result = pagerank(g, PageRankConfig(damping=0.15))
    oracle = dense_pagerank(g, 0.15)
    assert np.abs(result.scores - oracle).max() < 1e-9


def random_graph(rng, n):
    edges = {}
    for _ in range(int(rng.integers(n, 3 * n))):
        s, d = rng.integers(0, n, size=2)
        if s != d:
            edges[(int(s), int(d))] = float(rng.integers(1, 4))
    return build(n, [(s, d, w) for (s, d), w in edges.items()])


@pytest.mark.parametrize("seed", range(8))
def test_random_graphs_match_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(4, 21)))
    if g.n_edges == 0:
        return
    result = pagerank(g, PageRankConfig(damping=0.2))
    assert np.abs(result.scores - dense_pagerank(g, 0.2)).max() < 1e-9


def test_constant_trust_equals_traditional():
    rng = np.random.default_rng(42)
    g = random_graph(rng, 12)
    plain = pagerank(g, PageRankConfig(damping=0.15))
    trusted = pagerank(g, PageRankConfig(damping=0.15, variant="trust"),
                       trust=constant_trust(0.5))
    assert np.abs(plain.scores - trusted.scores).max() < 1e-9


def test_trust_variant_matches_dense_oracle(synth_small):
    g, labels = synth_small
    model = fit_trust(np.array([r.trust_features for r in g.records]),
                      np.array([1.0 - labels[i] for i in g.ids]))
    result = pagerank(g, PageRankConfig(damping=0.15, variant="trust"), model)
    oracle = dense_pagerank(g, 0.15, trust=model.score_graph(g))
    assert np.abs(result.scores - oracle).max() < 1e-8


def test_nonconvergence_flagged():
    g = build(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (0, 2, 1.0)])
    result = pagerank(g, PageRankConfig(max_iterations=1, tolerance=1e-15))
    assert not result.converged


def test_trust_variant_requires_model():
    g = build(2, [(0, 1, 1.0)])
    with pytest.raises(ConfigError):
        pagerank(g, PageRankConfig(variant="trust"))


def test_spamicity_orientation():
    # lowest trust value gets spamicity 1, highest gets 0
    spam = spamicity_from_trust_order(np.array([0.3, 0.9, 0.1]))
    assert spam[2] == 1.0 and spam[1] == 0.0
    assert spam[0] == 0.5


# -- belief propagation ---------------------------------------------------------

def test_propagation_matrix_columns():
    assert np.allclose(DEFAULT_PROPAGATION.sum(axis=0), 1.0)
    bad = MRFConfig(propagation=np.full((3, 3), 0.5))
    with pytest.raises(ValidationError):
        bad.validate()


def test_trust_prior_mapping():
    priors = trust_priors(np.array([0.0, 0.5, 1.0]))
    assert np.allclose(priors[0], [1, 0, 0])
    assert np.allclose(priors[1], [1 / 3, 1 / 3, 1 / 3])
    assert np.allclose(priors[2], [0, 0, 1])


def test_isolated_node_keeps_prior():
    priors = np.array([[0.7, 0.2, 0.1]])
    result = lbp(np.empty((0, 2)), priors)
    assert np.allclose(result.beliefs, priors)


def test_two_node_edge_matches_enumeration():
    edges = np.array([[0, 1]])
    priors = np.full((2, 3), 1 / 3)
    result = lbp(edges, priors)
    exact = enumerate_marginals(edges, priors)
    assert np.abs(result.beliefs - exact).max() < 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_trees_match_enumeration(seed):
    rng = np.random.default_rng(200 + seed)
    n = int(rng.integers(2, 11))
    edges = random_tree_edges(rng, n)
    priors = rng.random((n, 3)) + 0.05
    result = lbp(edges, priors)
    exact = enumerate_marginals(edges, priors)
    assert result.converged
    assert np.abs(result.beliefs - exact).max() < 1e-6


def test_beliefs_are_distributions():
    rng = np.random.default_rng(5)
    n = 15
    edges = {(int(s), int(d)) for s, d in rng.integers(0, n, size=(40, 2))
             if s != d}
    edges = np.array([[min(a, b), max(a, b)] for a, b in edges])
    priors = rng.random((n, 3)) + 0.01
    result = lbp(edges, priors)
    assert np.all(result.beliefs >= 0)
    assert np.allclose(result.beliefs.sum(axis=1), 1.0, atol=1e-9)


def test_lbp_nonconvergence_flagged():
    rng = np.random.default_rng(1)
    edges = np.array([[0, 1], [1, 2], [2, 0]])
    priors = rng.random((3, 3)) + 0.1
    result = lbp(edges, priors, MRFConfig(max_iterations=1, tolerance=1e-15))
    assert not result.converged


def test_lbp_marginals_integration(synth_small):
    g, labels = synth_small
    model = fit_trust(np.array([r.trust_features for r in g.records]),
                      np.array([1.0 - labels[i] for i in g.ids]))
    result = lbp_marginals(g, MRFConfig(), model)
    assert result.beliefs.shape == (g.n_nodes, 3)
    assert np.allclose(result.beliefs.sum(axis=1), 1.0)
    assert np.all(result.spamicity == result.beliefs[:, 0])
