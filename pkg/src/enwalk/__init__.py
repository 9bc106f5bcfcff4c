"""Spam-dynamics-biased random-walk embeddings for spammer detection.

The pipeline: load (or synthesize) a follower graph with per-user
behavior records, derive pairwise behavior-similarity features, generate
biased random walks, train skip-gram embeddings on the walk corpus, and
score/rank nodes by spamicity. PageRank variants and a 3-state MRF serve
as ranking baselines, and an evaluation harness reports classification
and ranking quality against suspension labels.
"""

from .baselines import (DEFAULT_PROPAGATION, MRFConfig, PageRankConfig,
                        TrustModel, fit_trust, lbp, lbp_marginals, pagerank,
                        trust_priors)
from .dynamics import (DynamicsCache, NodeStats, PairDynamics, node_stats,
                       pair_common_time, pair_fraud, pair_mentions,
                       pair_success)
from .embedding import (EmbedConfig, EmbeddingMatrix, generate_contexts,
                        load_embeddings, save_embeddings, sgns_pair_step,
                        softmax_prob, train)
from .errors import ConfigError, ParseError, ValidationError
from .evaluation import (EvalReport, compare_models, cross_validate,
                         out_of_fold_scores, precision_at_n, suspended_cdf,
                         train_linear_classifier)
from .graph import (SpamGraph, UserRecord, apply_labels, load_graph,
                    load_labels, save_graph, save_labels)
from .synth import SynthConfig, generate
from .walks import (BiasWeights, WalkConfig, WalkCorpus, alpha,
                    generate_corpus, load_walks, sample_walk, save_walks,
                    transition_distribution)

__version__ = "0.1.0"
