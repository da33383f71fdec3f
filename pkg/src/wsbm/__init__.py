"""Vertex classification on weighted stochastic block model graphs."""

from .classify import (
    ClassifierConfig,
    PlugInMixture,
    bayes_classify,
    classify_nodes,
    collect_block_weights,
    decision_boundaries,
    dynamic_smoothing,
    estimate_node_ordering,
    estimate_orderings,
    fit_plug_in_mixture,
    ordered_similarity,
    update_priors_general,
    update_priors_ordered,
)
from .embedding import EmbeddingResult, ase, pass_to_ranks
from .model import (
    BlockModel,
    DegenerateFitError,
    Empirical,
    Normal,
    PartialLabels,
    Poisson,
    WeightedGraph,
    rank_one_b,
    sample_sbm,
)

__version__ = "0.1.0"
