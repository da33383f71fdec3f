"""Plug-in Gaussian classification with per-node prior updates from edge weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .embedding import ase, pass_to_ranks
from .model import DegenerateFitError, PartialLabels, WeightedGraph
from .stats import (
    P_FLOOR,
    ThreeDecision,
    fishers_logp,
    fishers_method,
    footrule_distance,
    ks_two_sample,
    logistic_sharpen,
    mann_whitney_u,
    three_decision_test,
)

STRATEGIES = (
    "ptr_qda",
    "ordered",
    "ordered_gated",
    "ordered_dynamic",
    "general",
    "general_logit",
)

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class PlugInMixture:
    means: np.ndarray
    sds: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        if np.any(self.sds <= 0):
            raise ValueError("all block standard deviations must be positive")
        if abs(self.priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must sum to 1")

    @property
    def K(self) -> int:
        return len(self.means)

    def log_density(self, x) -> np.ndarray:
        """Per-block Gaussian log density; shape (..., K)."""
        z = (np.asarray(x, dtype=float)[..., None] - self.means) / self.sds
        return -0.5 * z * z - np.log(self.sds) - _LOG_SQRT_2PI


def _check_prior(prior) -> np.ndarray:
    prior = np.asarray(prior, dtype=float)
    if np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-12:
        raise ValueError("prior must be a probability vector")
    return prior


def fit_plug_in_mixture(positions, labels: PartialLabels) -> PlugInMixture:
    """Per-block mean, sample sd (ddof=1) and labeled-count prior."""
    x = np.asarray(positions, dtype=float)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise ValueError("plug-in mixture is univariate; pass n x 1 positions")
        x = x[:, 0]
    K = labels.n_blocks
    means, sds = np.empty(K), np.empty(K)
    counts = labels.counts()
    for u in range(K):
        if counts[u] < 2:
            raise DegenerateFitError(f"block {u} has {counts[u]} labeled nodes; need 2")
        vals = x[labels.members(u)]
        means[u] = vals.mean()
        sds[u] = vals.std(ddof=1)
        if not sds[u] > 0:
            raise DegenerateFitError(f"block {u} positions have zero spread")
    return PlugInMixture(means, sds, counts / counts.sum())


def bayes_classify(mix: PlugInMixture, x: float, prior) -> int:
    """argmax_u prior_u * phi(x; mu_u, sd_u), ties to the smaller index."""
    prior = _check_prior(prior)
    with np.errstate(divide="ignore"):
        score = np.log(prior) + mix.log_density(x)
    return int(np.argmax(score))


def decision_boundaries(mu1, sd1, pi1, mu2, sd2, pi2) -> list[float]:
    """Points where pi1*phi(x; mu1, sd1) equals pi2*phi(x; mu2, sd2).

    Unequal scales give the roots of a quadratic (zero, one or two of them);
    equal scales give a single linear boundary (none if the means coincide).
    """
    if not (sd1 > 0 and sd2 > 0):
        raise ValueError("standard deviations must be positive")
    v1, v2 = sd1 * sd1, sd2 * sd2
    log_ratio = math.log((pi1 * sd2) / (pi2 * sd1))
    if v1 == v2:
        if mu1 == mu2:
            return []
        # (mu2 - mu1)(2x - mu1 - mu2) = 2 v log(pi1 / pi2)
        return [(mu1 + mu2) / 2 + v1 * math.log(pi1 / pi2) / (mu2 - mu1)]
    # (v1 - v2) x^2 - 2 (mu2 v1 - mu1 v2) x + (mu2^2 v1 - mu1^2 v2 + 2 v1 v2 log_ratio) = 0
    a = v1 - v2
    half_b = mu2 * v1 - mu1 * v2
    c = mu2 * mu2 * v1 - mu1 * mu1 * v2 + 2 * v1 * v2 * log_ratio
    disc = half_b * half_b - a * c
    if disc < 0:
        return []
    if disc == 0:
        return [half_b / a]
    root = math.sqrt(disc)
    # avoid cancellation: pair the larger-magnitude numerator with a division by a
    q = half_b + math.copysign(root, half_b) if half_b != 0 else root
    r1 = q / a
    r2 = c / q
    return sorted([r1, r2])


@dataclass(frozen=True)
class BlockWeights:
    """Observed weights between labeled nodes, keyed by unordered block pair."""

    K: int
    samples: dict

    def get(self, u: int, v: int) -> np.ndarray:
        return self.samples[(u, v) if u <= v else (v, u)]

    def mean(self, u: int, v: int) -> float:
        s = self.get(u, v)
        if len(s) == 0:
            raise DegenerateFitError(f"no training edges between blocks {u} and {v}")
        return float(s.mean())


def collect_block_weights(graph: WeightedGraph, labels: PartialLabels) -> BlockWeights:
    """Weights on present edges between labeled nodes, per block pair."""
    lab = labels.vector
    bu, bv = lab[graph.rows], lab[graph.cols]
    keep = (bu >= 0) & (bv >= 0)
    lo = np.minimum(bu, bv)[keep]
    hi = np.maximum(bu, bv)[keep]
    w = graph.weights[keep]
    K = labels.n_blocks
    samples = {
        (u, v): w[(lo == u) & (hi == v)] for u in range(K) for v in range(u, K)
    }
    return BlockWeights(K, samples)


def _ordering(means) -> tuple:
    return tuple(int(k) for k in np.argsort(np.asarray(means), kind="stable"))


def estimate_orderings(block_weights: BlockWeights) -> list[tuple]:
    """Local ordering per block: blocks sorted by ascending mean weight to u."""
    K = block_weights.K
    return [_ordering([block_weights.mean(u, v) for v in range(K)]) for u in range(K)]


def node_block_means(graph: WeightedGraph, labels: PartialLabels) -> np.ndarray:
    """n x K mean weight from each node to labeled block-v nodes (0 if none)."""
    A, C = graph.adjacency, graph.weight_matrix
    K = labels.n_blocks
    out = np.zeros((graph.n, K))
    for v in range(K):
        cols = labels.members(v)
        s = C[:, cols].sum(axis=1)
        c = A[:, cols].sum(axis=1)
        np.divide(s, c, out=out[:, v], where=c > 0)
    return out


def estimate_node_ordering(graph: WeightedGraph, node: int, labels: PartialLabels) -> tuple:
    if labels.vector[node] >= 0:
        raise ValueError(f"node {node} is labeled")
    K = labels.n_blocks
    A, C = graph.adjacency, graph.weight_matrix
    means = np.zeros(K)
    for v in range(K):
        cols = labels.members(v)
        c = A[node, cols].sum()
        if c > 0:
            means[v] = C[node, cols].sum() / c
    return _ordering(means)


def node_weight_samples(graph: WeightedGraph, node: int, labels: PartialLabels) -> list:
    """Per block v, weights on present edges from ``node`` to labeled v nodes."""
    A, C = graph.adjacency, graph.weight_matrix
    out = []
    for v in range(labels.n_blocks):
        cols = labels.members(v)
        out.append(C[node, cols][A[node, cols] > 0])
    return out


def _normalized_product(base: np.ndarray, sim: np.ndarray) -> np.ndarray:
    prod = base * sim
    total = prod.sum()
    if not total > 0:
        return base.copy()
    return prod / total


def update_priors_ordered(
    base,
    node_ord: Sequence,
    block_ords: Sequence[Sequence],
    smoothing: float = 1.0,
    dissimilarity: Callable = footrule_distance,
) -> np.ndarray:
    """Reweight ``base`` by similarity of the node ordering to each block's."""
    base = _check_prior(base)
    steps = ordered_similarity(node_ord, block_ords, smoothing, dissimilarity)
    if steps is None:
        return base.copy()
    return _normalized_product(base, steps[2])


def ordered_similarity(
    node_ord: Sequence,
    block_ords: Sequence[Sequence],
    smoothing: float = 1.0,
    dissimilarity: Callable = footrule_distance,
):
    """Intermediate vectors ``(ND, S, NS)`` of the ordered update.

    ND is the normalized smoothed dissimilarity, S = 1 - ND and NS = S / sum(S).
    Returns None when every dissimilarity is equal (the update is the identity).
    """
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    d = np.array([dissimilarity(node_ord, o) for o in block_ords], dtype=float) + smoothing
    if len(d) < 2 or np.all(d == d[0]):
        return None
    nd = d / d.sum()
    s = 1.0 - nd
    return nd, s, s / s.sum()


def dynamic_smoothing(combined_p: float, r: float) -> float:
    """Linear map [0, 1] -> [1, r]: strong evidence means little smoothing."""
    if r < 1:
        raise ValueError("r must be at least 1")
    p = min(1.0, max(0.0, combined_p))
    return 1.0 + (r - 1.0) * p


def general_log_similarity(node_samples: Sequence, block_weights: BlockWeights) -> np.ndarray:
    """log p_{i,u}: Fisher-combined KS p-values of node vs block-u weights.

    Block u gets log p = 0 (no evidence) when no pair (u, j) is testable.
    """
    K = block_weights.K
    out = np.zeros(K)
    for u in range(K):
        pvals = []
        for j in range(K):
            mine, ref = node_samples[j], block_weights.get(u, j)
            if len(mine) and len(ref):
                pvals.append(ks_two_sample(mine, ref).pvalue)
        if pvals:
            out[u] = fishers_logp(pvals)
    return out


def update_priors_general(
    base, node_samples, block_weights: BlockWeights, logit_coeff=None, logit_center=0.5
) -> np.ndarray:
    """Multiply base priors by per-block combined KS p-values and renormalize.

    With ``logit_coeff`` each p-value is first passed through a logistic
    curve centered at ``logit_center``.
    """
    base = _check_prior(base)
    logp = general_log_similarity(node_samples, block_weights)
    if logit_coeff is not None:
        sim = np.array([logistic_sharpen(math.exp(v), logit_coeff, logit_center) for v in logp])
        return _normalized_product(base, sim)
    with np.errstate(divide="ignore"):
        logs = np.log(base) + logp
    if np.all(np.isneginf(logs)):
        return base.copy()
    w = np.exp(logs - logs.max())
    return w / w.sum()


@dataclass(frozen=True)
class ClassifierConfig:
    """Knobs shared by all strategies."""

    smoothing: float = 1.0
    alpha: float = 0.1
    r: float = 100.0
    logit_coeff: float = 10.0
    logit_center: float = 0.5
    ptr_scale: str = "two"
    augment_diagonal: bool = False


@dataclass(frozen=True)
class Prediction:
    nodes: np.ndarray  # unlabeled node indices
    labels: np.ndarray  # predicted block per node
    priors: np.ndarray  # prior used per node, len(nodes) x K


def pooled_gate_samples(bw: BlockWeights):
    K = bw.K
    within = np.concatenate([bw.get(u, u) for u in range(K)])
    between = np.concatenate([bw.get(u, v) for u in range(K) for v in range(u + 1, K)] or [[]])
    return within, between


def _gate_rejects(bw: BlockWeights, alpha: float) -> bool:
    within, between = pooled_gate_samples(bw)
    if len(within) == 0 or len(between) == 0:
        return False
    try:
        return three_decision_test(within, between, alpha) is not ThreeDecision.FAIL_TO_REJECT
    except ValueError:
        # identical pooled weights carry no ordering evidence
        return False


def _dynamic_combined_p(bw: BlockWeights) -> float:
    """Fisher-combined MWU p over blocks: within-u weights vs u's cross weights."""
    K = bw.K
    pvals = []
    for u in range(K):
        within = bw.get(u, u)
        between = np.concatenate([bw.get(u, v) for v in range(K) if v != u] or [[]])
        if len(within) and len(between):
            try:
                pvals.append(mann_whitney_u(within, between).pvalue)
            except ValueError:
                pvals.append(1.0)
    return fishers_method(pvals).pvalue if pvals else 1.0


def classify_nodes(
    graph: WeightedGraph,
    labels: PartialLabels,
    strategy: str,
    config: ClassifierConfig = ClassifierConfig(),
) -> Prediction:
    """Predict blocks for every unlabeled node with the named strategy.

    ``ptr_qda`` embeds the pass-to-ranks matrix and uses the base priors.
    Every other strategy embeds the unweighted adjacency matrix and updates
    each node's prior from edge-weight evidence before the Bayes rule.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if graph.n_edges == 0:
        raise DegenerateFitError("graph has no edges")
    nodes = labels.unlabeled
    K = labels.n_blocks

    if strategy == "ptr_qda":
        M = pass_to_ranks(graph, config.ptr_scale)
    else:
        M = graph.adjacency
    try:
        emb = ase(M, 1, augment_diagonal=config.augment_diagonal)
    except ValueError as exc:
        raise DegenerateFitError(str(exc)) from exc
    x = emb.positions[:, 0]
    mix = fit_plug_in_mixture(x, labels)
    base = mix.priors
    priors = np.tile(base, (len(nodes), 1))

    if strategy.startswith("ordered"):
        bw = collect_block_weights(graph, labels)
        smoothing = config.smoothing
        update = True
        if strategy == "ordered_gated":
            update = _gate_rejects(bw, config.alpha)
        elif strategy == "ordered_dynamic":
            smoothing = dynamic_smoothing(_dynamic_combined_p(bw), config.r)
        if update:
            block_ords = estimate_orderings(bw)
            means = node_block_means(graph, labels)
            for k, i in enumerate(nodes):
                priors[k] = update_priors_ordered(base, _ordering(means[i]), block_ords, smoothing)
    elif strategy.startswith("general"):
        bw = collect_block_weights(graph, labels)
        coeff = config.logit_coeff if strategy == "general_logit" else None
        for k, i in enumerate(nodes):
            samples = node_weight_samples(graph, i, labels)
            priors[k] = update_priors_general(base, samples, bw, coeff, config.logit_center)

    with np.errstate(divide="ignore"):
        scores = np.log(priors) + mix.log_density(x[nodes])
    pred = np.argmax(scores, axis=1) if len(nodes) else np.empty(0, dtype=np.int64)
    return Prediction(nodes, pred.astype(np.int64), priors)
