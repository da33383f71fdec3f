"""Weighted stochastic block model: graph container, block model and sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence, Union

import numpy as np


class DegenerateFitError(ValueError):
    """Raised when labeled data cannot support the requested estimate."""


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected, hollow graph with weights stored for present edges only.

    Edges are kept as parallel arrays ``rows < cols`` sorted row-major. An
    edge may carry weight 0; presence and weight are tracked separately.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if not (len(rows) == len(cols) == len(weights)):
            raise ValueError("rows, cols and weights must have equal length")
        if self.n < 0:
            raise ValueError("node count must be nonnegative")
        if len(rows):
            if np.any(rows >= cols):
                raise ValueError("edges must satisfy i < j (no self-loops)")
            if rows.min() < 0 or cols.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if not np.all(np.isfinite(weights)):
                raise ValueError("edge weights must be finite")
        order = np.lexsort((cols, rows))
        rows, cols, weights = rows[order], cols[order], weights[order]
        if len(rows) > 1:
            dup = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if dup.any():
                raise ValueError("duplicate edge")
        for name, arr in (("rows", rows), ("cols", cols), ("weights", weights)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_matrix(cls, C, presence=None) -> "WeightedGraph":
        """Build from a symmetric weight matrix.

        Without ``presence``, nonzero entries define the edge set.
        """
        C = np.asarray(C, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise ValueError("matrix must be square")
        if not np.allclose(C, C.T, rtol=0, atol=0):
            raise ValueError("matrix must be symmetric")
        mask = C != 0 if presence is None else np.asarray(presence, dtype=bool)
        if not np.array_equal(mask, mask.T):
            raise ValueError("presence mask must be symmetric")
        if np.any(np.diag(mask)):
            raise ValueError("graph must be hollow")
        i, j = np.nonzero(np.triu(mask, 1))
        return cls(C.shape[0], i, j, C[i, j])

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Unweighted 0/1 adjacency matrix A."""
        A = np.zeros((self.n, self.n))
        A[self.rows, self.cols] = 1.0
        A[self.cols, self.rows] = 1.0
        A.setflags(write=False)
        return A

    @cached_property
    def weight_matrix(self) -> np.ndarray:
        """C = A o W with absent edges as 0."""
        C = np.zeros((self.n, self.n))
        C[self.rows, self.cols] = self.weights
        C[self.cols, self.rows] = self.weights
        C.setflags(write=False)
        return C

    def weight(self, i: int, j: int) -> float | None:
        """Weight of edge {i, j}, or None when absent."""
        if i == j:
            return None
        a, b = (i, j) if i < j else (j, i)
        lo = np.searchsorted(self.rows, a, side="left")
        hi = np.searchsorted(self.rows, a, side="right")
        k = lo + np.searchsorted(self.cols[lo:hi], b)
        if k < hi and self.cols[k] == b:
            return float(self.weights[k])
        return None

    def edges(self):
        """Yield (i, j, w) for present edges, i < j."""
        for i, j, w in zip(self.rows, self.cols, self.weights):
            yield int(i), int(j), float(w)


@dataclass(frozen=True)
class Normal:
    mean: float
    sd: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError("Normal sd must be positive")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(self.mean, self.sd, size)


@dataclass(frozen=True)
class Poisson:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("Poisson rate must be positive")

    @property
    def mean(self) -> float:
        return self.rate

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(self.rate, size).astype(float)


@dataclass(frozen=True)
class Empirical:
    """Resamples (with replacement) from a fixed list of observed weights."""

    samples: tuple

    def __post_init__(self):
        samples = tuple(float(s) for s in self.samples)
        if not samples:
            raise ValueError("Empirical distribution needs at least one sample")
        object.__setattr__(self, "samples", samples)

    @property
    def mean(self) -> float:
        return math.fsum(self.samples) / len(self.samples)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(np.asarray(self.samples), size=size, replace=True)


WeightDistribution = Union[Normal, Poisson, Empirical]


@dataclass(frozen=True)
class BlockModel:
    """K-block SBM extended with a symmetric matrix of weight distributions."""

    pi: np.ndarray
    B: np.ndarray
    F: tuple

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float).ravel()
        B = np.asarray(self.B, dtype=float)
        K = len(pi)
        if K < 1:
            raise ValueError("need at least one block")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("pi must be a probability vector")
        if B.shape != (K, K):
            raise ValueError(f"B must be {K}x{K}")
        if not np.array_equal(B, B.T):
            raise ValueError("B must be symmetric")
        if np.any(B < 0) or np.any(B > 1):
            raise ValueError("B entries must lie in [0, 1]")
        F = tuple(tuple(row) for row in self.F)
        if len(F) != K or any(len(row) != K for row in F):
            raise ValueError(f"F must be {K}x{K}")
        for u in range(K):
            for v in range(K):
                if F[u][v] != F[v][u]:
                    raise ValueError("F must be symmetric")
        pi.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "F", F)

    @property
    def K(self) -> int:
        return len(self.pi)


@dataclass(frozen=True)
class PartialLabels:
    """Known block memberships for a subset of nodes (blocks are 0-based)."""

    n: int
    n_blocks: int
    assignments: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for node, block in dict(self.assignments).items():
            node, block = int(node), int(block)
            if not 0 <= node < self.n:
                raise ValueError(f"labeled node {node} out of range")
            if not 0 <= block < self.n_blocks:
                raise ValueError(f"block {block} out of range")
            clean[node] = block
        object.__setattr__(self, "assignments", clean)

    @cached_property
    def vector(self) -> np.ndarray:
        """Length-n array of block indices, -1 for unlabeled."""
        out = np.full(self.n, -1, dtype=np.int64)
        for node, block in self.assignments.items():
            out[node] = block
        out.setflags(write=False)
        return out

    @property
    def labeled(self) -> np.ndarray:
        return np.flatnonzero(self.vector >= 0)

    @property
    def unlabeled(self) -> np.ndarray:
        return np.flatnonzero(self.vector < 0)

    def members(self, block: int) -> np.ndarray:
        return np.flatnonzero(self.vector == block)

    def counts(self) -> np.ndarray:
        return np.bincount(self.vector[self.vector >= 0], minlength=self.n_blocks)


def rank_one_b(p: float, q: float) -> np.ndarray:
    """Two-block edge-probability matrix from latent positions p and q."""
    for name, val in (("p", p), ("q", q)):
        if not 0 < val <= 1:
            raise ValueError(f"{name} must lie in (0, 1], got {val}")
    x = np.array([p, q], dtype=float)
    return np.outer(x, x)


def _block_vector(block_counts: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(block_counts)), block_counts)


def sample_presence(B: np.ndarray, blocks: np.ndarray, rng: np.random.Generator):
    """Coin-flip every pair i < j in row-major order; return present pairs."""
    n = len(blocks)
    i, j = np.triu_indices(n, 1)
    keep = rng.random(len(i)) < B[blocks[i], blocks[j]]
    return i[keep], j[keep]


def sample_weights(F, blocks, rows, cols, rng: np.random.Generator) -> np.ndarray:
    """Draw each present edge's weight from F[u][v], block pair by block pair."""
    w = np.empty(len(rows))
    bu, bv = blocks[rows], blocks[cols]
    lo, hi = np.minimum(bu, bv), np.maximum(bu, bv)
    K = len(F)
    for u in range(K):
        for v in range(u, K):
            idx = np.flatnonzero((lo == u) & (hi == v))
            if len(idx):
                w[idx] = F[u][v].sample(rng, len(idx))
    return w


def sample_sbm(model: BlockModel, block_counts, train_counts, seed: int):
    """Sample a weighted SBM conditioned on block sizes and training counts.

    Nodes are laid out block-contiguously. Presence, weights and the training
    split use independent child streams of ``seed``, so redrawing weights
    never changes the adjacency pattern.

    Returns ``(graph, partial_labels, truth)`` where ``truth`` is the full
    length-n block vector.
    """
    block_counts = [int(c) for c in block_counts]
    train_counts = [int(c) for c in train_counts]
    K = model.K
    if len(block_counts) != K or len(train_counts) != K:
        raise ValueError("block_counts and train_counts need one entry per block")
    for c, t in zip(block_counts, train_counts):
        if c < 0 or t < 0 or t > c:
            raise ValueError("need 0 <= train_counts[u] <= block_counts[u]")

    presence_ss, weight_ss, split_ss = np.random.SeedSequence(seed).spawn(3)
    blocks = _block_vector(block_counts)
    rows, cols = sample_presence(model.B, blocks, np.random.default_rng(presence_ss))
    weights = sample_weights(model.F, blocks, rows, cols, np.random.default_rng(weight_ss))
    graph = WeightedGraph(len(blocks), rows, cols, weights)

    split_rng = np.random.default_rng(split_ss)
    assignments = {}
    start = 0
    for u, (c, t) in enumerate(zip(block_counts, train_counts)):
        chosen = split_rng.choice(c, size=t, replace=False) + start
        assignments.update({int(i): u for i in chosen})
        start += c
    labels = PartialLabels(len(blocks), K, assignments)
    return graph, labels, blocks
