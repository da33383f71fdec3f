"""Pass-to-ranks and adjacency spectral embedding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .model import WeightedGraph

_SCALES = {"unit": 1.0, "two": 2.0}


@dataclass(frozen=True)
class EmbeddingResult:
    positions: np.ndarray  # n x d
    eigenvalues: np.ndarray  # length d, nonincreasing, all > 0

    @property
    def d(self) -> int:
        return self.positions.shape[1]


def pass_to_ranks(graph: WeightedGraph, scale: str = "two") -> np.ndarray:
    """Replace each present edge weight by ``scale * rank / |E|``.

    Ranks ascend with weight and ties share the average of their rank span.
    Absent edges map to 0.
    """
    if scale not in _SCALES:
        raise ValueError(f"scale must be one of {sorted(_SCALES)}")
    m = graph.n_edges
    if m == 0:
        raise ValueError("pass-to-ranks is undefined on an edgeless graph")
    values = _SCALES[scale] * rankdata(graph.weights, method="average") / m
    out = np.zeros((graph.n, graph.n))
    out[graph.rows, graph.cols] = values
    out[graph.cols, graph.rows] = values
    return out


def ase(M, d: int = 1, augment_diagonal: bool = False) -> EmbeddingResult:
    """Adjacency spectral embedding: rows of U_d diag(lambda_d)^(1/2).

    The top ``d`` eigenvalues are taken by signed value and must be strictly
    positive. Each column is flipped so its entries sum to a nonnegative value.
    With ``augment_diagonal`` the diagonal is replaced by ``degree / (n - 1)``
    before decomposing.
    """
    M = np.array(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    n = M.shape[0]
    if d < 1 or d > n:
        raise ValueError(f"embedding dimension must lie in [1, {n}]")
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-10:
        raise ValueError("matrix must be symmetric")
    M = (M + M.T) / 2
    if augment_diagonal and n > 1:
        np.fill_diagonal(M, 0.0)
        M[np.diag_indices(n)] = M.sum(axis=1) / (n - 1)

    # LinAlgError on non-convergence propagates to the caller.
    evals, evecs = np.linalg.eigh(M)
    top = np.argsort(evals)[::-1][:d]
    lam = evals[top]
    if np.any(lam <= 0):
        raise ValueError(f"fewer than {d} strictly positive eigenvalues")
    X = evecs[:, top] * np.sqrt(lam)
    signs = np.where(X.sum(axis=0) < 0, -1.0, 1.0)
    X = X * signs
    return EmbeddingResult(X, lam)
