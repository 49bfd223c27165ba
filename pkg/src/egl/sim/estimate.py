"""Block-parameter estimation from a labeled graph."""

from dataclasses import dataclass

import numpy as np

from .graphs import IMPUTED_ZERO, LabeledGraph, ObservedGraph

__all__ = ["SBMEstimate", "estimate_sbm", "block_edge_counts", "pair_counts", "loo_estimates"]


@dataclass(frozen=True, eq=False)
class SBMEstimate:
    B_hat: np.ndarray
    pi_hat: np.ndarray
    pairs: np.ndarray
    # block pairs with no potential edges (their B_hat entry is set to 0)
    empty_pairs: np.ndarray


def _adjacency(g):
    if isinstance(g, ObservedGraph):
        if g.mode != IMPUTED_ZERO:
            raise ValueError("estimate_sbm needs an imputed_zero observation")
        return g.edges
    if isinstance(g, LabeledGraph):
        return g.adjacency
    raise TypeError("expected a LabeledGraph or ObservedGraph")


def block_edge_counts(A, labels, K):
    """Edges between blocks k and k' (within-block edges counted once)."""
    onehot = np.eye(K, dtype=np.int64)[labels]
    E = onehot.T @ np.asarray(A, dtype=np.int64) @ onehot
    E[np.diag_indices(K)] //= 2
    return E


def pair_counts(nk):
    nk = np.asarray(nk, dtype=np.int64)
    P = np.outer(nk, nk)
    P[np.diag_indices(len(nk))] = nk * (nk - 1) // 2
    return P


def estimate_sbm(g):
    """B_hat = edges / potential pairs per block pair, pi_hat = n_k / n."""
    A = _adjacency(g)
    K = g.K
    nk = np.bincount(g.labels, minlength=K)
    if np.any(nk == 0):
        raise ValueError("every block label must appear at least once")
    E = block_edge_counts(A, g.labels, K)
    P = pair_counts(nk)
    empty = P == 0
    B_hat = np.where(empty, 0.0, E / np.where(empty, 1, P))
    return SBMEstimate(B_hat, nk / g.n, P, empty)


def loo_estimates(A, labels, K, degrees=None):
    """Per-vertex (B_hat, pi_hat, pairs, n_k) with that vertex and its incident
    potential edges removed.

    Returns arrays of shape (n, K, K), (n, K), (n, K, K) and (n, K).
    """
    A = np.asarray(A, dtype=np.int64)
    labels = np.asarray(labels)
    n = len(labels)
    onehot = np.eye(K, dtype=np.int64)[labels]
    if degrees is None:
        degrees = A @ onehot
    E = block_edge_counts(A, labels, K)
    E_loo = np.broadcast_to(E, (n, K, K)).copy()
    rows = np.arange(n)
    # remove v's edges from row/column y_v; the diagonal entry loses d_{y_v}(v) once
    E_loo[rows, labels, :] -= degrees
    E_loo[rows, :, labels] -= degrees
    E_loo[rows, labels, labels] += degrees[rows, labels]
    nk = np.bincount(labels, minlength=K)
    nk_loo = nk[None, :] - onehot
    P = nk_loo[:, :, None] * nk_loo[:, None, :]
    diag = nk_loo * (nk_loo - 1) // 2
    P[:, np.arange(K), np.arange(K)] = diag
    B_hat = np.where(P > 0, E_loo / np.maximum(P, 1), 0.0)
    pi_hat = nk_loo / max(n - 1, 1)
    return B_hat, pi_hat, P, nk_loo
