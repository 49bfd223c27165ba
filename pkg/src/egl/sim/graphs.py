"""Labeled graphs, SBM sampling and the two errorful observation channels."""

from dataclasses import dataclass

import numpy as np

from .._rng import as_generator
from ..model import FeatureModel

__all__ = [
    "NON_EDGE",
    "EDGE",
    "MISSING",
    "IMPUTED_ZERO",
    "MCAR",
    "LabeledGraph",
    "ObservedGraph",
    "sample_sbm",
    "observe_errorful",
    "observe_binary_channel",
    "channel_draw",
]

NON_EDGE = 0
EDGE = 1
MISSING = -1

IMPUTED_ZERO = "imputed_zero"
MCAR = "mcar"
_MODES = (IMPUTED_ZERO, MCAR)


def _check_labels(labels, n, K):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise ValueError("labels must have one entry per vertex")
    if n and (labels.min() < 0 or (K is not None and labels.max() >= K)):
        raise ValueError("labels out of range")
    return labels


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Simple undirected graph with a block label per vertex (labels 0..K-1)."""

    adjacency: np.ndarray
    labels: np.ndarray
    K: int = None
    vertex_ids: tuple = None
    label_names: tuple = None

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=np.uint8)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(A > 1) or np.any(A != A.T) or np.any(np.diag(A)):
            raise ValueError("adjacency must be binary, symmetric and hollow")
        K = self.K
        labels = np.asarray(self.labels, dtype=np.int64)
        if K is None:
            K = int(labels.max()) + 1 if labels.size else 1
        labels = _check_labels(labels, A.shape[0], K)
        A.setflags(write=False)
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "K", int(K))

    @property
    def n(self):
        return self.adjacency.shape[0]

    @property
    def n_edges(self):
        return int(np.triu(self.adjacency, 1).sum())

    @property
    def density(self):
        n = self.n
        return self.n_edges / (n * (n - 1) / 2) if n > 1 else 0.0


@dataclass(frozen=True, eq=False)
class ObservedGraph:
    """Errorful observation: each potential edge is EDGE, NON_EDGE or MISSING.

    MISSING only occurs in ``mcar`` mode; ``imputed_zero`` maps unassessed
    pairs to NON_EDGE.
    """

    status: np.ndarray
    labels: np.ndarray
    mode: str = IMPUTED_ZERO
    K: int = None

    def __post_init__(self):
        S = np.asarray(self.status, dtype=np.int8)
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if S.ndim != 2 or S.shape[0] != S.shape[1] or np.any(S != S.T):
            raise ValueError("status must be a symmetric square matrix")
        if np.any(np.diag(S) != NON_EDGE):
            raise ValueError("diagonal must be NON_EDGE")
        if not np.all(np.isin(S, (NON_EDGE, EDGE, MISSING))):
            raise ValueError("unknown status code")
        if self.mode == IMPUTED_ZERO and np.any(S == MISSING):
            raise ValueError("MISSING entries are only allowed in mcar mode")
        labels = np.asarray(self.labels, dtype=np.int64)
        K = self.K if self.K is not None else (int(labels.max()) + 1 if labels.size else 1)
        labels = _check_labels(labels, S.shape[0], K)
        S.setflags(write=False)
        object.__setattr__(self, "status", S)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "K", int(K))

    @property
    def n(self):
        return self.status.shape[0]

    @property
    def edges(self):
        """0/1 adjacency of observed edges."""
        return (self.status == EDGE).astype(np.uint8)

    @property
    def assessed(self):
        a = self.status != MISSING
        np.fill_diagonal(a, False)
        return a

    def imputed(self):
        """The same observation with MISSING mapped to NON_EDGE."""
        S = np.where(self.status == MISSING, NON_EDGE, self.status)
        return ObservedGraph(S, self.labels, IMPUTED_ZERO, self.K)

    def as_labeled_graph(self):
        return LabeledGraph(self.edges, self.labels, self.K)


def _symmetric_from_upper(n, iu, values, dtype, diag=0):
    M = np.full((n, n), diag, dtype=dtype)
    M[iu] = values
    M.T[iu] = values
    return M


def sample_sbm(bm, seed=None, counts=None):
    """Draw a labeled graph from SBM([n], B, pi).

    Labels are iid from ``pi`` unless ``counts`` fixes the exact number of
    vertices per block (vertices of block 0 first, then block 1, ...).
    """
    rng = as_generator(seed)
    n, K = bm.n, bm.K
    if counts is None:
        labels = rng.choice(K, size=n, p=bm.pi)
    else:
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (K,) or np.any(counts < 0) or counts.sum() != n:
            raise ValueError("counts must be K nonnegative integers summing to n")
        labels = np.repeat(np.arange(K), counts)
    iu = np.triu_indices(n, 1)
    p = bm.B[labels[iu[0]], labels[iu[1]]]
    edges = (rng.random(p.shape) < p).astype(np.uint8)
    return LabeledGraph(_symmetric_from_upper(n, iu, edges, np.uint8), labels, K)


def channel_draw(truth, assess, F1, F0, u_assess, u_feature):
    """Classify potential edges from uniforms.

    A pair is assessed when ``u_assess < assess``. Its feature is the
    ``u_feature`` quantile of F_1 (true edge) or F_0, so thresholding the
    feature at tau fires iff ``u_feature > F(tau)``. ``F1``/``F0`` are the
    class cdfs at tau. Returns boolean arrays (classified_edge, assessed).
    """
    truth = np.asarray(truth, dtype=bool)
    assessed = u_assess < assess
    fired = u_feature > np.where(truth, F1, F0)
    return assessed & fired, assessed


def _finish(g, edge_up, assessed_up, mode, iu):
    status_up = np.where(edge_up, EDGE, NON_EDGE).astype(np.int8)
    if mode == MCAR:
        status_up = np.where(assessed_up, status_up, MISSING).astype(np.int8)
    S = _symmetric_from_upper(g.n, iu, status_up, np.int8, NON_EDGE)
    return ObservedGraph(S, g.labels, mode, g.K)


def observe_errorful(g, fm, design, mode=IMPUTED_ZERO, seed=None, return_features=False):
    """Assess, featurize and threshold every potential edge of ``g``.

    Each pair is assessed with probability h(kappa); an assessed pair gets a
    feature drawn from F_{Y(uv), kappa} by inverse-cdf sampling and is
    called an edge iff the feature exceeds tau. With ``return_features`` a
    symmetric matrix of features (nan where unassessed) is also returned.
    """
    if not isinstance(fm, FeatureModel):
        raise TypeError("fm must be a FeatureModel")
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    rng = as_generator(seed)
    iu = np.triu_indices(g.n, 1)
    truth = g.adjacency[iu].astype(bool)
    u_assess = rng.random(truth.shape)
    u_feature = rng.random(truth.shape)
    edge, assessed = channel_draw(truth, fm.h(design.kappa), fm.cdf(1, design.kappa, design.tau),
                                  fm.cdf(0, design.kappa, design.tau), u_assess, u_feature)
    obs = _finish(g, edge, assessed, mode, iu)
    if not return_features:
        return obs
    x = np.full(truth.shape, np.nan)
    for cls in (0, 1):
        sel = assessed & (truth == bool(cls))
        if np.any(sel):
            x[sel] = fm.ppf(cls, design.kappa, u_feature[sel])
    return obs, _symmetric_from_upper(g.n, iu, x, float, np.nan)


def observe_binary_channel(g, assess, accuracy, seed=None, mode=IMPUTED_ZERO, nonedge_accuracy=None):
    """Assess each pair with probability ``assess``; report the truth with
    probability ``accuracy`` and its flip otherwise. Unassessed pairs become
    NON_EDGE (or MISSING in mcar mode).

    ``nonedge_accuracy`` gives true non-edges their own accuracy; by default
    both kinds of pair share ``accuracy``.
    """
    rng = as_generator(seed)
    iu = np.triu_indices(g.n, 1)
    truth = g.adjacency[iu].astype(bool)
    assessed = rng.random(truth.shape) < assess
    acc = accuracy if nonedge_accuracy is None else np.where(truth, accuracy, nonedge_accuracy)
    correct = rng.random(truth.shape) < acc
    reported = np.where(correct, truth, ~truth)
    return _finish(g, assessed & reported, assessed, mode, iu)
