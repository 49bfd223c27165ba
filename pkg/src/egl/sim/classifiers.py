"""Vertex classifiers for a held-out vertex ``v`` of an observed graph.

Each classifier has a scalar entry point taking an :class:`ObservedGraph`
and a batched score function used by the Monte Carlo harnesses. Ties are
always broken uniformly at random among the maximizers.
"""

import numpy as np

from .._rng import as_generator
from ..special import DomainError, binom_logpmf
from .graphs import EDGE, MCAR, MISSING

__all__ = [
    "block_degrees",
    "argmax_uniform",
    "batch_argmax_uniform",
    "gamma_winners",
    "plugin_scores",
    "mcar_lr_scores",
    "feature_bayes_scores",
    "classify_gamma",
    "classify_plugin",
    "classify_feature_bayes",
    "classify_mcar_lr",
    "zero_one_floor",
]


def block_degrees(og, v):
    """(d, n, o) per block for vertex ``v``: observed edges, labeled vertices,
    assessed potential edges; ``v`` itself is excluded."""
    others = np.arange(og.n) != v
    lab = og.labels[others]
    row = og.status[v, others]
    K = og.K
    d = np.bincount(lab, weights=(row == EDGE), minlength=K).astype(np.int64)
    nk = np.bincount(lab, minlength=K).astype(np.int64)
    o = np.bincount(lab, weights=(row != MISSING), minlength=K).astype(np.int64)
    return d, nk, o


def argmax_uniform(scores, rng=None):
    """Index of a maximizer of ``scores`` chosen uniformly among exact ties."""
    scores = np.asarray(scores)
    winners = np.flatnonzero(scores == scores.max())
    if len(winners) == 1:
        return int(winners[0])
    return int(as_generator(rng).choice(winners))


def batch_argmax_uniform(winners, u):
    """Row-wise uniform pick among True entries of ``winners`` using uniforms ``u``."""
    winners = np.asarray(winners, dtype=bool)
    m = winners.sum(axis=-1)
    pick = np.minimum((np.asarray(u) * m).astype(np.int64), m - 1)
    rank = np.cumsum(winners, axis=-1) - 1
    return np.argmax(winners & (rank == pick[..., None]), axis=-1)


def gamma_winners(d, den):
    """Boolean mask of argmax_k d_k / den_k over the last axis, compared exactly.

    ``den_k == 0`` scores 0 (the 0/0 = 0 convention).
    """
    d = np.asarray(d, dtype=np.int64)
    den = np.broadcast_to(np.asarray(den, dtype=np.int64), d.shape)
    d = np.where(den > 0, d, 0)
    den = np.where(den > 0, den, 1)
    best_num = d[..., 0]
    best_den = den[..., 0]
    for k in range(1, d.shape[-1]):
        better = d[..., k] * best_den > best_num * den[..., k]
        best_num = np.where(better, d[..., k], best_num)
        best_den = np.where(better, den[..., k], best_den)
    return d * best_den[..., None] == best_num[..., None] * den


def zero_one_floor(Bhat, pairs):
    """Replace entries that are exactly 0 or 1 by 1/(2 max(1, pairs)) from the boundary."""
    Bhat = np.asarray(Bhat, dtype=float)
    floor = 1.0 / (2.0 * np.maximum(1.0, np.asarray(pairs, dtype=float)))
    return np.where(Bhat == 0.0, floor, np.where(Bhat == 1.0, 1.0 - floor, Bhat))


def plugin_scores(d, nk, Bhat, pihat):
    """log pi_c + sum_k' log Bin(d_k'; n_k', Bhat[c, k']) for every class c.

    Shapes broadcast: ``d``/``nk`` (..., K), ``Bhat`` (..., K, K), ``pihat``
    (..., K). ``Bhat`` must already be free of exact zeros and ones.
    """
    d = np.asarray(d)[..., None, :]
    nk = np.asarray(nk)[..., None, :]
    ll = np.asarray(binom_logpmf(d, nk, Bhat)).sum(axis=-1)
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(pihat, dtype=float)) + ll


def mcar_lr_scores(m, o, Bt):
    """sum_k m_k log Bt[c,k] + (o_k - m_k) log(1 - Bt[c,k]) for every class c."""
    m = np.asarray(m, dtype=float)[..., None, :]
    o = np.asarray(o, dtype=float)[..., None, :]
    Bt = np.asarray(Bt, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(m > 0, m * np.log(Bt), 0.0)
        b = np.where(o - m > 0, (o - m) * np.log1p(-Bt), 0.0)
    return (a + b).sum(axis=-1)


def feature_bayes_scores(features, B, pi, fm, kappa):
    """log pi_y + sum over observed features of log(B_yk f1(x) + (1 - B_yk) f0(x)).

    ``features`` is a list with one 1-d array per block.
    """
    B = np.asarray(B, dtype=float)
    K = B.shape[0]
    with np.errstate(divide="ignore"):
        scores = np.log(np.asarray(pi, dtype=float)).copy()
    for k, xs in enumerate(features):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        if xs.size == 0:
            continue
        try:
            f1 = np.atleast_1d(fm.pdf(1, kappa, xs))
            f0 = np.atleast_1d(fm.pdf(0, kappa, xs))
        except DomainError:
            for i, x in enumerate(xs):
                try:
                    fm.pdf(1, kappa, x), fm.pdf(0, kappa, x)
                except DomainError as exc:
                    raise DomainError(f"block {k}, feature {i} (x={x}): {exc}") from exc
            raise
        for y in range(K):
            with np.errstate(divide="ignore"):
                scores[y] += np.log(B[y, k] * f1 + (1.0 - B[y, k]) * f0).sum()
    return scores


def classify_gamma(og, v, tie_seed=None):
    """argmax_k d_k / n_k; in mcar mode the denominator is the number of
    assessed potential edges to block k."""
    d, nk, o = block_degrees(og, v)
    den = o if og.mode == MCAR else nk
    return argmax_uniform(gamma_winners(d, den).astype(int), tie_seed)


def _loo_pairs(nk):
    nk = np.asarray(nk, dtype=float)
    pairs = np.outer(nk, nk)
    np.fill_diagonal(pairs, nk * (nk - 1) / 2)
    return pairs


def classify_plugin(og, v, Bhat, pihat, tie_seed=None, pairs=None):
    """Bayes plug-in classifier with estimated block parameters.

    Exact 0/1 entries of ``Bhat`` are pulled in by 1/(2 max(1, pairs)),
    ``pairs`` defaulting to the potential-pair counts among the other vertices.
    """
    d, nk, _ = block_degrees(og, v)
    if pairs is None:
        pairs = _loo_pairs(nk)
    Bc = zero_one_floor(Bhat, pairs)
    return argmax_uniform(plugin_scores(d, nk, Bc, pihat), tie_seed)


def classify_feature_bayes(features, bm, fm, kappa, tie_seed=None):
    """Bayes-optimal classifier working on raw edge features (one array per block)."""
    return argmax_uniform(feature_bayes_scores(features, bm.B, bm.pi, fm, kappa), tie_seed)


def classify_mcar_lr(og, v, Bt_mcar, tie_seed=None):
    """Likelihood-ratio classifier using observed edges m_k out of o_k assessed pairs."""
    if og.mode != MCAR:
        raise ValueError("classify_mcar_lr needs an mcar-mode observation")
    d, _, o = block_degrees(og, v)
    return argmax_uniform(mcar_lr_scores(d, o, Bt_mcar), tie_seed)
