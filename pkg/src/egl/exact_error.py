"""Vertex-misclassification probability of the normalized-degree classifier.

The classifier assigns the held-out vertex to ``argmax_k d_k / n_k``. Given
the labeled block counts and the true class ``k``, the block degrees are
independent ``Bin(n_k', Btilde[k, k'])`` variables, so the error can be
computed by enumerating their joint outcomes.
"""

import enum
import math

import numpy as np

from .special import binom_pmf, log_gamma, probability, std_normal_cdf

__all__ = [
    "TieRule",
    "EnumerationBudgetError",
    "DEFAULT_BUDGET",
    "conditional_error",
    "conditional_error_mc",
    "full_error",
    "compositions",
    "balanced_two_block_error",
    "normal_approx_error",
    "normal_snr",
]

DEFAULT_BUDGET = 10**7
_CHUNK = 1 << 20


class TieRule(enum.Enum):
    # uniform choice among the argmax set; the fair coin when K = 2
    UNIFORM_AMONG_ARGMAX = "uniform"


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration would exceed the outcome budget."""


def _check_inputs(n_vec, Bt, pi):
    n_vec = np.asarray(n_vec, dtype=np.int64)
    Bt = np.asarray(probability(Bt), dtype=float)
    pi = np.asarray(pi, dtype=float)
    K = len(n_vec)
    if Bt.shape != (K, K) or pi.shape != (K,):
        raise ValueError("shape mismatch between counts, Btilde and pi")
    if np.any(n_vec < 0):
        raise ValueError("block counts must be nonnegative")
    return n_vec, Bt, pi


def _tie_error_weights(digits, n_vec, k):
    """Misclassification probability for each joint outcome, true class ``k``.

    Scores d_j / n_j are compared by cross-multiplication; an empty block
    scores 0/1.
    """
    dens = np.where(n_vec > 0, n_vec, 1)
    best_num = digits[0].copy()
    best_den = np.full_like(best_num, dens[0])
    for j in range(1, len(n_vec)):
        better = digits[j] * best_den > best_num * dens[j]
        best_num = np.where(better, digits[j], best_num)
        best_den = np.where(better, dens[j], best_den)
    m = np.zeros_like(best_num)
    for j in range(len(n_vec)):
        m += digits[j] * best_den == best_num * dens[j]
    in_set = digits[k] * best_den == best_num * dens[k]
    return np.where(in_set, (m - 1) / m, 1.0)


def conditional_error(n_vec, Bt, pi, tie=TieRule.UNIFORM_AMONG_ARGMAX, budget=DEFAULT_BUDGET):
    """Exact misclassification probability given labeled block counts ``n_vec``.

    Sum over true classes k of ``pi_k * (P[strict loss] + T_k)``, with ties
    broken uniformly at random among the maximizers.

    Raises
    ------
    EnumerationBudgetError
        If ``prod(n_k + 1)`` exceeds ``budget``; use
        :func:`conditional_error_mc` instead.
    """
    tie = TieRule(tie)
    n_vec, Bt, pi = _check_inputs(n_vec, Bt, pi)
    K = len(n_vec)
    if K == 1:
        return 0.0
    shape = tuple(int(v) + 1 for v in n_vec)
    total = math.prod(shape)
    if total > budget:
        raise EnumerationBudgetError(
            f"{total} joint outcomes exceeds budget {budget}; use conditional_error_mc"
        )
    err = 0.0
    for k in range(K):
        if pi[k] == 0:
            continue
        pmfs = [np.atleast_1d(binom_pmf(np.arange(s), s - 1, Bt[k, j])) for j, s in enumerate(shape)]
        acc = 0.0
        for start in range(0, total, _CHUNK):
            flat = np.arange(start, min(total, start + _CHUNK))
            digits = np.unravel_index(flat, shape)
            prob = np.ones(len(flat))
            for j in range(K):
                prob *= pmfs[j][digits[j]]
            digits = [d.astype(np.int64) for d in digits]
            acc += float(np.dot(prob, _tie_error_weights(digits, n_vec, k)))
        err += pi[k] * acc
    return probability(err)


def conditional_error_mc(n_vec, Bt, pi, draws=10**6, seed=0):
    """Monte Carlo estimate of :func:`conditional_error`; returns ``(estimate, std_error)``.

    The estimator averages the exact tie-weighted loss of each sampled
    outcome, so its standard error is the sample standard deviation of those
    losses over ``sqrt(draws)``.
    """
    n_vec, Bt, pi = _check_inputs(n_vec, Bt, pi)
    rng = np.random.default_rng(seed)
    K = len(n_vec)
    if K == 1:
        return 0.0, 0.0
    ys = rng.choice(K, size=draws, p=pi)
    digits = [rng.binomial(n_vec[j], Bt[ys, j]).astype(np.int64) for j in range(K)]
    loss = np.empty(draws)
    for k in range(K):
        sel = ys == k
        if np.any(sel):
            loss[sel] = _tie_error_weights([d[sel] for d in digits], n_vec, k)
    return float(loss.mean()), float(loss.std(ddof=1) / math.sqrt(draws))


def compositions(total, parts):
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _log_multinomial_weight(counts, pi):
    counts = np.asarray(counts, dtype=float)
    lw = float(log_gamma(counts.sum() + 1.0)) - float(np.sum(log_gamma(counts + 1.0)))
    for c, p in zip(counts, pi):
        if c > 0:
            if p == 0:
                return -math.inf
            lw += c * math.log(p)
    return lw


def full_error(n, Bt, pi, tie=TieRule.UNIFORM_AMONG_ARGMAX, budget=DEFAULT_BUDGET):
    """Unconditional misclassification probability for a graph of ``n`` vertices.

    Averages :func:`conditional_error` over the multinomial distribution of
    the ``n - 1`` labeled vertices across blocks.
    """
    Bt = np.asarray(Bt, dtype=float)
    pi = np.asarray(pi, dtype=float)
    K = len(pi)
    if K == 1:
        return 0.0
    comps = list(compositions(int(n) - 1, K))
    cost = sum(math.prod(c + 1 for c in comp) for comp in comps)
    if cost > budget:
        raise EnumerationBudgetError(
            f"{len(comps)} compositions with {cost} total outcomes exceeds budget {budget}"
        )
    total = 0.0
    for comp in comps:
        lw = _log_multinomial_weight(comp, pi)
        if lw == -math.inf:
            continue
        total += math.exp(lw) * conditional_error(comp, Bt, pi, tie, budget)
    return probability(total)


def balanced_two_block_error(n1, b11, b12):
    """Error for two equal blocks of ``n1`` labeled vertices, equal priors, B11 = B22.

    ``sum_{i>=1} f(i; n1, b12) F(i-1; n1, b11) + 1/2 sum_{i>=0} f(i; n1, b12) f(i; n1, b11)``.
    ``b11`` and ``b12`` may be arrays of equal shape.
    """
    n1 = int(n1)
    if n1 < 1:
        raise ValueError("n1 must be >= 1")
    b11 = np.asarray(probability(b11), dtype=float)
    b12 = np.asarray(probability(b12), dtype=float)
    b11, b12 = np.broadcast_arrays(b11, b12)
    i = np.arange(n1 + 1)
    f11 = np.asarray(binom_pmf(i, n1, b11[..., None]))
    f12 = np.asarray(binom_pmf(i, n1, b12[..., None]))
    F11 = np.cumsum(f11, axis=-1)
    strict = np.sum(f12[..., 1:] * F11[..., :-1], axis=-1)
    ties = 0.5 * np.sum(f12 * f11, axis=-1)
    out = np.clip(strict + ties, 0.0, 1.0)
    # identical binomials: exactly a coin flip by symmetry
    out = np.where(b11 == b12, 0.5, out)
    return float(out) if out.ndim == 0 else out


def normal_snr(n, b11, b12):
    """(mu, sigma) of D1 - D2 under the normal approximation, ``n/2`` vertices per block."""
    b11 = np.asarray(b11, dtype=float)
    b12 = np.asarray(b12, dtype=float)
    mu = 0.5 * n * (b11 - b12)
    sigma = np.sqrt(0.5 * n * (b12 * (1.0 - b12) + b11 * (1.0 - b11)))
    return mu, sigma


def normal_approx_error(n, b11, b12):
    """Large-sample approximation Phi(-mu / sigma) of the balanced two-block error.

    When sigma = 0 the limit is used: 0 for mu > 0, 1/2 for mu = 0, 1 for mu < 0.
    """
    mu, sigma = normal_snr(n, b11, b12)
    mu, sigma = np.broadcast_arrays(mu, sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, -mu / np.where(sigma > 0, sigma, 1.0), 0.0)
    out = np.asarray(std_normal_cdf(z), dtype=float)
    degenerate = sigma == 0
    out = np.where(degenerate, np.where(mu > 0, 0.0, np.where(mu < 0, 1.0, 0.5)), out)
    return float(out) if out.ndim == 0 else out
