"""Monte Carlo harnesses: held-out vertex error under the errorful SBM and
leave-one-out error on a fixed graph observed through a noisy channel.

Trials are grouped in fixed-size chunks; chunk ``c`` draws from the stream
``(seed, c)`` so the result does not depend on the number of workers.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .._rng import config_digest, derive_seed, stream
from ..model import Design, FeatureModel, errorful_block_matrix, mcar_block_matrix, channel_rates
from .classifiers import (
    batch_argmax_uniform,
    gamma_winners,
    mcar_lr_scores,
    plugin_scores,
    zero_one_floor,
)
from .estimate import loo_estimates
from .graphs import IMPUTED_ZERO, MCAR, LabeledGraph, observe_binary_channel, observe_errorful

__all__ = [
    "RunReport",
    "BinaryChannel",
    "FeatureChannel",
    "CLASSIFIERS",
    "monte_carlo_vertex_error",
    "paired_vertex_error",
    "loo_error",
    "chance_error",
    "celegans_experiment",
    "accuracy_curve",
]

CLASSIFIERS = ("gamma", "plugin", "mcar_lr", "feature_bayes")
CHUNK = 4096


@dataclass(frozen=True)
class RunReport:
    """Outcome of a Monte Carlo run.

    For per-trial Bernoulli outcomes ``std_error = sqrt(p (1 - p) / trials)``;
    leave-one-out runs report the standard error of the per-trial rates.
    """

    trials: int
    error_rate: float
    std_error: float
    seed: int
    config_digest: str
    errors: int = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @property
    def ci95(self):
        return (self.error_rate - 1.96 * self.std_error, self.error_rate + 1.96 * self.std_error)


@dataclass(frozen=True)
class BinaryChannel:
    """Assess w.p. ``assess``; an assessed pair is reported correctly w.p. ``accuracy``
    (``nonedge_accuracy`` for true non-edges when set)."""

    assess: float
    accuracy: float
    mode: str = IMPUTED_ZERO
    nonedge_accuracy: float = None

    def observe(self, g, rng):
        return observe_binary_channel(g, self.assess, self.accuracy, rng, self.mode, self.nonedge_accuracy)

    def describe(self):
        d = {"kind": "binary", "assess": self.assess, "accuracy": self.accuracy, "mode": self.mode}
        if self.nonedge_accuracy is not None:
            d["nonedge_accuracy"] = self.nonedge_accuracy
        return d


@dataclass(frozen=True, eq=False)
class FeatureChannel:
    fm: FeatureModel
    design: Design
    mode: str = IMPUTED_ZERO

    def observe(self, g, rng):
        return observe_errorful(g, self.fm, self.design, self.mode, rng)

    def describe(self):
        return {"kind": "feature", "family": self.fm.name, "params": self.fm.params,
                "kappa": self.design.kappa, "tau": self.design.tau, "mode": self.mode}


def _bernoulli_report(errors, trials, seed, digest, extra):
    p = errors / trials
    return RunReport(trials, p, math.sqrt(p * (1.0 - p) / trials), int(seed), digest, int(errors), extra)


def _equal_split(n, K):
    if (n - 1) % K:
        raise ValueError("n - 1 not divisible by K; pass n_vec")
    return np.full(K, (n - 1) // K, dtype=np.int64)


def _vertex_chunk(rng, size, bm, fm, design, classifiers, n_vec, mode):
    """Simulate ``size`` held-out vertices; returns {classifier: error count}.

    Only the n - 1 potential edges incident to the held-out vertex influence
    these classifiers, and edges are independent given labels, so just that
    row of the graph is sampled.
    """
    K = bm.K
    cols = np.repeat(np.arange(K), n_vec)
    y = rng.choice(K, size=size, p=bm.pi)
    p_edge = bm.B[y[:, None], cols[None, :]]
    truth = rng.random(p_edge.shape) < p_edge
    u_assess = rng.random(truth.shape)
    u_feature = rng.random(truth.shape)
    u_tie = rng.random(size)
    h = fm.h(design.kappa)
    F1 = fm.cdf(1, design.kappa, design.tau)
    F0 = fm.cdf(0, design.kappa, design.tau)
    assessed = u_assess < h
    edge = assessed & (u_feature > np.where(truth, F1, F0))
    onehot = np.eye(K, dtype=np.int64)[cols]
    d = edge.astype(np.int64) @ onehot
    o = assessed.astype(np.int64) @ onehot
    rates = channel_rates(fm, design)
    out = {}
    for name in classifiers:
        if name == "gamma":
            den = o if mode == MCAR else n_vec
            winners = gamma_winners(d, den)
        elif name == "plugin":
            Bt = errorful_block_matrix(bm, rates)
            s = plugin_scores(d, n_vec, Bt, bm.pi)
            winners = s == s.max(axis=-1, keepdims=True)
        elif name == "mcar_lr":
            Bt = mcar_block_matrix(bm, rates)
            s = mcar_lr_scores(d, o, Bt)
            winners = s == s.max(axis=-1, keepdims=True)
        elif name == "feature_bayes":
            s = _feature_bayes_batch(bm, fm, design.kappa, truth, assessed, u_feature, cols)
            winners = s == s.max(axis=-1, keepdims=True)
        else:
            raise ValueError(f"unknown classifier {name!r}; choose from {CLASSIFIERS}")
        pred = batch_argmax_uniform(winners, u_tie)
        out[name] = int(np.sum(pred != y))
    return out


def _feature_bayes_batch(bm, fm, kappa, truth, assessed, u_feature, cols):
    x = np.full(truth.shape, 0.5)
    for cls in (0, 1):
        sel = assessed & (truth == bool(cls))
        if np.any(sel):
            x[sel] = fm.ppf(cls, kappa, u_feature[sel])
    x = np.clip(x, 1e-15, 1.0 - 1e-15)
    f1 = np.asarray(fm.pdf(1, kappa, x))
    f0 = np.asarray(fm.pdf(0, kappa, x))
    K = bm.K
    scores = np.empty((truth.shape[0], K))
    with np.errstate(divide="ignore"):
        logpi = np.log(bm.pi)
        for c in range(K):
            Brow = bm.B[c, cols][None, :]
            ll = np.log(Brow * f1 + (1.0 - Brow) * f0)
            scores[:, c] = logpi[c] + np.where(assessed, ll, 0.0).sum(axis=1)
    return scores


def paired_vertex_error(bm, fm, design, classifiers, trials, seed=0, n_vec=None,
                        mode=IMPUTED_ZERO, workers=1):
    """Error reports for several classifiers evaluated on the same simulated draws."""
    classifiers = list(classifiers)
    n_vec = _equal_split(bm.n, bm.K) if n_vec is None else np.asarray(n_vec, dtype=np.int64)
    if n_vec.sum() != bm.n - 1:
        raise ValueError("n_vec must sum to n - 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    chunks = [(c, min(CHUNK, trials - c * CHUNK)) for c in range(math.ceil(trials / CHUNK))]

    def work(item):
        c, size = item
        return _vertex_chunk(stream(seed, c), size, bm, fm, design, classifiers, n_vec, mode)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(ch) for ch in chunks]
    cfg = {"model": bm.to_dict(), "family": fm.name, "params": fm.params,
           "kappa": design.kappa, "tau": design.tau, "n_vec": n_vec.tolist(), "mode": mode,
           "trials": trials}
    reports = {}
    for name in classifiers:
        errors = sum(p[name] for p in parts)
        extra = {"classifier": name, "kappa": design.kappa, "tau": design.tau, "mode": mode}
        reports[name] = _bernoulli_report(errors, trials, seed, config_digest({**cfg, "classifier": name}), extra)
    return reports


def monte_carlo_vertex_error(bm, fm, design, classifier="gamma", trials=10**5, seed=0,
                             n_vec=None, mode=IMPUTED_ZERO, workers=1):
    """Held-out vertex misclassification rate under the errorful SBM.

    Labeled block counts are fixed at ``n_vec`` (equal split by default) and
    the held-out label is drawn from ``pi``.
    """
    return paired_vertex_error(bm, fm, design, [classifier], trials, seed, n_vec, mode, workers)[classifier]


def chance_error(labels, K=None):
    """1 - max_k pi_hat_k: the error of always guessing the largest block."""
    labels = np.asarray(labels)
    counts = np.bincount(labels, minlength=K or 0)
    return 1.0 - counts.max() / counts.sum()


def _loo_trial(g, channel, classifier, estimate, rng, clean=None):
    obs = channel.observe(g, rng)
    A = obs.edges.astype(np.int64)
    K = g.K
    labels = g.labels
    onehot = np.eye(K, dtype=np.int64)[labels]
    deg = A @ onehot
    if estimate == "clean":
        B_hat, pi_hat, P, nk = clean
    else:
        B_hat, pi_hat, P, nk = loo_estimates(A, labels, K, deg)
    if classifier == "plugin":
        s = plugin_scores(deg, nk, zero_one_floor(B_hat, P), pi_hat)
        winners = s == s.max(axis=-1, keepdims=True)
    elif classifier == "gamma":
        winners = gamma_winners(deg, nk)
    else:
        raise ValueError("leave-one-out supports the plugin and gamma classifiers")
    pred = batch_argmax_uniform(winners, rng.random(len(labels)))
    return float(np.mean(pred != labels))


def loo_error(g, channel, classifier="plugin", trials=1000, seed=0, estimate="per_sample",
              workers=1):
    """Mean leave-one-out error of ``g`` observed through ``channel``.

    Each trial draws one observation; every vertex in turn has its label
    held out, block parameters are re-estimated without it (from the
    observation, or from the clean graph with ``estimate="clean"``) and it is
    classified. Trial ``t`` uses the stream ``(seed, t)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if estimate not in ("per_sample", "clean"):
        raise ValueError("estimate must be 'per_sample' or 'clean'")
    clean = None
    if estimate == "clean":
        clean = loo_estimates(g.adjacency, g.labels, g.K)

    def work(t):
        return _loo_trial(g, channel, classifier, estimate, stream(seed, t), clean)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rates = np.array(list(pool.map(work, range(trials))))
    else:
        rates = np.array([work(t) for t in range(trials)])
    mean = float(rates.mean())
    se = float(rates.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    cfg = {"n": g.n, "edges": g.n_edges, "channel": channel.describe(), "classifier": classifier,
           "estimate": estimate, "trials": trials}
    extra = {"classifier": classifier, "estimate": estimate, "channel": channel.describe()}
    return RunReport(trials, mean, se, int(seed), config_digest(cfg), None, extra)


def accuracy_curve(x, q):
    """Classification accuracy y = 1 - 0.2 x^q along a fixed-cost profile."""
    return 1.0 - 0.2 * np.asarray(x, dtype=float) ** q


def celegans_experiment(g, assess_grid, accuracy_grid, q_list=(3, 5, 9), trials=1000, seed=0,
                        curve_grid=None, estimate="per_sample", workers=1, progress=None):
    """Leave-one-out error over an (assessment, accuracy) grid and along the
    curves y = 1 - 0.2 x^q.

    Returns a list of row dicts with keys ``x, y, q, mean_error, se, ci_lo,
    ci_hi, trials, seed``; grid rows have ``q = None``.
    """
    rows = []
    cell = 0

    def run(x, y, q):
        nonlocal cell
        s = derive_seed(seed, cell)
        cell += 1
        rep = loo_error(g, BinaryChannel(float(x), float(y)), "plugin", trials, s, estimate, workers)
        lo, hi = rep.ci95
        rows.append({"x": float(x), "y": float(y), "q": q, "mean_error": rep.error_rate,
                     "se": rep.std_error, "ci_lo": lo, "ci_hi": hi, "trials": trials, "seed": s})
        if progress:
            progress(rows[-1])

    for x in assess_grid:
        for y in accuracy_grid:
            run(x, y, None)
    curve_grid = assess_grid if curve_grid is None else curve_grid
    for q in q_list:
        for x in curve_grid:
            run(x, float(accuracy_curve(x, q)), int(q))
    return rows
