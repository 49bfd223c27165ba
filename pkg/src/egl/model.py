"""Stochastic blockmodel, quality-indexed edge features and the errorful channel.

An errorfully observed SBM keeps the block structure of the true graph but
replaces ``B`` with the effective connectivity ``Btilde`` induced by
assessing each potential edge with probability ``h(kappa)`` and thresholding
its feature at ``tau``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .special import PROB_EPS, DomainError, beta_pdf, probability, reg_inc_beta

__all__ = [
    "BlockModel",
    "FeatureModel",
    "Design",
    "ChannelRates",
    "beta_feature_model",
    "demo_block_model",
    "feature_cdf",
    "channel_rates",
    "rates_along_tau",
    "errorful_block_matrix",
    "mcar_block_matrix",
    "expected_density",
    "is_affinity",
]


def _frozen_array(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BlockModel:
    """SBM([n], B, pi)."""

    n: int
    B: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        pi = np.atleast_1d(np.asarray(self.pi, dtype=float))
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("n must be an integer >= 2")
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] < 1:
            raise ValueError("B must be a square K x K matrix")
        if not np.allclose(B, B.T, rtol=0, atol=0):
            raise ValueError("B must be symmetric")
        B = probability(B)
        if pi.shape != (B.shape[0],):
            raise ValueError("pi must have length K")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > PROB_EPS:
            raise ValueError("pi must lie on the unit simplex")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "B", _frozen_array(B))
        object.__setattr__(self, "pi", _frozen_array(pi))

    @property
    def K(self):
        return self.B.shape[0]

    def to_dict(self):
        return {"n": self.n, "B": self.B.tolist(), "pi": self.pi.tolist()}


def demo_block_model(n=51, b_in=0.9, b_out=0.1):
    """The balanced two-block affinity model used in the demonstrations."""
    return BlockModel(n, [[b_in, b_out], [b_out, b_in]], [0.5, 0.5])


def cubic_penalty(base=2.0, power=3.0):
    def h(kappa):
        return np.minimum(1.0, (base / np.asarray(kappa, dtype=float)) ** power)
    return h


@dataclass(frozen=True, eq=False)
class FeatureModel:
    """Class-conditional edge-feature families indexed by quality ``kappa``.

    ``cdf0``/``cdf1`` and ``pdf0``/``pdf1`` take ``(kappa, x)`` and describe
    non-edge and edge features on ``[0, 1]``. ``penalty`` is the fraction of
    potential edges assessed at quality ``kappa``.
    """

    cdf0: Callable
    cdf1: Callable
    pdf0: Callable
    pdf1: Callable
    penalty: Callable
    kappa_domain: tuple = (2.0, 50.0)
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def check_kappa(self, kappa):
        lo, hi = self.kappa_domain
        k = np.asarray(kappa, dtype=float)
        if np.any(~((k >= lo) & (k <= hi))):
            raise DomainError(f"kappa={kappa!r} outside domain [{lo}, {hi}]")

    def cdf(self, cls, kappa, x):
        self.check_kappa(kappa)
        f = self.cdf1 if cls == 1 else self.cdf0
        return probability(f(kappa, x))

    def pdf(self, cls, kappa, x):
        self.check_kappa(kappa)
        f = self.pdf1 if cls == 1 else self.pdf0
        return f(kappa, x)

    def h(self, kappa):
        self.check_kappa(kappa)
        return probability(self.penalty(kappa))

    def ppf(self, cls, kappa, u, iters=60):
        """Inverse cdf by vectorized bisection (the family is only known via its cdf)."""
        u = np.asarray(u, dtype=float)
        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.cdf(cls, kappa, mid)) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def check_ordering(self, kappa_grid=None, t_grid=None, tol=1e-12):
        """Validate the stochastic-ordering conditions and monotone penalty on grids.

        (a) F1 <= F0 pointwise for each kappa; (b) F0 nondecreasing and F1
        nonincreasing in kappa; h nonincreasing. Raises ``ValueError``.
        """
        lo, hi = self.kappa_domain
        if kappa_grid is None:
            kappa_grid = np.linspace(lo, hi, 101)
        if t_grid is None:
            t_grid = np.linspace(0.0, 1.0, 101)
        kappa_grid = np.asarray(kappa_grid, dtype=float)
        t_grid = np.asarray(t_grid, dtype=float)
        F0 = np.array([self.cdf(0, k, t_grid) for k in kappa_grid])
        F1 = np.array([self.cdf(1, k, t_grid) for k in kappa_grid])
        if np.any(F1 > F0 + tol):
            raise ValueError("ordering (a) violated: F1 > F0 somewhere")
        if np.any(np.diff(F0, axis=0) < -tol) or np.any(np.diff(F1, axis=0) > tol):
            raise ValueError("ordering (b) violated across kappa")
        hs = np.asarray(self.h(kappa_grid))
        if np.any(np.diff(hs) > tol):
            raise ValueError("quality penalty is not nonincreasing")


def beta_feature_model(penalty_base=2.0, penalty_power=3.0, kappa_domain=(2.0, 50.0)):
    """Non-edges ~ Beta(2, kappa), edges ~ Beta(kappa, 2), h(kappa) = (2/kappa)^3."""
    return FeatureModel(
        cdf0=lambda k, x: reg_inc_beta(2.0, k, x),
        cdf1=lambda k, x: reg_inc_beta(k, 2.0, x),
        pdf0=lambda k, x: beta_pdf(2.0, k, x),
        pdf1=lambda k, x: beta_pdf(k, 2.0, x),
        penalty=cubic_penalty(penalty_base, penalty_power),
        kappa_domain=tuple(float(v) for v in kappa_domain),
        name="beta",
        params={"penalty_base": penalty_base, "penalty_power": penalty_power},
    )


@dataclass(frozen=True)
class Design:
    """Operating point: quality index ``kappa`` and edge threshold ``tau``."""

    kappa: float
    tau: float

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError(f"tau={self.tau} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class ChannelRates:
    """Assessment probability and true/false positive rates of the edge channel.

    ``tpr`` and ``fpr`` may be arrays (one entry per threshold) when rates are
    evaluated along a tau grid.
    """

    assess: float
    tpr: object
    fpr: object

    def __post_init__(self):
        object.__setattr__(self, "assess", probability(self.assess))
        object.__setattr__(self, "tpr", probability(self.tpr))
        object.__setattr__(self, "fpr", probability(self.fpr))
        if np.any(np.asarray(self.tpr) < np.asarray(self.fpr) - PROB_EPS):
            raise ValueError("tpr must be >= fpr")


def feature_cdf(model, cls, kappa, x):
    """F_{cls, kappa}(x)."""
    return model.cdf(cls, kappa, x)


def channel_rates(model, design):
    """Rates induced by ``design``: assess = h(kappa), tpr = 1 - F1(tau), fpr = 1 - F0(tau)."""
    return rates_along_tau(model, design.kappa, design.tau)


def rates_along_tau(model, kappa, tau):
    """Channel rates for a fixed ``kappa`` and a scalar or array of thresholds."""
    tau = np.asarray(tau, dtype=float)
    if np.any(~((tau >= 0) & (tau <= 1))):
        raise DomainError("tau outside [0, 1]")
    return ChannelRates(
        assess=model.h(kappa),
        tpr=1.0 - np.asarray(model.cdf(1, kappa, tau)),
        fpr=1.0 - np.asarray(model.cdf(0, kappa, tau)),
    )


def _mix(B, tpr, fpr):
    # fpr * J + (tpr - fpr) * B, so tpr == fpr gives an exactly constant matrix
    B = np.asarray(B, dtype=float)
    tpr = np.asarray(tpr, dtype=float)
    fpr = np.asarray(fpr, dtype=float)
    out = np.multiply.outer(fpr, np.ones_like(B)) + np.multiply.outer(tpr - fpr, B)
    return np.clip(out, 0.0, 1.0)


def errorful_block_matrix(bm, rates):
    """Btilde = h [tpr B + fpr (J - B)].

    Returns a K x K matrix, or an (m, K, K) stack when the rates are arrays.
    """
    return np.clip(rates.assess * _mix(bm.B, rates.tpr, rates.fpr), 0.0, 1.0)


def mcar_block_matrix(bm, rates):
    """Btilde_MCAR = tpr B + fpr (J - B); the penalty only thins observations."""
    return _mix(bm.B, rates.tpr, rates.fpr)


def expected_density(bm):
    """rho = (n pi' B pi - sum_k B_kk pi_k) / (n - 1)."""
    n = bm.n
    val = (n * bm.pi @ bm.B @ bm.pi - np.diag(bm.B) @ bm.pi) / (n - 1)
    return probability(val)


def is_affinity(B):
    """B_kk > B_kk' for every k and every k' != k."""
    B = np.asarray(B, dtype=float)
    K = B.shape[0]
    off = ~np.eye(K, dtype=bool)
    return bool(all(np.all(B[k, k] > B[k][off[k]]) for k in range(K)))
