"""Special functions and discrete distributions used throughout the package.

Everything here accepts scalars or numpy arrays and returns the same shape
(scalars come back as Python floats).
"""

import math

import numpy as np

__all__ = [
    "DomainError",
    "PROB_EPS",
    "probability",
    "log_gamma",
    "log_beta",
    "binom_pmf",
    "binom_logpmf",
    "binom_cdf",
    "reg_inc_beta",
    "beta_pdf",
    "std_normal_cdf",
]

PROB_EPS = 1e-12

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def probability(value, eps=PROB_EPS):
    """Validate a probability, clamping floating-point noise within ``eps``.

    Values in ``[-eps, 1 + eps]`` are clamped to ``[0, 1]``; anything further
    out raises :class:`DomainError`.
    """
    v = np.asarray(value, dtype=float)
    if np.any(np.isnan(v)) or np.any(v < -eps) or np.any(v > 1.0 + eps):
        raise DomainError(f"not a probability: {value!r}")
    return _out(np.clip(v, 0.0, 1.0))


def _lanczos_lgamma(x):
    # valid for x >= 0.5
    z = x - 1.0
    s = np.full_like(z, _LANCZOS_COEF[0])
    for i in range(1, len(_LANCZOS_COEF)):
        s = s + _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(s)


def log_gamma(x):
    """Natural log of the gamma function for positive ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("log_gamma requires x > 0")
    small = x < 0.5
    out = np.empty_like(x)
    big = ~small
    out[big] = _lanczos_lgamma(x[big])
    if np.any(small):
        xs = x[small]
        # reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        out[small] = math.log(math.pi) - np.log(np.sin(math.pi * xs)) - _lanczos_lgamma(1.0 - xs)
    return _out(out)


def log_beta(a, b):
    return _out(np.asarray(log_gamma(a)) + np.asarray(log_gamma(b))
                - np.asarray(log_gamma(np.asarray(a, float) + np.asarray(b, float))))


def _xlogy(x, y):
    # x * log(y) with 0 * log(0) = 0
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = x * np.log(y)
    return np.where(x == 0, 0.0, r)


def _xlog1my(x, y):
    # x * log(1 - y) with 0 * log(0) = 0
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = x * np.log1p(-y)
    return np.where(x == 0, 0.0, r)


def _log_choose(n, i):
    n = np.asarray(n, dtype=float)
    i = np.asarray(i, dtype=float)
    lc = (np.asarray(log_gamma(n + 1.0)) - np.asarray(log_gamma(i + 1.0))
          - np.asarray(log_gamma(n - i + 1.0)))
    # C(n, 0) = C(n, n) = 1 exactly
    return np.where((i == 0) | (i == n), 0.0, lc)


def binom_logpmf(i, n, p):
    """Log of the binomial pmf; ``-inf`` for impossible outcomes."""
    i, n, p = np.broadcast_arrays(np.asarray(i), np.asarray(n), np.asarray(probability(p)))
    if np.any(n < 0):
        raise DomainError("binomial n must be nonnegative")
    inside = (i >= 0) & (i <= n)
    ii = np.where(inside, i, 0)
    lp = _log_choose(n, ii) + _xlogy(ii, p) + _xlog1my(n - ii, p)
    return _out(np.where(inside, lp, -np.inf))


def binom_pmf(i, n, p):
    """Binomial pmf evaluated in log space."""
    return _out(np.exp(binom_logpmf(i, n, p)))


def binom_cdf(i, n, p):
    """P[Bin(n, p) <= i] as a sum of pmf terms.

    Defined for any integer ``i``: 0 below the support, 1 at or above ``n``.
    """
    i, n, p = np.broadcast_arrays(np.asarray(i), np.asarray(n), np.asarray(p, dtype=float))
    out = np.empty(i.shape, dtype=float)
    for idx in np.ndindex(i.shape):
        ii, nn, pp = int(i[idx]), int(n[idx]), float(p[idx])
        if ii < 0:
            out[idx] = 0.0
        elif ii >= nn:
            out[idx] = 1.0
        else:
            out[idx] = min(1.0, float(np.sum(binom_pmf(np.arange(ii + 1), nn, pp))))
    return _out(out)


def _betacf(a, b, x, max_iter=500, tol=1e-16):
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < tiny, tiny, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > tol
        if not active.any():
            break
    return h


def reg_inc_beta(a, b, x):
    """Regularized incomplete beta function I_x(a, b).

    Continued fraction, switching to ``1 - I_{1-x}(b, a)`` for
    ``x >= a / (a + b)`` where the direct expansion converges slowly.
    """
    a, b, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, x)))
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("reg_inc_beta requires a > 0 and b > 0")
    if np.any(~((x >= 0) & (x <= 1))):
        raise DomainError("reg_inc_beta requires x in [0, 1]")
    out = np.where(x <= 0, 0.0, 1.0)
    inner = (x > 0) & (x < 1)
    if np.any(inner):
        ai, bi, xi = a[inner], b[inner], x[inner]
        flip = xi >= ai / (ai + bi)
        aa = np.where(flip, bi, ai)
        bb = np.where(flip, ai, bi)
        xx = np.where(flip, 1.0 - xi, xi)
        lfront = (aa * np.log(xx) + bb * np.log1p(-xx)
                  - np.asarray(log_beta(aa, bb)))
        val = np.exp(lfront) * _betacf(aa, bb, xx) / aa
        out = out.astype(float)
        out[inner] = np.where(flip, 1.0 - val, val)
    return _out(np.clip(out, 0.0, 1.0))


def beta_pdf(a, b, x):
    """Density of Beta(a, b).

    Raises :class:`DomainError` where the density is infinite (an endpoint
    with the matching shape parameter below 1).
    """
    a, b, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, x)))
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise DomainError("beta_pdf requires a > 0 and b > 0")
    if np.any(~((x >= 0) & (x <= 1))):
        raise DomainError("beta_pdf requires x in [0, 1]")
    if np.any((x == 0) & (a < 1)) or np.any((x == 1) & (b < 1)):
        raise DomainError("beta density is infinite at this endpoint")
    lp = _xlogy(a - 1.0, x) + _xlog1my(b - 1.0, x) - np.asarray(log_beta(a, b))
    return _out(np.exp(lp))


_erfc = np.vectorize(math.erfc, otypes=[float])


def std_normal_cdf(z):
    """Standard normal cdf, ``0.5 * erfc(-z / sqrt(2))``."""
    z = np.asarray(z, dtype=float)
    return _out(0.5 * _erfc(-z / math.sqrt(2.0)))
