"""Grid search for the optimal (kappa, tau) operating point.

The error surface is evaluated cell by cell on a (kappa, tau) grid; every
argmin/argmax breaks ties by the smallest tau, then the smallest kappa.
"""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import exact_error as ee
from .model import errorful_block_matrix, expected_density, rates_along_tau

__all__ = [
    "grid",
    "default_kappa_grid",
    "default_tau_grid",
    "ErrorSurface",
    "SurfaceEvaluationError",
    "Optimum",
    "build_surface",
    "normal_approx_optimum",
    "projection_optimum",
    "projection_score",
    "bayes_threshold",
    "btilde_path",
    "mean_variance_curve",
]

EVALUATORS = ("balanced", "exact", "full", "normal")


def grid(start, stop, step):
    """Inclusive arithmetic grid, rounded to kill accumulated float drift."""
    count = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(count), 10)


def default_kappa_grid():
    return grid(2.0, 8.0, 0.05)


def default_tau_grid():
    return grid(0.0, 1.0, 0.005)


class SurfaceEvaluationError(ee.EnumerationBudgetError):
    def __init__(self, kappa, tau, cause):
        super().__init__(f"at kappa={kappa}, tau={tau}: {cause}")
        self.kappa = kappa
        self.tau = tau


class Optimum(NamedTuple):
    kappa: float
    tau: float
    value: float


def _pick(values, kappa_grid, tau_grid, maximize=False):
    # ties -> smallest tau, then smallest kappa (grids ascending)
    v = np.asarray(values, dtype=float)
    target = np.nanmax(v) if maximize else np.nanmin(v)
    rows, cols = np.nonzero(v == target)
    order = np.lexsort((rows, cols))
    i, j = rows[order[0]], cols[order[0]]
    return Optimum(float(kappa_grid[i]), float(tau_grid[j]), float(v[i, j]))


@dataclass(frozen=True, eq=False)
class ErrorSurface:
    """Misclassification probability over a (kappa, tau) grid (rows: kappa)."""

    kappa_grid: np.ndarray
    tau_grid: np.ndarray
    L: np.ndarray
    h_kappa: np.ndarray
    evaluator: str

    @property
    def argmin(self):
        return _pick(self.L, self.kappa_grid, self.tau_grid)

    @property
    def per_kappa_argmin_tau(self):
        # np.argmin returns the first (smallest tau) minimizer
        return self.tau_grid[np.argmin(self.L, axis=1)]

    def column(self, tau):
        j = int(np.argmin(np.abs(self.tau_grid - tau)))
        return self.L[:, j]

    def row(self, kappa):
        i = int(np.argmin(np.abs(self.kappa_grid - kappa)))
        return self.L[i]

    def write_csv(self, path, header=None):
        with open(path, "w", newline="") as fh:
            if header:
                fh.write(f"# {header}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kappa", "h_kappa", "tau", "L"])
            for i, k in enumerate(self.kappa_grid):
                for j, t in enumerate(self.tau_grid):
                    w.writerow([repr(float(k)), repr(float(self.h_kappa[i])),
                                repr(float(t)), repr(float(self.L[i, j]))])

    def argmin_dict(self):
        k, t, v = self.argmin
        return {"kappa_star": k, "tau_star": t, "L_star": v,
                "h_kappa_star": float(self.h_kappa[list(self.kappa_grid).index(k)]),
                "evaluator": self.evaluator}

    def write_argmin_json(self, path, extra=None):
        d = self.argmin_dict()
        if extra:
            d.update(extra)
        with open(path, "w") as fh:
            json.dump(d, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _require_balanced_two_block(bm):
    B, pi = bm.B, bm.pi
    if bm.K != 2 or B[0, 0] != B[1, 1] or pi[0] != pi[1]:
        raise ValueError("this computation needs a balanced symmetric two-block model "
                         "(B11 = B22, pi = [1/2, 1/2])")
    if (bm.n - 1) % 2:
        raise ValueError("balanced conditioning needs n - 1 even")
    return (bm.n - 1) // 2


def _row(bm, fm, kappa, tau_grid, evaluator, n_vec, budget):
    Bt = errorful_block_matrix(bm, rates_along_tau(fm, kappa, tau_grid))
    if evaluator == "balanced":
        return ee.balanced_two_block_error(n_vec[0], Bt[:, 0, 0], Bt[:, 0, 1])
    if evaluator == "normal":
        return ee.normal_approx_error(2 * n_vec[0], Bt[:, 0, 0], Bt[:, 0, 1])
    out = np.empty(len(tau_grid))
    for j, tau in enumerate(tau_grid):
        try:
            if evaluator == "exact":
                out[j] = ee.conditional_error(n_vec, Bt[j], bm.pi, budget=budget)
            else:
                out[j] = ee.full_error(bm.n, Bt[j], bm.pi, budget=budget)
        except ee.EnumerationBudgetError as exc:
            raise SurfaceEvaluationError(float(kappa), float(tau), exc) from exc
    return out


def build_surface(bm, fm, kappa_grid=None, tau_grid=None, evaluator="balanced",
                  n_vec=None, budget=ee.DEFAULT_BUDGET, workers=1):
    """Evaluate the misclassification probability on every grid cell.

    ``evaluator`` is one of ``balanced`` (two equal blocks, closed sums),
    ``exact`` (joint enumeration given labeled counts ``n_vec``), ``full``
    (averaged over the multinomial block counts) or ``normal`` (large-sample
    approximation). ``n_vec`` defaults to an equal split of the ``n - 1``
    labeled vertices. Rows are independent and may be evaluated by
    ``workers`` threads; results are placed by grid index.
    """
    if evaluator not in EVALUATORS:
        raise ValueError(f"unknown evaluator {evaluator!r}; choose from {EVALUATORS}")
    kappa_grid = np.asarray(default_kappa_grid() if kappa_grid is None else kappa_grid, dtype=float)
    tau_grid = np.asarray(default_tau_grid() if tau_grid is None else tau_grid, dtype=float)
    if kappa_grid.size == 0 or tau_grid.size == 0:
        raise ValueError("grids must be nonempty")
    if np.any(np.diff(kappa_grid) <= 0) or np.any(np.diff(tau_grid) <= 0):
        raise ValueError("grids must be strictly increasing")
    fm.check_kappa(kappa_grid)
    if evaluator in ("balanced", "normal"):
        n1 = _require_balanced_two_block(bm)
        n_vec = (n1, n1)
    elif n_vec is None:
        if (bm.n - 1) % bm.K:
            raise ValueError("n - 1 is not divisible by K; pass n_vec explicitly")
        n_vec = ((bm.n - 1) // bm.K,) * bm.K

    def work(i):
        return _row(bm, fm, kappa_grid[i], tau_grid, evaluator, n_vec, budget)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(work, range(len(kappa_grid))))
    else:
        rows = [work(i) for i in range(len(kappa_grid))]
    L = np.vstack(rows)
    return ErrorSurface(kappa_grid, tau_grid, L, np.asarray(fm.h(kappa_grid), dtype=float), evaluator)


def _snr(mu, sigma):
    mu, sigma = np.broadcast_arrays(mu, sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = mu / np.where(sigma > 0, sigma, 1.0)
    limit = np.where(mu > 0, np.inf, np.where(mu < 0, -np.inf, 0.0))
    return np.where(sigma > 0, r, limit)


def normal_approx_optimum(bm, fm, kappa_grid=None, tau_grid=None):
    """Grid argmax of mu / sigma from the large-sample normal approximation."""
    n1 = _require_balanced_two_block(bm)
    kappa_grid = np.asarray(default_kappa_grid() if kappa_grid is None else kappa_grid, dtype=float)
    tau_grid = np.asarray(default_tau_grid() if tau_grid is None else tau_grid, dtype=float)
    vals = np.empty((len(kappa_grid), len(tau_grid)))
    for i, k in enumerate(kappa_grid):
        Bt = errorful_block_matrix(bm, rates_along_tau(fm, k, tau_grid))
        vals[i] = _snr(*ee.normal_snr(2 * n1, Bt[:, 0, 0], Bt[:, 0, 1]))
    return _pick(vals, kappa_grid, tau_grid, maximize=True)


def projection_score(Bt, pi, d, eig=None):
    """max_k (pi' Bt)_k / lambda_d^2, with lambda_d the d-th largest-magnitude
    eigenvalue of diag(pi) Bt; +inf when lambda_d vanishes.

    diag(pi) Bt is similar to diag(sqrt(pi)) Bt diag(sqrt(pi)), so the
    symmetric form is handed to the eigensolver.
    """
    if eig is None:
        from .embed import symmetric_eig as eig
    Bt = np.asarray(Bt, dtype=float)
    s = np.sqrt(np.asarray(pi, dtype=float))
    vals, _ = eig(s[:, None] * Bt * s[None, :])
    scale = max(abs(vals[0]), 1e-300)
    lam = vals[d - 1]
    if abs(lam) <= 1e-12 * scale:
        return np.inf
    return float(np.max(pi @ Bt) / lam**2)


def projection_optimum(bm, fm, kappa_grid=None, tau_grid=None, d=None):
    """Grid argmin of the projection-error criterion; ``d`` defaults to rank(B)."""
    if d is None:
        d = int(np.linalg.matrix_rank(bm.B))
    if not 1 <= d <= bm.K:
        raise ValueError("need 1 <= d <= K")
    kappa_grid = np.asarray(default_kappa_grid() if kappa_grid is None else kappa_grid, dtype=float)
    tau_grid = np.asarray(default_tau_grid() if tau_grid is None else tau_grid, dtype=float)
    vals = np.empty((len(kappa_grid), len(tau_grid)))
    for i, k in enumerate(kappa_grid):
        Bt = errorful_block_matrix(bm, rates_along_tau(fm, k, tau_grid))
        vals[i] = [projection_score(b, bm.pi, d) for b in Bt]
    if np.all(np.isinf(vals)):
        raise ValueError("criterion is infinite on the whole grid")
    return _pick(vals, kappa_grid, tau_grid)


def bayes_threshold(bm, fm, kappa, eps=1e-9):
    """Threshold where (1 - rho) f0 = rho f1, rho the expected graph density.

    Returns ``nan`` when the posterior never crosses 1/2 (e.g. identical
    class-conditional densities).
    """
    rho = expected_density(bm)

    def g(t):
        return rho * fm.pdf(1, kappa, t) - (1.0 - rho) * fm.pdf(0, kappa, t)

    lo, hi = g(eps), g(1.0 - eps)
    if not (lo < 0 < hi):
        return float("nan")
    return float(brentq(g, eps, 1.0 - eps, xtol=1e-12))


class BtildePath(NamedTuple):
    tau: np.ndarray
    b11: np.ndarray
    b12: np.ndarray
    L: np.ndarray


def btilde_path(bm, fm, kappa, tau_grid=None):
    """(Btilde_11, Btilde_12) as tau sweeps [0, 1] at fixed kappa, with the error at each point."""
    n1 = _require_balanced_two_block(bm)
    tau_grid = np.asarray(default_tau_grid() if tau_grid is None else tau_grid, dtype=float)
    Bt = errorful_block_matrix(bm, rates_along_tau(fm, kappa, tau_grid))
    b11, b12 = Bt[:, 0, 0], Bt[:, 0, 1]
    return BtildePath(tau_grid, b11, b12, ee.balanced_two_block_error(n1, b11, b12))


@dataclass(frozen=True, eq=False)
class MeanVarianceCurve:
    """Mean and variance of (D1 - D2) / n along tau for fixed kappa."""

    tau: np.ndarray
    mean: np.ndarray
    variance: np.ndarray

    @property
    def mean_argmax_tau(self):
        return float(self.tau[int(np.argmax(self.mean))])

    @property
    def variance_nonincreasing(self):
        return bool(np.all(np.diff(self.variance) <= 0))


def mean_variance_curve(bm, fm, kappa, tau_grid=None, n=None):
    _require_balanced_two_block(bm)
    n = bm.n if n is None else n
    tau_grid = np.asarray(default_tau_grid() if tau_grid is None else tau_grid, dtype=float)
    Bt = errorful_block_matrix(bm, rates_along_tau(fm, kappa, tau_grid))
    b11, b12 = Bt[:, 0, 0], Bt[:, 0, 1]
    mean = b11 - b12
    var = (b11 * (1.0 - b11) + b12 * (1.0 - b12)) / n
    return MeanVarianceCurve(tau_grid, mean, var)
