"""Symmetric eigensolver, adjacency-spectral embedding and Fisher's linear
discriminant, plus the embed-then-classify Monte Carlo pipeline."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import stream
from .model import rates_along_tau

__all__ = [
    "NotSymmetricError",
    "DegenerateScatterError",
    "symmetric_eig",
    "Embedding",
    "ase",
    "Discriminant",
    "flda_train",
    "flda_classify",
    "EmbeddingCurve",
    "mc_embedding_error",
]


class NotSymmetricError(ValueError):
    pass


class DegenerateScatterError(np.linalg.LinAlgError):
    pass


SELECTIONS = ("magnitude", "largest")


def _order_by_magnitude(vals):
    # descending |lambda|, positive before negative on equal magnitude
    return np.lexsort((-vals, -np.abs(vals)))


def _top(vals, d, select):
    if select == "magnitude":
        key = -np.abs(vals)
    elif select == "largest":
        key = -vals
    else:
        raise ValueError(f"select must be one of {SELECTIONS}")
    return np.argsort(key, axis=-1, kind="stable")[..., :d]


def symmetric_eig(M, tol=1e-10, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm drops below
    ``tol * ||M||_F``. Eigenpairs come back sorted by descending magnitude;
    eigenvectors are the columns of the second result.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetricError("matrix must be square")
    n = A.shape[0]
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.any(np.abs(A - A.T) > 1e-10 * scale):
        raise NotSymmetricError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    norm = np.linalg.norm(A)
    if n == 0 or norm == 0:
        return np.diag(A).copy(), V
    target = tol * norm
    for _ in range(max_sweeps):
        # measured directly: norm(A)^2 - norm(diag)^2 cancels below ~1e-8 relative
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    # theta would overflow; tan of the angle is apq / diff to working precision
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise np.linalg.LinAlgError("Jacobi iteration did not converge")
    vals = np.diag(A).copy()
    order = _order_by_magnitude(vals)
    return vals[order], V[:, order]


def _lapack_eig(M):
    vals, vecs = np.linalg.eigh(M)
    order = _order_by_magnitude(vals)
    return vals[order], vecs[:, order]


@dataclass(frozen=True, eq=False)
class Embedding:
    Z_hat: np.ndarray
    eigenvalues: np.ndarray

    @property
    def signs(self):
        return np.where(self.eigenvalues < 0, -1.0, 1.0)

    def reconstruction(self):
        """Z diag(sign(lambda)) Z^T, the rank-d approximation of A."""
        return (self.Z_hat * self.signs) @ self.Z_hat.T


def ase(A, d, solver="jacobi", select="magnitude"):
    """Adjacency-spectral embedding: U_d |Lambda_d|^{1/2} from ``d`` eigenpairs.

    By default the ``d`` largest-magnitude eigenvalues are kept and their
    signs recorded; ``select="largest"`` keeps the algebraically largest
    instead. ``solver`` is ``jacobi`` or ``lapack``.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if not 1 <= d <= n:
        raise ValueError("need 1 <= d <= n")
    eig = symmetric_eig if solver == "jacobi" else _lapack_eig
    vals, vecs = eig(A)
    keep = _top(vals, d, select)
    vals, vecs = vals[keep], vecs[:, keep]
    return Embedding(vecs * np.sqrt(np.abs(vals)), vals)


@dataclass(frozen=True, eq=False)
class Discriminant:
    """Projection direction, threshold and the two class labels (first = positive side)."""

    w: np.ndarray
    threshold: float
    classes: tuple
    ridge: bool = False


def flda_train(points, labels):
    """Fisher's linear discriminant for two classes.

    ``w = S_w^{-1} (mu_1 - mu_2)`` with ``S_w`` the pooled within-class
    scatter; the threshold is the projected midpoint of the class means.
    A singular scatter gets a ridge of ``1e-8 * trace`` (flagged).
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    labels = np.asarray(labels)
    classes = tuple(np.unique(labels).tolist())
    if len(classes) != 2:
        raise ValueError("flda needs exactly two classes")
    X1, X2 = X[labels == classes[0]], X[labels == classes[1]]
    if len(X1) < 2 or len(X2) < 2:
        raise ValueError("flda needs at least two points per class")
    mu1, mu2 = X1.mean(axis=0), X2.mean(axis=0)
    Sw = (X1 - mu1).T @ (X1 - mu1) + (X2 - mu2).T @ (X2 - mu2)
    ridge = False
    if np.linalg.matrix_rank(Sw) < Sw.shape[0]:
        tr = np.trace(Sw)
        if not tr > 0:
            raise DegenerateScatterError("within-class scatter is zero")
        Sw = Sw + 1e-8 * tr * np.eye(Sw.shape[0])
        ridge = True
        if np.linalg.matrix_rank(Sw) < Sw.shape[0]:
            raise DegenerateScatterError("within-class scatter is singular after ridge")
    w = np.linalg.solve(Sw, mu1 - mu2)
    return Discriminant(w, float(w @ (mu1 + mu2) / 2.0), classes, ridge)


def flda_classify(disc, point):
    """Class on the side of the threshold; exactly on it goes to the first class."""
    s = float(np.asarray(point, dtype=float) @ disc.w)
    return disc.classes[0] if s >= disc.threshold else disc.classes[1]


def _flda_batch(Z, is_first, z_new):
    """Vectorized FLDA over a batch. Returns (predict_first, degenerate)."""
    T, m, d = Z.shape
    w1 = is_first[..., None].astype(float)
    w2 = 1.0 - w1
    n1 = w1.sum(axis=1)
    n2 = w2.sum(axis=1)
    mu1 = (Z * w1).sum(axis=1) / n1
    mu2 = (Z * w2).sum(axis=1) / n2
    C = Z - np.where(w1 > 0, mu1[:, None, :], mu2[:, None, :])
    Sw = np.einsum("tmi,tmj->tij", C, C)
    tr = np.trace(Sw, axis1=1, axis2=2)
    det = np.linalg.det(Sw)
    singular = np.abs(det) <= 1e-12 * np.maximum(tr, 1e-300) ** d
    ridge = np.where(singular, 1e-8 * tr, 0.0)
    Sw = Sw + ridge[:, None, None] * np.eye(d)
    degenerate = ~(tr > 0) | ~np.all(np.isfinite(Z), axis=(1, 2))
    Sw[degenerate] = np.eye(d)
    w = np.linalg.solve(Sw, (mu1 - mu2)[..., None])[..., 0]
    thr = np.einsum("ti,ti->t", w, (mu1 + mu2) / 2.0)
    score = np.einsum("ti,ti->t", w, z_new)
    return score >= thr, degenerate


@dataclass(frozen=True, eq=False)
class EmbeddingCurve:
    tau: np.ndarray
    L_hat: np.ndarray
    se: np.ndarray
    trials: int
    degenerate: np.ndarray

    @property
    def argmin_tau(self):
        return float(self.tau[int(np.argmin(self.L_hat))])

    def write_csv(self, path, header=None):
        with open(path, "w", newline="") as fh:
            if header:
                fh.write(f"# {header}\n")
            fh.write("tau,L_hat,se,trials\n")
            for t, l, s in zip(self.tau, self.L_hat, self.se):
                fh.write(f"{float(t)!r},{float(l)!r},{float(s)!r},{self.trials}\n")


def _embedding_batch(rng, size, bm, d, n_vec, assess, F1, F0, select):
    """One batch of embed-then-classify trials. Vertex 0 is held out."""
    K = bm.K
    n = bm.n
    y_star = rng.choice(K, size=size, p=bm.pi)
    base = np.repeat(np.arange(K), n_vec)
    labels = np.concatenate([y_star[:, None], np.broadcast_to(base, (size, n - 1))], axis=1)
    iu = np.triu_indices(n, 1)
    p = bm.B[labels[:, iu[0]], labels[:, iu[1]]]
    truth = rng.random(p.shape) < p
    assessed = rng.random(p.shape) < assess
    edge = assessed & (rng.random(p.shape) > np.where(truth, F1, F0))
    A = np.zeros((size, n, n))
    A[:, iu[0], iu[1]] = edge
    A[:, iu[1], iu[0]] = edge
    vals, vecs = np.linalg.eigh(A)
    order = _top(vals, d, select)
    top_vals = np.take_along_axis(vals, order, axis=1)
    top_vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    Z = top_vecs * np.sqrt(np.abs(top_vals))[:, None, :]
    first = labels[:, 1:] == 0
    pred_first, degenerate = _flda_batch(Z[:, 1:, :], first, Z[:, 0, :])
    wrong = pred_first != (y_star == 0)
    return wrong, degenerate


def mc_embedding_error(bm, fm, kappa, tau_grid, d=2, trials=10000, seed=0, batch=500,
                       max_redraws=3, select="magnitude", workers=1, progress=None):
    """Monte Carlo error of ASE followed by FLDA on the held-out vertex, per tau.

    Each trial samples the graph with balanced labeled counts plus one
    held-out vertex with label drawn from pi, observes it errorfully, embeds
    the whole observed graph in ``d`` dimensions and trains FLDA on the
    labeled vertices. Degenerate trials are redrawn up to ``max_redraws``
    times, then counted as errors. The tau index ``j`` and batch ``b`` use
    the stream ``(seed, j, b)``, so results do not depend on ``workers``.
    """
    if bm.K != 2:
        raise ValueError("the embedding pipeline is two-class")
    if (bm.n - 1) % 2:
        raise ValueError("need n - 1 even for balanced labeled counts")
    n_vec = np.array([(bm.n - 1) // 2] * 2)
    tau_grid = np.asarray(tau_grid, dtype=float)
    rates = rates_along_tau(fm, kappa, tau_grid)
    F1s = 1.0 - np.atleast_1d(rates.tpr)
    F0s = 1.0 - np.atleast_1d(rates.fpr)
    if trials < 1:
        raise ValueError("trials must be positive")
    if select not in SELECTIONS:
        raise ValueError(f"select must be one of {SELECTIONS}")

    def one_tau(j):
        errors = degen = 0
        draw = lambda rng, size: _embedding_batch(rng, size, bm, d, n_vec, rates.assess,
                                                  F1s[j], F0s[j], select)
        for b in range(math.ceil(trials / batch)):
            size = min(batch, trials - b * batch)
            rng = stream(seed, j, b)
            wrong, bad = draw(rng, size)
            for _ in range(max_redraws):
                if not bad.any():
                    break
                degen += int(bad.sum())
                idx = np.flatnonzero(bad)
                w2, b2 = draw(rng, len(idx))
                wrong[idx] = w2
                bad = np.zeros_like(bad)
                bad[idx[b2]] = True
            errors += int((wrong | bad).sum())
        if progress is not None:
            progress(j)
        return errors, degen

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(one_tau, range(len(tau_grid))))
    else:
        out = [one_tau(j) for j in range(len(tau_grid))]
    errors = np.array([e for e, _ in out], dtype=float)
    L = errors / trials
    se = np.sqrt(L * (1.0 - L) / trials)
    return EmbeddingCurve(tau_grid, L, se, trials, np.array([g for _, g in out], dtype=np.int64))
