"""EigenGame PCA and an exact PCA oracle based on cyclic Jacobi rotations.

In the game, player ``i`` owns a unit vector ``v_i`` and maximises

    u_i = v_i' S v_i - sum_{j<i} <v_i, S v_j>^2 / <v_j, S v_j>

on the unit sphere by Riemannian gradient ascent.  Play is simultaneous:
every player steps against the iteration-start snapshot of all vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ArgumentError, DivergedError, ShapeError, as_mat, make_rng


class DegenerateError(ArithmeticError):
    """A parent direction has zero variance, or the data is too small."""


@dataclass
class EigenState:
    vectors: np.ndarray            # k x d, row i is player i's unit vector
    utilities: list                # per-iteration utilities, one list per step

    @property
    def k(self):
        return self.vectors.shape[0]


@dataclass
class PcaResult:
    components: np.ndarray          # k x d, orthonormal rows
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    mean: np.ndarray


def eigen_utility(v_i, parents, sigma) -> float:
    v_i = np.asarray(v_i, dtype=np.float64)
    sigma = as_mat(sigma)
    u = float(v_i @ sigma @ v_i)
    for v_j in parents:
        s_vj = sigma @ v_j
        denom = float(v_j @ s_vj)
        if denom <= 0:
            raise DegenerateError("parent direction has zero variance")
        u -= float(v_i @ s_vj) ** 2 / denom
    return u


def eigen_gradient(xt, v_i, parents) -> np.ndarray:
    """``2 X^T [X v_i - sum_j (<X v_i, X v_j> / <X v_j, X v_j>) X v_j]``."""
    xt = as_mat(xt)
    v_i = np.asarray(v_i, dtype=np.float64)
    if v_i.shape != (xt.shape[1],):
        raise ShapeError(f"vector of shape {v_i.shape} vs data with d={xt.shape[1]}")
    xv = xt @ v_i
    acc = xv.copy()
    for v_j in parents:
        xvj = xt @ v_j
        denom = float(xvj @ xvj)
        if denom == 0:
            raise DegenerateError("parent projection X v_j is zero")
        acc -= (float(xv @ xvj) / denom) * xvj
    return 2.0 * (xt.T @ acc)


def riemannian_project(grad, v) -> np.ndarray:
    grad = np.asarray(grad, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return grad - float(grad @ v) * v


def _normalize(v):
    return v / np.sqrt(v @ v)


def eigengame_step(xt, vectors, alpha):
    snapshot = vectors.copy()
    out = np.empty_like(vectors)
    for i in range(snapshot.shape[0]):
        v = snapshot[i]
        g = riemannian_project(eigen_gradient(xt, v, snapshot[:i]), v)
        out[i] = _normalize(v + alpha * g)
    return out


def eigengame_fit(x, k: int, t_max: int = 2000, alpha: float = 0.01, rng=0,
                  batch_size: int | None = None, init=None, callback=None) -> EigenState:
    """Simultaneous-play EigenGame on ``x`` (n x d); full batch by default.

    The data is used as given (no centering), so the players recover the top
    eigenvectors of ``X^T X``.  ``callback(t, vectors)`` is invoked after
    every committed iteration.
    """
    x = as_mat(x)
    n, d = x.shape
    if not 1 <= k <= d:
        raise ArgumentError(f"need 1 <= k <= d={d}, got k={k}")
    if not alpha > 0:
        raise ArgumentError(f"alpha must be > 0, got {alpha}")
    gen = rng if isinstance(rng, np.random.Generator) else make_rng(rng)
    if init is None:
        vectors = gen.standard_normal((k, d))
    else:
        vectors = as_mat(init).copy()
    vectors = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    utilities = []
    for t in range(1, t_max + 1):
        if batch_size:
            xt = x[gen.choice(n, size=batch_size, replace=False)]
        else:
            xt = x
        vectors = eigengame_step(xt, vectors, alpha)
        sigma = xt.T @ xt
        u = [eigen_utility(vectors[i], vectors[:i], sigma) for i in range(k)]
        if not np.all(np.isfinite(u)) or not np.all(np.isfinite(vectors)):
            raise DivergedError(f"EigenGame diverged; reduce alpha={alpha}")
        utilities.append(u)
        if callback is not None:
            callback(t, vectors)
    return EigenState(vectors=vectors, utilities=utilities)


# --- exact oracle ---------------------------------------------------------------

def jacobi_eigh(a, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` sorted by decreasing eigenvalue,
    eigenvectors in columns, each with its largest-magnitude entry positive.
    """
    a = as_mat(a).copy()
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError(f"square matrix required, got {a.shape}")
    if not np.allclose(a, a.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ArgumentError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = max(np.sqrt(np.sum(a * a)), 1e-300)
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if np.sqrt(np.sum(a[off_mask] ** 2)) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    vals, v = vals[order], v[:, order]
    for col in range(n):
        if v[np.argmax(np.abs(v[:, col])), col] < 0:
            v[:, col] = -v[:, col]
    return vals, v


def exact_pca(x, k: int) -> PcaResult:
    """Centered PCA from the ``(1/n) X^T X`` covariance via :func:`jacobi_eigh`."""
    x = as_mat(x)
    n, d = x.shape
    if n < 2:
        raise DegenerateError(f"PCA needs at least 2 observations, got {n}")
    if not 1 <= k <= d:
        raise ArgumentError(f"need 1 <= k <= d={d}, got k={k}")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / n
    vals, vecs = jacobi_eigh(cov)
    vals = np.maximum(vals, 0.0)
    total = float(np.trace(cov))
    ratio = vals[:k] / total if total > 0 else np.zeros(k)
    return PcaResult(components=vecs[:, :k].T.copy(), explained_variance=vals[:k].copy(),
                     explained_variance_ratio=ratio, mean=mean)


def project_rows(m, components, mean=None) -> np.ndarray:
    """Coordinates of each (centered) row of ``m`` along ``components``."""
    m = as_mat(m)
    comps = as_mat(components)
    if m.shape[1] != comps.shape[1]:
        raise ShapeError(f"rows of length {m.shape[1]} vs components of length {comps.shape[1]}")
    if mean is not None:
        m = m - np.asarray(mean, dtype=np.float64)
    return m @ comps.T


def eigengame_pca(x, k: int, t_max: int = 2000, alpha: float = 0.01, rng=0) -> PcaResult:
    """PCA through the EigenGame on centered, ``1/sqrt(n)``-scaled data."""
    x = as_mat(x)
    n = x.shape[0]
    if n < 2:
        raise DegenerateError(f"PCA needs at least 2 observations, got {n}")
    mean = x.mean(axis=0)
    xc = (x - mean) / np.sqrt(n)
    state = eigengame_fit(xc, k, t_max, alpha, rng)
    cov = xc.T @ xc
    var = np.array([float(v @ cov @ v) for v in state.vectors])
    total = float(np.trace(cov))
    ratio = var / total if total > 0 else np.zeros(k)
    return PcaResult(components=state.vectors, explained_variance=var,
                     explained_variance_ratio=ratio, mean=mean)
