"""Classical NNMF solvers: multiplicative updates, projected gradient, NALS.

All solvers minimise ``1/2 ||X - WH||_F^2`` over non-negative ``W`` (I x K)
and ``H`` (K x J), run a fixed number of iterations and record the
Frobenius error after each one.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import (ArgumentError, DivergedError, ShapeError, as_mat, clamp_nonneg,
                   make_rng, matmul, rand_uniform, reconstruction_error)

MU_EPS = 1e-12
INIT_RANGE = (0.01, 1.01)
DIVERGENCE_FACTOR = 1e6


class SingularSystemError(ArithmeticError):
    pass


@dataclass
class FitTrace:
    errors: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)
    # (iteration, copy of H) pairs; iteration 0 is the initial point
    snapshots: list = field(default_factory=list)

    def __len__(self):
        return len(self.errors)


@dataclass
class Factorization:
    w: np.ndarray
    h: np.ndarray
    trace: FitTrace


def init_factors(rng, i: int, j: int, k: int):
    """Strictly positive ``W0, H0 ~ U(0.01, 1.01)``, drawn W first then H."""
    w = rand_uniform(rng, i, k, *INIT_RANGE)
    h = rand_uniform(rng, k, j, *INIT_RANGE)
    return w, h


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)


def prepare_fit(x, k, t_max, rng, init):
    x = as_mat(x)
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if t_max < 1:
        raise ArgumentError(f"t_max must be >= 1, got {t_max}")
    if np.any(x < 0):
        raise ArgumentError("data matrix must be non-negative")
    if k > min(x.shape):
        warnings.warn(f"k={k} exceeds min(I, J)={min(x.shape)}; over-complete fit",
                      stacklevel=3)
    if init is None:
        w, h = init_factors(_as_rng(rng), x.shape[0], x.shape[1], k)
    else:
        w, h = (as_mat(a).copy() for a in init)
        if w.shape != (x.shape[0], k) or h.shape != (k, x.shape[1]):
            raise ShapeError(f"init shapes {w.shape}, {h.shape} do not fit X {x.shape}, k={k}")
    return x, w, h


class IterationRecorder:
    """Shared per-iteration bookkeeping: error, wall time, H snapshots."""

    def __init__(self, x, w, h, t_max, snapshot_every, eta=None):
        self.x = x
        self.t_max = t_max
        self.every = snapshot_every
        self.eta = eta
        self.trace = FitTrace()
        self.initial = reconstruction_error(x, w, h)
        if self.every:
            self.trace.snapshots.append((0, h.copy()))
        self._t0 = time.perf_counter()

    def record(self, t, w, h):
        now = time.perf_counter()
        err = reconstruction_error(self.x, w, h)
        self.trace.errors.append(err)
        self.trace.wall_ms.append((now - self._t0) * 1e3)
        self._t0 = now
        if self.every and (t % self.every == 0 or t == self.t_max):
            self.trace.snapshots.append((t, h.copy()))
        if self.eta is not None and not (err <= DIVERGENCE_FACTOR * max(self.initial, 1e-300)):
            raise DivergedError(f"diverged at iteration {t} (error {err:.3e}); "
                                f"reduce eta={self.eta}")


# --- multiplicative updates ---------------------------------------------------

def mu_step(x, w, h, eps: float = MU_EPS):
    """One Lee-Seung iteration: H from W^t, then W from H^{t+1}."""
    wt = w.T
    h_new = h * matmul(wt, x) / np.maximum(matmul(matmul(wt, w), h), eps)
    ht = h_new.T
    w_new = w * matmul(x, ht) / np.maximum(matmul(w, matmul(h_new, ht)), eps)
    return w_new, h_new


def mu_fit(x, k: int, t_max: int, rng=0, eps: float = MU_EPS,
           snapshot_every: int = 0, init=None) -> Factorization:
    x, w, h = prepare_fit(x, k, t_max, rng, init)
    rec = IterationRecorder(x, w, h, t_max, snapshot_every)
    for t in range(1, t_max + 1):
        w, h = mu_step(x, w, h, eps)
        rec.record(t, w, h)
    return Factorization(w, h, rec.trace)


# --- projected gradient -------------------------------------------------------

def frobenius_gradients(x, w, h):
    """Gradients of ``1/2 ||X - WH||_F^2``: ``(-(X-WH) H^T, -W^T (X-WH))``."""
    r = x - matmul(w, h)
    return -matmul(r, h.T), -matmul(w.T, r)


def pg_fit(x, k: int, t_max: int, eta: float = 1e-3, rng=0,
           snapshot_every: int = 0, init=None) -> Factorization:
    """Alternating full-matrix gradient steps, each followed by projection."""
    if not eta > 0:
        raise ArgumentError(f"eta must be > 0, got {eta}")
    x, w, h = prepare_fit(x, k, t_max, rng, init)
    rec = IterationRecorder(x, w, h, t_max, snapshot_every, eta=eta)
    for t in range(1, t_max + 1):
        r = x - matmul(w, h)
        h = clamp_nonneg(h + eta * matmul(w.T, r))
        r = x - matmul(w, h)
        w = clamp_nonneg(w + eta * matmul(r, h.T))
        rec.record(t, w, h)
    return Factorization(w, h, rec.trace)


# --- non-negative alternating least squares -----------------------------------

def _spd_solve(a, b, ridge):
    a = a + ridge * np.eye(a.shape[0])
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"normal matrix is singular (ridge={ridge}); use ridge > 0") from exc
    return scipy.linalg.cho_solve(factor, b)


def nals_solve_h(x, w, ridge: float = 1e-10, clamp: bool = True):
    """Least-squares ``H = (W^T W + ridge I)^{-1} W^T X``, optionally clamped."""
    h = _spd_solve(matmul(w.T, w), matmul(w.T, x), ridge)
    return clamp_nonneg(h) if clamp else h


def nals_solve_w(x, h, ridge: float = 1e-10, clamp: bool = True):
    w = _spd_solve(matmul(h, h.T), matmul(h, x.T), ridge).T
    return clamp_nonneg(w) if clamp else w


def nals_fit(x, k: int, t_max: int, ridge: float = 1e-10, rng=0,
             snapshot_every: int = 0, init=None) -> Factorization:
    """NALS; the loss is recorded but is not monotone because of the clamping."""
    if ridge < 0:
        raise ArgumentError(f"ridge must be >= 0, got {ridge}")
    x, w, h = prepare_fit(x, k, t_max, rng, init)
    rec = IterationRecorder(x, w, h, t_max, snapshot_every)
    for t in range(1, t_max + 1):
        h = nals_solve_h(x, w, ridge)
        w = nals_solve_w(x, h, ridge)
        rec.record(t, w, h)
    return Factorization(w, h, rec.trace)
