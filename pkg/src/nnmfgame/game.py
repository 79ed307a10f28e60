"""NNMF as a graphical game between row players and column players.

Row player ``i`` owns ``W[i, :]`` and column player ``j`` owns ``H[:, j]``.
Every (i, j) pair cooperates to reconstruct ``X[i, j]``; its shared utility
is ``-1/2 (X[i, j] - W[i, :] . H[:, j])^2``.  Column players can also play a
self-game that shrinks coordinates of their own vector (``jmin``/``jmax``).

Two schedules are available:

``jacobi``
    Every player sums its pair gradients over all partners against the
    iteration-start snapshot, steps once and commits at a barrier.  Players
    are split into contiguous shards that run on a thread pool; each player
    reads only its own row/column of ``X`` and results do not depend on the
    worker count.
``gauss-seidel``
    Literal triple loop: each (i, j) interaction commits in place, row-major.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import Factorization, IterationRecorder, prepare_fit
from .core import ArgumentError, ShapeError, clamp_nonneg, matmul

SCHEDULES = ("jacobi", "gauss-seidel")
SELF_GAMES = ("none", "jmin", "jmax")


@dataclass
class GameConfig:
    eta: float = 1e-3
    t_max: int = 2000
    schedule: str = "jacobi"
    self_game: str = "none"
    shrink: float = 0.99
    snapshot_every: int = 0

    def __post_init__(self):
        self.schedule = self.schedule.lower().replace("_", "-")
        self.self_game = (self.self_game or "none").lower()
        if self.schedule == "gaussseidel":
            self.schedule = "gauss-seidel"
        if not self.eta > 0:
            raise ArgumentError(f"eta must be > 0, got {self.eta}")
        if not 0 < self.shrink < 1:
            raise ArgumentError(f"shrink must lie in (0, 1), got {self.shrink}")
        if self.t_max < 1:
            raise ArgumentError(f"t_max must be >= 1, got {self.t_max}")
        if self.snapshot_every < 0:
            raise ArgumentError("snapshot_every must be >= 0")
        if self.schedule not in SCHEDULES:
            raise ArgumentError(f"unknown schedule {self.schedule!r}; valid: {SCHEDULES}")
        if self.self_game not in SELF_GAMES:
            raise ArgumentError(f"unknown self_game {self.self_game!r}; valid: {SELF_GAMES}")


def _vec(v):
    return np.asarray(v, dtype=np.float64).reshape(-1)


def _dot(a, b):
    # fixed left-to-right order
    s = 0.0
    for p, q in zip(a.tolist(), b.tolist()):
        s += p * q
    return s


def _pair_residual(x_ij, w_i, h_j):
    w_i, h_j = _vec(w_i), _vec(h_j)
    if w_i.shape != h_j.shape:
        raise ShapeError(f"player vectors differ in length: {w_i.shape} vs {h_j.shape}")
    return float(x_ij) - _dot(w_i, h_j), w_i, h_j


def pair_utility(x_ij: float, w_i, h_j) -> float:
    r, _, _ = _pair_residual(x_ij, w_i, h_j)
    return -0.5 * r * r


def pair_gradients(x_ij: float, w_i, h_j):
    """Descent gradients of the pair loss: ``(-r h_j, -r w_i)``."""
    r, w_i, h_j = _pair_residual(x_ij, w_i, h_j)
    return -r * h_j, -r * w_i


# --- shard updates (Jacobi) ---------------------------------------------------
# ``matmul`` computes each output row (column) from the matching input row
# (column) only, so a shard's result is bit-identical to the same rows of a
# full-matrix computation.

def row_shard_update(x_rows, w_rows, h, eta):
    r = x_rows - matmul(w_rows, h)
    return clamp_nonneg(w_rows + eta * matmul(r, h.T))


def col_shard_update(x_cols, h_cols, w, eta):
    r = x_cols - matmul(w, h_cols)
    return clamp_nonneg(h_cols + eta * matmul(w.T, r))


def row_player_update(x_row, w_i, h_all, eta: float):
    """One committed step for a row player against a snapshot of ``H``.

    Depends only on the player's own data row, its vector, ``H`` and ``eta``.
    """
    h_all = np.asarray(h_all, dtype=np.float64)
    x_row, w_i = _vec(x_row), _vec(w_i)
    if h_all.shape != (w_i.size, x_row.size):
        raise ShapeError(f"H {h_all.shape} does not match K={w_i.size}, J={x_row.size}")
    return row_shard_update(x_row[None, :], w_i[None, :], h_all, eta)[0]


def col_player_update(x_col, h_j, w_all, eta: float):
    w_all = np.asarray(w_all, dtype=np.float64)
    x_col, h_j = _vec(x_col), _vec(h_j)
    if w_all.shape != (x_col.size, h_j.size):
        raise ShapeError(f"W {w_all.shape} does not match I={x_col.size}, K={h_j.size}")
    return col_shard_update(x_col[:, None], h_j[:, None], w_all, eta)[:, 0]


# --- self-games -----------------------------------------------------------------

def self_game_jmin(h_j, shrink: float = 0.99):
    """Shrink the smallest coordinate (first one on ties)."""
    out = _vec(h_j).copy()
    if out.size:
        idx = int(np.argmin(out))
        out[idx] = out[idx] * shrink
    return out


def self_game_jmax(h_j, shrink: float = 0.99):
    """Shrink every coordinate except the largest (first one on ties)."""
    h_j = _vec(h_j)
    out = h_j * shrink
    if out.size:
        idx = int(np.argmax(h_j))
        out[idx] = h_j[idx]
    return out


def apply_self_game(h, variant: str, shrink: float):
    """Apply a self-game to every column of ``H`` (vectorised)."""
    if variant == "none":
        return h
    h = h.copy()
    cols = np.arange(h.shape[1])
    if variant == "jmin":
        idx = np.argmin(h, axis=0)
        h[idx, cols] = h[idx, cols] * shrink
    elif variant == "jmax":
        idx = np.argmax(h, axis=0)
        keep = h[idx, cols]
        h = h * shrink
        h[idx, cols] = keep
    else:
        raise ArgumentError(f"unknown self_game {variant!r}")
    return h


def basis_overlap(h) -> float:
    """Mean pairwise cosine similarity between the rows of ``H``."""
    h = np.asarray(h, dtype=np.float64)
    k = h.shape[0]
    if k < 2:
        return 0.0
    norms = np.linalg.norm(h, axis=1)
    norms[norms == 0] = 1.0
    u = h / norms[:, None]
    c = u @ u.T
    return float(c[np.triu_indices(k, 1)].mean())


# --- engine -----------------------------------------------------------------------

def _shards(n, workers):
    return [s for s in np.array_split(np.arange(n), max(1, workers)) if s.size]


def jacobi_iteration(x, w, h, eta, pool=None, workers=1):
    """All players step against the snapshot ``(w, h)``; returns new ``(W, H)``."""
    row_shards = _shards(x.shape[0], workers)
    col_shards = _shards(x.shape[1], workers)

    def rows(s):
        return s, row_shard_update(x[s[0]:s[-1] + 1], w[s[0]:s[-1] + 1], h, eta)

    def cols(s):
        return s, col_shard_update(x[:, s[0]:s[-1] + 1], h[:, s[0]:s[-1] + 1], w, eta)

    if pool is None:
        row_out = [rows(s) for s in row_shards]
        col_out = [cols(s) for s in col_shards]
    else:
        row_futs = [pool.submit(rows, s) for s in row_shards]
        col_futs = [pool.submit(cols, s) for s in col_shards]
        row_out = [f.result() for f in row_futs]
        col_out = [f.result() for f in col_futs]
    # barrier: commit only after every player has read the snapshot
    w_new = np.empty_like(w)
    h_new = np.empty_like(h)
    for s, block in row_out:
        w_new[s[0]:s[-1] + 1] = block
    for s, block in col_out:
        h_new[:, s[0]:s[-1] + 1] = block
    return w_new, h_new


def gauss_seidel_iteration(x, w, h, eta):
    """Row-major sweep of pair interactions, committing each one in place."""
    w = w.copy()
    h = h.copy()
    n_rows, n_cols = x.shape
    for i in range(n_rows):
        w_i = w[i]
        for j in range(n_cols):
            h_j = h[:, j]
            r = x[i, j] - _dot(w_i, h_j)
            w_next = clamp_nonneg(w_i + eta * r * h_j)
            h[:, j] = clamp_nonneg(h_j + eta * r * w_i)
            w_i = w_next
        w[i] = w_i
    return w, h


def game_fit(x, k: int, config: GameConfig | None = None, rng=0,
             workers: int = 1, init=None) -> Factorization:
    """Play the NNMF game for ``config.t_max`` rounds from a random positive start."""
    config = config or GameConfig()
    x, w, h = prepare_fit(x, k, config.t_max, rng, init)
    rec = IterationRecorder(x, w, h, config.t_max, config.snapshot_every, eta=config.eta)
    pool = ThreadPoolExecutor(workers) if workers > 1 and config.schedule == "jacobi" else None
    try:
        for t in range(1, config.t_max + 1):
            if config.schedule == "jacobi":
                w, h = jacobi_iteration(x, w, h, config.eta, pool, workers)
            else:
                w, h = gauss_seidel_iteration(x, w, h, config.eta)
            h = apply_self_game(h, config.self_game, config.shrink)
            rec.record(t, w, h)
    finally:
        if pool is not None:
            pool.shutdown()
    return Factorization(w, h, rec.trace)
