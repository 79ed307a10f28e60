"""Synthetic low-rank non-negative data: smooth bases mixed by uniform weights."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ArgumentError, ShapeError, as_mat, make_rng, matmul, rand_uniform

_SIDE = math.exp(-0.5)
# 3-tap Gaussian, sigma = 1, normalised to unit mass
GAUSS3 = (_SIDE / (1 + 2 * _SIDE), 1 / (1 + 2 * _SIDE), _SIDE / (1 + 2 * _SIDE))


@dataclass
class SyntheticDataset:
    w_syn: np.ndarray
    h_syn: np.ndarray
    x_syn: np.ndarray
    seed: object
    kernel: tuple = GAUSS3


def smooth_rows(m, kernel=GAUSS3) -> np.ndarray:
    """Convolve every row with a 3-tap kernel, replicating the edge samples."""
    m = as_mat(m)
    kernel = tuple(float(c) for c in kernel)
    if len(kernel) != 3:
        raise ArgumentError("kernel must have exactly 3 taps")
    if min(kernel) < 0 or abs(sum(kernel) - 1.0) > 1e-12:
        raise ArgumentError(f"kernel must be non-negative with unit sum, got {kernel}")
    if m.shape[1] < 1:
        raise ShapeError("smooth_rows needs at least one column")
    padded = np.concatenate([m[:, :1], m, m[:, -1:]], axis=1)
    left, mid, right = kernel
    return left * padded[:, :-2] + mid * padded[:, 1:-1] + right * padded[:, 2:]


def make_synthetic(seed, i: int = 100, j: int = 20, k: int = 3,
                   kernel=GAUSS3) -> SyntheticDataset:
    """Draw ``W ~ U(0,1)`` (I x K) and smoothed ``H ~ U(0,1)`` (K x J); ``X = WH``.

    ``seed`` is anything :func:`make_rng` accepts; the same seed always gives
    the same dataset bit-for-bit.
    """
    if min(i, j, k) < 1:
        raise ArgumentError(f"dimensions must be >= 1, got I={i}, J={j}, K={k}")
    rng = make_rng(seed)
    w = rand_uniform(rng, i, k, 0.0, 1.0)
    h = smooth_rows(rand_uniform(rng, k, j, 0.0, 1.0), kernel)
    return SyntheticDataset(w_syn=w, h_syn=h, x_syn=matmul(w, h), seed=seed,
                            kernel=tuple(kernel))
