"""Dense matrix helpers shared by every solver.

Matrices are plain 2-D float64 ``numpy`` arrays.  Everything here is a pure
function of its inputs, so arrays can be shared read-only between workers.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np


class ShapeError(ValueError):
    """Operand shapes do not conform."""


class ArgumentError(ValueError):
    """An argument is outside its documented domain."""


class DivergedError(RuntimeError):
    """A fixed-step solver blew up; the message names the offending step size."""


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator seeded through ``SeedSequence``.

    ``seed`` may be an int or a sequence of ints (used for hierarchical
    seeding in the benchmark harness).
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def as_mat(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    """Matrix product with a fixed left-to-right summation over the inner index.

    Row ``i`` of the result depends only on row ``i`` of ``a`` and is computed
    with the same operation sequence no matter how many rows ``a`` has, so
    products over row shards are bit-identical to the full product.
    """
    a = as_mat(a)
    b = as_mat(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} x {b.shape}")
    out = np.zeros((a.shape[0], b.shape[1]))
    for k in range(a.shape[1]):
        out += a[:, k : k + 1] * b[k : k + 1, :]
    return out


def _check_factor_shapes(x, w, h):
    if w.shape[1] != h.shape[0] or x.shape != (w.shape[0], h.shape[1]):
        raise ShapeError(f"X {x.shape}, W {w.shape}, H {h.shape} do not conform")


def reconstruction_error(x, w, h) -> float:
    """Frobenius norm ``||X - WH||_F`` (not squared)."""
    x, w, h = as_mat(x), as_mat(w), as_mat(h)
    _check_factor_shapes(x, w, h)
    r = x - matmul(w, h)
    return float(np.sqrt(np.sum(r * r)))


def relative_error(x, w, h) -> float:
    x = as_mat(x)
    return reconstruction_error(x, w, h) / float(np.sqrt(np.sum(x * x)))


def clamp_nonneg(a) -> np.ndarray:
    # maximum(0, -0.0) keeps the sign bit of the first arg, so add 0.0 to
    # normalise negative zeros and keep the op idempotent bit-for-bit
    return np.maximum(np.asarray(a, dtype=np.float64), 0.0) + 0.0


def rand_uniform(rng: np.random.Generator, rows: int, cols: int,
                 lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    if not lo < hi:
        raise ArgumentError(f"rand_uniform needs lo < hi, got lo={lo}, hi={hi}")
    if rows < 0 or cols < 0:
        raise ArgumentError("negative dimension")
    return lo + (hi - lo) * rng.random((rows, cols))


# --- plain-text matrix format -------------------------------------------------
#   first line: "rows cols"; then one line per row of space-separated values.

def format_mat(m) -> str:
    m = as_mat(m)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def parse_mat(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ShapeError("empty matrix file")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ShapeError(f"bad header line: {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != rows:
        raise ShapeError(f"header says {rows} rows, found {len(body)}")
    m = np.zeros((rows, cols))
    for i, ln in enumerate(body):
        vals = ln.split()
        if len(vals) != cols:
            raise ShapeError(f"row {i}: expected {cols} values, found {len(vals)}")
        m[i] = [float(v) for v in vals]
    if not np.all(np.isfinite(m)):
        raise ArgumentError("matrix contains non-finite values")
    return m


def write_mat(path: str | os.PathLike, m) -> None:
    Path(path).write_text(format_mat(m))


def read_mat(path: str | os.PathLike) -> np.ndarray:
    return parse_mat(Path(path).read_text())
