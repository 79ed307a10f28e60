"""Experiment orchestration: solver dispatch, benchmark, trajectories, cost model.

Seeding: dataset ``d`` of a study with master seed ``m`` is generated from the
seed sequence ``(m, d)``; replicate ``r`` of algorithm ``a`` on it is
initialised from ``(m, d, crc32(a), r)``.  Every run can therefore be
reproduced from the master seed alone, independently of run order.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import Factorization, init_factors, mu_fit, nals_fit, pg_fit
from .core import ArgumentError, make_rng, reconstruction_error
from .datagen import make_synthetic
from .eigengame import exact_pca, project_rows
from .game import GameConfig, game_fit

ALGORITHMS = ("mu", "pg", "nals", "game", "game-jmin", "game-jmax", "game-gs")
PAPER_ALGOS = ("mu", "game", "game-jmin", "game-jmax")


def check_algos(algos):
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad:
        raise ArgumentError(f"unknown algorithm(s) {bad}; valid: {list(ALGORITHMS)}")


def run_fit(algo: str, x, k: int, iters: int, eta: float = 1e-3, rng=0,
            snapshot_every: int = 0, workers: int = 1, shrink: float = 0.99,
            ridge: float = 1e-10, init=None) -> Factorization:
    """Run one named solver."""
    check_algos([algo])
    if algo == "mu":
        return mu_fit(x, k, iters, rng=rng, snapshot_every=snapshot_every, init=init)
    if algo == "pg":
        return pg_fit(x, k, iters, eta=eta, rng=rng, snapshot_every=snapshot_every, init=init)
    if algo == "nals":
        return nals_fit(x, k, iters, ridge=ridge, rng=rng, snapshot_every=snapshot_every,
                        init=init)
    schedule = "gauss-seidel" if algo == "game-gs" else "jacobi"
    variant = algo.split("-", 1)[1] if algo in ("game-jmin", "game-jmax") else "none"
    config = GameConfig(eta=eta, t_max=iters, schedule=schedule, self_game=variant,
                        shrink=shrink, snapshot_every=snapshot_every)
    return game_fit(x, k, config, rng=rng, workers=workers, init=init)


def dataset_seed(master: int, d: int):
    return [master, d]


def init_seed(master: int, d: int, algo: str, r: int):
    return [master, d, zlib.crc32(algo.encode()), r]


# --- benchmark ----------------------------------------------------------------------

@dataclass
class BenchReport:
    runs: list          # dicts: dataset, algo, seed, final_error, wall_ms
    summary: list       # dicts: dataset, algo, mean, sd
    config: dict = field(default_factory=dict)

    def summary_for(self, dataset, algo):
        for row in self.summary:
            if row["dataset"] == dataset and row["algo"] == algo:
                return row
        raise KeyError((dataset, algo))


def _bench_job(job):
    master, d, algo, r, dims, iters, eta = job
    i, j, k = dims
    x = make_synthetic(dataset_seed(master, d), i, j, k).x_syn
    t0 = time.perf_counter()
    fit = run_fit(algo, x, k, iters, eta=eta, rng=init_seed(master, d, algo, r))
    wall = (time.perf_counter() - t0) * 1e3
    return {"dataset": d, "algo": algo, "seed": r,
            "final_error": reconstruction_error(x, fit.w, fit.h), "wall_ms": wall}


def summarize(runs):
    """Mean and population standard deviation over replicates, sorted keys."""
    groups = {}
    for row in runs:
        groups.setdefault((row["dataset"], row["algo"]), []).append(row["final_error"])
    out = []
    for (d, a) in sorted(groups):
        vals = np.array(groups[(d, a)], dtype=np.float64)
        out.append({"dataset": d, "algo": a, "mean": float(vals.mean()),
                    "sd": float(vals.std(ddof=0))})
    return out


def run_benchmark(datasets: int = 10, seeds_per_dataset: int = 4, algos=PAPER_ALGOS,
                  dims=(100, 20, 3), iters: int = 2000, eta: float = 1e-3,
                  master_seed: int = 0, jobs: int = 1) -> BenchReport:
    if min(datasets, seeds_per_dataset, iters) < 1:
        raise ArgumentError("datasets, seeds_per_dataset and iters must all be >= 1")
    algos = list(algos)
    check_algos(algos)
    dims = tuple(int(v) for v in dims)
    work = [(master_seed, d, a, r, dims, iters, eta)
            for d in range(datasets) for a in algos for r in range(seeds_per_dataset)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            runs = list(pool.map(_bench_job, work))
    else:
        runs = [_bench_job(job) for job in work]
    runs.sort(key=lambda row: (row["dataset"], row["algo"], row["seed"]))
    config = {"datasets": datasets, "seeds_per_dataset": seeds_per_dataset, "algos": algos,
              "dims": list(dims), "iters": iters, "eta": eta, "master_seed": master_seed}
    return BenchReport(runs=runs, summary=summarize(runs), config=config)


# --- trajectories -------------------------------------------------------------------

@dataclass
class TrajectoryResult:
    snapshots: list          # dicts: algo, iter, row_index, values (J-vector)
    projected: list          # dicts: algo, iter, row_index, pc1..pck
    ratios: np.ndarray
    roughness: dict          # algo -> mean per-trajectory variance of step sizes
    pca_mean: np.ndarray
    components: np.ndarray


def step_size_variance(points) -> float:
    """Variance of the step lengths along one trajectory (a jaggedness score)."""
    points = np.asarray(points, dtype=np.float64)
    if len(points) < 3:
        return 0.0
    steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return float(steps.var())


def run_trajectories(dims=(100, 20, 3), iters: int = 2000, snapshot_every: int = 50,
                     algos=PAPER_ALGOS, eta: float = 1e-3, master_seed: int = 0,
                     n_components: int = 3) -> TrajectoryResult:
    """Fit every algorithm from one shared start and project the H-row paths."""
    if snapshot_every < 1:
        raise ArgumentError("snapshot_every must be >= 1")
    algos = list(algos)
    check_algos(algos)
    i, j, k = dims
    x = make_synthetic(dataset_seed(master_seed, 0), i, j, k).x_syn
    init = init_factors(make_rng([master_seed, 0, 1]), i, j, k)
    snapshots = []
    for algo in algos:
        fit = run_fit(algo, x, k, iters, eta=eta, snapshot_every=snapshot_every, init=init)
        for t, h in fit.trace.snapshots:
            for row in range(k):
                snapshots.append({"algo": algo, "iter": t, "row_index": row,
                                  "values": h[row].copy()})
    stacked = np.array([s["values"] for s in snapshots])
    pca = exact_pca(stacked, min(n_components, stacked.shape[1]))
    coords = project_rows(stacked, pca.components, pca.mean)
    projected = []
    for s, c in zip(snapshots, coords):
        row = {key: s[key] for key in ("algo", "iter", "row_index")}
        row.update({f"pc{p + 1}": float(c[p]) for p in range(len(c))})
        projected.append(row)
    roughness = {}
    for algo in algos:
        per_traj = []
        for row in range(k):
            pts = [s["values"] for s in snapshots
                   if s["algo"] == algo and s["row_index"] == row]
            per_traj.append(step_size_variance(pts))
        roughness[algo] = float(np.mean(per_traj))
    return TrajectoryResult(snapshots=snapshots, projected=projected,
                            ratios=pca.explained_variance_ratio, roughness=roughness,
                            pca_mean=pca.mean, components=pca.components)


# --- cost model ---------------------------------------------------------------------

@dataclass
class CostEstimate:
    algorithm: str
    terms: list     # (label, expression, value) per term
    total: int


def cost_model(i: int, j: int, k: int):
    """Per-iteration FLOP-scale terms for MU and for the NNMF game."""
    if min(i, j, k) < 1:
        raise ArgumentError("dimensions must be positive")
    mu_terms = [
        ("H: W^T X", "I*J*K", i * j * k),
        ("H: W^T W H", "I*K^2 + J*K^2", i * k * k + j * k * k),
        ("H: divide", "K*J", k * j),
        ("H: multiply", "K*J", k * j),
        ("W: X H^T", "I*J*K", i * j * k),
        ("W: W H H^T", "J*K^2 + I*K^2", j * k * k + i * k * k),
        ("W: divide", "I*K", i * k),
        ("W: multiply", "I*K", i * k),
    ]
    game_terms = [
        ("W: pair gradients", "I*J*K^2", i * j * k * k),
        ("W: pair steps", "I*J*K", i * j * k),
        ("H: pair gradients", "I*J*K^2", i * j * k * k),
        ("H: pair steps", "I*J*K", i * j * k),
    ]
    return [CostEstimate("mu", mu_terms, sum(t[2] for t in mu_terms)),
            CostEstimate("game", game_terms, sum(t[2] for t in game_terms))]


# --- config files and output helpers --------------------------------------------------

def parse_config(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment.  Keys use underscores."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ArgumentError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text())


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def trace_csv(fit: Factorization) -> str:
    rows = [{"iter": t + 1, "error": e, "wall_ms": w}
            for t, (e, w) in enumerate(zip(fit.trace.errors, fit.trace.wall_ms))]
    return rows_to_csv(rows, ["iter", "error", "wall_ms"])


def snapshot_csv(snapshots, with_algo: bool) -> str:
    if not snapshots:
        return ""
    width = len(snapshots[0]["values"])
    cols = (["algo"] if with_algo else []) + ["iter", "row_index"] + [f"v{c}" for c in range(width)]
    rows = []
    for s in snapshots:
        row = {"iter": s["iter"], "row_index": s["row_index"], "algo": s.get("algo")}
        row.update({f"v{c}": float(v) for c, v in enumerate(s["values"])})
        rows.append(row)
    return rows_to_csv(rows, cols)


def fit_snapshots(fit: Factorization):
    return [{"iter": t, "row_index": r, "values": h[r]}
            for t, h in fit.trace.snapshots for r in range(h.shape[0])]


def write_bench(report: BenchReport, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.csv").write_text(
        rows_to_csv(report.runs, ["dataset", "algo", "seed", "final_error", "wall_ms"]))
    (out / "bench_summary.csv").write_text(
        rows_to_csv(report.summary, ["dataset", "algo", "mean", "sd"]))


def write_meta(out_dir, config: dict, command: str) -> None:
    meta = {"command": command, "config": config, "master_seed": config.get("master_seed"),
            "versions": {"nnmfgame": __version__, "numpy": np.__version__,
                         "python": platform.python_version()}}
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    (Path(out_dir) / "meta.json").write_text(json.dumps(meta, indent=2, default=_json_default))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if hasattr(o, "__dataclass_fields__"):
        return asdict(o)
    raise TypeError(type(o))
