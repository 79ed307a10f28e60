"""Multi-dataset benchmark with a per-dataset comparison against MU.

    python scripts/benchmark.py --datasets 10 --seeds 4 --iters 2000 --eta 0.001
"""

import argparse

import numpy as np

from nnmfgame.harness import PAPER_ALGOS, run_benchmark, write_bench, write_meta


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--datasets", type=int, default=10)
    ap.add_argument("--seeds", type=int, default=4)
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--eta", type=float, default=1e-3)
    ap.add_argument("--master-seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out-dir", default="bench_out")
    args = ap.parse_args()

    rep = run_benchmark(args.datasets, args.seeds, PAPER_ALGOS, (100, 20, 3), args.iters,
                        args.eta, args.master_seed, args.jobs)
    write_bench(rep, args.out_dir)
    write_meta(args.out_dir, rep.config, "scripts/benchmark.py")
    for algo in PAPER_ALGOS[1:]:
        ratios = np.array([rep.summary_for(d, algo)["mean"] / rep.summary_for(d, "mu")["mean"]
                           for d in range(args.datasets)])
        inside = int(np.sum((ratios >= 0.5) & (ratios <= 2.0)))
        print(f"{algo:10s} mean/MU ratio: median {np.median(ratios):.3g}, "
              f"range [{ratios.min():.3g}, {ratios.max():.3g}], {inside}/{args.datasets} in [0.5, 2]")


if __name__ == "__main__":
    main()
