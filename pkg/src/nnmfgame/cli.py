"""Command line interface: ``nnmfgame {gen,fit,bench,traj,pca,cost}``.

Every subcommand accepts ``--config FILE`` holding ``key = value`` lines whose
keys are the long option names (dashes or underscores); flags given on the
command line override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .core import make_rng, read_mat, write_mat
from .datagen import GAUSS3, make_synthetic
from .eigengame import eigengame_pca, exact_pca
from .game import SCHEDULES, SELF_GAMES, GameConfig, game_fit


def _int_list(text):
    return [int(v) for v in str(text).replace(" ", "").split(",") if v]


def _str_list(text):
    return [v for v in str(text).replace(" ", "").split(",") if v]


def build_parser():
    p = argparse.ArgumentParser(prog="nnmfgame", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="key = value file with defaults for this command")
        return sp

    g = add("gen", "generate a synthetic dataset")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--i", type=int, default=100, help="rows (observations)")
    g.add_argument("--j", type=int, default=20, help="columns (dimensions)")
    g.add_argument("--k", type=int, default=3, help="latent factors")
    g.add_argument("--out-prefix", default="syn")

    f = add("fit", "factorize a matrix file")
    f.add_argument("--algo", default="game", choices=["mu", "pg", "nals", "game"])
    f.add_argument("--in", dest="input", required=False)
    f.add_argument("--out-prefix", default="fit")
    f.add_argument("--k", type=int, default=3)
    f.add_argument("--iters", type=int, default=2000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--eta", type=float, default=1e-3)
    f.add_argument("--ridge", type=float, default=1e-10)
    f.add_argument("--schedule", default="jacobi", choices=SCHEDULES)
    f.add_argument("--self-game", default="none", choices=SELF_GAMES)
    f.add_argument("--shrink", type=float, default=0.99)
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--snapshot-every", type=int, default=0)

    b = add("bench", "multi-dataset, multi-initialization benchmark")
    b.add_argument("--datasets", type=int, default=10)
    b.add_argument("--seeds", type=int, default=4, help="initializations per dataset")
    b.add_argument("--algos", type=_str_list, default=list(harness.PAPER_ALGOS))
    b.add_argument("--dims", type=_int_list, default=[100, 20, 3], help="I,J,K")
    b.add_argument("--iters", type=int, default=2000)
    b.add_argument("--eta", type=float, default=1e-3)
    b.add_argument("--master-seed", type=int, default=0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out-dir", default="bench_out")

    t = add("traj", "H-row trajectories projected on their principal components")
    t.add_argument("--dims", type=_int_list, default=[100, 20, 3], help="I,J,K")
    t.add_argument("--iters", type=int, default=2000)
    t.add_argument("--snapshot-every", type=int, default=50)
    t.add_argument("--algos", type=_str_list, default=list(harness.PAPER_ALGOS))
    t.add_argument("--eta", type=float, default=1e-3)
    t.add_argument("--master-seed", type=int, default=0)
    t.add_argument("--out-dir", default="traj_out")

    c = add("pca", "principal components of a matrix file")
    c.add_argument("--in", dest="input", required=False)
    c.add_argument("--k", type=int, default=3)
    c.add_argument("--method", default="exact", choices=["exact", "eigengame"])
    c.add_argument("--iters", type=int, default=2000)
    c.add_argument("--alpha", type=float, default=0.01)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out-dir", default=".")

    m = add("cost", "per-iteration FLOP model for MU and the game")
    m.add_argument("--i", type=int, default=100)
    m.add_argument("--j", type=int, default=20)
    m.add_argument("--k", type=int, default=3)
    return p


def _apply_config(parser, argv):
    args, _ = parser.parse_known_args(argv)
    if not getattr(args, "config", None):
        return parser.parse_args(argv)
    cfg = harness.load_config(args.config)
    sp = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest for a in sp._actions}
    aliases = {"in": "input"}
    cfg = {aliases.get(k, k): v for k, v in cfg.items()}
    unknown = sorted(set(cfg) - dests)
    if unknown:
        raise harness.ArgumentError(f"unknown config keys for {args.command}: {unknown}")
    sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def _need_input(args):
    if not args.input:
        raise harness.ArgumentError("--in is required (flag or config key 'in')")
    return read_mat(args.input)


def cmd_gen(args):
    ds = make_synthetic(args.seed, args.i, args.j, args.k)
    prefix = args.out_prefix
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    write_mat(f"{prefix}.X.mat", ds.x_syn)
    write_mat(f"{prefix}.W.mat", ds.w_syn)
    write_mat(f"{prefix}.H.mat", ds.h_syn)
    meta = {"seed": args.seed, "I": args.i, "J": args.j, "K": args.k, "kernel": list(GAUSS3)}
    Path(f"{prefix}.meta.json").write_text(json.dumps(meta, indent=2))


def cmd_fit(args):
    x = _need_input(args)
    algo = args.algo
    if algo == "game":
        cfg = GameConfig(eta=args.eta, t_max=args.iters, schedule=args.schedule,
                         self_game=args.self_game, shrink=args.shrink,
                         snapshot_every=args.snapshot_every)
        fit = game_fit(x, args.k, cfg, rng=args.seed, workers=args.workers)
    else:
        fit = harness.run_fit(algo, x, args.k, args.iters, eta=args.eta, rng=args.seed,
                              snapshot_every=args.snapshot_every, ridge=args.ridge)
    prefix = args.out_prefix
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    write_mat(f"{prefix}.W.mat", fit.w)
    write_mat(f"{prefix}.H.mat", fit.h)
    Path(f"{prefix}.trace.csv").write_text(harness.trace_csv(fit))
    if args.snapshot_every:
        Path(f"{prefix}.traj.csv").write_text(
            harness.snapshot_csv(harness.fit_snapshots(fit), with_algo=False))
    print(f"{algo}: final error {fit.trace.errors[-1]:.6g}")


def cmd_bench(args):
    report = harness.run_benchmark(args.datasets, args.seeds, args.algos, tuple(args.dims),
                                   args.iters, args.eta, args.master_seed, args.jobs)
    harness.write_bench(report, args.out_dir)
    harness.write_meta(args.out_dir, report.config, "bench")
    for row in report.summary:
        print(f"dataset {row['dataset']:2d} {row['algo']:10s} "
              f"{row['mean']:.6g} +/- {row['sd']:.3g}")


def cmd_traj(args):
    res = harness.run_trajectories(tuple(args.dims), args.iters, args.snapshot_every,
                                   args.algos, args.eta, args.master_seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "traj.csv").write_text(harness.snapshot_csv(res.snapshots, with_algo=True))
    pcs = [k for k in res.projected[0] if k.startswith("pc")]
    (out / "traj_projected.csv").write_text(
        harness.rows_to_csv(res.projected, ["algo", "iter", "row_index"] + pcs))
    (out / "ratios.csv").write_text(harness.rows_to_csv(
        [{"component": i + 1, "ratio": float(r)} for i, r in enumerate(res.ratios)],
        ["component", "ratio"]))
    config = dict(vars(args))
    config.update({"explained_variance_ratio": res.ratios, "roughness": res.roughness})
    harness.write_meta(out, config, "traj")
    print("explained variance ratios: " + ", ".join(f"{r:.3f}" for r in res.ratios))
    for algo, v in res.roughness.items():
        print(f"{algo:10s} step-size variance {v:.3e}")


def cmd_pca(args):
    x = _need_input(args)
    if args.method == "exact":
        res = exact_pca(x, args.k)
    else:
        res = eigengame_pca(x, args.k, args.iters, args.alpha, make_rng(args.seed))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_mat(out / "components.mat", res.components)
    rows = [{"component": i + 1, "variance": float(v), "ratio": float(r)}
            for i, (v, r) in enumerate(zip(res.explained_variance, res.explained_variance_ratio))]
    (out / "ratios.csv").write_text(harness.rows_to_csv(rows, ["component", "variance", "ratio"]))


def cmd_cost(args):
    rows = []
    for est in harness.cost_model(args.i, args.j, args.k):
        for label, expr, value in est.terms:
            rows.append({"algorithm": est.algorithm, "term": label, "expression": expr,
                         "value": value})
        rows.append({"algorithm": est.algorithm, "term": "total", "expression": "",
                     "value": est.total})
    sys.stdout.write(harness.rows_to_csv(rows, ["algorithm", "term", "expression", "value"]))


COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "bench": cmd_bench, "traj": cmd_traj,
            "pca": cmd_pca, "cost": cmd_cost}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        COMMANDS[args.command](args)
    except Exception as exc:  # one parseable line, nonzero exit
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
