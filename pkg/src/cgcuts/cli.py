"""Command-line driver: `presolve` runs the full pipeline on an MPS file,
`bench` times the clique stages on the synthetic generator."""
from __future__ import annotations

import argparse
import sys

from .bench import BenchConfig, run_bench, warn_if_slow
from .pipeline import Limits, run_pipeline
from .presolve import InfeasibleError


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limits", help="JSON file overriding the default limits")
    p.add_argument("--time-limit", type=float, default=None,
                   help="seconds before the pipeline degrades to pass-through")
    p.add_argument("--exec-mode", choices=("serial", "thread", "process"),
                   default="process")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgcuts")
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("presolve", help="run the conflict-graph pipeline")
    pre.add_argument("model", help="input MPS file")
    pre.add_argument("--out-model", default=None, help="augmented MPS output")
    pre.add_argument("--out-cuts", default=None, help="user-cut pool output")
    pre.add_argument("--stats-json", default=None, help="write run stats JSON")
    _add_common(pre)

    bench = sub.add_parser("bench", help="synthetic parallel benchmark")
    bench.add_argument("--n-b", type=int, default=2000)
    bench.add_argument("--cliques", type=int, default=5000)
    bench.add_argument("--prob", type=float, default=0.01)
    bench.add_argument("--thread-counts", default="1,2,4,8",
                       help="comma-separated thread counts to sweep")
    bench.add_argument("--reps", type=int, default=3)
    bench.add_argument("--csv", default=None, help="write the report CSV here")
    _add_common(bench)
    return parser


def _limits(args) -> Limits:
    limits = Limits.from_json(args.limits) if args.limits else Limits()
    if args.time_limit is not None:
        limits.time_limit_s = args.time_limit
    return limits


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presolve":
        out_model = args.out_model or args.model + ".aug.mps"
        out_cuts = args.out_cuts or args.model + ".cuts"
        try:
            stats = run_pipeline(
                args.model,
                limits=_limits(args),
                k=args.threads,
                seed=args.seed,
                out_model=out_model,
                out_cuts=out_cuts,
                mode=args.exec_mode,
            )
        except InfeasibleError as exc:
            print(f"model proven infeasible: {exc}", file=sys.stderr)
            return 2
        if args.stats_json:
            with open(args.stats_json, "w") as fh:
                fh.write(stats.to_json())
        print(f"wrote {out_model} and {out_cuts}")
        return 0

    cfg = BenchConfig(
        n_b=args.n_b,
        num_cliques=args.cliques,
        membership_prob=args.prob,
        threads=tuple(int(t) for t in args.thread_counts.split(",")),
        repetitions=args.reps,
        seed=args.seed,
    )
    report = run_bench(cfg, limits=_limits(args), mode=args.exec_mode)
    csv_text = report.to_csv()
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    print(csv_text, end="")
    for note in report.notes:
        print(f"# {note}")
    warn_if_slow(report)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
