"""Command-line entry point.

Verbs:

* ``run <config.json>`` — run an experiment config (replicates included).
* ``verify [--level quick|full]`` — run the built-in verification checks.
* ``demo-figure2 [--order ...] [--learner ...]`` — the three-group demo
  stream across five seeds, reporting final distances to the analytic target.
* ``rates <metrics.csv>`` — fit decay exponents from a metrics CSV.

Exit codes: 0 success, 1 check failure, 2 configuration error.
"""

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness, metrics, verify
from .errors import ConfigError

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def _cmd_run(args) -> int:
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, stream=replace(cfg.stream, seed=args.seed),
                      replicate_seeds=(args.seed,))
    if args.output is not None:
        cfg = replace(cfg, output_dir=args.output)
    results = harness.run_config(cfg)
    for res in results:
        final = res.records[-1]
        print(f"seed {res.seed}: status={res.status} stages={final.t} "
              f"est_err_sq={final.est_err_sq:.6g} regret={final.regret:.6g} "
              f"forgetting={final.forgetting:.6g}")
    if cfg.output_dir is not None:
        print(f"outputs written to {cfg.output_dir}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    results = verify.run_checks(level=args.level)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name} ({res.seconds:.1f}s): {res.details}")
        failed += not res.passed
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILURE


def _cmd_demo(args) -> int:
    target = np.array(harness.DEMO_METAS).mean(axis=0)
    rounded = np.array(harness.DEMO_ROUNDED_REFERENCE)
    seeds = [args.seed + i for i in range(5)]
    print(f"demo stream: {harness.DEMO_NUM_TASKS} tasks x {harness.DEMO_SAMPLES} samples, "
          f"order={args.order}, learner={args.learner}")
    print(f"analytic target {target.tolist()}, secondary reference {rounded.tolist()}")
    dists = []
    for seed in seeds:
        outdir = None
        if args.output is not None:
            outdir = str(Path(args.output) / f"{args.order}_{args.learner}_{seed}")
        cfg = harness.demo_config(args.order, args.learner, seed, output_dir=outdir)
        results = harness.run_config(cfg)
        res = results[0]
        w = res.final_state.w
        d_target = float(np.linalg.norm(w - target))
        d_rounded = float(np.linalg.norm(w - rounded))
        dists.append(d_target)
        print(f"seed {seed}: final w={np.round(w, 4).tolist()} "
              f"dist_to_target={d_target:.4f} dist_to_reference={d_rounded:.4f} "
              f"status={res.status}")
    print(f"sensitivity over 5 seeds: median {float(np.median(dists)):.4f}, "
          f"max {max(dists):.4f}")
    return EXIT_OK


def _cmd_rates(args) -> int:
    rows = harness.read_metrics_csv(args.csv)
    stages = np.array([r.t for r in rows], dtype=float)
    series = {
        "est_err_sq": np.array([r.est_err_sq for r in rows]),
        "regret_gap": np.array([r.regret - r.l_star for r in rows]),
        "forgetting_gap": np.array([r.forgetting - r.l_star for r in rows]),
        "lambda_min": np.array([r.lambda_min for r in rows]),
    }
    print(f"{args.csv}: {len(rows)} checkpoints, fitting trailing half")
    for name, values in series.items():
        try:
            fit = metrics.rate_fit(stages, values)
        except ValueError as exc:
            print(f"{name:>16}: skipped ({exc})")
            continue
        print(f"{name:>16}: exponent {fit.exponent:+.3f}  r^2 {fit.r_squared:.3f}  "
              f"window [{fit.window[0]:.0f}, {fit.window[1]:.0f}]")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conlearn",
                                     description="continual-learning experiment harness")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--seed", type=int, default=None, help="override the stream seed")
    p_run.add_argument("--output", default=None, help="override the output directory")
    p_run.set_defaults(fn=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the built-in verification checks")
    p_verify.add_argument("--level", choices=("quick", "full"), default="quick")
    p_verify.set_defaults(fn=_cmd_verify)

    p_demo = sub.add_parser("demo-figure2", help="run the three-group demo stream")
    p_demo.add_argument("--order", choices=("sequential", "random"), default="random")
    p_demo.add_argument("--learner", choices=("alg2", "sgd"), default="alg2")
    p_demo.add_argument("--seed", type=int, default=101, help="base seed (five seeds run)")
    p_demo.add_argument("--output", default=None, help="write per-seed outputs under this dir")
    p_demo.set_defaults(fn=_cmd_demo)

    p_rates = sub.add_parser("rates", help="fit decay exponents from a metrics CSV")
    p_rates.add_argument("csv", help="path to a metrics_<seed>.csv file")
    p_rates.set_defaults(fn=_cmd_rates)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
