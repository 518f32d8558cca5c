"""Command-line front end.

Subcommands:
  run       execute an experiment from a JSON config file
  predict   evaluate a theorem's limit CDF on a grid (CSV to stdout/file)
  tw-table  tabulate the two Tracy-Widom CDFs (CSV)
  verify    quick pathwise suites: DP vs brute force, correspondence oracle
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--threads", type=int, default=None, help="worker thread count")
    p.add_argument("--out", type=str, default=None, help="output directory")


def cmd_run(args: argparse.Namespace) -> int:
    from .checks import CHECKS, check_local_increments
    from .config import ExperimentConfig
    from .report import write_report
    from .runner import RUNNERS

    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    if args.out is not None:
        cfg.out_dir = args.out
    out_dir = Path(cfg.out_dir or f"out_{cfg.experiment}")
    if cfg.experiment in RUNNERS:
        report = RUNNERS[cfg.experiment](cfg)
        path = report.write(out_dir)
    elif cfg.experiment in CHECKS:
        data = CHECKS[cfg.experiment](cfg)
        seconds = data.pop("seconds", None)
        path = write_report(data, out_dir, {"total_seconds": seconds} if seconds else None)
    elif cfg.experiment == "slow_decorrelation":
        data = check_local_increments(cfg)
        path = write_report(data, out_dir)
    else:
        print(f"no runner for experiment {cfg.experiment!r}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    from .. import twdist
    from .report import write_csv

    grid = np.arange(args.min, args.max + 1e-12, args.step)
    if args.experiment == "two_speed":
        params = twdist.ShockLawParams.from_alpha(args.alpha)
        vals = twdist.two_speed_prediction(params, grid)
        header = ["s", "cdf"]
    elif args.experiment == "bernoulli":
        params = twdist.BernoulliLawParams.from_densities(args.rho_minus, args.rho_plus)
        vals = twdist.bernoulli_prediction(params, grid)
        header = ["u", "cdf"]
    elif args.experiment == "multipoint":
        params = twdist.MultipointLawParams.from_beta(args.beta)
        vals = np.array(
            [twdist.multipoint_prediction(params, [0.0], [float(s)]) for s in grid]
        )
        header = ["s", "cdf"]
    else:
        print(f"unknown experiment {args.experiment!r}", file=sys.stderr)
        return 2
    rows = list(zip(grid.tolist(), np.asarray(vals).tolist()))
    if args.out:
        write_csv(args.out, header, rows)
        print(f"wrote {args.out}")
    else:
        from .report import format_number

        print(",".join(header))
        for r in rows:
            print(",".join(format_number(v) for v in r))
    return 0


def cmd_tw_table(args: argparse.Namespace) -> int:
    from .. import twdist
    from .report import format_number, write_csv

    grid = np.arange(args.min, args.max + 1e-12, args.step)
    gue = twdist.gue_law()
    goe = twdist.goe_law()
    rows = [(float(s), float(gue.cdf(s)), float(goe.cdf(s))) for s in grid]
    header = ["s", "F_GUE", "F_GOE"]
    if args.out:
        write_csv(args.out, header, rows)
        print(f"wrote {args.out}")
    else:
        print(",".join(header))
        for r in rows:
            print(",".join(format_number(v) for v in r))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    import random as _random

    from ..lattice import Window
    from ..lpp import StartSet, brute_force_passage, passage_times
    from ..weights import RateField, SeedPlan, sample_weights
    from .checks import run_correspondence
    from .config import ExperimentConfig

    seed = args.seed if args.seed is not None else 20170401
    rng = _random.Random(seed)
    failures = 0
    for case in range(20):
        ni = rng.randint(2, 6)
        nj = rng.randint(2, 6)
        window = Window(1, ni, 1, nj)
        weights = sample_weights(RateField.homogeneous(1.0), window, SeedPlan(seed, case))
        grid = passage_times(weights, StartSet(points=((1, 1),)), window)
        for j in range(1, nj + 1):
            for i in range(1, ni + 1):
                if grid.time_or_neg_inf((i, j)) != brute_force_passage(weights, (1, 1), (i, j)):
                    failures += 1
    print(f"dp-vs-brute-force: {'PASS' if failures == 0 else f'FAIL ({failures})'}")

    cfg = ExperimentConfig(
        experiment="correspondence", t=50, n_replicas=10, probes_per_replica=20,
        window_size=15, master_seed=seed,
    )
    res = run_correspondence(cfg)
    ok = res["table_mismatches"] == 0 and res["indicator_violations"] == 0
    print(
        f"correspondence: {'PASS' if ok else 'FAIL'} "
        f"({res['probes']} probes, {res['table_mismatches']} table mismatches, "
        f"{res['indicator_violations']} violations)"
    )
    return 0 if failures == 0 and ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lppshock", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, help="JSON config path")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_pred = sub.add_parser("predict", help="evaluate a limit CDF on a grid")
    p_pred.add_argument("--experiment", required=True, choices=["two_speed", "bernoulli", "multipoint"])
    p_pred.add_argument("--alpha", type=float, default=0.5)
    p_pred.add_argument("--rho-minus", dest="rho_minus", type=float, default=0.25)
    p_pred.add_argument("--rho-plus", dest="rho_plus", type=float, default=0.75)
    p_pred.add_argument("--beta", type=float, default=1.0)
    p_pred.add_argument("--min", type=float, default=-8.0)
    p_pred.add_argument("--max", type=float, default=8.0)
    p_pred.add_argument("--step", type=float, default=0.25)
    p_pred.add_argument("--out", type=str, default=None)
    p_pred.set_defaults(fn=cmd_predict)

    p_tw = sub.add_parser("tw-table", help="tabulate F_GUE and F_GOE")
    p_tw.add_argument("--min", type=float, default=-10.0)
    p_tw.add_argument("--max", type=float, default=6.0)
    p_tw.add_argument("--step", type=float, default=0.1)
    p_tw.add_argument("--out", type=str, default=None)
    p_tw.set_defaults(fn=cmd_tw_table)

    p_ver = sub.add_parser("verify", help="pathwise oracle suites")
    p_ver.add_argument("--seed", type=int, default=None)
    p_ver.set_defaults(fn=cmd_verify)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
