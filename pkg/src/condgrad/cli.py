"""Command-line entry point ``cgc``.

Subcommands: ``train``, ``check-lmo``, ``check-pathnorm``, ``gap-bench``.
Exit codes: 0 success, 2 config error, 3 verification failure, 4 runtime or
numerical error.
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import parse_config
from .exceptions import CondGradError, ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_RUNTIME = 4

GAP_BENCH_MAX_EXPONENT = 1.3


def _table(rows):
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _seed_config(args):
    """Config for the verification commands: only ``seed`` is used.

    Falls back to ``CGC_SEED`` and then to 0.
    """
    env = dict(os.environ)
    if not env.get("CGC_SEED"):
        env["CGC_SEED"] = "0"
    return parse_config(args.config, args.set or [], env=env, check_constraint=False)


def cmd_train(args):
    from .harness.experiment import SUMMARY_NAME, run_experiment

    cfg = parse_config(args.config, args.set or [])
    if args.out:
        cfg["out"] = args.out
    csv_path = run_experiment(cfg)
    summary = json.loads((Path(csv_path).parent / SUMMARY_NAME).read_text())
    rows = [(k, _fmt(summary[k])) for k in (
        "dataset", "layers", "optimizer", "constraint", "lambda", "iterations",
        "final_train_err", "final_test_err", "final_constraint_value", "total_wall_ms",
    )]
    print(_table(rows))
    if summary["iterations"] == 0:
        print("note: optim.iters = 0, empty run (header-only CSV)")
    print(f"metrics: {csv_path}")
    return EXIT_OK


def cmd_check_lmo(args):
    from .harness.checks import check_lmo

    cfg = _seed_config(args)
    kinds = None if args.kind is None else [k.strip() for k in args.kind.split(",")]
    try:
        results = check_lmo(kinds, seed=cfg["seed"])
    except ValueError as err:
        raise ConfigError(str(err)) from None
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_check_pathnorm(args):
    from .harness.checks import check_pathnorm

    cfg = _seed_config(args)
    r = check_pathnorm(seed=cfg["seed"])
    print(r.line())
    print(_table([(k, _fmt(float(v))) for k, v in r.details.items()]))
    return EXIT_OK if r.passed else EXIT_VERIFY


def cmd_gap_bench(args):
    from .harness.checks import gap_bench

    cfg = _seed_config(args)
    res = gap_bench(seed=cfg["seed"])
    print(f"{'eps':>10}  iterations")
    for eps, it in zip(res["eps"], res["iterations"]):
        print(f"{eps:>10.3g}  {it}")
    print(f"instances: {res['instances']}  monotone: {res['monotone']}")
    ok = res["exponent"] <= GAP_BENCH_MAX_EXPONENT
    print(f"{'PASS' if ok else 'FAIL'}  fitted exponent {res['exponent']:.3f} (limit {GAP_BENCH_MAX_EXPONENT})")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "gap_bench.json").write_text(json.dumps(res, indent=2))
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "train": cmd_train,
    "check-lmo": cmd_check_lmo,
    "check-pathnorm": cmd_check_pathnorm,
    "gap-bench": cmd_gap_bench,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="cgc", description="Conditional-gradient training and oracle checks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="flat 'key = value' config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        if name == "check-lmo":
            p.add_argument("--kind", metavar="NAME", help="comma-separated suites: l1, linf, group, frobenius, nuclear, pathnorm, tv")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (CondGradError, ArithmeticError, ValueError, RuntimeError, OSError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
