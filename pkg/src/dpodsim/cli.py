"""Command line entry point: ``dpodsim simulate | train | selftest``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import PRESETS, load_config
from .dpod import load_models, save_models
from .simulator import Link, format_csv, run_sweep, train_all


def _overrides(args) -> dict:
    out = {}
    sweep = {}
    if getattr(args, "snr", None) is not None:
        sweep["snr_db"] = args.snr
    if getattr(args, "trials", None) is not None:
        sweep["trials"] = args.trials
    if getattr(args, "symbols_per_trial", None) is not None:
        sweep["symbols_per_trial"] = args.symbols_per_trial
    if sweep:
        out["sweep"] = sweep
    if args.seed is not None:
        out["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        out["workers"] = args.workers
    return out


def _select(cfg, names):
    if not names:
        return cfg
    wanted = [n.strip() for n in names.split(",") if n.strip()]
    known = {a.name for a in cfg.algorithms}
    missing = [n for n in wanted if n not in known]
    if missing:
        raise SystemExit(f"unknown algorithm(s) {missing}; configured: {sorted(known)}")
    return replace(cfg, algorithms=tuple(cfg.algorithm(n) for n in wanted))


def _config(args):
    return _select(load_config(args.config, args.preset, _overrides(args)), args.algorithms)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    models = None
    if args.models:
        stored = load_models(args.models)
        missing = [a.name for a in cfg.algorithms if a.name not in stored]
        if missing:
            raise SystemExit(f"model file lacks {missing}")
        models = {a.name: stored[a.name] for a in cfg.algorithms}
    output = args.output if args.output is not None else cfg.output
    points, _ = run_sweep(cfg, models, output=output, append=args.append)
    if output is None:
        sys.stdout.write(format_csv(points))
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    models = train_all(cfg, Link(cfg))
    save_models(models, args.model_out)
    logging.getLogger("dpodsim").info("wrote %d model(s) to %s", len(models), args.model_out)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return 0 if run_selftest(seed=args.seed or 0) else 1


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML config; sections override the preset")
    p.add_argument("--preset", choices=sorted(PRESETS), help="base preset (default desk)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--algorithms", help="comma-separated subset of configured algorithm names")
    p.add_argument("--workers", type=int, help="parallel trial workers; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpodsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a BER sweep and write CSV")
    _common(sim)
    sim.add_argument("--snr", help="SNR grid: lo:step:hi or a comma list (dB)")
    sim.add_argument("--trials", type=int, help="channel draws per point")
    sim.add_argument("--symbols-per-trial", type=int)
    sim.add_argument("--output", help="CSV path (default: stdout)")
    sim.add_argument("--append", action="store_true", help="append rows to an existing CSV")
    sim.add_argument("--models", help="JSON model file from 'train'; skips training")
    sim.set_defaults(func=cmd_simulate)

    tr = sub.add_parser("train", help="train the configured compensators")
    _common(tr)
    tr.add_argument("--model-out", required=True, help="JSON output path")
    tr.set_defaults(func=cmd_train)

    st = sub.add_parser("selftest", help="quick property checks")
    st.add_argument("--seed", type=int)
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 and args.command == "selftest" else \
        (logging.DEBUG if args.verbose > 1 else logging.INFO)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
