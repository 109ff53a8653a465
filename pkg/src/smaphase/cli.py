"""Command line entry point: ``smaphase run|wells|gradcheck``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import experiment
from .audit import gradient_audit
from .material import NoWells, default_params, martensite_wells
from .output import write_artifacts

SEED_ENV = "SMAPHASE_SEED"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smaphase",
        description="Martensitic phase combinations in SMA wires and patches by GA + BFGS.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=experiment.PRESET_NAMES)
    src.add_argument("--config", help="key=value configuration file")
    run.add_argument("--seed", type=int, help=f"RNG seed (falls back to ${SEED_ENV})")
    run.add_argument("--out", help="output directory (default: the configured output_dir)")
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                     help="override one configuration key; repeatable")

    wells = sub.add_parser("wells", help="print the martensite well strains")
    wells.add_argument("--dtheta", type=float, required=True, help="theta - theta0 [K]")

    grad = sub.add_parser("gradcheck", help="finite-difference audit of the energy gradient")
    grad.add_argument("--dim", type=int, choices=(1, 2), required=True)
    grad.add_argument("--order", type=int, required=True)
    grad.add_argument("--fields", type=int, default=50)
    grad.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args) -> int:
    try:
        spec = (experiment.preset(args.preset) if args.preset
                else experiment.load_config(args.config))
        if args.override:
            spec = experiment.apply_overrides(
                spec, experiment.parse_assignments(args.override))
    except (experiment.ConfigError, experiment.UnknownPreset, OSError) as exc:
        print(f"smaphase: {exc}", file=sys.stderr)
        return 2
    seed = args.seed
    if seed is None and os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            print(f"smaphase: ${SEED_ENV} is not an integer", file=sys.stderr)
            return 2
    out = args.out or spec.output_dir
    artifacts = experiment.run(spec, seed=seed)
    write_artifacts(artifacts, out)
    print(f"{spec.name}: final energy {artifacts.final_energy:.10g} "
          f"(GA best {artifacts.ga_best_energy:.10g}), "
          f"{len(artifacts.bfgs_trace)} BFGS iterations, status {artifacts.status}; wrote {out}")
    return 1 if artifacts.status == "not_converged" else 0


def _cmd_wells(args) -> int:
    try:
        plus, minus = martensite_wells(args.dtheta, default_params())
    except NoWells as exc:
        print(f"smaphase: {exc}", file=sys.stderr)
        return 1
    print(f"{plus:+.4f} {minus:+.4f}")
    return 0


def _cmd_gradcheck(args) -> int:
    if args.order < 2:
        print("smaphase: --order must be at least 2", file=sys.stderr)
        return 2
    errors = gradient_audit(args.dim, args.order, n_fields=args.fields, seed=args.seed)
    print(f"max relative error {max(errors):.3e} over {len(errors)} fields "
          f"(dim={args.dim}, order={args.order})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "wells": _cmd_wells, "gradcheck": _cmd_gradcheck}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
