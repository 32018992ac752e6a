"""Command-line entry point: ``ris-iscc energy-sweep | beampattern | env-trace``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .optimize import CemConfig
from .scenario import load_scenario_json

log = logging.getLogger("ris_iscc")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ris-iscc", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("energy-sweep", help="total user energy vs. users and RIS size")
    sweep.add_argument("--users", default="4,8,12,16", type=harness.parse_int_list)
    sweep.add_argument("--elements", default="0,20,40", type=harness.parse_int_list)
    sweep.add_argument("--trials", default=100, type=int)
    sweep.add_argument("--seed", default=7, type=int)
    sweep.add_argument("--optimizer", default="ao", choices=harness.OPTIMIZERS)
    sweep.add_argument("--config", help="scenario JSON (scalar overrides or a full scenario)")
    sweep.add_argument("--workers", default=1, type=int)
    sweep.add_argument("--cem-population", default=64, type=int)
    sweep.add_argument("--cem-elites", default=8, type=int)
    sweep.add_argument("--cem-iterations", default=50, type=int)
    sweep.add_argument("--out", required=True, help="output directory")

    bp = sub.add_parser("beampattern", help="radar beampattern with and without RIS")
    bp.add_argument("--config", help="scenario JSON")
    bp.add_argument("--angles", default="-90:90:1", type=harness.parse_angles,
                    help="degrees, start:stop:step (stop inclusive)")
    bp.add_argument("--trials", default=50, type=int)
    bp.add_argument("--seed", default=7, type=int)
    bp.add_argument("--workers", default=1, type=int)
    bp.add_argument("--fixed-alpha", type=float, help="use this sensing weight for every user")
    bp.add_argument("--out", required=True, help="output directory")

    tr = sub.add_parser("env-trace", help="random-action conformance trace for external agents")
    tr.add_argument("--seed", default=7, type=int)
    tr.add_argument("--n", default=100, type=int, help="number of actions")
    tr.add_argument("--config", help="scenario JSON")
    tr.add_argument("--users", type=int, help="K (default 16)")
    tr.add_argument("--elements", type=int, help="M (default 40)")
    tr.add_argument("--out", required=True, help="output JSON-lines file")
    return p


def _glue_negative_values(argv):
    # "--angles -90:90:1" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for arg in it:
        if arg == "--angles":
            nxt = next(it, None)
            out.append(arg if nxt is None else f"--angles={nxt}")
        else:
            out.append(arg)
    return out


def main(argv=None) -> int:
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_scenario_json(args.config) if args.config else None
        if args.command == "energy-sweep":
            cem = CemConfig(args.cem_population, args.cem_elites, args.cem_iterations)
            harness.run_energy_sweep(args.users, args.elements, args.trials, args.seed,
                                     args.optimizer, args.out, args.workers, config, cem)
        elif args.command == "beampattern":
            harness.run_beampattern(config, args.angles, args.seed, args.trials, args.out, args.workers,
                                    args.fixed_alpha)
        else:
            harness.run_env_trace(args.seed, args.n, args.out, config, args.users, args.elements)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"ris-iscc: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
