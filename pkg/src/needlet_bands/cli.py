"""Command line entry point: ``needlet-bands <experiment> [flags]``."""
from __future__ import annotations

import argparse
import sys

from needlet_bands.config import DENSITIES, EXPERIMENTS, load_config
from needlet_bands.errors import ConfigError, InvalidInputError
from needlet_bands.experiments import run_experiment
from needlet_bands.kernels import MODES

EXIT_OK, EXIT_CONFIG, EXIT_PROPERTY = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="needlet-bands", description="Needlet density band experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON file with ExperimentConfig keys")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--d", type=int, choices=(1, 2))
    p.add_argument("--density", choices=DENSITIES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--workers", type=int)
    p.add_argument("--stamp", help="fixed timestamp for output file names")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "stamp")}
    try:
        cfg = load_config(args.config, overrides)
        report = run_experiment(cfg)
    except (ConfigError, InvalidInputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rec_path, sum_path = report.write(cfg.out, args.stamp)
    verdicts = report.summary.get("verdicts", {})
    for name, ok in verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"records: {rec_path}")
    print(f"summary: {sum_path}")
    if cfg.experiment == "frame-checks" and not all(verdicts.values()):
        return EXIT_PROPERTY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
