"""Run every experiment family at the acceptance sizes and write CSV/JSON reports.

    python scripts/run_all.py --out results --workers 1
"""
import argparse
import math
import time

from needlet_bands.config import ExperimentConfig
from needlet_bands.experiments import run_experiment

RUNS = [
    ("frame-checks", dict(experiment="frame-checks")),
    ("concentration x=2", dict(experiment="concentration", n=2000, level=3, x=2.0, reps=500, seed=1)),
    ("concentration x=0.1", dict(experiment="concentration", n=2000, level=3, x=0.1, reps=500, seed=1)),
    ("coverage uniform", dict(experiment="coverage", n=4000, reps=300, seed=7)),
    ("coverage poly", dict(experiment="coverage", density="poly", n=10_000, reps=200, seed=8)),
    ("selection poly", dict(experiment="selection", density="poly", n=10_000, reps=200, seed=8)),
    ("coverage falpha 1.5 n=2e4", dict(experiment="coverage", density="falpha", alpha=1.5, n=20_000, reps=200, seed=9)),
    ("coverage falpha 0.5 n=4e4", dict(experiment="coverage", density="falpha", alpha=0.5, n=40_000, reps=200, seed=10)),
    ("coverage falpha 1.5 n=4e4", dict(experiment="coverage", density="falpha", alpha=1.5, n=40_000, reps=200, seed=10)),
    ("selection falpha 1.5", dict(experiment="selection", density="falpha", alpha=1.5, n=20_000, reps=200, seed=9)),
    ("bias deg", dict(experiment="bias", alphas=(0.5, 1.5, 2.0), seed=11)),
    ("bias eig", dict(experiment="bias", alphas=(0.5, 1.5, 2.0), mode="eig", seed=11)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", help="substring filter on run names")
    args = ap.parse_args()
    for name, kw in RUNS:
        if args.only and args.only not in name:
            continue
        t0 = time.time()
        rep = run_experiment(ExperimentConfig(out=args.out, workers=args.workers, **kw))
        paths = rep.write(args.out)
        verdicts = rep.summary.get("verdicts", {})
        flags = " ".join(f"{k}={'PASS' if v else 'FAIL'}" for k, v in verdicts.items())
        print(f"{name:<30} {time.time() - t0:7.1f}s  {flags}")
        if "x=0.1" in name:
            print(f"{'':<30} exceedance_bar {rep.summary['exceedance_bar']:.3f} vs e^-0.1 + 0.04 = "
                  f"{math.exp(-0.1) + 0.04:.3f}")
        print(f"{'':<30} {paths[1]}")


if __name__ == "__main__":
    main()
