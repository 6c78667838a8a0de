"""Print the measured cubature and needlet constants k1, k2, c0 per level.

    python scripts/constants_table.py --d 2 --levels 0 7 --mode eig
"""
import argparse

from needlet_bands.checks import empirical_constants_rows
from needlet_bands.kernels import MODES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=2, choices=(1, 2))
    ap.add_argument("--levels", type=int, nargs=2, default=[0, 6])
    ap.add_argument("--mode", default="eig", choices=MODES)
    args = ap.parse_args()
    rows = empirical_constants_rows(args.d, range(args.levels[0], args.levels[1] + 1), args.mode)
    print(f"{'j':>2} {'|Z_j|':>7} {'k1':>8} {'k2':>8} {'c0':>8}")
    for r in rows:
        print(f"{r['level']:>2} {r['size']:>7} {r['k1']:>8.3f} {r['k2']:>8.3f} {r['c0']:>8.4f}")


if __name__ == "__main__":
    main()
