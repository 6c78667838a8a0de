"""Compare the bias ratio sequence 2^{j alpha} ||A_j f_alpha - f_alpha|| under both kernel scalings.

    python scripts/bias_modes.py --alphas 0.5 1.5 3.0 --levels 3 8
"""
import argparse

from needlet_bands.densities import bias_at_pole, bias_ratios, make_falpha_density
from needlet_bands.kernels import DEG, EIG, KernelSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.5, 1.5])
    ap.add_argument("--levels", type=int, nargs=2, default=[3, 8])
    args = ap.parse_args()
    levels = range(args.levels[0], args.levels[1] + 1)
    print("alpha mode  " + " ".join(f"j={j:<8}" for j in levels) + " spread")
    for alpha in args.alphas:
        z = make_falpha_density(alpha).normalizer
        for mode in (DEG, EIG):
            r = bias_ratios(alpha, levels, mode)
            vals = [r[j] / z for j in levels]
            print(f"{alpha:<5} {mode:<5} " + " ".join(f"{v:<10.5f}" for v in vals) + f" {max(vals) / min(vals):.4f}")
        pole = [2.0 ** (j * alpha) * bias_at_pole(alpha, KernelSpec(2, j, DEG)) / z for j in levels]
        print(f"{alpha:<5} pole  " + " ".join(f"{v:<10.5f}" for v in pole))


if __name__ == "__main__":
    main()
