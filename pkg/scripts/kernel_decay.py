"""Tabulate the weighted kernel |K(x)|(1+|x|)^{1+alpha} and the heavy-tail constant."""

import argparse

from fracksns import kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[1.2, 1.5, 1.8, 2.0])
    ap.add_argument("--x-max", type=float, default=50.0)
    ap.add_argument("--csv", help="write the last alpha's raw kernel table here")
    args = ap.parse_args()
    print("alpha,sup,argmax,tail_slope,mass_minus_one,tail_constant")
    for a in args.alphas:
        rep = kernel.decay_bound_check(a, 1, args.x_max)
        mass, _ = kernel.kernel_mass(a)
        c = kernel.heavy_tail_constant(a) if a < 2 else 0.0
        print(f"{a},{rep.sup:.6g},{rep.argmax:.4g},{rep.tail_slope:.4f},{mass - 1:.2e},{c:.6g}")
    if args.csv:
        tab = kernel.build_kernel_table(args.alphas[-1], rep.radii)
        with open(args.csv, "w") as fh:
            fh.write(tab.to_csv())


if __name__ == "__main__":
    main()
