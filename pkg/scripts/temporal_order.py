"""Empirical time-step order of the marcher on the preset smooth problem."""

import argparse

from fracksns import verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.4, 0.6, 0.8, 1.0])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--t-final", type=float, default=0.5)
    ap.add_argument("--base", type=int, default=16)
    args = ap.parse_args()
    print("beta,order")
    for b in args.betas:
        print(f"{b},{verify.temporal_order(b, n=args.n, t_final=args.t_final, base=args.base):.4f}")


if __name__ == "__main__":
    main()
