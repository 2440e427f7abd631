"""Measured L^q -> L^p smoothing slopes of the d = 1 kernel against -(1/alpha)(1/q - 1/p)."""

import argparse
import math

import numpy as np

from fracksns import kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tmin", type=float, default=1.0)
    ap.add_argument("--tmax", type=float, default=10.0)
    ap.add_argument("--points", type=int, default=6)
    args = ap.parse_args()
    t = np.geomspace(args.tmin, args.tmax, args.points)
    cases = [(2.0, 1.0, math.inf), (2.0, 1.0, 2.0), (1.5, 1.0, 2.0), (1.5, 1.0, math.inf),
             (1.2, 1.0, math.inf)]
    interps = {}
    print("alpha,q,p,measured,expected,rel_err")
    for a, q, p in cases:
        kern = interps.setdefault(a, kernel.KernelInterpolant(a))
        got = kernel.kernel_smoothing_check(a, q, p, t, kern=kern)
        want = kernel.expected_smoothing_slope(a, q, p)
        print(f"{a},{q},{p},{got:.5f},{want:.5f},{abs(got - want) / abs(want):.2e}")


if __name__ == "__main__":
    main()
