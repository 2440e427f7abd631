"""Scan the data amplitude and report where the Picard map stops contracting."""

import argparse

import numpy as np

from fracksns import solver
from fracksns.grid import FracParams, TorusGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scales", type=float, nargs="+", default=[0.03, 0.1, 0.3, 1, 3, 10, 30, 100])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--dt", type=float, default=0.01)
    args = ap.parse_args()
    grid = TorusGrid(2, args.n)
    x, y = grid.coords()
    cfg = solver.SolverConfig(grid, FracParams(1.8, 0.7, 0.5), args.dt, args.steps, phi=np.cos(x + y),
                              picard=solver.PicardConfig(True, 50, 1e-10))
    base = solver.SystemState.from_physical(grid, np.cos(x) * np.cos(y), np.sin(x) + 0.5 * np.cos(2 * y),
                                            np.stack([np.sin(y), np.sin(x)]))
    print("scale,iterations,max_ratio,converged,contraction_failed")
    for s in args.scales:
        pr = solver.picard_solve(base.scaled(s), cfg)
        mr = max(pr.ratios) if pr.ratios else float("nan")
        print(f"{s},{len(pr.distances)},{mr:.4g},{pr.converged},{pr.contraction_failed}")


if __name__ == "__main__":
    main()
