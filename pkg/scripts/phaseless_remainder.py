"""sup |I_11 - I_1| on the unit circle as the array radius grows.

Rings get about 4 k R nodes so quadrature error stays out of the numbers.
Usage: python3 scripts/phaseless_remainder.py [--radii 10 20 40] [--bc clamped]
"""

import argparse

import numpy as np

from bhm import imaging
from bhm.forward import BoundaryCondition, excitation_incidences, measure, solve_batch
from bhm.geometry import ArrayGeometry, Circle
from bhm.specfun import WaveParams


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--radii", type=float, nargs="+", default=[10.0, 20.0, 40.0])
    parser.add_argument("--bc", default="clamped")
    parser.add_argument("--n", type=int, default=31, help="grid points per side on [-6, 6]^2")
    args = parser.parse_args()
    params = WaveParams(2 * np.pi)
    grid = imaging.GridSpec((-6.0, 6.0, -6.0, 6.0), args.n, args.n)
    bc = BoundaryCondition.parse(args.bc)
    prev = None
    for R in args.radii:
        N = int(8 * np.ceil(4 * params.kappa * R / 8))
        array = ArrayGeometry(R, R, N, N, 128)
        sol = solve_batch(params, (Circle(),), bc, excitation_incidences(array, "point"))
        i1 = imaging.image(1, measure(sol, array, "u", "point"), grid).values
        i11 = imaging.image(11, measure(sol, array, "abs_total", "point"), grid).values
        sup = float(np.abs(i11 - i1).max())
        ratio = "" if prev is None else f" ratio {sup / prev:.3f}"
        print(f"R = {R:5.1f}  N = {N:4d}  sup|I11 - I1| = {sup:.4e}  max|I1| = {np.abs(i1).max():.4e}{ratio}")
        prev = sup


if __name__ == "__main__":
    main()
