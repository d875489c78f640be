"""Critical exponent of symmetric three-funnel surfaces against boundary length, with box/volume slope checks."""

import argparse
import csv

import numpy as np

from schottky_zeta.domains import dimension_sweep
from schottky_zeta.resonances import delta_bowen, delta_from_determinant
from schottky_zeta.schottky import funnel3

ap = argparse.ArgumentParser()
ap.add_argument("--lengths", type=float, nargs="+", default=[2.0, 4.0, 6.0, 8.0, 10.0, 12.0])
ap.add_argument("--out", default="dimension_sweep.csv")
args = ap.parse_args()

with open(args.out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["length", "delta_bowen", "delta_determinant", "box_slope", "volume_slope"])
    for ell in args.lengths:
        g = funnel3(ell, ell, ell)
        d = delta_bowen(g)
        sw = dimension_sweep(g, np.logspace(-2, -5, 13))
        row = [ell, d, delta_from_determinant(g, d), sw["box_slope"], sw["volume_slope"]]
        w.writerow(row)
        print(*(f"{x:.10g}" for x in row))
