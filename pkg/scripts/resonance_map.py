"""Resonances of a three-funnel surface in a box, plus Weyl-type growth exponents of the counting function."""

import argparse
import csv

import numpy as np

from schottky_zeta.resonances import (
    DegenerateFitError,
    delta_bowen,
    find_resonances,
    fit_weyl_exponent,
    theoretical_exponent,
)
from schottky_zeta.schottky import funnel3

ap = argparse.ArgumentParser()
ap.add_argument("--lengths", type=float, nargs=3, default=[6.0, 6.0, 6.0])
ap.add_argument("--T", type=float, default=60.0)
ap.add_argument("--out", default="resonances")
args = ap.parse_args()

g = funnel3(*args.lengths)
d = delta_bowen(g)
rs = find_resonances(g, (d / 2 - 0.01, d + 0.02, 0.0, args.T))
rs.write_csv(f"{args.out}_zeros.csv")
print(f"delta={d:.12f} zeros={len(rs.zeros)} total={rs.total}")

Ts = np.geomspace(1.0, args.T, 12)
with open(f"{args.out}_weyl.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["sigma", "slope", "theory"])
    for s in np.linspace(d / 2, d, 8)[:-1]:
        try:
            slope = fit_weyl_exponent(rs, s, Ts, d).slope
        except DegenerateFitError:
            slope = float("nan")
        w.writerow([s, slope, theoretical_exponent(d, s)])
        print(f"sigma={s:.4f} slope={slope:.3f} theory={theoretical_exponent(d, s):.3f}")
