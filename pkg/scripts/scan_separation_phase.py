"""Separation constants across surrogate widths and phase-derivative ratios across word lengths."""

import argparse
import csv

from schottky_zeta.bounds import SEPARATION_CANDIDATES, check_separation, phase_derivative_report
from schottky_zeta.schottky import funnel3

ap = argparse.ArgumentParser()
ap.add_argument("--lengths", type=float, nargs=3, default=[6.0, 6.0, 6.0])
ap.add_argument("--hs", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125])
ap.add_argument("--out", default="scan")
args = ap.parse_args()

g = funnel3(*args.lengths)
with open(f"{args.out}_separation.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["h", "max_c", "onset_c"])
    for h in args.hs:
        r = check_separation(g, h, SEPARATION_CANDIDATES)
        w.writerow([h, r.max_c, r.onset_c])
        print(f"h={h} max_c={r.max_c} onset_c={r.onset_c}")

rep = phase_derivative_report(g, (1, 5))
with open(f"{args.out}_phase.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["max_len", "ratio_min", "ratio_max", "fd_residual"])
    for lv in rep.levels:
        w.writerow([lv.max_len, lv.ratio_min, lv.ratio_max, lv.fd_residual])
        print(f"max_len={lv.max_len} ratio in [{lv.ratio_min:.3g}, {lv.ratio_max:.3g}] fd={lv.fd_residual:.1e}")
