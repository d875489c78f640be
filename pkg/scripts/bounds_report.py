"""Run every numerical bound suite and write the results as JSON."""

import argparse
import json

from schottky_zeta.bounds import SUITES, run_suite
from schottky_zeta.schottky import funnel3

ap = argparse.ArgumentParser()
ap.add_argument("--lengths", type=float, nargs=3, default=[6.0, 6.0, 6.0])
ap.add_argument("--suites", nargs="+", choices=sorted(SUITES), default=None)
ap.add_argument("--out", default="bounds_report.json")
args = ap.parse_args()

res = run_suite(funnel3(*args.lengths), args.suites)
with open(args.out, "w") as fh:
    json.dump(res, fh, indent=2, sort_keys=True, default=str)
for name, entry in res.items():
    print(name, entry["status"] if isinstance(entry, dict) else entry)
