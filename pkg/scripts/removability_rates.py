"""Shrink rate of the probe value of u_{k delta_y}^eps as eps is halved, across alpha.

Below alpha = N-1 the singular-limit solution should vanish; the script fits the
decay exponent p in probe ~ eps^p so the observed rate can be compared with the
factor-2 collapse that the acceptance check expects.
"""

import argparse
import csv

import numpy as np

from singular_elliptic.fd.experiments import removability_trend
from singular_elliptic.fd.grid import DomainSpec, build_grid
from singular_elliptic.nonlinearity import parse_nonlinearity


def run():
    ap = argparse.ArgumentParser()
    ap.add_argument("--resolution", type=int, default=512)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.25, 0.5, 0.75, 1.25, 1.5])
    ap.add_argument("--out", default="removability_rates.csv")
    args = ap.parse_args()
    spec = parse_nonlinearity("power:q=3")
    g = build_grid(DomainSpec("UnitDisc"), args.resolution)
    eps = [0.1, 0.05, 0.025, 0.0125]
    rows = []
    for a in args.alphas:
        tr = removability_trend(g, (1.0, 0.0), spec, a, k=1.0, eps=eps, probe_depth=0.5)
        probe = np.asarray(tr.extra["probe"], dtype=float)
        p = np.polyfit(np.log(eps), np.log(probe), 1)[0]
        shrink = tr.extra["shrink_factors"]
        rows.append([a, *probe, *shrink, p])
        print(f"alpha={a:5.2f}  probe {np.array2string(probe, precision=4)}  "
              f"shrink {np.array2string(np.asarray(shrink), precision=3)}  exponent {p:.3f}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", *[f"probe_eps{e}" for e in eps],
                    *[f"shrink_{i}" for i in range(len(eps) - 1)], "exponent"])
        w.writerows(rows)


if __name__ == "__main__":
    run()
