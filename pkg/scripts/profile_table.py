"""Tabulate w(0) and kappa = -w'(pi/2) of the reduced profile over alpha and q."""

import argparse
import csv

import numpy as np

from singular_elliptic.errors import NoProfileFound
from singular_elliptic.nonlinearity import parse_nonlinearity
from singular_elliptic.spherical_profile import make_profile_problem, solve_both


def run():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=2)
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--out", default="profile_table.csv")
    args = ap.parse_args()
    rows = []
    for q in (2.0, 3.0, 5.0):
        spec = parse_nonlinearity(f"power:q={q:g}")
        for alpha in np.linspace(1.25, 3.0, 8):
            try:
                shoot, coll, diff = solve_both(make_profile_problem(spec, args.N, alpha, n=args.n))
                rows.append([q, alpha, coll.w0, coll.kappa, diff])
            except NoProfileFound:
                rows.append([q, alpha, "", "", ""])
            print(*rows[-1], sep="\t")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q", "alpha", "w0", "kappa", "shoot_vs_coll"])
        w.writerows(rows)


if __name__ == "__main__":
    run()
