"""Compare the two candidate eigenvalues in the reduced profile problem.

lambda = alpha(alpha + 2 - N) comes from writing u = r^-alpha w(theta) in polar
form; lambda = alpha - (N - 1) is the printed constant. For N = 2 the second one
gives lambda = 1 at alpha = 2, the first Dirichlet eigenvalue on (-pi/2, pi/2),
so with absorption no positive profile exists.
"""

import argparse

from singular_elliptic.errors import NoProfileFound
from singular_elliptic.fd.experiments import vss_compare
from singular_elliptic.nonlinearity import parse_nonlinearity
from singular_elliptic.spherical_profile import make_profile_problem, solve_profile


def run():
    ap = argparse.ArgumentParser()
    ap.add_argument("--resolution", type=int, default=256)
    ap.add_argument("--skip-fd", action="store_true", help="profiles only")
    args = ap.parse_args()
    spec = parse_nonlinearity("power:q=3")
    for source in ("derived", "paper"):
        prob = make_profile_problem(spec, 2, 2.0, lambda_source=source)
        try:
            sol = solve_profile(prob)
            msg = f"w(0) = {sol.w0:.8f}, kappa = {sol.kappa:.8f}"
        except NoProfileFound as exc:
            msg = f"no profile ({exc})"
        print(f"{source:8s} lambda = {prob.lam:g}: {msg}")
        if not args.skip_fd:
            res = vss_compare(spec, 2.0, resolution=args.resolution, lambda_source=source)
            print(f"         FD deviation at r = {list(map(float, res.report.radii))}: "
                  f"{[round(float(d), 4) for d in res.report.deviations]}, passes {res.passes}")


if __name__ == "__main__":
    run()
