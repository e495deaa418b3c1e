import math

import numpy as np
import pytest

from singular_elliptic.errors import InvalidParameter, NoProfileFound, ResolutionError
from singular_elliptic.fd.grid import DomainSpec, build_grid
from singular_elliptic.nonlinearity import make_custom, parse_nonlinearity
from singular_elliptic.spherical_profile import (Method, check_vss_limit, derive_lambda,
                                                 evaluate_halfspace_vss, make_profile_problem,
                                                 reduced_residual, refinement_study, solve_both,
                                                 solve_profile)

# independent solve_bvp oracle (scripts/derive_oracles.py):
# w'' + 4 w = cos^2(theta) w^3, w'(0) = 0, w(pi/2) = 0
W0_ORACLE = 2.0677935605
KAPPA_ORACLE = 3.8233516425


@pytest.fixture(scope="module")
def cube():
    return parse_nonlinearity("power:q=3")


@pytest.fixture(scope="module")
def profile(cube):
    return solve_profile(make_profile_problem(cube, 2, 2.0))


@pytest.mark.parametrize("N, alpha, lam", [(2, 2.0, 4.0), (3, 2.0, 2.0), (2, 0.5, 0.25),
                                           (4, 2.0, 0.0)])
def test_derive_lambda(N, alpha, lam):
    assert derive_lambda(N, alpha) == pytest.approx(lam, abs=1e-12)


def test_paper_lambda_and_bad_source():
    assert derive_lambda(2, 2.0, "paper") == 1.0
    with pytest.raises(InvalidParameter):
        derive_lambda(2, 2.0, "guess")


def test_residual_of_zero(cube):
    p = make_profile_problem(cube, 2, 2.0)
    assert np.all(reduced_residual(p, np.zeros(p.n)) == 0.0)


def test_residual_stub_is_second_order():
    # h = 0, lambda = 0, w = cos: residual is -cos up to the O(h^2) stencil error
    zero = make_custom("zero", lambda t: 0.0 * t, lambda t: 0.0 * t, strict_convexity=False)
    errs = []
    for n in (512, 1024, 2048):
        p = make_profile_problem(zero, 2, 2.0, n=n, lam=0.0)
        c = np.sin(p.x_grid)  # cos(theta) without cancellation near pi/2
        errs.append(np.max(np.abs(reduced_residual(p, c)[:-1] + c[:-1])))
    assert errs[-1] < 1e-6
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_profile_matches_bvp_oracle(profile):
    assert profile.w0 == pytest.approx(W0_ORACLE, abs=1e-6)
    assert profile.kappa == pytest.approx(KAPPA_ORACLE, rel=1e-5)
    assert profile.residual_sup < 1e-6


def test_methods_agree(cube):
    shoot, coll, diff = solve_both(make_profile_problem(cube, 2, 2.0))
    assert shoot.method is Method.SHOOTING and coll.method is Method.COLLOCATION
    assert diff < 1e-4
    assert shoot.w[-1] == 0.0 and coll.w0 > 0


def test_positivity_and_hopf(profile):
    th = profile.theta_grid
    assert np.all(profile.w[th < math.pi / 2 - 1e-12] > 0)
    near = (math.pi / 2 - th > 0) & (math.pi / 2 - th < 1e-3)
    ratio = profile.w[near] / (math.pi / 2 - th[near])
    assert np.max(np.abs(ratio / profile.kappa - 1)) < 1e-3


def test_newton_step_keeps_solution(cube, profile):
    p = make_profile_problem(cube, 2, 2.0)
    assert np.max(np.abs(reduced_residual(p, profile.w))) < 1e-6


def test_supercritical_has_no_profile(cube):
    with pytest.raises(NoProfileFound):
        solve_profile(make_profile_problem(cube, 2, 0.5))


def test_paper_lambda_has_no_profile(cube):
    # lambda = 1 is the first Dirichlet eigenvalue of w'' on (-pi/2, pi/2):
    # with absorption no positive solution exists
    with pytest.raises(NoProfileFound):
        solve_profile(make_profile_problem(cube, 2, 2.0, "paper"))


def test_refinement_second_order(cube):
    d = refinement_study(cube, 2, 2.0, (512, 1024, 2048))["diffs"]
    assert d[0] / d[1] == pytest.approx(4.0, rel=0.05)


def test_halfspace_vss(profile):
    assert evaluate_halfspace_vss(profile, [0.0, 1.0], [0.0, 0.0]) == pytest.approx(profile.w0)
    assert evaluate_halfspace_vss(profile, [0.0, 2.0], [0.0, 0.0]) == pytest.approx(profile.w0 / 4)
    x = np.array([0.3, 0.5])
    v1 = evaluate_halfspace_vss(profile, 3 * x, [0.0, 0.0])
    assert v1 == pytest.approx(evaluate_halfspace_vss(profile, x, [0.0, 0.0]) / 9, rel=1e-12)


def test_vss_check_on_exact_field(profile):
    g = build_grid(DomainSpec("HalfPlaneBox", 0.25), 128)
    vals = evaluate_halfspace_vss(profile, g.nodes, [0.0, 0.0])
    rep = check_vss_limit(vals, g, profile, (0.0, 0.0), (0.1, 0.2))
    assert rep.passes and max(rep.deviations) < 2e-3
    with pytest.raises(ResolutionError):
        check_vss_limit(vals, g, profile, (0.0, 0.0), (0.3,))


def test_profile_csv(profile, tmp_path):
    p = tmp_path / "w.csv"
    profile.to_csv(p)
    rows = p.read_text().splitlines()
    assert rows[0] == "theta,w" and len(rows) == profile.w.size + 1
