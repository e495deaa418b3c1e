import math

import numpy as np
import pytest

from singular_elliptic.errors import ConfigError, NonConvergence, ResolutionError, Unsupported
from singular_elliptic.fd.experiments import (boundary_trace_estimate, check_asymptotics,
                                              compute_uinfty, covariant_parameter, interior_mask,
                                              similarity_check, solve_at, solve_barrier,
                                              solve_ukdelta, transform_field)
from singular_elliptic.fd.grid import DomainSpec, build_grid
from singular_elliptic.fd.measure import (BoundaryMeasure, atom, check_poisson_bounds,
                                          harmonic_lift, kernel_lift, poisson_kernel_disc)
from singular_elliptic.fd.solver import (Field, SolverConfig, solve_semilinear,
                                         weak_form_defect)
from singular_elliptic.nonlinearity import parse_nonlinearity

CUBE = parse_nonlinearity("power:q=3")
INV_2PI = 0.159154943091895335768883763373  # P(0, y) on the unit disc


@pytest.fixture(scope="module")
def disc64():
    return build_grid(DomainSpec("UnitDisc"), 64)


@pytest.fixture(scope="module")
def half128():
    return build_grid(DomainSpec("HalfPlaneBox", 0.25), 128)


# ------------------------------------------------------------------ grid

def test_disc_node_count(disc64):
    assert disc64.n == pytest.approx(math.pi * 32 ** 2, rel=0.1)
    assert np.all(disc64.rho >= disc64.h / 4 - 1e-15)


def test_halfplane_rho():
    g = build_grid(DomainSpec("HalfPlaneBox", 2.0), 128)
    assert np.allclose(g.rho, g.nodes[:, 1])


def test_resolution_too_small():
    with pytest.raises(ConfigError):
        build_grid(DomainSpec("UnitDisc"), 8)


def test_bad_domain():
    with pytest.raises(ConfigError):
        DomainSpec("Square")


def _dirichlet_solve(g, fn):
    from scipy.sparse.linalg import spsolve
    return spsolve(g.A.tocsc(), g.rhs(fn(g.arm_point)))


def test_harmonic_polynomial_exact(disc64):
    # x^2 - y^2 is reproduced by the unequal-arm stencil up to rounding
    fn = lambda p: p[:, 0] ** 2 - p[:, 1] ** 2
    u = _dirichlet_solve(disc64, fn)
    assert np.max(np.abs(u - fn(disc64.nodes))) < 1e-6


def test_second_order_convergence():
    # r^5 cos(5 theta) = Re z^5
    fn = lambda p: np.real((p[:, 0] + 1j * p[:, 1]) ** 5)
    errs = []
    for res in (32, 64, 128):
        g = build_grid(DomainSpec("UnitDisc"), res)
        errs.append(np.max(np.abs(_dirichlet_solve(g, fn) - fn(g.nodes))))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0


# ---------------------------------------------------------------- measures

def test_lift_at_centre():
    g = build_grid(DomainSpec("UnitDisc"), 128)
    m = atom(0.3, 1.0, 0.1)
    # the kernel integral at the centre equals the mass times 1/(2 pi)
    assert kernel_lift(g, m, points=[[0.0, 0.0]])[0] == pytest.approx(INV_2PI, rel=1e-10)
    disc = harmonic_lift(g, m)
    assert disc[g.node_at((0.0, 0.0))] == pytest.approx(INV_2PI, rel=2e-3)


def test_lift_constant_and_zero(disc64):
    one = BoundaryMeasure(density=lambda s: np.ones_like(s))
    assert np.allclose(harmonic_lift(disc64, one), 1.0, atol=1e-10)
    assert np.all(harmonic_lift(disc64, BoundaryMeasure()) == 0.0)


def test_negative_atom_rejected():
    with pytest.raises(ConfigError):
        atom(0.0, -1.0)


def test_infinite_lift_unsupported(disc64):
    with pytest.raises(Unsupported):
        harmonic_lift(disc64, BoundaryMeasure(infinite_arcs=[(0.0, 1.0)], truncation=5.0))


def test_poisson_bounds(disc64):
    rep = check_poisson_bounds(disc64, (1.0, 0.0))
    assert rep.passes and rep.upper_ratio <= 1 / math.pi + 1e-12
    # on the cone axis at distance 0.5 the scaled kernel is (1 - 0.25)/(2 pi 0.5)
    x = np.array([0.5, 0.0])
    assert poisson_kernel_disc(x, (1.0, 0.0)) * 0.5 == pytest.approx(0.75 / math.pi, rel=1e-14)
    # a tangential point has rho = 0.01 |x - y| and lies outside the cone
    ang = 0.2
    y = np.array([1.0, 0.0])
    xt = (1 - 0.01 * 2 * math.sin(ang / 2)) * np.array([math.cos(ang), math.sin(ang)])
    d = np.linalg.norm(xt - y)
    assert 1 - np.linalg.norm(xt) < 2.0 * d  # not in the aperture-2 cone of its own rho
    assert poisson_kernel_disc(xt, y) * d < 1 / (4 * math.pi)


# ------------------------------------------------------------------ solver

def test_zero_measure(disc64):
    f = solve_semilinear(disc64, BoundaryMeasure(), CUBE, 2.0)
    assert np.all(f.values == 0.0)


def test_uniform_density_bounded_by_constant(disc64):
    c = 3.0
    f = solve_semilinear(disc64, BoundaryMeasure(density=lambda s: np.full_like(s, c)), CUBE, 2.0)
    assert f.values.min() >= 0.0 and f.values.max() <= c + 1e-12


def test_atom_below_lift_and_defect_grows(disc64):
    gaps = []
    for k in (1.0, 10.0, 100.0):
        m = atom(0.0, k, 0.05)
        u = solve_semilinear(disc64, m, CUBE, 2.0).values
        P = harmonic_lift(disc64, m)
        assert np.all(u <= P + 1e-8)
        gaps.append(np.max(P - u))
    assert gaps[0] < gaps[1] < gaps[2]


def test_weak_form_defect(disc64):
    f = solve_semilinear(disc64, atom(0.5, 5.0, 0.1), CUBE, 2.0)
    assert weak_form_defect(f, CUBE, 2.0)[0] < 1e-8


def test_solver_config_roundtrip():
    c = SolverConfig.from_dict({"tol": 1e-9, "artificial_side_data": "kobound"})
    assert SolverConfig.from_dict(c.to_dict()).to_dict() == c.to_dict()
    with pytest.raises(ConfigError):
        SolverConfig.from_dict({"tolerance": 1.0})
    with pytest.raises(ConfigError):
        SolverConfig(artificial_side_data="mirror")


def test_monotone_fallback_agrees(disc64):
    m = atom(1.0, 20.0, 0.1)
    newton = solve_semilinear(disc64, m, CUBE, 2.0).values
    mono = solve_semilinear(disc64, m, CUBE, 2.0, SolverConfig(max_newton=0)).values
    assert np.max(np.abs(newton - mono)) < 1e-6 * np.max(newton)


# ------------------------------------------------------------- experiments

def test_ukdelta_zero_mass(disc64):
    res = solve_ukdelta(disc64, (1.0, 0.0), 0.0, CUBE, 2.0)
    assert np.all(res.field.values == 0.0)


def test_ukdelta_subcritical_converges():
    g = build_grid(DomainSpec("UnitDisc"), 128)
    res = solve_ukdelta(g, (1.0, 0.0), 1.0, CUBE, 2.0, eps=[0.1, 0.05, 0.025])
    assert res.status == "Converged" and res.extra["changes"][-1] < 0.02


def test_ukdelta_strict(disc64):
    with pytest.raises(NonConvergence):
        solve_ukdelta(disc64, (1.0, 0.0), 1.0, CUBE, 0.5, eps=[0.2, 0.1], cauchy_tol=1e-9,
                      strict=True)


def test_uinfty_monotone_and_bounded(disc64):
    from singular_elliptic.ko_envelope import build_envelope, global_bound_constant
    f1 = solve_at(disc64, (1.0, 0.0), 1.0, CUBE, 2.0)
    f4 = solve_at(disc64, (1.0, 0.0), 4.0, CUBE, 2.0)
    assert np.all(f4.values >= f1.values - 1e-8)
    # the coarse grid only reaches the looser threshold; 0.5% needs resolution 128
    res = compute_uinfty(disc64, (1.0, 0.0), CUBE, 2.0, sat_tol=0.02)
    assert res.status == "Saturated" and res.monotone
    C = global_bound_constant(build_envelope(CUBE), 2.0).C
    assert np.all(res.field.values <= C * disc64.rho ** -2.0)


def test_interior_mask(disc64):
    m = interior_mask(disc64)
    assert m.any() and np.all(disc64.rho[m] >= 0.25)
    with pytest.raises(ConfigError):
        interior_mask(disc64, depth=2.0)


def test_barrier_linear_grows():
    res = solve_barrier((1.0, 0.0), 0.3, parse_nonlinearity("linear"), 2.0,
                        M_schedule=(10.0, 20.0, 40.0), resolution=64)
    assert res.status != "Saturated"
    assert res.growth_rate == pytest.approx(1.0, abs=1e-6)


def test_barrier_rejects_bad_centre():
    with pytest.raises(ConfigError):
        solve_barrier((0.5, 0.0), 0.3, CUBE, 2.0)


def test_similarity_identity(half128):
    f = solve_at(half128, (0.05, 0.0), 10.0, CUBE, 2.0)
    rep = similarity_check(f, 1.0, CUBE, 2.0, self_similar_field=f, radii=(0.05,), y=(0.05, 0.0))
    assert rep.residual_ratio == 1.0 and rep.self_similarity_deviation == 0.0


def test_transform_needs_halfplane(disc64):
    f = Field(disc64, np.zeros(disc64.n))
    with pytest.raises(Unsupported):
        transform_field(f, 2.0, 2.0)


def test_generic_solution_not_self_similar(half128):
    f = solve_at(half128, (0.05, 0.0), 10.0, CUBE, 2.0)
    rep = similarity_check(f, 2.0, CUBE, 2.0, self_similar_field=f, radii=(0.05, 0.1),
                           y=(0.05, 0.0))
    assert rep.residual_pass and not rep.self_similar


def test_trace_of_lift():
    g = build_grid(DomainSpec("UnitDisc"), 256)
    m = atom(0.0, 1.0, 0.05)
    f = Field(g, harmonic_lift(g, m))
    rep = boundary_trace_estimate(f, [0.1, 0.05, 0.025])
    assert rep.extrapolated["one"] == pytest.approx(1.0, abs=0.05)


def test_trace_of_solution_below_mass():
    g = build_grid(DomainSpec("UnitDisc"), 256)
    f = solve_semilinear(g, atom(0.0, 5.0, 0.05), CUBE, 2.0)
    rep = boundary_trace_estimate(f, [0.1, 0.05, 0.025], y=(1.0, 0.0))
    assert rep.atom_mass <= 5.0 * 1.02
    assert rep.atom_mass > 0.8 * 5.0


def test_trace_zero_and_resolution(disc64):
    f = Field(disc64, np.zeros(disc64.n))
    assert boundary_trace_estimate(f, [0.2, 0.1]).extrapolated["one"] == 0.0
    with pytest.raises(ResolutionError):
        boundary_trace_estimate(f, [0.2, disc64.h])


def test_asymptotics_zero_field_fails(disc64):
    rep = check_asymptotics(Field(disc64, np.zeros(disc64.n)), {"atom": (1.0, 0.0)}, 2.0)
    assert not rep.passes and rep.min_ratio == 0.0


def test_asymptotics_exact_vss():
    # r^-2 w(theta) has ratio w(theta)/cos(theta) against r^-3 rho, a bounded function
    from singular_elliptic.spherical_profile import (evaluate_halfspace_vss,
                                                     make_profile_problem, solve_profile)
    sol = solve_profile(make_profile_problem(CUBE, 2, 2.0))
    g = build_grid(DomainSpec("HalfPlaneBox", 0.25), 128)
    f = Field(g, evaluate_halfspace_vss(sol, g.nodes, [0.0, 0.0]))
    rep = check_asymptotics(f, {"atom": (0.0, 0.0)}, 2.0)
    th = sol.theta_grid[:-1]
    oracle = sol.w[:-1] / np.cos(th)
    assert rep.passes
    assert rep.max_ratio <= oracle.max() * (1 + 1e-6)
    assert rep.min_ratio >= min(oracle.min(), sol.kappa) * (1 - 1e-2)


def test_covariant_parameter():
    assert covariant_parameter(3.0, 0.02, 0.01, 2.0) == 12.0
    assert covariant_parameter(3.0, 0.02, 0.01, 2.0, per_width=True) == 6.0
