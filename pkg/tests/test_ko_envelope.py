import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from singular_elliptic.errors import DivergentEnvelope, RangeError
from singular_elliptic.ko_envelope import (BoundKind, GlobalBound, build_envelope,
                                           check_global_bound, global_bound_constant, phi,
                                           primitive_H1, psi, scaled_phi)
from singular_elliptic.nonlinearity import Kind, make_builtin, parse_nonlinearity

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="module")
def env():
    return build_envelope(make_builtin(Kind.POWER, {"q": 3}))


def test_primitive():
    assert primitive_H1(make_builtin(Kind.POWER, {"q": 3}), 2.0) == pytest.approx(4.0, rel=1e-12)
    assert primitive_H1(make_builtin(Kind.POWER, {"q": 2}), 3.0) == pytest.approx(9.0, rel=1e-12)
    assert primitive_H1(make_builtin(Kind.EXPLINEAR), 0.0) == 0.0


def test_psi_phi_values(env):
    assert psi(env, 1.0) == pytest.approx(SQRT2, rel=1e-10)
    assert psi(env, 2.0) == pytest.approx(SQRT2 / 2, rel=1e-10)
    assert phi(env, SQRT2) == pytest.approx(1.0, rel=1e-10)
    assert phi(env, SQRT2 / 2) == pytest.approx(2.0, rel=1e-10)


def test_phi_out_of_range(env):
    with pytest.raises(RangeError):
        phi(env, -1.0)


def test_linear_envelope_diverges():
    with pytest.raises(DivergentEnvelope):
        build_envelope(parse_nonlinearity("linear"))


def test_scaled_phi(env):
    assert scaled_phi(env, 1.0, 1.0, 0.7) == pytest.approx(phi(env, 0.7), rel=1e-14)
    assert scaled_phi(env, 1.0, 4.0, SQRT2 / 2) == pytest.approx(0.25, rel=1e-10)


def test_scaled_phi_dominates_blowup_ode(env):
    # v'' = c1 (c2 v)^3 with v(0+) = inf has v(s) = 1/(k s), k = sqrt(c1 c2^3 / 2);
    # at s = 0.5 with c1 = (3/2)^-5, c2 = 1/8 this is 176.363261480388...
    c1, c2 = 1.5 ** -5, 0.125
    assert scaled_phi(env, c1, c2, 0.5) <= 176.36326148038881 * (1 + 1e-9)
    for s in np.linspace(0.05, 0.5, 10):
        v = 1.0 / (math.sqrt(c1 * c2 ** 3 / 2) * s)
        assert v <= scaled_phi(env, c1, c2, s) * (1 + 1e-9)


def test_global_bound_constant(env):
    assert global_bound_constant(env, 2.0).C == pytest.approx(54 * SQRT2, rel=1e-6)
    assert global_bound_constant(env, 0.0).C == pytest.approx(9 * SQRT2 / 2, rel=1e-6)
    d = json.loads(global_bound_constant(env, 2.0).to_json())
    assert d["kind"] == "Interior"


def test_global_bound_validation():
    with pytest.raises(ValueError):
        GlobalBound(C=math.inf, alpha=2.0)


def test_envelope_csv(env, tmp_path):
    p = tmp_path / "env.csv"
    env.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "a,psi"
    assert len(lines) == env.a_table.size + 1


def test_check_global_bound_trivial():
    grid = SimpleNamespace(rho=np.linspace(0.01, 0.5, 50), h=0.01)
    b = GlobalBound(C=3.0, alpha=2.0)
    assert check_global_bound(np.zeros(50), grid, b).max_ratio == 0.0
    exact = check_global_bound(3.0 * grid.rho ** -2.0, grid, b)
    assert exact.max_ratio == pytest.approx(1.0, rel=1e-14) and exact.passes


def test_check_global_bound_decay_kind():
    grid = SimpleNamespace(rho=np.full(3, 0.1), h=0.01)
    b = GlobalBound(C=1.0, alpha=2.0, kind=BoundKind.BOUNDARY_DECAY)
    with pytest.raises(ValueError):
        check_global_bound(np.ones(3), grid, b)
    ok = check_global_bound(np.full(3, 0.1), grid, b, dist_F=np.ones(3))
    assert ok.max_ratio == pytest.approx(1.0)


def test_fd_solution_respects_bound(env):
    from singular_elliptic.fd.grid import DomainSpec, build_grid
    from singular_elliptic.fd.measure import atom
    from singular_elliptic.fd.solver import solve_semilinear
    g = build_grid(DomainSpec("UnitDisc"), 64)
    spec = make_builtin(Kind.POWER, {"q": 3})
    f = solve_semilinear(g, atom(0.0, 10.0, 0.1), spec, 2.0)
    rep = check_global_bound(f.values, g, global_bound_constant(env, 2.0))
    assert rep.passes and rep.max_ratio < 1.0
