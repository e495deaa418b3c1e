import math

import numpy as np
import pytest

from singular_elliptic.errors import InvalidParameter
from singular_elliptic.nonlinearity import (Condition, Kind, ProblemParams, Verdict,
                                            check_delta2, check_KO, check_local_integrability,
                                            check_structural, check_subcritical, classify,
                                            classify_all, estimate_hzero_epsilon, make_builtin,
                                            make_custom, parse_nonlinearity)

# reference values from scripts/derive_oracles.py (sympy closed forms)
SQRT2 = 1.4142135623730951
KO_POWER = {1.5: 4.47213595499958, 2: 2.449489742783178, 3: SQRT2, 5: 0.8660254037844386}


@pytest.fixture
def cube():
    return make_builtin(Kind.POWER, {"q": 3})


def test_builtin_values(cube):
    assert cube.h(2.0) == 8.0
    assert cube.h_prime(2.0) == 12.0
    assert make_builtin(Kind.EXPLINEAR).h(1.0) == pytest.approx(math.e, rel=1e-15)


def test_power_below_one_rejected():
    with pytest.raises(InvalidParameter):
        make_builtin(Kind.POWER, {"q": 0.5})


@pytest.mark.parametrize("ident, kind", [("power:q=3", Kind.POWER), ("powerlog:q=2", Kind.POWERLOG),
                                         ("explinear", Kind.EXPLINEAR)])
def test_parse_ids(ident, kind):
    assert parse_nonlinearity(ident).kind is kind


def test_parse_unknown_id():
    with pytest.raises(InvalidParameter):
        parse_nonlinearity("cosh")


def test_structural(cube):
    rep = check_structural(cube)
    assert rep.verdict is Verdict.HOLDS
    assert rep.evidence["worst_convexity_defect"] == 0.0
    # sin fails positivity at pi, sqrt is concave
    assert check_structural(make_custom("sin", np.sin)).verdict is Verdict.FAILS
    assert check_structural(make_custom("sqrt", np.sqrt)).verdict is Verdict.FAILS


def test_ko_cube(cube):
    assert check_KO(cube).evidence["value"] == pytest.approx(SQRT2, rel=1e-12)
    assert check_KO(cube, a=2.0).evidence["value"] == pytest.approx(SQRT2 / 2, rel=1e-12)


def test_ko_numeric_route_matches_closed_form():
    custom = make_custom("cube", lambda t: t ** 3, lambda t: 3 * t ** 2)
    rep = check_KO(custom)
    assert rep.verdict is Verdict.HOLDS
    assert rep.evidence["value"] == pytest.approx(SQRT2, rel=1e-8)


def test_ko_linear_fails():
    rep = check_KO(parse_nonlinearity("linear"))
    assert rep.verdict is Verdict.FAILS
    # partial integrals over dyadic panels stay at ln 2: logarithmic divergence
    assert rep.evidence["partials"][-1] == pytest.approx(math.log(2), rel=1e-10)


@pytest.mark.parametrize("q", sorted(KO_POWER))
def test_ko_power_family(q):
    rep = check_KO(make_builtin(Kind.POWER, {"q": q}))
    assert rep.holds
    assert rep.evidence["value"] == pytest.approx(KO_POWER[q], rel=1e-10)


def test_delta2():
    assert check_delta2(make_builtin(Kind.POWER, {"q": 3})).evidence["c"] == pytest.approx(4, abs=1e-6)
    assert check_delta2(make_builtin(Kind.POWER, {"q": 2})).evidence["c"] == pytest.approx(2, abs=1e-6)
    assert check_delta2(make_builtin(Kind.EXPLINEAR)).verdict is Verdict.FAILS


def test_delta2_numeric_search():
    rep = check_delta2(make_custom("cube", lambda t: t ** 3))
    assert rep.verdict is Verdict.HOLDS
    assert rep.evidence["c"] == pytest.approx(4, rel=1e-3)


def test_hzero(cube):
    rep = estimate_hzero_epsilon(cube)
    assert rep.holds and rep.evidence["epsilon"] == pytest.approx(2, abs=0.05)
    assert estimate_hzero_epsilon(make_builtin(Kind.EXPLINEAR)).verdict is Verdict.FAILS
    pl = estimate_hzero_epsilon(parse_nonlinearity("powerlog:q=2"))
    assert pl.holds and 2.9 < pl.evidence["sigma"] < 3.0


def test_subcritical_examples(cube):
    rep = check_subcritical(cube, ProblemParams(2, 2.0))
    assert rep.holds and rep.evidence["value"] == pytest.approx(0.5, rel=1e-12)
    assert rep.evidence["consistent"]
    assert check_subcritical(cube, ProblemParams(2, 0.5)).verdict is Verdict.FAILS
    assert classify(cube, ProblemParams(2, 1.0)).verdict is Verdict.FAILS


def test_subcritical_numeric_route(cube):
    rep = check_subcritical(cube, ProblemParams(2, 2.0), force_numeric=True)
    assert rep.evidence["value"] == pytest.approx(0.5, rel=1e-8)


def test_local_integrability(cube):
    rep = check_local_integrability(cube, ProblemParams(2, 2.0))
    assert rep.holds and rep.evidence["value"] == pytest.approx(0.25, rel=1e-12)
    num = check_local_integrability(cube, ProblemParams(2, 2.0), force_numeric=True)
    assert num.evidence["value"] == pytest.approx(0.25, rel=1e-8)
    assert check_local_integrability(make_builtin(Kind.EXPLINEAR),
                                     ProblemParams(2, 1.0)).verdict is Verdict.FAILS


def test_classify_all_order_and_json(cube):
    reps = classify_all(cube, ProblemParams(2, 2.0))
    assert [r.condition for r in reps] == list(Condition)
    d = reps[1].to_dict()
    assert set(d) == {"condition", "verdict", "evidence", "notes"}
    assert d["verdict"] == "Holds"


def test_problem_params_validation():
    with pytest.raises(InvalidParameter):
        ProblemParams(1, 2.0)
    with pytest.raises(InvalidParameter):
        ProblemParams(2, -1.0)
