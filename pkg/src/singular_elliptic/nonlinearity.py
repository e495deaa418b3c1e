"""Odd convex nonlinearities h and the integral conditions they must satisfy.

The absorption term of the equation is ``rho^(-2-alpha) h(rho^alpha u)``.
Every check here reports a :class:`ConditionReport` with a three-state
verdict.  Builtin nonlinearities carry exact growth metadata so that their
verdicts are decided in closed form; custom evaluators go through the dyadic
panel machinery in :mod:`singular_elliptic.integrals`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import EvaluationError, InvalidParameter
from .integrals import MARGIN, origin_integral, tail_integral


class Kind(str, enum.Enum):
    POWER = "PowerQ"
    POWERLOG = "PowerLogQ"
    EXPLINEAR = "ExpLinear"
    CUSTOM = "Custom"


class Condition(str, enum.Enum):
    STRUCTURAL = "Structural"
    KO = "KO"
    DELTA2 = "Delta2"
    HZERO = "HZero"
    LOCAL_INTEGRABILITY = "LocalIntegrability"
    SUBCRITICAL_INTEGRAL = "SubcriticalIntegral"
    SUBCRITICAL_CLASSIFIER = "SubcriticalClassifier"


class Verdict(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ConditionReport:
    condition: Condition
    verdict: Verdict
    evidence: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, (np.floating, np.integer)):
                v = v.item()
            if isinstance(v, float) and not math.isfinite(v):
                return repr(v)
            if isinstance(v, (list, tuple, np.ndarray)):
                return [clean(x) for x in v]
            if isinstance(v, enum.Enum):
                return v.value
            return v

        return {
            "condition": self.condition.value,
            "verdict": self.verdict.value,
            "evidence": {k: clean(v) for k, v in self.evidence.items()},
            "notes": self.notes,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass(frozen=True)
class ProblemParams:
    """Dimension N, similarity exponent alpha and test amplitude c."""

    N: int
    alpha: float
    c: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise InvalidParameter(f"N must be an integer >= 2, got {self.N}")
        if not self.alpha > 0:
            raise InvalidParameter(f"alpha must be positive, got {self.alpha}")
        if not self.c > 0:
            raise InvalidParameter(f"c must be positive, got {self.c}")


@dataclass(frozen=True)
class NonlinearitySpec:
    """Odd nonlinearity built from its restriction ``f`` to ``t >= 0``.

    ``h(t) = sign(t) f(|t|)``, so oddness and ``h(0) = 0`` hold by
    construction whenever ``f(0) = 0``.
    """

    name: str
    f: Callable
    f_prime: Callable | None
    kind: Kind
    q: float | None = None
    strict_convexity: bool = True
    t_max: float = math.inf  # largest argument with a finite float64 value

    def h(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.asarray(self.f(a), dtype=float)
        out = np.sign(t) * v
        return out if out.ndim else float(out)

    def h_prime(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        if self.f_prime is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                out = np.asarray(self.f_prime(a), dtype=float)
        else:
            d = 1e-6 * np.maximum(a, 1e-3)
            lo = np.maximum(a - d, 0.0)
            out = (np.asarray(self.f(a + d)) - np.asarray(self.f(lo))) / (a + d - lo)
        return out if out.ndim else float(out)

    def __call__(self, t):
        return self.h(t)

    # growth metadata used by the closed-form overrides
    @property
    def is_builtin(self) -> bool:
        return self.kind is not Kind.CUSTOM

    def ko_exponent(self) -> float | None:
        """Decay exponent p of (2F(s))^(-1/2) ~ s^-p; inf for faster than any power."""
        if self.kind in (Kind.POWER, Kind.POWERLOG):
            return 0.5 * (self.q + 1.0)
        if self.kind is Kind.EXPLINEAR:
            return math.inf
        return None

    def zero_slope(self) -> float | None:
        """Exponent sigma with h(t) ~ t^sigma as t -> 0."""
        if self.kind is Kind.POWER:
            return self.q
        if self.kind is Kind.POWERLOG:
            return self.q + 1.0
        if self.kind is Kind.EXPLINEAR:
            return 1.0
        return None

    def delta2_constant(self) -> float | None:
        if self.kind is Kind.POWER:
            return 2.0 ** (self.q - 1.0)
        if self.kind is Kind.POWERLOG:
            # R(a, a) = 2 ln(1+2a)/ln(1+a) increases to 2^q as a -> 0
            return 2.0 ** self.q
        if self.kind is Kind.EXPLINEAR:
            return math.inf
        return None

    def primitive(self, s):
        """F(s) = int_0^s h(t) dt for s >= 0."""
        s = np.asarray(s, dtype=float)
        if self.kind is Kind.POWER:
            out = s ** (self.q + 1.0) / (self.q + 1.0)
        elif self.kind is Kind.EXPLINEAR:
            with np.errstate(over="ignore"):
                out = (s - 1.0) * np.exp(s) + 1.0
            small = s < 1e-4
            # series avoids cancellation: s^2/2 + s^3/3 + s^4/8
            out = np.where(small, s * s * (0.5 + s / 3.0 + s * s / 8.0), out)
        else:
            out = np.vectorize(self._primitive_quad, otypes=[float])(s)
        return out if out.ndim else float(out)

    def _primitive_quad(self, s):
        if s <= 0:
            return 0.0
        pts = [x for x in (1e-3, 1.0, 10.0) if x < s] or None
        v, _ = integrate.quad(lambda t: float(self.f(t)), 0.0, s, points=pts,
                              limit=400, epsrel=1e-12, epsabs=0.0)
        return v


# ---------------------------------------------------------------- constructors

def make_builtin(kind, params=None) -> NonlinearitySpec:
    """Build PowerQ(q), PowerLogQ(q) or ExpLinear."""
    params = dict(params or {})
    kind = Kind(kind) if not isinstance(kind, Kind) else kind
    if kind in (Kind.POWER, Kind.POWERLOG):
        if "q" not in params:
            raise InvalidParameter(f"{kind.value} requires q")
        q = float(params["q"])
        if not q > 1:
            raise InvalidParameter(f"q must exceed 1, got {q}")
        if kind is Kind.POWER:
            return NonlinearitySpec(
                name=f"power:q={q:g}",
                f=lambda t: t ** q,
                f_prime=lambda t: q * t ** (q - 1.0),
                kind=kind, q=q)
        return NonlinearitySpec(
            name=f"powerlog:q={q:g}",
            f=lambda t: t ** q * np.log1p(t),
            f_prime=lambda t: q * t ** (q - 1.0) * np.log1p(t) + t ** q / (1.0 + t),
            kind=kind, q=q)
    if kind is Kind.EXPLINEAR:
        return NonlinearitySpec(
            name="explinear",
            f=lambda t: t * np.exp(t),
            f_prime=lambda t: (1.0 + t) * np.exp(t),
            kind=kind, t_max=700.0)
    raise InvalidParameter(f"{kind.value} is not a builtin kind")


def make_custom(name, f, f_prime=None, strict_convexity=True, t_max=math.inf):
    """Wrap an evaluator given on ``t >= 0``; the odd extension is automatic."""
    return NonlinearitySpec(name=name, f=f, f_prime=f_prime, kind=Kind.CUSTOM,
                            strict_convexity=strict_convexity, t_max=t_max)


_CUSTOM_IDS = {
    "linear": lambda: make_custom("linear", lambda t: t, lambda t: np.ones_like(t),
                                  strict_convexity=False),
}


def parse_nonlinearity(ident: str) -> NonlinearitySpec:
    """Parse ids such as ``power:q=3``, ``powerlog:q=2``, ``explinear``, ``linear``."""
    ident = ident.strip()
    head, _, rest = ident.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise InvalidParameter(f"malformed parameter {item!r} in {ident!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError as exc:
                raise InvalidParameter(f"non-numeric parameter {item!r}") from exc
    head = head.lower()
    table = {"power": Kind.POWER, "powerq": Kind.POWER,
             "powerlog": Kind.POWERLOG, "powerlogq": Kind.POWERLOG,
             "explinear": Kind.EXPLINEAR}
    if head in table:
        spec = make_builtin(table[head], params)
        return spec
    if head in _CUSTOM_IDS:
        return _CUSTOM_IDS[head]()
    raise InvalidParameter(f"unknown nonlinearity {ident!r}")


# ---------------------------------------------------------------- structural

def default_grid(n=200, t_max=1e3):
    return np.logspace(-3, math.log10(t_max), n)


def check_structural(spec: NonlinearitySpec, sample_grid=None) -> ConditionReport:
    grid = default_grid() if sample_grid is None else np.asarray(sample_grid, float)
    notes = []
    if np.any(grid > spec.t_max):
        grid = grid[grid <= spec.t_max]
        notes.append(f"grid clipped at t={spec.t_max:g} where the evaluator overflows")
    grid = np.unique(grid[grid > 0])
    if grid.size < 2:
        raise InvalidParameter("sample grid needs at least two positive points")

    h0 = spec.h(0.0)
    vals = np.asarray(spec.h(grid), dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        t = float(grid[np.argmax(bad)])
        raise EvaluationError(f"h({t:g}) is not finite", t=t)

    odd_defect = float(np.max(np.abs(spec.h(-grid) + vals)))
    positive = vals > 0
    first_nonpos = float(grid[np.argmin(positive)]) if not positive.all() else None

    # midpoint convexity over all pairs
    a, b = np.meshgrid(grid, grid, indexing="ij")
    iu = np.triu_indices(grid.size, 1)
    a, b = a[iu], b[iu]
    ha, hb = vals[iu[0]], vals[iu[1]]
    hm = spec.h(0.5 * (a + b))
    defect = hm - 0.5 * (ha + hb)
    tol = 1e-10 * (1.0 + np.abs(ha) + np.abs(hb))
    worst = float(max(np.max(defect), 0.0))
    convex = bool(np.all(defect <= tol))
    strictly = bool(np.all(defect < 0))

    # derivative against a central difference, away from the origin
    tt = grid[grid >= 1e-2]
    d = 1e-6 * np.minimum(tt, 1.0)
    fd = (spec.h(tt + d) - spec.h(tt - d)) / (2 * d)
    hp = np.asarray(spec.h_prime(tt), float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(hp - fd) / np.maximum(np.abs(fd), 1e-300)
    deriv_err = float(np.max(rel)) if rel.size else 0.0

    checks = {
        "h(0)=0": h0 == 0.0,
        "odd": odd_defect == 0.0,
        "positive": first_nonpos is None,
        "convex": convex,
        "derivative": deriv_err <= 1e-6,
    }
    if first_nonpos is not None:
        notes.append(f"positivity fails at t={first_nonpos:g}")
    if not convex:
        notes.append(f"midpoint convexity violated, worst defect {worst:.3g}")
    if not checks["derivative"]:
        notes.append(f"h_prime disagrees with finite differences (rel {deriv_err:.2e})")
    if spec.strict_convexity and convex and not strictly:
        notes.append("declared strictly convex but some midpoint defect is zero")
    ok = all(checks.values())
    return ConditionReport(
        Condition.STRUCTURAL, Verdict.HOLDS if ok else Verdict.FAILS,
        evidence={"worst_convexity_defect": worst, "oddness_defect": odd_defect,
                  "derivative_rel_error": deriv_err, "n_points": int(grid.size),
                  "strict_convexity_verified": strictly,
                  **{f"check[{k}]": v for k, v in checks.items()}},
        notes="; ".join(notes))


# ---------------------------------------------------------------- KO

def ko_integrand(spec: NonlinearitySpec):
    """s -> (2 F(s))^(-1/2)."""
    def g(s):
        F = spec.primitive(s)
        if F == math.inf:
            return 0.0
        return 1.0 / math.sqrt(2.0 * F)
    return g


def check_KO(spec: NonlinearitySpec, a=1.0, quadrature_config=None) -> ConditionReport:
    """Finiteness of ``int_a^inf (2F(s))^(-1/2) ds``."""
    if not a > 0:
        raise InvalidParameter("a must be positive")
    cfg = dict(panels=48, rel=1e-10, margin=MARGIN)
    cfg.update(quadrature_config or {})
    res = tail_integral(ko_integrand(spec), a, **cfg)
    evidence = {"tail_exponent_fit": res.exponent, "partials": res.partials[:12],
                "a": a}
    p = spec.ko_exponent()
    if p is not None:
        verdict = Verdict.HOLDS if p > 1 else Verdict.FAILS
        evidence["tail_exponent"] = p
        notes = "closed-form growth exponent"
        value = res.value if verdict is Verdict.HOLDS else math.inf
        if spec.kind is Kind.POWER and verdict is Verdict.HOLDS:
            value = ko_power_closed_form(spec.q, a)
    else:
        verdict = Verdict(res.verdict)
        evidence["tail_exponent"] = res.exponent
        value = res.value
        notes = "dyadic panel exponent fit"
        if verdict is Verdict.INCONCLUSIVE:
            notes += f"; exponent {res.exponent:.3f} within margin of 1"
    evidence["value"] = value
    return ConditionReport(Condition.KO, verdict, evidence, notes)


def ko_power_closed_form(q, a):
    """int_a^inf (2 s^(q+1)/(q+1))^(-1/2) ds for h = t^q."""
    p = 0.5 * (q + 1.0)
    return math.sqrt((q + 1.0) / 2.0) * a ** (1.0 - p) / (p - 1.0)


# ---------------------------------------------------------------- Delta_2

def _delta2_sup(spec, T, n, a_min):
    g = np.logspace(math.log10(a_min), math.log10(T), n)
    hv = spec.h(g)
    s = g[:, None] + g[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        R = spec.h(s) / (hv[:, None] + hv[None, :])
    R = np.where(np.isfinite(R), R, np.inf)
    k = np.unravel_index(np.argmax(R), R.shape)
    return float(R[k]), float(g[k[0]]), float(g[k[1]])


def check_delta2(spec: NonlinearitySpec, search_config=None) -> ConditionReport:
    """Search for c with h(a+b) <= c (h(a) + h(b))."""
    cfg = dict(T=10.0, n=80, a_min=1e-8, doublings=3, stab_rel=1e-3)
    cfg.update(search_config or {})
    T0 = cfg["T"]
    Ts = [T0 * 2 ** k for k in range(cfg["doublings"] + 1)]
    if Ts[-1] * 2 > spec.t_max:
        Ts = [min(T, spec.t_max / 2) for T in Ts]
    sups = [_delta2_sup(spec, T, cfg["n"], cfg["a_min"])[0] for T in Ts]
    refined = _delta2_sup(spec, Ts[-1], 2 * cfg["n"], cfg["a_min"])[0]
    diag = [spec.h(2 * T) / (2 * spec.h(T)) for T in Ts]
    growth = diag[-1] / diag[0] if diag[0] > 0 else math.inf
    evidence = {"sup_ratio_by_T": sups, "sup_ratio_refined": refined,
                "diagonal_ratio_by_T": diag, "diagonal_growth": growth, "T": Ts}

    stable = (abs(sups[-1] - sups[-2]) <= cfg["stab_rel"] * sups[-1]
              and abs(refined - sups[-1]) <= cfg["stab_rel"] * sups[-1])
    grows = all(d2 > d1 for d1, d2 in zip(diag, diag[1:])) and growth >= 2.0
    if grows:
        num = Verdict.FAILS
    elif stable:
        num = Verdict.HOLDS
    else:
        num = Verdict.INCONCLUSIVE

    c_exact = spec.delta2_constant()
    if c_exact is not None:
        verdict = Verdict.HOLDS if math.isfinite(c_exact) else Verdict.FAILS
        evidence["c"] = c_exact
        evidence["numeric_verdict"] = num.value
        notes = "closed-form growth metadata"
    else:
        verdict = num
        evidence["c"] = max(sups[-1], refined) if num is Verdict.HOLDS else math.inf
        notes = "log-grid search with T-doubling"
    return ConditionReport(Condition.DELTA2, verdict, evidence, notes)


# ---------------------------------------------------------------- h-zero

def estimate_hzero_epsilon(spec: NonlinearitySpec, window=(1e-8, 1e-2), n=61):
    """Fit the log-log slope sigma of h near zero; epsilon = sigma - 1."""
    lo, hi = window
    notes = []
    for _ in range(8):
        t = np.logspace(math.log10(lo), math.log10(hi), n)
        v = spec.h(t)
        if np.all(v > 0) and np.all(np.isfinite(v)):
            break
        notes.append(f"underflow on [{lo:g}, {hi:g}], window shifted up")
        lo, hi = lo * 100, hi * 100
    else:
        return ConditionReport(Condition.HZERO, Verdict.INCONCLUSIVE,
                               {"window": [lo, hi]}, "h degenerate near zero")
    x, y = np.log(t), np.log(v)
    sigma, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (sigma * x + icpt)) ** 2)))
    sigma = float(sigma)
    verdict = Verdict.HOLDS if sigma > 1 + 1e-3 else Verdict.FAILS
    ev = {"sigma": sigma, "epsilon": sigma - 1.0, "fit_residual": resid,
          "window": [lo, hi]}
    exact = spec.zero_slope()
    if exact is not None:
        ev["sigma_limit"] = exact
        verdict = Verdict.HOLDS if exact > 1 else Verdict.FAILS
    return ConditionReport(Condition.HZERO, verdict, ev, "; ".join(notes))


# ---------------------------------------------------------------- subcriticality

def subcritical_integrand(spec, params):
    """t -> t^(N-alpha-2) h(c t^(alpha-N+1)) on (0, 1]."""
    N, al, c = params.N, params.alpha, params.c
    e = al - N + 1.0

    def g(t):
        arg = c * t ** e
        if arg > spec.t_max:
            return math.inf
        return t ** (N - al - 2.0) * spec.h(arg)
    return g


def _closed_subcritical(spec, params):
    """(verdict, value or None) from growth metadata; None if unknown."""
    e = params.alpha - params.N + 1.0
    c = params.c
    if spec.kind is Kind.POWER:
        if e > 0:
            return Verdict.HOLDS, c ** spec.q / (e * (spec.q - 1.0))
        return Verdict.FAILS, math.inf
    if spec.kind is Kind.POWERLOG:
        # e > 0: integrand ~ c^(q+1) t^(qe-1); e <= 0: ~ t^(e(q-1)-1) ln(1/t)
        return (Verdict.HOLDS, None) if e > 0 else (Verdict.FAILS, math.inf)
    if spec.kind is Kind.EXPLINEAR:
        # e > 0: integrand ~ c/t; e < 0: exponential blow-up; e = 0: h(c)/t
        return Verdict.FAILS, math.inf
    return None


def check_subcritical(spec: NonlinearitySpec, params: ProblemParams,
                      force_numeric=False) -> ConditionReport:
    """Integral test near t = 0 together with the alpha > N - 1 classifier."""
    classifier = Verdict.HOLDS if params.alpha > params.N - 1 else Verdict.FAILS
    ev = {"N": params.N, "alpha": params.alpha, "c": params.c,
          "classifier": classifier.value}
    notes = []
    if params.alpha == params.N - 1:
        notes.append("alpha = N-1 is the borderline case and is classified as Fails")
    closed = None if force_numeric else _closed_subcritical(spec, params)
    numeric = None
    if closed is None or closed[1] is None:
        try:
            numeric = origin_integral(subcritical_integrand(spec, params), 1.0)
        except EvaluationError as exc:
            if closed is None:
                # overflow towards zero means the integrand blows up: divergent
                ev["integral_error"] = str(exc)
                numeric = None
                closed = (Verdict.FAILS, math.inf)
                notes.append("integrand overflowed near t=0")
            else:
                notes.append(f"numeric value unavailable: {exc}")
    if closed is not None:
        integral, value = closed
        if value is None and numeric is not None:
            value = numeric.value if numeric.verdict == "Holds" else math.nan
        ev["integral_source"] = "closed form" if not force_numeric else "numeric"
    else:
        integral, value = Verdict(numeric.verdict), numeric.value
        ev["integral_source"] = "numeric"
    if numeric is not None:
        ev["local_exponent"] = numeric.exponent
        ev["partials"] = numeric.partials[:12]
    ev["integral"] = integral.value
    ev["value"] = value
    ev["consistent"] = integral is classifier
    if integral is Verdict.INCONCLUSIVE:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = integral
    return ConditionReport(Condition.SUBCRITICAL_INTEGRAL, verdict, ev, "; ".join(notes))


def classify(spec: NonlinearitySpec, params: ProblemParams) -> ConditionReport:
    """Subcriticality classifier alpha > N - 1 with the integral test as evidence."""
    sub = check_subcritical(spec, params)
    v = Verdict.HOLDS if params.alpha > params.N - 1 else Verdict.FAILS
    return ConditionReport(Condition.SUBCRITICAL_CLASSIFIER, v, dict(sub.evidence),
                           sub.notes)


def local_integrability_integrand(spec, params):
    al, c = params.alpha, params.c

    def g(r):
        return spec.h(c * r ** al) * r ** (-1.0 - al)
    return g


def check_local_integrability(spec: NonlinearitySpec, params: ProblemParams, R=1.0,
                              force_numeric=False) -> ConditionReport:
    """int_0^R h(c rho^alpha) rho^(-1-alpha) d rho."""
    if not R > 0:
        raise InvalidParameter("R must be positive")
    al, c = params.alpha, params.c
    ev = {"alpha": al, "c": c, "R": R}
    res = origin_integral(local_integrability_integrand(spec, params), R)
    ev["local_exponent"] = res.exponent
    ev["partials"] = res.partials[:12]
    if spec.is_builtin and not force_numeric:
        sigma = spec.zero_slope()
        # integrand ~ rho^(alpha sigma - 1 - alpha) near 0
        verdict = Verdict.HOLDS if al * (sigma - 1.0) > 0 else Verdict.FAILS
        if spec.kind is Kind.POWER:
            value = c ** spec.q * R ** (al * (spec.q - 1)) / (al * (spec.q - 1))
        else:
            value = res.value if verdict is Verdict.HOLDS else math.inf
        ev["source"] = "closed form"
    else:
        verdict, value = Verdict(res.verdict), res.value
        ev["source"] = "numeric"
    ev["value"] = value
    return ConditionReport(Condition.LOCAL_INTEGRABILITY, verdict, ev, "")


def classify_all(spec: NonlinearitySpec, params: ProblemParams) -> list[ConditionReport]:
    """Every condition report for one nonlinearity and (N, alpha)."""
    return [
        check_structural(spec),
        check_KO(spec),
        check_delta2(spec),
        estimate_hzero_epsilon(spec),
        check_local_integrability(spec, params),
        check_subcritical(spec, params),
        classify(spec, params),
    ]
