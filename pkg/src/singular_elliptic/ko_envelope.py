"""Keller-Osserman envelope psi, its inverse phi and the resulting a priori bounds.

``psi(a) = int_a^inf (2 H1(s))^(-1/2) ds`` with ``H1(t) = int_0^t h``.  The
function ``phi = psi^-1`` is the largest solution of ``v'' = h(v)`` on a
half-line that blows up at the origin, so it dominates every solution of the
elliptic problem near the boundary of a ball.  For ``h = t^3`` one has
``psi(a) = sqrt(2)/a`` and ``phi = psi``.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DivergentEnvelope, RangeError
from .integrals import tail_integral
from .nonlinearity import NonlinearitySpec, Verdict, check_KO, ko_integrand


def primitive_H1(spec: NonlinearitySpec, t):
    """H1(t) = int_0^t h(s) ds, closed form for builtins and quadrature otherwise."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("primitive_H1 is defined for t >= 0")
    return spec.primitive(t)


class BoundKind(str, enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY_DECAY = "BoundaryDecay"


@dataclass(frozen=True)
class GlobalBound:
    """``|u| <= C rho^-alpha`` (interior) or ``|u| <= C rho dist(x,F)^(-alpha-1)``."""

    C: float
    alpha: float
    kind: BoundKind = BoundKind.INTERIOR

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ValueError(f"bound constant must be positive and finite, got {self.C}")

    def to_json(self) -> str:
        return json.dumps({"C": self.C, "alpha": self.alpha, "kind": self.kind.value})


def _quad(f, lo, hi):
    with warnings.catch_warnings():
        # roundoff warnings only signal that 1e-13 is at the float64 floor
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v, _ = integrate.quad(f, lo, hi, epsrel=1e-13, epsabs=0.0, limit=200)
    return v


@dataclass
class KOEnvelope:
    """Tabulated psi on a geometric grid of ``a`` values.

    Values between nodes are obtained by quadrature from the next node, so the
    table only serves as an anchor and as a bracket for the inverse.
    """

    spec: NonlinearitySpec
    a_min: float = 1e-6
    a_max: float = 1e9
    per_decade: int = 16
    a_table: np.ndarray = field(init=False, repr=False)
    psi_table: np.ndarray = field(init=False, repr=False)
    tail_exponent: float = field(init=False, default=math.nan)
    tail_mass: float = field(init=False, default=0.0)

    def __post_init__(self):
        ko = check_KO(self.spec)
        if ko.verdict is not Verdict.HOLDS:
            raise DivergentEnvelope(
                f"KO integral for {self.spec.name} is {ko.verdict.value}; psi is undefined")
        self._g = ko_integrand(self.spec)
        self._build()

    def _build(self):
        n = int(round(self.per_decade * math.log10(self.a_max / self.a_min))) + 1
        a = np.geomspace(self.a_min, self.a_max, n)
        tail = tail_integral(self._g, self.a_max)
        if tail.verdict != "Holds":
            raise DivergentEnvelope(f"tail of psi beyond a={self.a_max:g} is {tail.verdict}")
        self.tail_exponent = tail.exponent
        self.tail_mass = tail.tail_fraction * tail.value
        pieces = np.array([_quad(self._g, a[i], a[i + 1]) for i in range(n - 1)])
        psi = np.empty(n)
        psi[-1] = tail.value
        psi[:-1] = tail.value + np.cumsum(pieces[::-1])[::-1]
        self.a_table, self.psi_table = a, psi

    @property
    def domain_a(self):
        return (self.a_min, self.a_max)

    @property
    def psi_range(self):
        return (float(self.psi_table[-1]), float(self.psi_table[0]))

    def psi(self, a):
        a = float(a)
        if not (self.a_min <= a <= self.a_max):
            raise RangeError(f"a={a:g} outside envelope domain {self.domain_a}")
        i = int(np.searchsorted(self.a_table, a, side="right"))
        if i >= len(self.a_table):
            return float(self.psi_table[-1])
        return float(self.psi_table[i] + _quad(self._g, a, self.a_table[i]))

    def phi(self, s):
        s = float(s)
        lo, hi = self.psi_range
        if not (lo <= s <= hi):
            raise RangeError(f"s={s:g} outside the range [{lo:g}, {hi:g}] of psi")
        # psi_table is decreasing: locate the bracketing interval
        j = int(np.searchsorted(-self.psi_table, -s, side="left"))
        if j == 0:
            return float(self.a_table[0])
        a0, a1 = self.a_table[j - 1], self.a_table[j]
        if self.psi_table[j] == s:
            return float(a1)
        return float(optimize.brentq(lambda a: self.psi(a) - s, a0, a1,
                                     xtol=1e-300, rtol=1e-15, maxiter=200))

    def extended(self, factor=1e3):
        """A copy covering a domain wider by ``factor`` on each side."""
        return KOEnvelope(self.spec, self.a_min / factor, self.a_max * factor,
                          self.per_decade)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "psi"])
            for a, p in zip(self.a_table, self.psi_table):
                w.writerow([repr(float(a)), repr(float(p))])


def build_envelope(spec, a_min=1e-6, a_max=1e9, per_decade=16) -> KOEnvelope:
    return KOEnvelope(spec, a_min, a_max, per_decade)


def psi(env: KOEnvelope, a):
    return env.psi(a)


def phi(env: KOEnvelope, s):
    return env.phi(s)


def _phi_with_retry(env, s):
    try:
        return env.phi(s), env
    except RangeError:
        wider = env.extended()
        return wider.phi(s), wider


def scaled_phi(env: KOEnvelope, c1, c2, s):
    """``phi(sqrt(c1 c2) s) / c2``: the half-line blow-up solution of ``v'' = c1 h(c2 v)``."""
    if not (c1 > 0 and c2 > 0 and s > 0):
        raise ValueError("c1, c2 and s must be positive")
    return env.phi(math.sqrt(c1 * c2) * s) / c2


def global_bound_constant(env: KOEnvelope, alpha) -> GlobalBound:
    """C = 2^alpha phi((2/9) 3^(-alpha/2)), so that ``|u| <= C rho^-alpha``."""
    s = (2.0 / 9.0) * 3.0 ** (-alpha / 2.0)
    value, _ = _phi_with_retry(env, s)
    return GlobalBound(C=2.0 ** alpha * value, alpha=alpha, kind=BoundKind.INTERIOR)


@dataclass
class BoundCheck:
    max_ratio: float
    passes: bool
    tolerance: float
    argmax: int | None = None
    kind: BoundKind = BoundKind.INTERIOR

    def to_dict(self):
        return {"max_ratio": self.max_ratio, "passes": self.passes,
                "tolerance": self.tolerance, "argmax": self.argmax,
                "kind": self.kind.value}


def check_global_bound(u, grid, bound: GlobalBound, dist_F=None, tol=None) -> BoundCheck:
    """Largest ratio of ``|u|`` to the bound over the interior nodes of ``grid``.

    ``grid`` must expose per-node ``rho`` (distance to the boundary) and mesh
    width ``h``.  For the boundary-decay kind, ``dist_F`` gives the distance
    of each node to the singular set F.
    """
    u = np.abs(np.asarray(u, dtype=float))
    rho = np.asarray(grid.rho, dtype=float)
    if tol is None:
        tol = 10.0 * float(grid.h) ** 2
    if bound.kind is BoundKind.INTERIOR:
        ratio = u * rho ** bound.alpha / bound.C
    else:
        if dist_F is None:
            raise ValueError("boundary-decay bound needs dist_F")
        d = np.asarray(dist_F, dtype=float)
        ratio = u * d ** (bound.alpha + 1.0) / (bound.C * rho)
    if ratio.size == 0:
        return BoundCheck(0.0, True, tol, None, bound.kind)
    k = int(np.argmax(ratio))
    m = float(ratio[k])
    return BoundCheck(m, m <= 1.0 + tol, tol, k, bound.kind)
