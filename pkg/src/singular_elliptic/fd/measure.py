"""Boundary measures, their smoothed boundary values and harmonic lifts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse.linalg import splu

from ..errors import ConfigError, Unsupported
from .grid import ARTIFICIAL, CAP, PHYSICAL, Grid

BUMP_NORM = 35.0 / 32.0


def bump(d, eps):
    """C^2 bump of unit mass and half-width eps: (35/32)/eps (1 - (d/eps)^2)^3."""
    t = np.asarray(d, dtype=float) / eps
    return np.where(np.abs(t) < 1.0, BUMP_NORM / eps * (1.0 - t * t) ** 3, 0.0)


def _arc_distance(s, s0, periodic):
    d = np.asarray(s, dtype=float) - s0
    if periodic:
        d = (d + math.pi) % (2.0 * math.pi) - math.pi
    return d


@dataclass
class BoundaryMeasure:
    """Atoms, an optional bounded density and arcs carrying infinite mass.

    Positions are boundary parameters: the polar angle on the unit circle
    or ``x1`` on the half-plane.  Atoms are smoothed into bumps of half-width
    ``mollification_eps``; arcs are realized by the value ``truncation`` on
    their points.
    """

    atoms: list = field(default_factory=list)  # [(s, mass)]
    density: Callable | None = None
    infinite_arcs: list = field(default_factory=list)  # [(s0, s1)]
    truncation: float = 0.0
    mollification_eps: float = 0.05

    def __post_init__(self):
        for s, k in self.atoms:
            if k < 0:
                raise ConfigError(f"atom mass must be nonnegative, got {k}", key="measure.atoms")
        if self.atoms and not self.mollification_eps > 0:
            raise ConfigError("mollification width must be positive", key="measure.eps")

    @property
    def finite_mass(self):
        return float(sum(k for _, k in self.atoms))

    def scaled(self, factor):
        """Measure with every atom mass, the density and the truncation multiplied."""
        dens = None if self.density is None else (lambda s, f=self.density: factor * f(s))
        return BoundaryMeasure([(s, factor * k) for s, k in self.atoms], dens,
                               list(self.infinite_arcs), factor * self.truncation,
                               self.mollification_eps)

    def in_arcs(self, s, periodic):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=bool)
        for a, b in self.infinite_arcs:
            if periodic:
                width = (b - a) % (2 * math.pi)
                out |= ((s - a) % (2 * math.pi)) <= width + 1e-12
            else:
                out |= (s >= a - 1e-12) & (s <= b + 1e-12)
        return out

    def values(self, s, periodic):
        """Smoothed boundary values at parameters s."""
        s = np.asarray(s, dtype=float)
        g = np.zeros(s.shape)
        if self.density is not None:
            g += np.asarray(self.density(s), dtype=float)
        for s0, k in self.atoms:
            if k:
                g += k * bump(_arc_distance(s, s0, periodic), self.mollification_eps)
        if self.infinite_arcs:
            g = np.where(self.in_arcs(s, periodic), np.maximum(g, self.truncation), g)
        return g


def atom(s, k=1.0, eps=0.05):
    return BoundaryMeasure(atoms=[(float(s), float(k))], mollification_eps=eps)


def arm_values(grid: Grid, measure: BoundaryMeasure, side=None):
    """Dirichlet data at every arm end point.

    ``side`` supplies values on artificial pieces (callable of points) or on
    the lens cap; physical pieces take the smoothed measure.
    """
    g = np.zeros(grid.arm_row.size)
    periodic = grid.domain.kind != "HalfPlaneBox"
    phys = grid.arm_part == PHYSICAL
    if measure is not None:
        g[phys] = measure.values(grid.arm_s[phys], periodic)
    other = ~phys
    if np.any(other):
        if side is None:
            g[other] = 0.0
        elif callable(side):
            g[other] = side(grid.arm_point[other])
        else:
            g[other] = float(side)
    return g


# ---------------------------------------------------------------- Poisson kernels

def poisson_kernel_disc(x, y):
    """(1 - |x|^2) / (2 pi |x - y|^2) for the unit disc."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return (1.0 - np.sum(x * x, axis=-1)) / (2.0 * math.pi * np.sum((x - y) ** 2, axis=-1))


def poisson_kernel_halfplane(x, y):
    """x2 / (pi |x - y|^2) for the upper half-plane."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return x[..., 1] / (math.pi * np.sum((x - y) ** 2, axis=-1))


def kernel_lift(grid: Grid, measure: BoundaryMeasure, points=None, n_gauss=64):
    """Poisson integral of the smoothed measure by Gauss-Legendre quadrature."""
    dom = grid.domain
    pts = grid.nodes if points is None else np.atleast_2d(points)
    if measure.infinite_arcs:
        raise Unsupported("the lift of infinite boundary data is not defined")
    if dom.kind == "UnitDisc":
        kern = poisson_kernel_disc
    elif dom.kind == "HalfPlaneBox":
        kern = poisson_kernel_halfplane
    else:
        raise Unsupported("kernel lift is available on the disc and the half-plane only")
    xg, wg = np.polynomial.legendre.leggauss(n_gauss)
    out = np.zeros(pts.shape[0])
    eps = measure.mollification_eps
    for s0, k in measure.atoms:
        # split the bump support into panels so the kernel peak is resolved
        edges = np.linspace(s0 - eps, s0 + eps, 33)
        for a, b in zip(edges[:-1], edges[1:]):
            s = 0.5 * (a + b) + 0.5 * (b - a) * xg
            w = 0.5 * (b - a) * wg * k * bump(s - s0, eps)
            yb = dom.boundary_point(s)
            out += kern(pts[:, None, :], yb[None, :, :]) @ w
    if measure.density is not None:
        lo, hi = (-math.pi, math.pi) if dom.kind == "UnitDisc" else (-dom.L, dom.L)
        edges = np.linspace(lo, hi, 257)
        for a, b in zip(edges[:-1], edges[1:]):
            s = 0.5 * (a + b) + 0.5 * (b - a) * xg
            w = 0.5 * (b - a) * wg * np.asarray(measure.density(s), float)
            out += kern(pts[:, None, :], dom.boundary_point(s)[None, :, :]) @ w
    return out


def harmonic_lift(grid: Grid, measure: BoundaryMeasure, side=None, method="discrete"):
    """Discrete harmonic extension of the boundary data (or the kernel integral).

    The discrete lift is the natural comparison function for the discrete
    semilinear problem; the kernel integral serves as an independent check.
    """
    if measure is not None and measure.infinite_arcs:
        raise Unsupported("the lift of infinite boundary data is not defined")
    if method == "kernel":
        return kernel_lift(grid, measure)
    if method != "discrete":
        raise ConfigError(f"unknown lift method {method!r}", key="lift.method")
    b = grid.rhs(arm_values(grid, measure, side))
    if not np.any(b):
        return np.zeros(grid.n)
    return splu(grid.A.tocsc()).solve(b)


@dataclass
class PoissonBoundsReport:
    c1: float
    upper_ratio: float
    lower_ratio_cone: float
    n_cone: int
    passes: bool
    tolerance: float

    def to_dict(self):
        return dict(self.__dict__)


def check_poisson_bounds(grid: Grid, y, cone_aperture=2.0, tol=1e-12):
    """Two-sided bound P(x,y) |x-y| in [1/c1, c1] for the disc kernel.

    The upper bound is tested at every node; the lower bound only on the
    nontangential cone ``|x - y| < aperture * rho(x)`` because the kernel
    vanishes like ``rho`` on tangential approach.
    """
    if grid.domain.kind != "UnitDisc":
        raise Unsupported("Poisson bounds are checked on the unit disc")
    y = np.asarray(y, float)
    dist = np.linalg.norm(grid.nodes - y, axis=1)
    Px = poisson_kernel_disc(grid.nodes, y) * dist
    upper = float(Px.max())
    cone = dist < cone_aperture * grid.rho
    lower = float(Px[cone].min()) if cone.any() else math.nan
    c1 = max(upper, 1.0 / lower if cone.any() else 0.0)
    passes = upper <= 1.0 / math.pi + tol and (not cone.any() or lower >= 1.0 / (math.pi * 2 * cone_aperture) - tol)
    return PoissonBoundsReport(c1, upper, lower, int(cone.sum()), bool(passes), tol)
