"""Discrete semilinear problem ``-Delta_h u + rho^(-2-alpha) h(rho^alpha u) = b``.

The absorption is convex and increasing in ``u``, so the discrete map is a
convex M-function.  Newton started from a discrete supersolution decreases
monotonically to the solution; a scalar-shift monotone iteration is kept as
a fallback.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..errors import ConfigError, SolverError
from ..nonlinearity import NonlinearitySpec
from .grid import Grid
from .measure import BoundaryMeasure, arm_values, harmonic_lift

SIDE_CHOICES = ("profile", "kobound", "zero")


@dataclass
class SolverConfig:
    tol: float = 1e-8
    max_newton: int = 50
    damping: float = 0.5
    fallback: bool = True
    artificial_side_data: str = "zero"
    max_monotone: int = 20000
    polish: bool = True
    # filled lazily when the side data needs them
    profile: object = None
    ko_constant: float | None = None
    singular_point: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.artificial_side_data not in SIDE_CHOICES:
            raise ConfigError(f"must be one of {SIDE_CHOICES}", key="artificial_side_data")
        if not self.tol > 0:
            raise ConfigError("tol must be positive", key="tol")
        if not 0 < self.damping < 1:
            raise ConfigError("damping must lie in (0, 1)", key="damping")

    @classmethod
    def from_dict(cls, d):
        known = {"tol", "max_newton", "damping", "fallback", "artificial_side_data",
                 "max_monotone", "polish"}
        for k in d:
            if k not in known:
                raise ConfigError("unknown solver option", key=f"solver.{k}")
        return cls(**d)

    def to_dict(self):
        return {"tol": self.tol, "max_newton": self.max_newton, "damping": self.damping,
                "fallback": self.fallback, "artificial_side_data": self.artificial_side_data}


@dataclass
class Field:
    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    arm_data: np.ndarray | None = field(default=None, repr=False)

    def lattice(self):
        """Lattice array with unknowns and lattice-aligned boundary values filled."""
        lat = self.grid.to_lattice(self.values)
        if self.arm_data is not None:
            g = self.grid
            on_node = g.arm_lattice
            p = g.arm_point[on_node]
            i = np.rint((p[:, 0] - g.origin[0]) / g.h).astype(int)
            j = np.rint((p[:, 1] - g.origin[1]) / g.h).astype(int)
            lat[i, j] = self.arm_data[on_node]
        return lat

    def __call__(self, pts):
        return self.grid.interpolate(self.values, pts, lattice=self.lattice())

    def to_csv(self, path):
        self.grid.to_csv(path, self.values)

    def meta_json(self):
        return json.dumps({k: v for k, v in self.meta.items()
                           if isinstance(v, (int, float, str, bool, list))})


class Absorption:
    """H(rho, u) = rho^(-2-alpha) h(rho^alpha u) and its u-derivative at the nodes."""

    def __init__(self, spec: NonlinearitySpec, alpha, rho, cap=None):
        self.spec = spec
        self.alpha = float(alpha)
        self.rho = rho
        self.ra = rho ** self.alpha
        self.pre = rho ** (-2.0 - self.alpha)
        self.pre_d = rho ** -2.0
        self.cap = cap  # optional KO cap C rho^-alpha used when h overflows
        self.clamped = 0

    def __call__(self, u):
        return self.at(slice(None), u)

    def derivative(self, u):
        return self.derivative_at(slice(None), u)

    def at(self, idx, u):
        """H at the nodes ``idx`` for values ``u`` given on those nodes."""
        pre, ra = self.pre[idx], self.ra[idx]
        with np.errstate(over="ignore", invalid="ignore"):
            v = pre * self.spec.h(ra * u)
        bad = ~np.isfinite(v)
        if np.any(bad):
            if self.cap is None:
                raise SolverError("absorption overflowed and no KO cap is available")
            self.clamped += int(bad.sum())
            cap = self.cap[idx][bad]
            uc = np.minimum(np.abs(u[bad]), cap) * np.sign(u[bad])
            v[bad] = pre[bad] * self.spec.h(ra[bad] * uc)
        return v

    def derivative_at(self, idx, u):
        pre_d, ra = self.pre_d[idx], self.ra[idx]
        with np.errstate(over="ignore", invalid="ignore"):
            d = pre_d * np.asarray(self.spec.h_prime(ra * u))
        bad = ~np.isfinite(d)
        if np.any(bad):
            if self.cap is None:
                raise SolverError("absorption derivative overflowed")
            uc = np.minimum(np.abs(u[bad]), self.cap[idx][bad])
            d[bad] = pre_d[bad] * np.asarray(self.spec.h_prime(ra[bad] * uc))
        return d


def _ko_constant(spec, alpha):
    from ..errors import DivergentEnvelope, RangeError
    from ..ko_envelope import build_envelope, global_bound_constant
    try:
        env = build_envelope(spec, a_min=1e-2, a_max=1e6, per_decade=8)
        return global_bound_constant(env, alpha).C
    except (DivergentEnvelope, RangeError):
        return None


def side_function(grid: Grid, spec, alpha, config: SolverConfig) -> Callable | None:
    """Dirichlet data on the artificial sides of the half-plane box."""
    kind = config.artificial_side_data
    if grid.domain.kind != "HalfPlaneBox" or kind == "zero":
        return None
    y = np.asarray(config.singular_point, dtype=float)
    if kind == "kobound":
        C = config.ko_constant if config.ko_constant is not None else _ko_constant(spec, alpha)
        if C is None:
            raise ConfigError("KO bound side data needs a nonlinearity satisfying KO",
                              key="artificial_side_data")
        config.ko_constant = C
        return lambda p: C * np.maximum(p[:, 1], grid.h / 4) ** (-alpha)
    # profile: the half-space very singular solution centred at the singular point
    from ..spherical_profile import evaluate_halfspace_vss, make_profile_problem, solve_profile
    if config.profile is None:
        config.profile = solve_profile(make_profile_problem(spec, 2, alpha))
    prof = config.profile
    return lambda p: evaluate_halfspace_vss(prof, p, y)


def _node_scale(grid, u, b, Hu):
    return np.abs(b) + np.abs(Hu) + grid.A.diagonal() * np.abs(u)


def relative_residual(grid: Grid, u, b, H: Absorption):
    """Largest nodewise residual relative to the size of the terms it balances.

    A global normalisation would let the huge values next to a concentrated
    atom hide residuals in the far field, so every node is scaled separately.
    """
    Au = grid.A @ u
    Hu = H(u)
    F = Au - b + Hu
    scale = _node_scale(grid, u, b, Hu)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(scale > 0, np.abs(F) / scale, np.where(F == 0, 0.0, np.inf))
    return float(np.max(r)) if r.size else 0.0, F


def solve_semilinear(grid: Grid, measure: BoundaryMeasure | None, spec: NonlinearitySpec,
                     alpha, config: SolverConfig | None = None, side=None, u0=None,
                     arm_data=None) -> Field:
    """Damped Newton from a supersolution, monotone iteration as fallback.

    ``side`` overrides the artificial-side data (callable of points or a
    constant); ``arm_data`` overrides all Dirichlet data at once.
    """
    cfg = config or SolverConfig()
    t0 = time.perf_counter()
    if side is None:
        side = side_function(grid, spec, alpha, cfg)
    g = arm_values(grid, measure, side) if arm_data is None else np.asarray(arm_data, float)
    b = grid.rhs(g)
    n = grid.n
    meta = {"path": [], "newton_iterations": 0, "monotone_iterations": 0}
    if not np.any(b) and u0 is None:
        meta.update(residual=0.0, seconds=time.perf_counter() - t0)
        return Field(grid, np.zeros(n), meta, g)

    if cfg.ko_constant is None:
        cfg.ko_constant = _ko_constant(spec, alpha)
    C = cfg.ko_constant
    cap = None if C is None else C * grid.rho ** (-alpha)
    H = Absorption(spec, alpha, grid.rho, cap)
    A = grid.A.tocsc()

    if u0 is None:
        lift = splu(A).solve(b) if np.any(b) else np.zeros(n)
        u = lift.copy()
        if cap is not None:
            u, raised = _capped_start(grid, A, lift, cap, b, H)
            meta["path"].append("ko-capped start")
            meta["start_raised_nodes"] = raised
    else:
        u = np.asarray(u0, dtype=float).copy()

    res, F = relative_residual(grid, u, b, H)
    history = [res]
    failures = 0
    converged = False
    for it in range(cfg.max_newton):
        if res < cfg.tol:
            converged = True
            break
        J = A + sparse.diags(H.derivative(u))
        du = splu(J.tocsc()).solve(-F)
        step = 1.0
        for _ in range(6):
            trial = u + step * du
            r_trial, F_trial = relative_residual(grid, trial, b, H)
            if np.isfinite(r_trial) and r_trial < res:
                break
            step *= cfg.damping
        else:
            failures += 1
            if failures >= 5:
                break
            trial = u + du
            r_trial, F_trial = relative_residual(grid, trial, b, H)
        u, res, F = trial, r_trial, F_trial
        history.append(res)
        meta["newton_iterations"] = it + 1
    else:
        converged = res < cfg.tol
    meta["path"].append("newton")

    if not converged and cfg.fallback:
        meta["path"].append("monotone")
        u, res, m = _monotone(grid, u if np.all(np.isfinite(u)) else lift, b, H, A, cfg)
        _, F = relative_residual(grid, u, b, H)
        meta["monotone_iterations"] = m
        history.append(res)
        converged = res < cfg.tol
    if not converged:
        raise SolverError(f"semilinear solve stagnated at relative residual {res:.3e}",
                          residual=res)
    if cfg.polish and res > 0:
        # one extra Newton step pushes the error to rounding level
        J = A + sparse.diags(H.derivative(u))
        u = u + splu(J.tocsc()).solve(-F)
        res, F = relative_residual(grid, u, b, H)
        history.append(res)
    meta.update(residual=res, residual_history=history, clamped=H.clamped,
                seconds=time.perf_counter() - t0)
    return Field(grid, u, meta, g)


def _capped_start(grid, A, lift, cap, b, H, max_sweeps=500):
    """Discrete supersolution below the lift, built from min(lift, cap).

    The continuous minimum of two supersolutions is a supersolution, but next
    to large boundary data the discrete cap falls short.  Nodes with a
    negative residual are raised to the root of their own nodal equation
    (neighbours frozen); raising only lowers the neighbours' residuals, so the
    sweeps increase monotonically and stop at a supersolution.
    """
    u = np.minimum(lift, cap)
    d = A.diagonal()
    raised = 0
    for _ in range(max_sweeps):
        Hu = H(u)
        F = A @ u - b + Hu
        bad = (F < -1e-12 * _node_scale(grid, u, b, Hu)) & (u < lift)
        if not np.any(bad):
            return u, raised
        raised += int(bad.sum())
        idx = np.where(bad)[0]
        rhs = b[idx] - (F[idx] - d[idx] * u[idx] - Hu[idx])  # b + off-diagonal part
        # Newton from above on d v + H(v) = rhs; convexity keeps it above the root
        v = np.minimum(lift[idx], rhs / d[idx])
        for _ in range(60):
            g = d[idx] * v + H.at(idx, v) - rhs
            step = g / (d[idx] + H.derivative_at(idx, v))
            v = v - step
            if np.all(np.abs(step) <= 1e-14 * np.abs(v)):
                break
        u[idx] = np.minimum(np.maximum(u[idx], v * (1 + 1e-12)), lift[idx])
    return lift.copy(), raised


def _monotone(grid, u, b, H, A, cfg):
    """(A + L) u_new = L u - H(u) + b with scalar L >= max dH/du; decreasing from above."""
    n = grid.n
    L = float(np.max(H.derivative(u)))
    lu = splu((A + L * sparse.identity(n, format="csc")).tocsc())
    res = math.inf
    for m in range(1, cfg.max_monotone + 1):
        u = lu.solve(L * u - H(u) + b)
        if m % 10 == 0:
            res, _ = relative_residual(grid, u, b, H)
            if res < cfg.tol:
                return u, res, m
    res, _ = relative_residual(grid, u, b, H)
    return u, res, cfg.max_monotone


def weak_form_defect(field: Field, spec, alpha):
    """Relative defect of sum(u + H(u) phi) = sum(phi b) with A^T phi = 1.

    This is the discrete counterpart of testing the equation against the
    torsion function; it vanishes up to the solver residual.
    """
    g = field.grid
    phi = splu(g.A.T.tocsc()).solve(np.ones(g.n))
    H = Absorption(spec, alpha, g.rho)(field.values)
    b = g.rhs(field.arm_data)
    lhs = g.cell_area * np.sum(field.values + H * phi)
    rhs = g.cell_area * np.sum(phi * b)
    return abs(lhs - rhs) / max(abs(rhs), 1e-300), lhs, rhs
