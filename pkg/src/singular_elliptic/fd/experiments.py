"""PDE-side experiments built on the discrete solver.

Each experiment runs a schedule of solves (mollifier widths, atom masses,
truncation levels, cap values) and reports how the fields behave along it.
The schedules are sequential so that iteration counts are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, NonConvergence, ResolutionError, Unsupported
from ..nonlinearity import Verdict, classify
from .grid import CAP, PHYSICAL, DomainSpec, Grid, build_grid
from .measure import BoundaryMeasure, arm_values, atom, harmonic_lift
from .solver import Absorption, Field, SolverConfig, relative_residual, solve_semilinear


@dataclass
class ScheduleResult:
    """Outcome of a schedule of solves.

    ``status`` is one of ``Converged``, ``Saturated``, ``Partial``,
    ``Collapsing`` or ``NonConvergent``; ``history`` holds one record per
    schedule step.
    """

    field: Field | None
    status: str
    history: list = field(default_factory=list)
    parameter: float | None = None
    growth_rate: float | None = None
    monotone: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def passes(self):
        return self.status in ("Converged", "Saturated")

    def to_dict(self):
        return {"status": self.status, "parameter": self.parameter,
                "growth_rate": self.growth_rate, "monotone": self.monotone,
                "history": self.history, **self.extra}


def _rel_change(new, old, mask):
    if not np.any(mask):
        raise ConfigError("comparison region contains no nodes", key="region")
    top = float(np.max(np.abs(new[mask] - old[mask])))
    ref = float(np.max(np.abs(new[mask])))
    return top / ref if ref > 0 else (0.0 if top == 0 else math.inf)


def boundary_point(domain: DomainSpec, s):
    return domain.boundary_point(np.asarray([s], float))[0]


def _param(domain: DomainSpec, y):
    """Boundary parameter of a boundary point y (angle or x1)."""
    y = np.asarray(y, float)
    if domain.kind == "HalfPlaneBox":
        return float(y[0])
    return float(math.atan2(y[1], y[0]))


INTERIOR_FRACTION = 0.125


def interior_mask(grid: Grid, depth=None):
    """Nodes at distance at least ``depth`` from the physical boundary.

    The default depth is a quarter of the domain radius.
    """
    d = INTERIOR_FRACTION * grid.domain.scale if depth is None else depth
    mask = grid.rho >= d
    if not np.any(mask):
        raise ConfigError(f"no nodes at depth {d:g}", key="interior_depth")
    return mask


def _probe(f: Field, point):
    return float(f(np.atleast_2d(point))[0])


# ------------------------------------------------------------------ u_{k,y}

DEFAULT_EPS_FACTORS = (0.1, 0.05, 0.025)


def eps_schedule(domain: DomainSpec, levels=3, eps0=None):
    """Widths eps0, eps0/2, ... with eps0 a tenth of the domain radius by default."""
    if eps0 is None:
        eps0 = DEFAULT_EPS_FACTORS[0] * domain.scale / 2.0
    return [eps0 / 2 ** j for j in range(levels)]


def solve_ukdelta(grid: Grid, y, k, spec, alpha, config: SolverConfig | None = None,
                  eps=None, cauchy_tol=0.02, interior_depth=None, probe_depth=0.5,
                  collapse_factor=2.0, strict=False) -> ScheduleResult:
    """Solution with data ``k delta_y`` as the limit of mollified atoms.

    The atom is solved at each width in ``eps`` (default three halvings of a
    tenth of the domain radius).  The sequence is Cauchy when the relative
    interior change decreases and ends below ``cauchy_tol``; the last two
    fields are then Richardson-extrapolated with the observed order.  A
    probe value at depth ``probe_depth`` that shrinks by ``collapse_factor``
    per halving marks the removable (collapsing) regime.
    """
    eps = list(eps) if eps is not None else eps_schedule(grid.domain)
    if len(eps) < 2 or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps schedule must be decreasing with at least two widths",
                          key="eps_schedule")
    s0 = _param(grid.domain, y)
    y = np.asarray(boundary_point(grid.domain, s0))
    probe = y + probe_depth * grid.domain.inward_normal(np.asarray([s0]))[0]
    if k == 0:
        f = solve_semilinear(grid, atom(s0, 0.0, eps[-1]), spec, alpha, config)
        return ScheduleResult(f, "Converged", [], 0.0, extra={"eps": eps, "probe": [0.0]})
    mask = interior_mask(grid, interior_depth)
    fields, history, probes = [], [], []
    for e in eps:
        f = solve_semilinear(grid, atom(s0, k, e), spec, alpha, config)
        rec = {"eps": e, "newton_iterations": f.meta["newton_iterations"],
               "residual": f.meta["residual"], "probe": _probe(f, probe)}
        if fields:
            rec["change"] = _rel_change(f.values, fields[-1].values, mask)
        fields.append(f)
        probes.append(rec["probe"])
        history.append(rec)
    changes = [r["change"] for r in history[1:]]
    shrink = [a / b if b > 0 else math.inf for a, b in zip(probes, probes[1:])]
    cauchy = changes[-1] < cauchy_tol and all(b <= a for a, b in zip(changes, changes[1:]))
    collapsing = all(r >= collapse_factor for r in shrink)
    sub = classify(spec, _params(alpha)).verdict is Verdict.HOLDS
    extra = {"eps": eps, "probe": probes, "probe_point": probe.tolist(),
             "shrink_factors": shrink, "changes": changes, "subcritical": sub}
    if cauchy:
        out = fields[-1]
        if len(changes) >= 2 and changes[-1] > 0:
            p = float(np.clip(math.log2(changes[-2] / changes[-1]), 0.5, 4.0))
            v = fields[-1].values + (fields[-1].values - fields[-2].values) / (2 ** p - 1)
            out = Field(grid, v, dict(fields[-1].meta, richardson_order=p), fields[-1].arm_data)
            extra["richardson_order"] = p
        return ScheduleResult(out, "Converged", history, eps[-1], extra=extra)
    status = "Collapsing" if collapsing else "NonConvergent"
    if strict:
        raise NonConvergence(f"eps-sequence is not Cauchy (status {status})",
                             history=changes)
    return ScheduleResult(fields[-1], status, history, eps[-1], extra=extra)


def _params(alpha, N=2):
    from ..nonlinearity import ProblemParams
    return ProblemParams(N=N, alpha=float(alpha))


# ------------------------------------------------------------ saturation loops

def _saturate(solve, schedule, mask, sat_tol, mono_tol=1e-8):
    """Run ``solve(p)`` along an increasing schedule until the fields saturate."""
    schedule = list(schedule)
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigError("schedule must be nonempty and increasing", key="schedule")
    prev, history, monotone = None, [], True
    for p in schedule:
        f = solve(p)
        rec = {"parameter": p, "newton_iterations": f.meta.get("newton_iterations", 0),
               "residual": f.meta.get("residual", 0.0)}
        if prev is not None:
            # monotonicity is a property of the raw solves, not of extrapolations
            new, old = f.meta.get("raw_values", f.values), prev.meta.get("raw_values", prev.values)
            drop = float(np.max((old - new) / np.maximum(np.abs(new), 1.0)))
            rec["monotone_defect"] = max(drop, 0.0)
            monotone &= drop <= mono_tol
            rec["change"] = _rel_change(f.values, prev.values, mask)
            if rec["change"] < sat_tol:
                history.append(rec)
                return ScheduleResult(f, "Saturated", history, p, monotone=monotone)
        history.append(rec)
        prev = f
    changes = [r["change"] for r in history if "change" in r]
    rate = changes[-1] / changes[-2] if len(changes) >= 2 and changes[-2] > 0 else None
    return ScheduleResult(prev, "Partial", history, schedule[-1], rate, monotone)


DEFAULT_K_SCHEDULE = tuple(4.0 ** j for j in range(0, 16))


def h_extrapolate(fine: Field, coarse: Field, order=1.0):
    """Richardson combination ``(2^p u_h - u_2h) / (2^p - 1)`` on the fine nodes.

    The coarse field is interpolated bilinearly; nodes whose coarse cell is
    incomplete keep the fine value.
    """
    g = fine.grid
    lat = coarse.lattice()
    v = fine.values.copy()
    fx = (g.nodes[:, 0] - coarse.grid.origin[0]) / coarse.grid.h
    fy = (g.nodes[:, 1] - coarse.grid.origin[1]) / coarse.grid.h
    i0 = np.clip(np.floor(fx).astype(int), 0, coarse.grid.shape[0] - 2)
    j0 = np.clip(np.floor(fy).astype(int), 0, coarse.grid.shape[1] - 2)
    tx, ty = fx - i0, fy - j0
    uc = ((1 - tx) * (1 - ty) * lat[i0, j0] + tx * (1 - ty) * lat[i0 + 1, j0]
          + (1 - tx) * ty * lat[i0, j0 + 1] + tx * ty * lat[i0 + 1, j0 + 1])
    ok = np.isfinite(uc)
    f = 2.0 ** order
    v[ok] = (f * fine.values[ok] - uc[ok]) / (f - 1.0)
    meta = dict(fine.meta, h_extrapolated=True, extrapolated_nodes=int(ok.sum()),
                extrapolation_order=order, raw_values=fine.values)
    return Field(g, v, meta, fine.arm_data)


def compute_uinfty(grid: Grid, y, spec, alpha, k_schedule=DEFAULT_K_SCHEDULE,
                   config: SolverConfig | None = None, eps=None, sat_tol=0.005,
                   interior_depth=None, extrapolate=False, order=1.0) -> ScheduleResult:
    """``u_{infty,y}`` as the limit of ``u_{k,y}`` along an increasing k-schedule.

    The atom is mollified over a single mesh width by default so that the
    singular set stays as small as the grid allows.  Saturation is measured
    in the interior sup-norm (nodes at depth ``interior_depth``).

    Next to the singular node the discrete field keeps growing with k and
    leaves a first-order (in h) excess in the far field.  With
    ``extrapolate=True`` every step is also solved on the half-resolution
    grid and the two are Richardson-combined with the given order.
    """
    s0 = _param(grid.domain, y)
    y = boundary_point(grid.domain, s0)
    mask = interior_mask(grid, interior_depth)
    coarse = build_grid(grid.domain, grid.resolution // 2) if extrapolate else None

    def solve(k):
        f = solve_semilinear(grid, atom(s0, k, grid.h if eps is None else eps),
                             spec, alpha, config)
        if coarse is None:
            return f
        c = solve_semilinear(coarse, atom(s0, k, coarse.h if eps is None else eps),
                             spec, alpha, config)
        return h_extrapolate(f, c, order)

    res = _saturate(solve, k_schedule, mask, sat_tol)
    res.extra.update(eps="h" if eps is None else eps, y=list(map(float, y)),
                     extrapolated=bool(extrapolate))
    return res


def solve_at(grid: Grid, y, k, spec, alpha, config=None, eps=None, extrapolate=False,
             order=1.0):
    """Single ``u_{k,y}`` solve with the conventions of :func:`compute_uinfty`."""
    res = compute_uinfty(grid, y, spec, alpha, (k,), config, eps, extrapolate=extrapolate,
                         order=order)
    return res.field


def arc_distance(domain: DomainSpec, pts, arcs):
    """Euclidean distance from points to a union of boundary arcs."""
    pts = np.atleast_2d(np.asarray(pts, float))
    best = np.full(pts.shape[0], np.inf)
    for a, b in arcs:
        if domain.kind == "HalfPlaneBox":
            x = np.clip(pts[:, 0], a, b)
            d = np.hypot(pts[:, 0] - x, pts[:, 1])
        else:
            ang = np.arctan2(pts[:, 1], pts[:, 0])
            width = (b - a) % (2 * math.pi)
            inside = ((ang - a) % (2 * math.pi)) <= width
            d_end = np.minimum(np.hypot(pts[:, 0] - math.cos(a), pts[:, 1] - math.sin(a)),
                               np.hypot(pts[:, 0] - math.cos(b), pts[:, 1] - math.sin(b)))
            d = np.where(inside, np.abs(1.0 - np.hypot(pts[:, 0], pts[:, 1])), d_end)
        best = np.minimum(best, d)
    return best


DEFAULT_N_SCHEDULE = tuple(4.0 ** j for j in range(0, 16))


def solve_UF(grid: Grid, arcs, spec, alpha, n_schedule=DEFAULT_N_SCHEDULE,
             config: SolverConfig | None = None, method="truncation", sat_tol=0.005,
             interior_depth=None, atom_spacing=None) -> ScheduleResult:
    """Maximal solution with boundary trace infinity on the arcs F.

    ``method="truncation"`` solves with data ``n`` on F; ``"dense_atoms"``
    places atoms of mass ``n`` at a spacing of about one mesh width along F.
    """
    arcs = [tuple(map(float, a)) for a in arcs]
    if not arcs:
        raise ConfigError("at least one arc is required", key="arcs")
    if method not in ("truncation", "dense_atoms"):
        raise ConfigError(f"unknown method {method!r}", key="method")
    mask = interior_mask(grid, interior_depth)
    if method == "truncation":
        def solve(n):
            m = BoundaryMeasure(infinite_arcs=arcs, truncation=n)
            return solve_semilinear(grid, m, spec, alpha, config)
    else:
        spacing = grid.h if atom_spacing is None else atom_spacing
        pos = []
        for a, b in arcs:
            width = (b - a) % (2 * math.pi) if grid.domain.kind != "HalfPlaneBox" else b - a
            m = max(int(math.ceil(width / spacing)), 1)
            pos += list(a + (np.arange(m) + 0.5) * width / m)

        def solve(n):
            meas = BoundaryMeasure(atoms=[(s, n * spacing) for s in pos],
                                   mollification_eps=spacing)
            return solve_semilinear(grid, meas, spec, alpha, config)
    res = _saturate(solve, n_schedule, mask, sat_tol)
    res.extra.update(method=method, arcs=arcs)
    return res


# -------------------------------------------------------------------- barrier

DEFAULT_M_SCHEDULE = tuple(10.0 * 2.0 ** j for j in range(0, 21))


def solve_barrier(z, r, spec, alpha, M_schedule=DEFAULT_M_SCHEDULE, resolution=128,
                  config: SolverConfig | None = None, sat_tol=0.01,
                  shell_width=None) -> ScheduleResult:
    """Barrier on the lens ``Omega ∩ B_r(z)``: zero on the physical boundary, M on the cap.

    M is doubled along ``M_schedule`` until the values on the half-radius
    shell change by less than ``sat_tol``.  Without saturation the growth
    exponent ``d log u / d log M`` over the last doubling is reported.
    """
    z = np.asarray(z, float)
    if abs(np.hypot(*z) - 1.0) > 1e-12:
        raise ConfigError("z must lie on the unit circle", key="z")
    if not 0 < r < 0.5 * DomainSpec("UnitDisc").scale:
        raise ConfigError("r must lie in (0, 1)", key="r")
    grid = build_grid(DomainSpec("Lens", z=tuple(z), r=float(r)), resolution)
    w = 1.5 * grid.h if shell_width is None else shell_width
    dist = np.linalg.norm(grid.nodes - z, axis=1)
    shell = np.abs(dist - 0.5 * r) <= w
    if not np.any(shell):
        raise ResolutionError("half-radius shell contains no nodes")
    cap = grid.arm_part == CAP

    def solve(M):
        data = np.where(cap, M, 0.0)
        return solve_semilinear(grid, None, spec, alpha, config, arm_data=data)

    schedule = list(M_schedule)
    prev, history = None, []
    status = "Partial"
    for M in schedule:
        f = solve(M)
        shell_mean = float(np.mean(f.values[shell]))
        rec = {"M": M, "shell_mean": shell_mean, "shell_max": float(np.max(f.values[shell])),
               "newton_iterations": f.meta["newton_iterations"]}
        if prev is not None:
            rec["change"] = _rel_change(f.values, prev.values, shell)
            rec["growth_exponent"] = (math.log(shell_mean / history[-1]["shell_mean"])
                                      / math.log(M / history[-1]["M"]))
        history.append(rec)
        prev = f
        if "change" in rec and rec["change"] < sat_tol:
            status = "Saturated"
            break
    rate = history[-1].get("growth_exponent")
    res = ScheduleResult(prev, status, history, history[-1]["M"], rate)
    res.extra.update(z=z.tolist(), r=r, hopf=_hopf_fit(prev), shell_nodes=int(shell.sum()))
    return res


def _hopf_fit(f: Field):
    """Linear vanishing ``u <= C rho`` on nodes with rho < 2h in the inner half of the lens.

    Reports the least-squares slope and the spread of ``u / rho`` there.
    """
    g = f.grid
    near = (g.rho < 2 * g.h) & (g.rho > 0)
    if g.domain.kind == "Lens":
        near &= np.linalg.norm(g.nodes - np.asarray(g.domain.z), axis=1) <= 0.5 * g.domain.r
    if not np.any(near):
        return {"nodes": 0}
    rho, u = g.rho[near], f.values[near]
    ratio = u / rho
    slope = float(np.sum(u * rho) / np.sum(rho * rho))
    return {"nodes": int(near.sum()), "slope": slope, "max_u_over_rho": float(ratio.max()),
            "min_u_over_rho": float(ratio.min())}


# ----------------------------------------------------------------- similarity

@dataclass
class SimilarityReport:
    a: float
    residual_original: float
    residual_transformed: float
    residual_ratio: float
    residual_pass: bool
    self_similarity_deviation: float | None = None
    self_similar: bool | None = None

    def to_dict(self):
        return dict(self.__dict__)


def transform_field(f: Field, a, alpha):
    """``T_a u(x) = a^alpha u(a x)`` on the grid of the scaled box ``(1/a) Omega``.

    The scaled box is discretized with the same resolution, so its nodes are
    the images ``x / a`` of the original nodes and no interpolation is needed.
    """
    g = f.grid
    if g.domain.kind != "HalfPlaneBox":
        raise Unsupported("the similarity transform needs a scale-invariant domain")
    if not a > 0:
        raise ConfigError("a must be positive", key="a")
    g2 = build_grid(g.domain.scaled(1.0 / a), g.resolution)
    if g2.n != g.n or not np.allclose(g2.nodes * a, g.nodes, rtol=0, atol=1e-9 * g.h):
        raise ResolutionError("scaled grid does not match the original lattice")
    arm = None if f.arm_data is None else a ** alpha * f.arm_data
    return Field(g2, a ** alpha * f.values, {"transform_a": a}, arm)


def field_residual(f: Field, spec, alpha):
    g = f.grid
    b = g.rhs(f.arm_data)
    res, _ = relative_residual(g, f.values, b, Absorption(spec, alpha, g.rho))
    return res


def similarity_check(f: Field, a, spec, alpha, self_similar_field=None, y=(0.0, 0.0),
                     radii=(0.1, 0.2), n_theta=25, delta=math.pi / 8,
                     interp_tol=0.05) -> SimilarityReport:
    """Equation residual of ``T_a u`` and, optionally, self-similarity of a field.

    The residual test passes when the transformed residual is at most four
    times the original one plus a rounding allowance.  The self-similarity
    test compares ``a^alpha u(a x)`` with ``u(x)`` on arcs of the given radii
    around y and passes when the largest relative deviation is below
    ``interp_tol``.
    """
    if f.grid.domain.kind != "HalfPlaneBox":
        raise Unsupported("similarity audit runs on the half-plane box only")
    t = transform_field(f, a, alpha)
    r0 = field_residual(f, spec, alpha)
    r1 = field_residual(t, spec, alpha)
    allowance = 64 * np.finfo(float).eps
    ratio = r1 / r0 if r0 > 0 else (0.0 if r1 == 0 else math.inf)
    rep = SimilarityReport(a, r0, r1, ratio, bool(r1 <= 4 * r0 + allowance))
    if self_similar_field is not None:
        u = self_similar_field
        y = np.asarray(y, float)
        th = np.linspace(-(math.pi / 2 - delta), math.pi / 2 - delta, n_theta)
        dirs = np.stack([np.sin(th), np.cos(th)], axis=1)
        devs = []
        for r in radii:
            pts = y + r * dirs
            pa = y + a * r * dirs
            if not (np.all(u.grid.contains(pts)) and np.all(u.grid.contains(pa))):
                raise ResolutionError(f"arc of radius {r:g} (or its image) leaves the domain")
            v0 = u(pts)
            v1 = a ** alpha * u(pa)
            devs.append(float(np.max(np.abs(v1 - v0) / np.maximum(np.abs(v0), np.abs(v1)))))
        rep.self_similarity_deviation = max(devs)
        rep.self_similar = bool(rep.self_similarity_deviation <= interp_tol)
    return rep


# -------------------------------------------------------------- boundary trace

@dataclass
class TraceReport:
    betas: list
    values: dict  # test function name -> integrals per beta
    extrapolated: dict
    atom_mass: float | None = None

    def to_dict(self):
        return dict(self.__dict__)


def _level_set(domain: DomainSpec, beta, h):
    if domain.kind == "HalfPlaneBox":
        n = int(math.ceil(2 * domain.L / (0.5 * h)))
        x = np.linspace(-domain.L + beta, domain.L - beta, n + 1)
        pts = np.stack([x, np.full_like(x, beta)], axis=1)
        return pts, x, np.gradient(x)
    if domain.kind != "UnitDisc":
        raise Unsupported("level sets are defined on the disc and the half-plane box")
    R = 1.0 - beta
    n = int(math.ceil(2 * math.pi * R / (0.5 * h)))
    s = np.linspace(-math.pi, math.pi, n, endpoint=False)
    pts = R * np.stack([np.cos(s), np.sin(s)], axis=1)
    return pts, s, np.full(n, 2 * math.pi * R / n)


def boundary_trace_estimate(f: Field, betas, test_functions=None, y=None,
                            localize=0.25) -> TraceReport:
    """Integrals of ``u phi`` over the level sets ``rho = beta``, extrapolated to 0.

    ``test_functions`` maps names to functions of the boundary parameter.
    With ``y`` given, a bump of half-width ``localize`` around y measures the
    atom mass.  Each beta must be at least two mesh widths.
    """
    g = f.grid
    betas = [float(b) for b in betas]
    if any(b2 >= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ConfigError("beta schedule must be decreasing", key="beta_schedule")
    if min(betas) < 2 * g.h:
        raise ResolutionError(f"beta={min(betas):g} is below two mesh widths ({2 * g.h:g})")
    tests = dict(test_functions or {"one": lambda s: np.ones_like(s)})
    if y is not None:
        s0 = _param(g.domain, y)
        periodic = g.domain.kind != "HalfPlaneBox"

        def local(s, s0=s0):
            d = np.asarray(s) - s0
            if periodic:
                d = (d + math.pi) % (2 * math.pi) - math.pi
            t = np.clip(np.abs(d) / localize, 0, 1)
            return np.where(t < 0.5, 1.0, np.where(t < 1, 0.5 + 0.5 * np.cos(2 * math.pi * (t - 0.5)), 0.0))
        tests["local"] = local
    values = {k: [] for k in tests}
    for b in betas:
        pts, s, ds = _level_set(g.domain, b, g.h)
        u = f(pts)
        for name, phi in tests.items():
            values[name].append(float(np.sum(u * phi(s) * ds)))
    extrap = {}
    for name, v in values.items():
        if len(betas) >= 2:
            c = np.polyfit(betas[-2:], v[-2:], 1)
            extrap[name] = float(c[1])
        else:
            extrap[name] = v[-1]
    mass = extrap.get("local") if y is not None else None
    return TraceReport(betas, values, extrap, mass)


# ---------------------------------------------------------------- asymptotics

@dataclass
class AsymptoticsReport:
    min_ratio: float
    max_ratio: float
    spread: float
    nodes: int
    ratio_cap: float
    drift: float | None = None
    drift_tol: float = 0.1
    passes: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def _target_distance(grid: Grid, target):
    if "atom" in target:
        return np.linalg.norm(grid.nodes - np.asarray(target["atom"], float), axis=1)
    if "arcs" in target:
        return arc_distance(grid.domain, grid.nodes, target["arcs"])
    raise ConfigError("target must name an atom or arcs", key="target")


def asymptotic_ratio(f: Field, target, alpha, region=None):
    g = f.grid
    d = _target_distance(g, target)
    lo, hi = (4 * g.h, g.domain.scale / 2) if region is None else region
    mask = (d >= lo) & (d <= hi)
    if not np.any(mask):
        raise ConfigError("asymptotics region contains no nodes", key="region")
    return f.values[mask] * d[mask] ** (alpha + 1.0) / g.rho[mask]


def check_asymptotics(f: Field, target, alpha, refined: Field | None = None, region=None,
                      ratio_cap=25.0, drift_tol=0.1) -> AsymptoticsReport:
    """Two-sided bound ``u ~ dist(x, target)^(-alpha-1) rho(x)``.

    Ratios are taken over ``4h <= dist <= scale/2`` (scale is the domain
    diameter, h the mesh width of the field at hand).  With a refined field
    (solved for the same data), the drift of both extremes under the
    refinement is reported as well.
    """
    ratio = asymptotic_ratio(f, target, alpha, region)
    lo, hi = float(ratio.min()), float(ratio.max())
    spread = hi / lo if lo > 0 else math.inf
    rep = AsymptoticsReport(lo, hi, spread, int(ratio.size), ratio_cap, drift_tol=drift_tol)
    ok = lo > 0 and spread <= ratio_cap
    if refined is not None:
        r2 = asymptotic_ratio(refined, target, alpha, region)
        lo2, hi2 = float(r2.min()), float(r2.max())
        rep.drift = max(abs(lo2 - lo) / max(lo, lo2), abs(hi2 - hi) / max(hi, hi2)) \
            if lo > 0 and lo2 > 0 else math.inf
        ok = ok and rep.drift < drift_tol
    rep.passes = bool(ok)
    return rep


# ------------------------------------------------------ removability/stability

def removability_trend(grid: Grid, y, spec, alpha, k=1.0, eps=None, probe_depth=0.5,
                       config=None, factor=2.0, control_tol=0.02):
    """Probe values of ``u_{k,y}`` along an eps-halving schedule.

    Returns the schedule result plus ``collapse`` (every halving shrinks the
    probe by at least ``factor``) and ``stable`` (last relative probe change
    below ``control_tol``).
    """
    eps = list(eps) if eps is not None else eps_schedule(grid.domain, levels=4)
    _check_mollifier(grid, eps, 2.0)
    res = solve_ukdelta(grid, y, k, spec, alpha, config, eps=eps, probe_depth=probe_depth,
                        collapse_factor=factor)
    p = res.extra["probe"]
    last = abs(p[-1] - p[-2]) / max(abs(p[-1]), abs(p[-2]))
    res.extra.update(collapse=all(s >= factor for s in res.extra["shrink_factors"]),
                     stable=last < control_tol, last_probe_change=last)
    return res


def _check_mollifier(grid, eps, min_cells):
    if min(eps) < min_cells * grid.h:
        raise ResolutionError(f"mollifier width {min(eps):g} spans fewer than {min_cells} "
                              f"cells of size {grid.h:g}")


def stability_study(grid: Grid, y, spec, alpha, k=1.0, eps=None, config=None, min_cells=2.0):
    """Discrete L1 and weighted L1(rho) distances along an eps-halving schedule."""
    eps = list(eps) if eps is not None else eps_schedule(grid.domain, levels=4)
    _check_mollifier(grid, eps, min_cells)
    s0 = _param(grid.domain, y)
    fields = [solve_semilinear(grid, atom(s0, k, e), spec, alpha, config) for e in eps]
    H = Absorption(spec, alpha, grid.rho)
    area = grid.cell_area
    l1, wl1 = [], []
    for f0, f1 in zip(fields, fields[1:]):
        l1.append(float(area * np.sum(np.abs(f1.values - f0.values))))
        wl1.append(float(area * np.sum(grid.rho * np.abs(H(f1.values) - H(f0.values)))))
    dec = lambda v: all(b < a for a, b in zip(v, v[1:]))
    return {"eps": eps, "l1": l1, "weighted_l1": wl1, "l1_decreasing": dec(l1),
            "weighted_decreasing": dec(wl1), "passes": dec(l1) and dec(wl1),
            "fields": fields}


# ---------------------------------------------------------------- comparison

def random_measure_pair(rng: np.random.Generator, domain: DomainSpec, n_atoms=3,
                        max_mass=50.0, eps=0.1):
    """Two finite measures with nu1 <= nu2: shared atoms with ordered masses and densities."""
    lo, hi = (-math.pi, math.pi) if domain.kind == "UnitDisc" else (-0.8 * domain.L, 0.8 * domain.L)
    pos = rng.uniform(lo, hi, n_atoms)
    m2 = rng.uniform(0, max_mass, n_atoms)
    m1 = m2 * rng.uniform(0, 1, n_atoms)
    c2 = rng.uniform(0, 5)
    c1 = c2 * rng.uniform(0, 1)
    freq = int(rng.integers(1, 4))
    ph = rng.uniform(0, 2 * math.pi)
    # nonnegative bounded density 1 + cos; c1 <= c2 keeps the ordering
    d1 = lambda s, c=c1: c * (1 + np.cos(freq * np.asarray(s) + ph))
    d2 = lambda s, c=c2: c * (1 + np.cos(freq * np.asarray(s) + ph))
    nu1 = BoundaryMeasure(list(zip(pos, m1)), d1, mollification_eps=eps)
    nu2 = BoundaryMeasure(list(zip(pos, m2)), d2, mollification_eps=eps)
    return nu1, nu2


def comparison_audit(grid: Grid, spec, alpha, n_pairs=50, seed=0, tol=1e-8, config=None):
    """Comparison and lift domination over seeded random measure pairs."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_pairs):
        nu1, nu2 = random_measure_pair(rng, grid.domain)
        u1 = solve_semilinear(grid, nu1, spec, alpha, config).values
        u2 = solve_semilinear(grid, nu2, spec, alpha, config).values
        P1 = harmonic_lift(grid, nu1)
        P2 = harmonic_lift(grid, nu2)
        rows.append({"pair": i,
                     "comparison_defect": float(np.max(u1 - u2)),
                     "domination_defect": float(max(np.max(u1 - P1), np.max(u2 - P2))),
                     "negativity": float(max(-u1.min(), -u2.min(), 0.0))})
    ok = all(r["comparison_defect"] <= tol and r["domination_defect"] <= tol
             and r["negativity"] <= tol for r in rows)
    return {"pairs": rows, "passes": ok, "tol": tol}


def covariant_parameter(value, h_coarse, h_fine, alpha, per_width=False):
    """Data level on a refined grid that keeps the grid-scale boundary data equivalent.

    Near the singular set the solution lives on the scale ``rho^-alpha``, so
    the boundary amplitude next to it must scale like ``h^-alpha``.  A
    truncation level n is that amplitude; an atom of mass k mollified over one
    mesh width has amplitude ``k/h`` (``per_width=True``).
    """
    r = h_coarse / h_fine
    return value * r ** (alpha - 1.0 if per_width else alpha)


def asymptotics_study(domain: DomainSpec, target, spec, alpha, resolution=128,
                      config=None, schedule=None, ratio_cap=25.0, drift_tol=0.1):
    """Saturated field at ``resolution`` and its refinement at twice the resolution.

    ``target`` is ``{"atom": y}`` (u_infty,y) or ``{"arcs": F}`` (U_F).  The
    refined solve uses the saturation level of the coarse run, rescaled by
    :func:`covariant_parameter`.
    """
    g1 = build_grid(domain, resolution)
    g2 = build_grid(domain, 2 * resolution)
    if "atom" in target:
        sched = DEFAULT_K_SCHEDULE if schedule is None else schedule
        run = compute_uinfty(g1, target["atom"], spec, alpha, sched, config)
        p2 = covariant_parameter(run.parameter, g1.h, g2.h, alpha, per_width=True)
        fine = solve_at(g2, target["atom"], p2, spec, alpha, config)
    elif "arcs" in target:
        sched = DEFAULT_N_SCHEDULE if schedule is None else schedule
        run = solve_UF(g1, target["arcs"], spec, alpha, sched, config)
        p2 = covariant_parameter(run.parameter, g1.h, g2.h, alpha)
        fine = solve_UF(g2, target["arcs"], spec, alpha, (p2,), config).field
    else:
        raise ConfigError("target must name an atom or arcs", key="target")
    rep = check_asymptotics(run.field, target, alpha, refined=fine, ratio_cap=ratio_cap,
                            drift_tol=drift_tol)
    return {"report": rep, "saturation": run, "refined_parameter": p2,
            "coarse": run.field, "fine": fine,
            "passes": rep.passes and run.status == "Saturated"}


# ---------------------------------------------------------------- VSS limit

@dataclass
class VSSCompareResult:
    report: object  # spherical_profile.VSSReport of the field used for the verdict
    raw_report: object | None
    saturation: ScheduleResult
    bracket: dict
    lambda_source: str
    profile_found: bool
    passes: bool

    def to_dict(self):
        out = {"lambda_source": self.lambda_source, "profile_found": self.profile_found,
               "passes": self.passes, "saturation_k": self.saturation.parameter,
               "saturation_status": self.saturation.status, **self.bracket}
        out["deviation"] = self.report.to_dict()
        if self.raw_report is not None:
            out["raw_deviation"] = self.raw_report.to_dict()
        return out


def vss_compare(spec, alpha, resolution=256, L=0.25, radii=(0.2, 0.15, 0.1),
                lambda_source="derived", k_schedule=DEFAULT_K_SCHEDULE, extrapolate=True,
                bracket=True, delta=math.pi / 8, threshold=0.05, config=None):
    """Half-plane ``u_{infty,0}`` against the spherical profile ``r^-alpha w(theta)``.

    The FD field always solves the same equation; ``lambda_source`` only
    selects the reference profile.  The artificial sides carry the derived
    profile; the zero floor and KO-bound cap solves at the saturation level
    give a bracket around the profile values.  A missing reference profile
    counts as full deviation.
    """
    from ..errors import NoProfileFound
    from ..spherical_profile import (VSSReport, check_vss_limit, make_profile_problem,
                                     solve_profile)
    grid = build_grid(DomainSpec("HalfPlaneBox", L), resolution)
    side_profile = solve_profile(make_profile_problem(spec, 2, alpha, "derived"))
    try:
        ref = solve_profile(make_profile_problem(spec, 2, alpha, lambda_source))
        found = True
    except NoProfileFound:
        ref, found = None, False
    base = config or SolverConfig()

    def cfg(side):
        d = base.to_dict()
        d["artificial_side_data"] = side
        return SolverConfig(**d, profile=side_profile)

    run = compute_uinfty(grid, (0.0, 0.0), spec, alpha, k_schedule, cfg("profile"),
                         extrapolate=extrapolate)
    y = (0.0, 0.0)
    if not found:
        rep = VSSReport(sorted(radii, reverse=True), [1.0] * len(radii), False, delta)
        return VSSCompareResult(rep, None, run, {}, lambda_source, False, False)
    rep = check_vss_limit(run.field, grid, ref, y, radii, delta=delta, threshold=threshold)
    raw = None
    if extrapolate:
        raw_field = Field(grid, run.field.meta["raw_values"], {}, run.field.arm_data)
        raw = check_vss_limit(raw_field, grid, ref, y, radii, delta=delta, threshold=threshold)
    br = {}
    if bracket:
        w = ref(rep.thetas)
        lo_f = solve_at(grid, y, run.parameter, spec, alpha, cfg("zero"), extrapolate=extrapolate)
        hi_f = solve_at(grid, y, run.parameter, spec, alpha, cfg("kobound"), extrapolate=extrapolate)
        lo = np.array(check_vss_limit(lo_f, grid, ref, y, radii, delta=delta).scaled_values)
        hi = np.array(check_vss_limit(hi_f, grid, ref, y, radii, delta=delta).scaled_values)
        br = {"floor_below": bool(np.all(lo <= w)), "cap_above": bool(np.all(hi >= w)),
              "floor_min_ratio": float(np.min(lo / w)), "cap_min_ratio": float(np.min(hi / w))}
        br["encloses"] = br["floor_below"] and br["cap_above"]
    ok = rep.passes and run.status == "Saturated" and br.get("encloses", True)
    rep.bracket = br
    return VSSCompareResult(rep, raw, run, br, lambda_source, True, bool(ok))
