"""Axially symmetric profile of the very singular solution on the half-sphere.

Writing ``u = r^-alpha w(theta)`` with ``theta`` the angle to the inward
normal, the equation reduces to

    w'' + (N-2) cot(theta) w' + lambda w - cos^(-2-alpha) h(cos^alpha w) = 0

on ``[0, pi/2]`` with ``w'(0) = 0`` and ``w(pi/2) = 0``.  Two independent
solvers are provided: RK4 shooting on ``w(0)`` and a second-order
collocation scheme driven by monotone iteration and Newton.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate, linalg

from .errors import EvaluationError, InvalidParameter, NoProfileFound, ResolutionError, SolverError
from .nonlinearity import NonlinearitySpec, estimate_hzero_epsilon

HALF_PI = 0.5 * math.pi


# ---------------------------------------------------------------- lambda

def radial_laplacian_fd(f, r, N, step=1e-4):
    """Central-difference radial Laplacian ``f'' + (N-1)/r f'`` at ``r``."""
    fp = (f(r + step) - f(r - step)) / (2 * step)
    fpp = (f(r + step) - 2 * f(r) + f(r - step)) / step ** 2
    return fpp + (N - 1) / r * fp


def lambda_from_oracle(N, alpha):
    """Coefficient c in ``Delta r^-alpha = c r^(-alpha-2)``, read off numerically at r = 1."""
    return radial_laplacian_fd(lambda r: r ** (-alpha), 1.0, N)


def derive_lambda(N, alpha, source="derived"):
    """Zero-order coefficient of the reduced equation.

    ``source="derived"`` gives alpha (alpha + 2 - N), cross-checked against
    the finite-difference oracle.  ``source="paper"`` gives alpha - (N - 1),
    kept for the discrepancy experiment.
    """
    if N < 2 or not alpha > 0:
        raise InvalidParameter("need N >= 2 and alpha > 0")
    if source == "paper":
        return alpha - (N - 1.0)
    if source != "derived":
        raise InvalidParameter(f"unknown lambda source {source!r}")
    exact = alpha * (alpha + 2.0 - N)
    oracle = lambda_from_oracle(N, alpha)
    if abs(oracle - exact) > 1e-5 * max(1.0, abs(exact)):
        raise SolverError(f"lambda oracle {oracle} disagrees with {exact}")
    return exact


# ---------------------------------------------------------------- problem

class Method(str, enum.Enum):
    SHOOTING = "Shooting"
    COLLOCATION = "MonotoneCollocation"


def clustered_theta_grid(n=2048):
    """Nodes on [0, pi/2] clustered towards pi/2; returns (theta, pi/2 - theta).

    The distance to pi/2 is formed without cancellation so that
    ``cos(theta)`` can be evaluated as ``sin(pi/2 - theta)`` to full accuracy.
    """
    if n < 8:
        raise InvalidParameter("profile grid needs at least 8 nodes")
    phi = HALF_PI * np.arange(n) / (n - 1)
    x = HALF_PI * 2.0 * np.sin(0.25 * math.pi - 0.5 * phi) ** 2
    x[0], x[-1] = HALF_PI, 0.0
    theta = HALF_PI - x
    theta[0] = 0.0
    return theta, x


@dataclass
class ProfileProblem:
    spec: NonlinearitySpec
    N: int
    alpha: float
    lam: float
    theta_grid: np.ndarray
    x_grid: np.ndarray = field(repr=False)  # pi/2 - theta, computed accurately
    lambda_source: str = "derived"

    def __post_init__(self):
        t = self.theta_grid
        if t[0] != 0.0 or abs(t[-1] - HALF_PI) > 1e-15 or np.any(np.diff(t) <= 0):
            raise InvalidParameter("theta grid must increase strictly from 0 to pi/2")
        self._cos = np.sin(self.x_grid)
        self._cos[-1] = 0.0
        eps = np.finfo(float).eps
        self._cos_thr = 10.0 * eps ** (1.0 / (2.0 + self.alpha))
        self._sigma = None

    @property
    def n(self):
        return self.theta_grid.size

    def forcing(self, w, cos=None):
        """cos^(-2-alpha) h(cos^alpha w) at the nodes (zero at pi/2)."""
        c = self._cos if cos is None else cos
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        m = c > 0
        cm = c[m]
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out[m] = cm ** (-2.0 - self.alpha) * self.spec.h(cm ** self.alpha * w[m])
        bad = m & ~np.isfinite(out)
        low = m & (c < self._cos_thr)
        if np.any(low & (bad | ((c ** self.alpha * w == 0) & (w != 0)))):
            # asymptotic substitution: h(s) ~ h(s0) (s/s0)^sigma for tiny s
            out = self._forcing_power_law(w, c, out, low)
            bad = m & ~np.isfinite(out)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise EvaluationError(f"non-finite forcing at theta={self.theta_grid[i]:.6g}",
                                  t=float(w[i]))
        return out

    def _forcing_power_law(self, w, c, out, low):
        if self._sigma is None:
            self._sigma = estimate_hzero_epsilon(self.spec).evidence.get("sigma", 1.0)
        s0 = 1e-8
        h0 = self.spec.h(s0)
        cl, wl = c[low], w[low]
        # cos^(-2-alpha) h0 (cos^alpha |w| / s0)^sigma sign(w), in logs
        logv = (-2.0 - self.alpha + self.alpha * self._sigma) * np.log(cl) \
            + self._sigma * np.log(np.abs(wl) / s0 + 1e-300) + math.log(h0)
        out = out.copy()
        out[low] = np.sign(wl) * np.exp(logv)
        return out

    def forcing_dw(self, w):
        """Derivative of the forcing with respect to w."""
        c = self._cos
        out = np.zeros_like(w)
        m = c > 0
        cm = c[m]
        with np.errstate(over="ignore", invalid="ignore"):
            out[m] = cm ** -2.0 * np.asarray(self.spec.h_prime(cm ** self.alpha * w[m]))
        out[~np.isfinite(out)] = 0.0
        return out


def make_profile_problem(spec, N, alpha, lambda_source="derived", n=2048,
                         lam=None) -> ProfileProblem:
    theta, x = clustered_theta_grid(n)
    if lam is None:
        lam = derive_lambda(N, alpha, lambda_source)
    return ProfileProblem(spec, int(N), float(alpha), float(lam), theta, x, lambda_source)


# ---------------------------------------------------------------- discretization

def _operator_bands(problem: ProfileProblem):
    """Tridiagonal coefficients (lower, diag, upper) of w'' + (N-2) cot w'.

    Row 0 uses the axis limit (N-1) w''(0) with the even reflection
    w_(-1) = w_1; the last row is the Dirichlet node and left as zero.
    """
    t = problem.theta_grid
    x = problem.x_grid
    n = t.size
    lo, di, up = np.zeros(n), np.zeros(n), np.zeros(n)
    # spacings from the complement x = pi/2 - theta, exact near pi/2
    hm = x[:-2] - x[1:-1]
    hp = x[1:-1] - x[2:]
    hs = hm + hp
    cot = problem._cos[1:-1] / np.cos(x[1:-1])  # cos(theta)/sin(theta)
    k = problem.N - 2.0
    lo[1:-1] = 2.0 / (hm * hs) - k * cot * hp / (hm * hs)
    di[1:-1] = -2.0 / (hm * hp) + k * cot * (hp - hm) / (hm * hp)
    up[1:-1] = 2.0 / (hp * hs) + k * cot * hm / (hp * hs)
    h0 = t[1]
    di[0] = -2.0 * (problem.N - 1.0) / h0 ** 2
    up[0] = 2.0 * (problem.N - 1.0) / h0 ** 2
    return lo, di, up


def _apply(bands, w):
    lo, di, up = bands
    out = di * w
    out[1:] += lo[1:] * w[:-1]
    out[:-1] += up[:-1] * w[1:]
    return out


def reduced_residual(problem: ProfileProblem, w_values, bands=None):
    """Nodal residual of the reduced equation; zero at the Dirichlet node."""
    w = np.array(w_values, dtype=float)
    if w.shape != problem.theta_grid.shape:
        raise InvalidParameter("w_values must live on the problem's theta grid")
    w[-1] = 0.0
    bands = _operator_bands(problem) if bands is None else bands
    r = _apply(bands, w) + problem.lam * w - problem.forcing(w)
    r[-1] = 0.0
    return r


def _banded(bands, shift):
    """Matrix of (-A + diag(shift)) in LAPACK banded storage, Dirichlet row last."""
    lo, di, up = bands
    n = di.size
    ab = np.zeros((3, n))
    ab[0, 1:] = -up[:-1]
    ab[1] = -di + shift
    ab[2, :-1] = -lo[1:]
    ab[1, -1] = 1.0  # Dirichlet row; its sub-diagonal entry lo[-1] is zero
    return ab


# ---------------------------------------------------------------- solution

@dataclass
class ProfileSolution:
    theta_grid: np.ndarray
    w: np.ndarray
    w_prime0: float
    kappa: float
    residual_sup: float
    method: Method
    problem: ProfileProblem = field(repr=False, default=None)
    info: dict = field(default_factory=dict)

    @property
    def w0(self):
        return float(self.w[0])

    def __post_init__(self):
        # even extension about 0 keeps the spline symmetric at the axis
        t = np.concatenate((-self.theta_grid[:0:-1], self.theta_grid))
        v = np.concatenate((self.w[:0:-1], self.w))
        self._spline = interpolate.CubicSpline(t, v)

    def __call__(self, theta):
        theta = np.abs(np.asarray(theta, dtype=float))
        out = np.where(theta >= HALF_PI, 0.0, self._spline(np.minimum(theta, HALF_PI)))
        return out if out.ndim else float(out)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["theta", "w"])
            for t, v in zip(self.theta_grid, self.w):
                wr.writerow([repr(float(t)), repr(float(v))])


def _slope_at_end(theta, w):
    """-w'(pi/2) from a one-sided three-point formula."""
    x0, x1, x2 = theta[-1], theta[-2], theta[-3]
    h1, h2 = x0 - x1, x0 - x2
    # derivative at x0 of the quadratic through the three nodes
    d = (w[-1] * (1 / h1 + 1 / h2) - w[-2] * h2 / (h1 * (h2 - h1))
         + w[-3] * h1 / (h2 * (h2 - h1)))
    return -float(d)


def _slope_at_axis(theta, w):
    t1, t2 = theta[1], theta[2]
    return float((-(t1 + t2) / (t1 * t2)) * w[0] + t2 / (t1 * (t2 - t1)) * w[1]
                 - t1 / (t2 * (t2 - t1)) * w[2])


# ---------------------------------------------------------------- shooting

def _shoot(problem: ProfileProblem, s, blow=1e12):
    """Integrate from the axis for every amplitude in ``s`` at once.

    Returns trajectories (m, n), terminal derivatives and a class per
    amplitude: +1 blow-up or positive at pi/2, -1 zero crossing before pi/2.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t, x = problem.theta_grid, problem.x_grid
    n, m = t.size, s.size
    k, lam, N = problem.N - 2.0, problem.lam, problem.N
    W = np.zeros((m, n))
    w, v = s.copy(), np.zeros(m)
    W[:, 0] = w
    alive = np.ones(m, dtype=bool)
    cls = np.zeros(m, dtype=int)

    al = problem.alpha
    h = problem.spec.h

    def rhs(xc, w, v):
        # xc = pi/2 - theta, so cos(theta) = sin(xc) without cancellation
        c = math.sin(xc)
        g = c ** (-2.0 - al) * h(c ** al * w) if c > 0 else np.zeros_like(w)
        if 0 < c < problem._cos_thr:
            g = problem.forcing(np.where(np.isfinite(w), w, 0.0), np.full(w.shape, c))
        if xc == HALF_PI:
            return v, (g - lam * w) / (N - 1.0)
        return v, -k * (c / math.cos(xc)) * v - lam * w + g

    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n - 1):
            a, b = x[i], x[i + 1]
            hstep = (t[i + 1] - t[i]) if i < n // 2 else (a - b)
            xm = a - 0.5 * hstep
            k1w, k1v = rhs(a, w, v)
            k2w, k2v = rhs(xm, w + 0.5 * hstep * k1w, v + 0.5 * hstep * k1v)
            k3w, k3v = rhs(xm, w + 0.5 * hstep * k2w, v + 0.5 * hstep * k2v)
            k4w, k4v = rhs(b, w + hstep * k3w, v + hstep * k3v)
            w = w + hstep / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
            v = v + hstep / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            blown = alive & ~((np.abs(w) < blow) & (np.abs(v) < blow))
            cls[blown] = 1
            alive &= ~blown
            crossed = alive & (w < 0) & (i + 1 < n - 1)
            cls[crossed] = -1
            alive &= ~crossed
            w = np.where(alive, w, 0.0)
            v = np.where(alive, v, 0.0)
            W[:, i + 1] = np.where(alive, w, np.nan)
            if not alive.any():
                break
    # survivors reached pi/2 without crossing: classify by the terminal sign
    cls[alive] = np.where(W[alive, -1] >= 0, 1, -1)
    return W, v, cls


def _solve_shooting(problem, cfg):
    scan = np.geomspace(cfg["s_min"], cfg["s_max"], cfg["scan_points"])
    _, _, cls = _shoot(problem, scan)
    idx = np.where((cls[:-1] == -1) & (cls[1:] == 1))[0]
    if idx.size == 0:
        raise NoProfileFound(
            f"no sign change of the terminal value over s in "
            f"[{cfg['s_min']:g}, {cfg['s_max']:g}]")
    lo, hi = scan[idx[0]], scan[idx[0] + 1]
    m = cfg["multisection"]
    sweeps = 0
    while hi - lo > 4 * np.finfo(float).eps * hi and sweeps < 40:
        trial = np.linspace(lo, hi, m + 2)[1:-1]
        _, _, c = _shoot(problem, trial)
        neg = np.where(c == -1)[0]
        pos = np.where(c == 1)[0]
        new_lo = trial[neg[-1]] if neg.size else lo
        new_hi = trial[pos[0]] if pos.size else hi
        if new_lo > new_hi:  # non-monotone classification inside the bracket
            break
        lo, hi = new_lo, new_hi
        sweeps += 1
    s_star = 0.5 * (lo + hi)
    W, v, c = _shoot(problem, np.array([lo, hi]))
    # both bracket ends follow the profile up to the last node where they split
    w_lo, w_hi = W[0], W[1]
    w = np.where(np.isfinite(w_lo), w_lo, w_hi)
    both = np.isfinite(w_lo) & np.isfinite(w_hi)
    w[both] = 0.5 * (w_lo[both] + w_hi[both])
    bad = ~np.isfinite(w)
    if bad[:-1].any():
        raise SolverError("shooting bracket did not resolve the profile up to pi/2")
    terminal = float(w[-1]) if np.isfinite(w[-1]) else 0.0
    w[-1] = 0.0
    return w, s_star, {"bracket": [float(lo), float(hi)], "sweeps": sweeps,
                       "terminal_value": terminal}


# ---------------------------------------------------------------- collocation

def _is_subsolution(problem, bands, w):
    r = _apply(bands, w) + problem.lam * w - problem.forcing(w)
    return bool(np.all(r[:-1] >= -1e-14 * np.max(np.abs(w))))


def _solve_collocation(problem, cfg, bands, w_sup=math.inf):
    cos = problem._cos
    delta = cfg["delta"]
    w_sub = None
    for _ in range(40):
        trial = delta * cos
        if _is_subsolution(problem, bands, trial):
            w_sub = trial
            break
        delta *= 0.5
    if w_sub is None:
        raise NoProfileFound("delta cos(theta) is not a subsolution for any delta tried; "
                             "no positive profile")
    w = w_sub.copy()
    history = []
    ordered = True
    it = 0
    for it in range(1, cfg["max_monotone"] + 1):
        gw = problem.forcing_dw(w)
        L = max(float(np.max(gw[:-1])) - problem.lam, 0.0) + 1.0
        rhs = (problem.lam + L) * w - problem.forcing(w)
        rhs[-1] = 0.0
        w_new = linalg.solve_banded((1, 1), _banded(bands, L), rhs)
        step = float(np.max(np.abs(w_new - w)))
        ordered &= bool(np.all(w_new >= w_sub - 1e-12) and np.all(w_new <= w_sup))
        w = w_new
        history.append(step)
        if not np.all(np.isfinite(w)) or np.max(w) > 1e8:
            raise NoProfileFound("monotone iteration diverged; no bounded profile")
        if step < cfg["monotone_tol"] * max(1.0, float(np.max(w))):
            break
    # Newton polish
    res = None
    for k in range(cfg["max_newton"]):
        r = _apply(bands, w) + problem.lam * w - problem.forcing(w)
        r[-1] = 0.0
        res = float(np.max(np.abs(r)))
        history.append(res)
        if res < cfg["tol"]:
            break
        J = _banded(bands, problem.forcing_dw(w) - problem.lam)
        dw = linalg.solve_banded((1, 1), J, r)
        w = w + dw
        w[-1] = 0.0
        if np.max(np.abs(dw)) < 1e-10 * np.max(np.abs(w)):
            # updates at rounding level: the residual has hit its float64 floor
            r = reduced_residual(problem, w, bands)
            res = float(np.max(np.abs(r)))
            history.append(res)
            if res < cfg["floor_tol"]:
                break
    else:
        raise SolverError(f"Newton stagnated at residual {res:.3e}", residual=res)
    if np.min(w[:-1]) <= 0:
        raise NoProfileFound("collocation converged to a non-positive solution")
    return w, {"monotone_iterations": it, "newton_history": history[-cfg["max_newton"]:],
               "delta": float(delta), "ordered": ordered}


# ---------------------------------------------------------------- driver

DEFAULT_PROFILE_CONFIG = dict(
    s_min=1e-6, s_max=1e6, scan_points=49, multisection=16,
    delta=0.5, max_monotone=20000, monotone_tol=1e-6, max_newton=30, tol=1e-10, floor_tol=1e-7,
)


def _supersolution_cap(problem):
    """Constant cap from the interior KO bound: w = r^alpha u <= C cos^-alpha."""
    from .errors import DivergentEnvelope, RangeError
    from .ko_envelope import build_envelope, global_bound_constant
    try:
        env = build_envelope(problem.spec, a_min=1e-2, a_max=1e6, per_decade=8)
        return global_bound_constant(env, problem.alpha).C
    except (DivergentEnvelope, RangeError):
        return math.inf


def solve_profile(problem: ProfileProblem, solver_config=None, method=Method.COLLOCATION):
    """Positive solution of the reduced problem by shooting or collocation."""
    cfg = dict(DEFAULT_PROFILE_CONFIG)
    cfg.update(solver_config or {})
    method = Method(method)
    bands = _operator_bands(problem)
    if method is Method.SHOOTING:
        w, s_star, info = _solve_shooting(problem, cfg)
    else:
        cap = cfg.get("w_sup")
        if cap is None:
            cap = _supersolution_cap(problem)
        w, info = _solve_collocation(problem, cfg, bands, cap)
        info["w_sup"] = cap
    r = reduced_residual(problem, w, bands)
    t = problem.theta_grid
    sol = ProfileSolution(
        theta_grid=t, w=w, w_prime0=_slope_at_axis(t, w), kappa=_slope_at_end(t, w),
        residual_sup=float(np.max(np.abs(r))), method=method, problem=problem, info=info)
    if not np.all(w[:-1] > 0):
        raise NoProfileFound(f"{method.value} produced a profile that is not positive")
    return sol


def solve_both(problem, solver_config=None):
    """Shooting and collocation profiles plus their sup-norm distance."""
    a = solve_profile(problem, solver_config, Method.SHOOTING)
    b = solve_profile(problem, solver_config, Method.COLLOCATION)
    return a, b, float(np.max(np.abs(a.w - b.w)))


def refinement_study(spec, N, alpha, sizes=(512, 1024, 2048), lambda_source="derived"):
    """w(0) on successively halved grids and the observed contraction of its changes."""
    w0 = [solve_profile(make_profile_problem(spec, N, alpha, lambda_source, n)).w0
          for n in sizes]
    diffs = [abs(b - a) for a, b in zip(w0, w0[1:])]
    return {"sizes": list(sizes), "w0": w0, "diffs": diffs}


# ---------------------------------------------------------------- half-space VSS

def default_rotation(N=2):
    """Rotation taking e1 to the inward normal e_N of {x_N > 0}."""
    R = np.zeros((N, N))
    R[N - 1, 0] = 1.0
    R[0, N - 1] = -1.0
    for i in range(1, N - 1):
        R[i, i] = 1.0
    return R


def evaluate_halfspace_vss(sol: ProfileSolution, x, y, normal_rotation=None):
    """``r^-alpha w(theta)`` with theta the angle between x - y and R e1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x - y
    N = d.shape[-1]
    R = default_rotation(N) if normal_rotation is None else np.asarray(normal_rotation)
    nrm = R[:, 0]
    r = np.linalg.norm(d, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosang = np.clip(d @ nrm / r, -1.0, 1.0)
        theta = np.arccos(cosang)
        val = np.where(theta < HALF_PI, r ** -sol.problem.alpha * sol(np.minimum(theta, HALF_PI)), 0.0)
    if np.any(r == 0):
        raise InvalidParameter("x coincides with the singular point")
    return val if val.ndim else float(val)


@dataclass
class VSSReport:
    radii: list
    deviations: list
    passes: bool
    delta: float
    thetas: np.ndarray = field(repr=False, default=None)
    scaled_values: list = field(repr=False, default_factory=list)
    bracket: dict = field(default_factory=dict)

    @property
    def final_deviation(self):
        return self.deviations[int(np.argmin(self.radii))]

    def to_dict(self):
        return {"radii": list(map(float, self.radii)),
                "deviations": list(map(float, self.deviations)),
                "passes": self.passes, "delta": self.delta,
                "final_deviation": float(self.final_deviation), **self.bracket}


def relative_deviation(a, b):
    """|a - b| / max(|a|, |b|), zero where both vanish."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    den = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, np.abs(a - b) / den, 0.0)
    return out


def check_vss_limit(fd_field, grid, sol: ProfileSolution, y, radii, delta=math.pi / 8,
                    n_theta=25, normal_rotation=None, flat_tol=0.01, threshold=0.05,
                    min_cells=8):
    """Compare ``r^alpha u(y + r sigma)`` with ``w(theta)`` on arcs around y.

    ``fd_field`` is an array on ``grid`` (or a profile-derived callable);
    ``grid`` must expose ``h``, ``contains(points)`` and
    ``interpolate(values, points)``.
    """
    y = np.asarray(y, dtype=float)
    radii = np.asarray(sorted(radii, reverse=True), dtype=float)
    if radii.min() < min_cells * grid.h:
        raise ResolutionError(
            f"annulus r={radii.min():g} spans fewer than {min_cells} cells of size {grid.h:g}")
    R = default_rotation(2) if normal_rotation is None else np.asarray(normal_rotation)
    thetas = np.linspace(-(HALF_PI - delta), HALF_PI - delta, n_theta)
    e1, e2 = R[:, 0], R[:, 1]
    devs, scaled = [], []
    alpha = sol.problem.alpha
    w_ref = sol(thetas)
    for r in radii:
        pts = y + r * (np.cos(thetas)[:, None] * e1 + np.sin(thetas)[:, None] * e2)
        if not np.all(grid.contains(pts)):
            raise ResolutionError(f"arc of radius {r:g} leaves the computational domain")
        u = fd_field(pts) if callable(fd_field) else grid.interpolate(fd_field, pts)
        su = r ** alpha * u
        scaled.append(su)
        devs.append(float(np.max(relative_deviation(su, w_ref))))
    devs_arr = np.asarray(devs)
    # radii are sorted decreasing: deviations must not grow beyond flat_tol
    trend_ok = bool(np.all(np.diff(devs_arr) <= flat_tol))
    passes = bool(trend_ok and devs_arr[-1] < threshold)
    return VSSReport(list(radii), devs, passes, delta, thetas, scaled)
