"""Cartesian grids with Shortley-Weller boundary arms on the built-in domains.

Nodes live on a square lattice.  A node is an unknown when it lies inside
the domain at least ``h/4`` away from every boundary piece; any stencil arm
that leaves the unknown set is cut at the boundary crossing and recorded as
an arm carrying Dirichlet data.  The discrete operator ``A`` approximates
``-Delta`` so that ``A u = b(g)`` is the discrete harmonic problem.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..errors import ConfigError, ResolutionError

PHYSICAL, ARTIFICIAL, CAP = 0, 1, 2
_DIRS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])


@dataclass(frozen=True)
class DomainSpec:
    """``UnitDisc``, ``HalfPlaneBox`` (``[-L, L] x [0, L]``) or ``Lens``.

    ``Lens`` is the unit disc intersected with the ball ``B_r(z)`` and carries
    the barrier problem; its circular cap is a separate boundary piece.
    """

    kind: str
    L: float = 1.0
    z: tuple | None = None
    r: float | None = None

    def __post_init__(self):
        if self.kind not in ("UnitDisc", "HalfPlaneBox", "Lens"):
            raise ConfigError(f"unknown domain kind {self.kind!r}", key="domain.kind")
        if self.kind == "HalfPlaneBox" and not self.L > 0:
            raise ConfigError("L must be positive", key="domain.L")
        if self.kind == "Lens" and (self.z is None or not (self.r and self.r > 0)):
            raise ConfigError("lens needs a centre z and radius r", key="domain")

    # geometry ---------------------------------------------------------
    @property
    def scale(self) -> float:
        """Characteristic length: diameter of the domain."""
        return {"UnitDisc": 2.0, "HalfPlaneBox": 2.0 * self.L, "Lens": 2.0 * (self.r or 0)}[self.kind]

    def bbox(self):
        if self.kind == "UnitDisc":
            return (-1.0, 1.0, -1.0, 1.0)
        if self.kind == "HalfPlaneBox":
            return (-self.L, self.L, 0.0, self.L)
        zx, zy = self.z
        return (zx - self.r, zx + self.r, zy - self.r, zy + self.r)

    def rho(self, p):
        """Distance to the physical boundary."""
        p = np.asarray(p, dtype=float)
        if self.kind == "HalfPlaneBox":
            return p[..., 1].copy()
        return 1.0 - np.hypot(p[..., 0], p[..., 1])

    def clearance(self, p):
        """Distance to the nearest boundary piece of any kind (lower bound)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "UnitDisc":
            return self.rho(p)
        if self.kind == "HalfPlaneBox":
            x, y = p[..., 0], p[..., 1]
            return np.minimum.reduce([y, self.L - y, self.L - x, self.L + x])
        d_cap = self.r - np.hypot(p[..., 0] - self.z[0], p[..., 1] - self.z[1])
        return np.minimum(self.rho(p), d_cap)

    def contains(self, p):
        return self.clearance(p) > 0

    def crossing(self, p, d):
        """Distance along unit direction d to the boundary and the piece hit."""
        p = np.asarray(p, dtype=float)
        d = np.asarray(d, dtype=float)
        if self.kind == "HalfPlaneBox":
            ts, parts = [], []
            for k, (lo, hi) in enumerate([(-self.L, self.L), (0.0, self.L)]):
                with np.errstate(divide="ignore", invalid="ignore"):
                    t_hi = np.where(d[..., k] > 0, (hi - p[..., k]) / d[..., k], np.inf)
                    t_lo = np.where(d[..., k] < 0, (lo - p[..., k]) / d[..., k], np.inf)
                ts += [t_hi, t_lo]
                parts += [ARTIFICIAL, PHYSICAL if k == 1 else ARTIFICIAL]
            ts = np.stack(ts)
            j = np.argmin(ts, axis=0)
            return np.take_along_axis(ts, j[None], 0)[0], np.asarray(parts)[j]
        t_phys = _circle_exit(p, d, np.zeros(2), 1.0)
        if self.kind == "UnitDisc":
            return t_phys, np.full(t_phys.shape, PHYSICAL)
        t_cap = _circle_exit(p, d, np.asarray(self.z, float), self.r)
        return np.minimum(t_phys, t_cap), np.where(t_phys <= t_cap, PHYSICAL, CAP)

    def project(self, p):
        """Nearest boundary point and the piece it lies on."""
        p = np.asarray(p, dtype=float)
        if self.kind == "HalfPlaneBox":
            x, y = p[:, 0], p[:, 1]
            d = np.stack([y, self.L - y, self.L - x, self.L + x])
            j = np.argmin(d, axis=0)
            q = p.copy()
            q[j == 0, 1] = 0.0
            q[j == 1, 1] = self.L
            q[j == 2, 0] = self.L
            q[j == 3, 0] = -self.L
            return q, np.where(j == 0, PHYSICAL, ARTIFICIAL)
        r = np.hypot(p[:, 0], p[:, 1])[:, None]
        q_phys = p / r
        if self.kind == "UnitDisc":
            return q_phys, np.full(p.shape[0], PHYSICAL)
        z = np.asarray(self.z, float)
        v = p - z
        q_cap = z + self.r * v / np.linalg.norm(v, axis=1)[:, None]
        use_cap = (self.r - np.linalg.norm(v, axis=1)) < (1.0 - r[:, 0])
        return np.where(use_cap[:, None], q_cap, q_phys), np.where(use_cap, CAP, PHYSICAL)

    def boundary_parameter(self, p, part):
        """Arc-length coordinate on the physical boundary (angle or x1)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "HalfPlaneBox":
            return p[..., 0].copy()
        return np.arctan2(p[..., 1], p[..., 0])

    def boundary_point(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "HalfPlaneBox":
            return np.stack([s, np.zeros_like(s)], axis=-1)
        return np.stack([np.cos(s), np.sin(s)], axis=-1)

    def inward_normal(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "HalfPlaneBox":
            return np.stack([np.zeros_like(s), np.ones_like(s)], axis=-1)
        return -np.stack([np.cos(s), np.sin(s)], axis=-1)

    def scaled(self, factor):
        """Image of the domain under x -> factor * x (half-plane box only)."""
        if self.kind != "HalfPlaneBox":
            raise ConfigError("only the half-plane box is scale compatible", key="domain")
        return DomainSpec("HalfPlaneBox", self.L * factor)


def _circle_exit(p, d, c, R):
    q = p - c
    b = np.sum(q * d, axis=-1)
    disc = b * b - (np.sum(q * q, axis=-1) - R * R)
    return -b + np.sqrt(np.maximum(disc, 0.0))


@dataclass
class Grid:
    domain: DomainSpec
    resolution: int
    h: float
    nodes: np.ndarray = field(repr=False)  # (n, 2) coordinates of the unknowns
    ij: np.ndarray = field(repr=False)  # (n, 2) lattice indices
    rho: np.ndarray = field(repr=False)
    A: sparse.csr_matrix = field(repr=False)  # -Delta_h on the unknowns
    arm_row: np.ndarray = field(repr=False)
    arm_coef: np.ndarray = field(repr=False)
    arm_point: np.ndarray = field(repr=False)
    arm_part: np.ndarray = field(repr=False)
    arm_s: np.ndarray = field(repr=False)
    arm_len: np.ndarray = field(repr=False)
    arm_lattice: np.ndarray = field(repr=False)  # arm end point is a lattice node
    origin: tuple = (0.0, 0.0)
    shape: tuple = (0, 0)
    index: np.ndarray = field(repr=False, default=None)  # lattice -> unknown (-1 if none)

    @property
    def n(self):
        return self.nodes.shape[0]

    @property
    def cell_area(self):
        return self.h * self.h

    # boundary data ------------------------------------------------------
    def rhs(self, arm_values):
        """Right-hand side from Dirichlet values at the arm end points."""
        return np.bincount(self.arm_row, weights=self.arm_coef * arm_values, minlength=self.n)

    def boundary_operator(self):
        """Sparse map from arm values to the right-hand side."""
        m = self.arm_row.size
        return sparse.csr_matrix((self.arm_coef, (self.arm_row, np.arange(m))), shape=(self.n, m))

    # lattice view --------------------------------------------------------
    def to_lattice(self, u, fill=np.nan):
        out = np.full(self.shape, fill, dtype=float)
        out[self.ij[:, 0], self.ij[:, 1]] = u
        return out

    def lattice_coords(self, i, j):
        return self.origin[0] + i * self.h, self.origin[1] + j * self.h

    def contains(self, pts):
        return self.domain.contains(np.asarray(pts, dtype=float))

    def interpolate(self, u, pts, lattice=None):
        """Bilinear interpolation of a nodal field; raises if a cell is incomplete."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        lat = self.to_lattice(u) if lattice is None else lattice
        fx = (pts[:, 0] - self.origin[0]) / self.h
        fy = (pts[:, 1] - self.origin[1]) / self.h
        i0 = np.clip(np.floor(fx).astype(int), 0, self.shape[0] - 2)
        j0 = np.clip(np.floor(fy).astype(int), 0, self.shape[1] - 2)
        tx, ty = fx - i0, fy - j0
        v = ((1 - tx) * (1 - ty) * lat[i0, j0] + tx * (1 - ty) * lat[i0 + 1, j0]
             + (1 - tx) * ty * lat[i0, j0 + 1] + tx * ty * lat[i0 + 1, j0 + 1])
        if np.any(~np.isfinite(v)):
            k = int(np.argmax(~np.isfinite(v)))
            raise ResolutionError(f"interpolation point {pts[k]} touches nodes outside the grid")
        return v

    def node_at(self, p):
        """Index of the unknown closest to point p."""
        d = np.sum((self.nodes - np.asarray(p, float)) ** 2, axis=1)
        return int(np.argmin(d))

    def to_csv(self, path, u):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "rho", "u"])
            for (x, y), r, v in zip(self.nodes, self.rho, u):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(r)), repr(float(v))])


MIN_RESOLUTION = 32
LONG_ARM = 2.0


def build_grid(domain: DomainSpec, resolution: int, clamp=0.25) -> Grid:
    """Lattice grid with ``resolution`` cells across the domain diameter."""
    if int(resolution) != resolution or resolution < MIN_RESOLUTION:
        raise ConfigError(f"resolution must be an integer >= {MIN_RESOLUTION}, got {resolution}",
                          key="grid.resolution")
    resolution = int(resolution)
    x0, x1, y0, y1 = domain.bbox()
    h = (x1 - x0) / resolution
    nx = resolution + 1
    ny = int(round((y1 - y0) / h)) + 1
    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    P = np.stack([x0 + I * h, y0 + J * h], axis=-1)
    inside = domain.clearance(P) >= clamp * h
    index = np.full((nx, ny), -1, dtype=int)
    ij = np.argwhere(inside)
    n = ij.shape[0]
    index[ij[:, 0], ij[:, 1]] = np.arange(n)
    nodes = P[ij[:, 0], ij[:, 1]]

    # arm lengths in the four lattice directions
    arm = np.full((n, 4), h)
    nb = np.full((n, 4), -1, dtype=int)
    cut_rows, cut_dir, cut_t, cut_part, cut_pt, cut_ghost = [], [], [], [], [], []
    for k, (di, dj) in enumerate(_DIRS):
        ii, jj = ij[:, 0] + di, ij[:, 1] + dj
        ok = (ii >= 0) & (ii < nx) & (jj >= 0) & (jj < ny)
        tgt = np.full(n, -1)
        tgt[ok] = index[ii[ok], jj[ok]]
        nb[:, k] = tgt
        cut = tgt < 0
        if np.any(cut):
            d = np.broadcast_to(np.array([di, dj], float), (int(cut.sum()), 2))
            t, part = domain.crossing(nodes[cut], d)
            pt = nodes[cut] + t[:, None] * d
            # a clamped neighbour inside the domain: keep the long arm to the
            # crossing when it is short, otherwise the neighbour becomes a
            # ghost node extrapolated along the normal (see _ghost_arms)
            clamped = t > LONG_ARM * h
            gc = np.zeros(t.size)
            if np.any(clamped):
                q, qpart = domain.project(nodes[cut][clamped] + h * d[clamped])
                rq = np.linalg.norm(nodes[cut][clamped] + h * d[clamped] - q, axis=1)
                rp = domain.clearance(nodes[cut][clamped])
                t[clamped] = h
                pt[clamped] = q
                part[clamped] = qpart
                gc[clamped] = rq / rp
            arm[cut, k] = t
            rows = np.where(cut)[0]
            cut_rows.append(rows)
            cut_dir.append(np.full(rows.size, k))
            cut_t.append(t)
            cut_part.append(part)
            cut_pt.append(pt)
            cut_ghost.append(gc)
    if np.any(arm > LONG_ARM * h * (1 + 1e-9)) or np.any(arm <= 0):
        raise ResolutionError("boundary arm outside the Shortley-Weller range")

    # Shortley-Weller coefficients of -Delta
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    coef = np.zeros((n, 4))
    for a, b in ((0, 1), (2, 3)):
        ha, hb = arm[:, a], arm[:, b]
        coef[:, a] = 2.0 / (ha * (ha + hb))
        coef[:, b] = 2.0 / (hb * (ha + hb))
        diag += 2.0 / (ha * hb)
    if cut_rows:
        arm_row = np.concatenate(cut_rows)
        arm_dir = np.concatenate(cut_dir)
        arm_len = np.concatenate(cut_t)
        arm_part = np.concatenate(cut_part)
        arm_point = np.concatenate(cut_pt)
        ghost = np.concatenate(cut_ghost)
    else:
        arm_row = arm_dir = arm_part = np.zeros(0, int)
        arm_len = ghost = np.zeros(0)
        arm_point = np.zeros((0, 2))
    arm_coef = coef[arm_row, arm_dir]
    # snap lattice-aligned crossings exactly onto the boundary
    if domain.kind == "HalfPlaneBox":
        phys = arm_part == PHYSICAL
        arm_point[phys, 1] = 0.0
    g = ghost > 0
    if np.any(g):
        # u(Q) ~ g(B_Q) + c (u(P) - g(B_P)), c = dist(Q)/dist(P): the normal
        # derivative is transferred from P to its clamped neighbour Q
        gr = arm_row[g]
        gcoef = arm_coef[g] * ghost[g]
        np.subtract.at(diag, gr, gcoef)
        bp, bpart = domain.project(nodes[gr])
        arm_row = np.concatenate([arm_row, gr])
        arm_coef = np.concatenate([arm_coef, -gcoef])
        arm_len = np.concatenate([arm_len, np.linalg.norm(nodes[gr] - bp, axis=1)])
        arm_part = np.concatenate([arm_part, bpart])
        arm_point = np.concatenate([arm_point, bp])
    rows.append(np.arange(n)); cols.append(np.arange(n)); vals.append(diag)
    for k in range(4):
        m = nb[:, k] >= 0
        rows.append(np.where(m)[0]); cols.append(nb[m, k]); vals.append(-coef[m, k])
    A = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n))
    fi = (arm_point[:, 0] - x0) / h
    fj = (arm_point[:, 1] - y0) / h
    arm_lattice = (np.abs(fi - np.rint(fi)) < 1e-9) & (np.abs(fj - np.rint(fj)) < 1e-9)
    arm_s = domain.boundary_parameter(arm_point, arm_part)
    return Grid(domain=domain, resolution=resolution, h=h, nodes=nodes, ij=ij,
                rho=domain.rho(nodes), A=A, arm_row=arm_row, arm_coef=arm_coef,
                arm_point=arm_point, arm_part=arm_part, arm_s=arm_s, arm_len=arm_len, arm_lattice=arm_lattice,
                origin=(x0, y0), shape=(nx, ny), index=index)
