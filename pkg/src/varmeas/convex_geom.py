"""Convex bodies in R^d (d <= 3) by vertex lists: support functions,
Hausdorff distance via direction grids, Minkowski calculus, and the
finite-grid embedding of bodies into support vectors.

Support evaluation is exact for polytopes (max of vertex inner products),
so the grid value of the Hausdorff distance is a certified lower bound and
the Lipschitz mesh correction turns it into an upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_DIM = 3


@dataclass(frozen=True)
class Polytope:
    """conv(vertices); duplicate and interior vertices are permitted."""

    dim: int
    vertices: np.ndarray = field(compare=False)

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError("dimension must be 1..3")
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] != self.dim or v.shape[0] == 0:
            raise ValueError("vertices must be a nonempty (k, dim) array")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    @classmethod
    def interval(cls, a: float, b: float) -> "Polytope":
        return cls(1, np.array([[min(a, b)], [max(a, b)]]))

    @classmethod
    def point(cls, p) -> "Polytope":
        p = np.atleast_1d(np.asarray(p, dtype=np.float64))
        return cls(len(p), p[None, :])

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
        d = len(lo)
        corners = np.array([[(hi if (m >> i) & 1 else lo)[i] for i in range(d)]
                            for m in range(1 << d)])
        return cls(d, corners)

    def radius(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def scaled(self, a: float) -> "Polytope":
        if a < 0:
            raise ValueError("negative scaling of a body is not the Minkowski inverse")
        return Polytope(self.dim, a * self.vertices)

    def translated(self, v) -> "Polytope":
        return Polytope(self.dim, self.vertices + np.asarray(v, dtype=np.float64))

    def canonicalize(self) -> "Polytope":
        """Extreme-point reduction: exact orientation tests for d <= 2,
        qhull with a 1e-12 dedup fallback for d = 3."""
        if self.dim == 1:
            x = self.vertices[:, 0]
            return Polytope.interval(float(x.min()), float(x.max()))
        if self.dim == 2:
            return Polytope(2, _hull_2d(self.vertices))
        pts = _dedup(self.vertices)
        if pts.shape[0] >= 4:
            try:
                from scipy.spatial import ConvexHull

                hull = ConvexHull(pts)
                return Polytope(3, pts[hull.vertices])
            except Exception:
                pass
        return Polytope(3, pts)

    def to_json(self) -> dict:
        return {"dim": self.dim, "vertices": [[float(x) for x in v] for v in self.vertices]}

    @classmethod
    def from_json(cls, obj: dict) -> "Polytope":
        return cls(int(obj["dim"]), np.asarray(obj["vertices"], dtype=np.float64))


def _dedup(pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # quadratic dedup; vertex counts are tiny at desk scale
    out: list = []
    for p in pts:
        if not any(np.max(np.abs(p - q)) <= tol for q in out):
            out.append(p)
    return np.asarray(out)


def _hull_2d(pts: np.ndarray) -> np.ndarray:
    """Monotone-chain hull; collinear points dropped (sign of the cross product)."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    p = [tuple(pts[i]) for i in order]
    p = sorted(set(p))
    if len(p) <= 2:
        return np.asarray(p, dtype=np.float64)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for q in p:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0.0:
            lower.pop()
        lower.append(q)
    upper: list = []
    for q in reversed(p):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0.0:
            upper.pop()
        upper.append(q)
    return np.asarray(lower[:-1] + upper[:-1], dtype=np.float64)


@dataclass(frozen=True)
class DirectionGrid:
    """Unit directions sampling the dual ball, with a covering mesh angle."""

    dim: int
    dirs: np.ndarray = field(compare=False)
    mesh_angle: float = 0.0
    grid_id: str = ""

    def __post_init__(self):
        d = np.asarray(self.dirs, dtype=np.float64)
        norms = np.linalg.norm(d, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise ValueError("directions must be unit vectors")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "dirs", d)
        if not self.grid_id:
            object.__setattr__(self, "grid_id", f"d{self.dim}-M{d.shape[0]}")

    @property
    def size(self) -> int:
        return self.dirs.shape[0]


@lru_cache(maxsize=8)
def default_grid(dim: int, size: int | None = None) -> DirectionGrid:
    """d=1: the exact pair {+1,-1}; d=2: equiangular; d=3: Fibonacci sphere."""
    if dim == 1:
        return DirectionGrid(1, np.array([[1.0], [-1.0]]), mesh_angle=0.0)
    if dim == 2:
        m = size or 360
        ang = 2.0 * np.pi * np.arange(m) / m
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return DirectionGrid(2, dirs, mesh_angle=np.pi / m)
    if dim == 3:
        m = size or 1000
        dirs = _fibonacci_sphere(m)
        theta = _covering_angle(dirs)
        return DirectionGrid(3, dirs, mesh_angle=theta)
    raise ValueError("dimension must be 1..3")


def _fibonacci_sphere(m: int) -> np.ndarray:
    i = np.arange(m)
    z = 1.0 - 2.0 * (i + 0.5) / m
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    ang = golden * i
    dirs = np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=1)
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def _covering_angle(dirs: np.ndarray, probe_count: int = 20011) -> float:
    """Max over a dense probe set of the angle to the nearest grid direction."""
    probes = _fibonacci_sphere(probe_count)
    worst = -1.0
    for start in range(0, probe_count, 2048):
        block = probes[start:start + 2048]
        best = (block @ dirs.T).max(axis=1)
        worst = max(worst, float(np.arccos(np.clip(best, -1.0, 1.0)).max()))
    return worst


# --------------------------------------------------------------------------
# support calculus
# --------------------------------------------------------------------------


def support(u, C: Polytope) -> float:
    """s(u, C) = max over vertices of <u, v>; exact for polytopes."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if u.shape != (C.dim,):
        raise ValueError("direction dimension mismatch")
    return float(np.max(C.vertices @ u))


def support_values(C: Polytope, grid: DirectionGrid) -> np.ndarray:
    if grid.dim != C.dim:
        raise ValueError("grid dimension mismatch")
    return (grid.dirs @ C.vertices.T).max(axis=1)


@dataclass(frozen=True)
class SupportVector:
    """A support-function sample on a direction grid."""

    grid: DirectionGrid
    values: np.ndarray = field(compare=False)
    from_signed_combination: bool = False  # signed combos need not be sublinear

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.size,):
            raise ValueError("values must align with the grid")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __add__(self, other: "SupportVector") -> "SupportVector":
        _same_grid(self.grid, other.grid)
        return SupportVector(self.grid, self.values + other.values,
                             self.from_signed_combination or other.from_signed_combination)

    def __sub__(self, other: "SupportVector") -> "SupportVector":
        _same_grid(self.grid, other.grid)
        return SupportVector(self.grid, self.values - other.values, True)

    def scaled(self, a: float) -> "SupportVector":
        return SupportVector(self.grid, a * self.values,
                             self.from_signed_combination or a < 0)

    def sup_distance(self, other: "SupportVector") -> float:
        _same_grid(self.grid, other.grid)
        return float(np.max(np.abs(self.values - other.values)))

    def to_json(self) -> dict:
        return {"grid": self.grid.grid_id, "values": [float(x) for x in self.values]}


def _same_grid(a: DirectionGrid, b: DirectionGrid) -> None:
    if a.grid_id != b.grid_id or a.size != b.size:
        raise ValueError("support vectors live on different grids")


def radstrom_embed(C: Polytope, grid: DirectionGrid) -> SupportVector:
    """The additive, positively homogeneous, isometric embedding, realized
    on the finite direction grid."""
    return SupportVector(grid, support_values(C, grid))


def hausdorff(C: Polytope, D: Polytope, grid: DirectionGrid) -> tuple[float, float]:
    """(lower, upper) bracket of d_H(C, D).

    lower: exact max over grid directions of the support gap.
    upper: lower + Lip * mesh angle, Lip = 2 max body radius (support
    functions are Lipschitz in the direction with the body radius).
    For d=1 the pair {+1,-1} makes the bracket exact.
    """
    if C.dim != D.dim or C.dim != grid.dim:
        raise ValueError("dimension mismatch")
    lower = float(np.max(np.abs(support_values(C, grid) - support_values(D, grid))))
    if C.dim == 1:
        return lower, lower
    lip = 2.0 * max(C.radius(), D.radius())
    return lower, lower + lip * grid.mesh_angle


def minkowski_combine(coeffs, bodies: list[Polytope]) -> Polytope:
    """Sum of lambda_i * C_i as a body (d <= 2): pairwise vertex sums, then hull.

    Support values add exactly: s(u, sum) = sum lambda_i s(u, C_i).
    Negative coefficients are rejected for body-valued results.
    """
    coeffs = [float(a) for a in coeffs]
    if len(coeffs) != len(bodies) or not bodies:
        raise ValueError("coefficients and bodies must align (nonempty)")
    if any(a < 0 for a in coeffs):
        raise ValueError("negative coefficient for a body-valued Minkowski combination")
    dim = bodies[0].dim
    if any(b.dim != dim for b in bodies):
        raise ValueError("dimension mismatch")
    if dim > 2:
        raise ValueError("vertex materialization is limited to d <= 2; combine support vectors")
    pts = np.zeros((1, dim))
    for a, body in zip(coeffs, bodies):
        if a == 0.0:
            continue
        pts = (pts[:, None, :] + a * body.vertices[None, :, :]).reshape(-1, dim)
        pts = Polytope(dim, pts).canonicalize().vertices
    return Polytope(dim, pts)


def combine_support_vectors(coeffs, svs: list[SupportVector]) -> SupportVector:
    """Signed linear combination in support-vector space.  Flagged as possibly
    non-sublinear whenever any coefficient is negative."""
    if len(coeffs) != len(svs) or not svs:
        raise ValueError("coefficients and vectors must align (nonempty)")
    grid = svs[0].grid
    total = np.zeros(grid.size)
    signed = False
    for a, sv in zip(coeffs, svs):
        _same_grid(grid, sv.grid)
        total = total + float(a) * sv.values
        signed = signed or a < 0 or sv.from_signed_combination
    return SupportVector(grid, total, from_signed_combination=signed)
