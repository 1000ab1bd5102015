"""Bounded convex planar domains and the ray/chord/tangent queries on them.

Every domain carries an interior ``basepoint``; the boundary is parametrised by
the angle ``theta`` of the ray from the basepoint. Concrete variants:

* :class:`Polygon` (also the base of the Cantor-Lebesgue domains),
* :class:`Ellipse` (possibly rotated, so affine images stay in the family),
* :class:`RadialDomain` (periodic cubic spline through sampled ``rho(theta)``).

All domains are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import CoincidentPoints, NonConvexInput, NonUnitDirection, NotInterior, ValidationError

TOL_GEO = 1e-10
TWO_PI = 2.0 * math.pi


def as_point(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"non-finite point {p!r}")
    return arr


def unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def rot90(v: np.ndarray) -> np.ndarray:
    """Counterclockwise quarter turn."""
    return np.array([-v[1], v[0]])


@dataclass(frozen=True)
class Chord:
    """Four aligned points a, p, q, b with a, b on the boundary."""

    a: np.ndarray
    p: np.ndarray
    q: np.ndarray
    b: np.ndarray


class ConvexDomain:
    """Common interface of the domain variants.

    Subclasses implement ``margin``, ``_exit``, ``normal_at``, ``curvature`` and the
    symmetry/area helpers; the generic queries below are built on those.
    """

    kind = "abstract"
    basepoint: np.ndarray

    # --- hooks -----------------------------------------------------------------
    def margin(self, x: np.ndarray) -> float:
        """Positive inside, zero on the boundary, negative outside.

        The scale is comparable to (not exactly) the Euclidean distance to the
        boundary.
        """
        raise NotImplementedError

    def _exit(self, x: np.ndarray, v: np.ndarray) -> float:
        raise NotImplementedError

    def exit_distances(self, xs: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Vectorised exit distance for interior points ``xs`` along unit ``vs``."""
        xs = np.asarray(xs, dtype=float).reshape(-1, 2)
        vs = np.asarray(vs, dtype=float).reshape(-1, 2)
        xs, vs = np.broadcast_arrays(xs, vs)
        return np.array([self._exit(x, v) for x, v in zip(xs, vs)])

    def normal_at(self, theta: float) -> tuple[np.ndarray, np.ndarray]:
        """Outward normals (incoming side, outgoing side) at ``boundary_point(theta)``."""
        raise NotImplementedError

    def curvature(self, theta: float) -> float:
        raise NotImplementedError

    def area(self) -> float:
        raise NotImplementedError

    def is_centrally_symmetric(self, tol: float = 1e-9) -> bool:
        raise NotImplementedError

    def transformed(self, matrix, shift) -> "ConvexDomain":
        raise NotImplementedError(f"affine images of {self.kind} domains are not supported")

    curvature_available = False

    # --- generic queries -------------------------------------------------------
    def is_interior(self, x, tol: float = TOL_GEO) -> bool:
        return self.margin(as_point(x)) > tol

    def boundary_point(self, theta: float) -> np.ndarray:
        u = unit(theta)
        return self.basepoint + self._exit(self.basepoint, u) * u

    def tangents(self, theta: float) -> tuple[np.ndarray, np.ndarray]:
        """Unit forward and backward tangents (both in the direction of travel)."""
        n_in, n_out = self.normal_at(theta)
        return rot90(n_out), rot90(n_in)

    def speed(self, theta: float) -> float:
        """|d gamma / d theta| for the angular parametrisation about the basepoint."""
        rel = self.boundary_point(theta) - self.basepoint
        _, n_out = self.normal_at(theta)
        return float(rel @ rel) / float(rel @ n_out)

    def sample_boundary(self, n: int) -> np.ndarray:
        thetas = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return np.array([self.boundary_point(t) for t in thetas])

    def breakpoints(self) -> np.ndarray:
        """Boundary parameters where the boundary is not smooth."""
        return np.empty(0)


# ---------------------------------------------------------------------------------
# Polygons
# ---------------------------------------------------------------------------------


def _convexity_violation(vertices: np.ndarray, tol: float) -> tuple[int, int, int] | None:
    m = len(vertices)
    prev = np.roll(vertices, 1, axis=0)
    nxt = np.roll(vertices, -1, axis=0)
    e1 = vertices - prev
    e2 = nxt - vertices
    turn = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    bad = np.flatnonzero(turn <= tol * np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1))
    if len(bad):
        i = int(bad[0])
        return ((i - 1) % m, i, (i + 1) % m)
    return None


class Polygon(ConvexDomain):
    """Strictly convex polygon with counterclockwise vertices.

    ``edge_vectors`` may be supplied when the edges are known more accurately
    than vertex differences (the Cantor-Lebesgue domains); validation then uses
    the turning of the supplied directions.
    """

    kind = "polygon"
    SMALL = 64

    def __init__(self, vertices, basepoint=None, *, edge_vectors=None, validate: bool = True):
        verts = np.array(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise ValidationError("polygon needs at least three 2D vertices")
        if not np.all(np.isfinite(verts)):
            raise ValidationError("polygon vertices must be finite")
        if edge_vectors is None:
            signed = 0.5 * np.sum(verts[:, 0] * np.roll(verts[:, 1], -1) - np.roll(verts[:, 0], -1) * verts[:, 1])
            if signed < 0:
                verts = verts[::-1].copy()
            if validate:
                bad = _convexity_violation(verts, 1e-12)
                if bad is not None:
                    i, j, k = bad
                    raise NonConvexInput(
                        f"vertices {i}, {j}, {k} ({verts[i].tolist()}, {verts[j].tolist()}, "
                        f"{verts[k].tolist()}) violate strict convexity"
                    )
            edges = np.roll(verts, -1, axis=0) - verts
        else:
            edges = np.array(edge_vectors, dtype=float)
            if validate:
                ang = np.unwrap(np.arctan2(edges[:, 1], edges[:, 0]))
                turn = np.diff(ang)
                if np.any(turn <= 0) or ang[-1] - ang[0] >= TWO_PI:
                    raise NonConvexInput("edge directions do not turn monotonically")
        self.vertices = verts
        self.edges = edges
        self.lengths = np.hypot(edges[:, 0], edges[:, 1])
        self.directions = edges / self.lengths[:, None]
        self.normals = np.column_stack([self.directions[:, 1], -self.directions[:, 0]])
        self.offsets = np.einsum("ij,ij->i", self.normals, verts)
        for arr in (self.vertices, self.edges, self.lengths, self.directions, self.normals, self.offsets):
            arr.setflags(write=False)
        self.basepoint = self.centroid() if basepoint is None else as_point(basepoint)
        if self.margin(self.basepoint) <= TOL_GEO:
            raise NotInterior("polygon basepoint must be strictly interior")

    def __len__(self) -> int:
        return len(self.vertices)

    def centroid(self) -> np.ndarray:
        v = self.vertices - self.vertices.mean(axis=0)
        w = np.roll(v, -1, axis=0)
        c = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        a = c.sum() / 2.0
        cx = np.sum((v[:, 0] + w[:, 0]) * c) / (6.0 * a)
        cy = np.sum((v[:, 1] + w[:, 1]) * c) / (6.0 * a)
        return np.array([cx, cy]) + self.vertices.mean(axis=0)

    def area(self) -> float:
        v = self.vertices - self.basepoint
        w = np.roll(v, -1, axis=0)
        return float(0.5 * np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))

    def margin(self, x) -> float:
        return float(np.min(self.offsets - self.normals @ x))

    def _locate_edge(self, x: np.ndarray, v: np.ndarray) -> int:
        """Index k such that the ray x + t v leaves through edge (V_k, V_k+1)."""
        w0 = self.vertices[0] - x
        target = math.atan2(cross(w0, v), float(w0 @ v)) % TWO_PI
        lo, hi = 0, len(self.vertices)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            w = self.vertices[mid] - x
            ang = math.atan2(cross(w0, w), float(w0 @ w)) % TWO_PI
            if ang <= target:
                lo = mid
            else:
                hi = mid
        return lo

    def _exit(self, x, v) -> float:
        if len(self.vertices) <= self.SMALL:
            denom = self.normals @ v
            slack = self.offsets - self.normals @ x
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                t = np.where(denom > 0, slack / denom, np.inf)
            return float(np.min(t))
        k = self._locate_edge(x, v)
        e = self.edges[k]
        return cross(self.vertices[k] - x, e) / cross(v, e)

    def exit_distances(self, xs, vs) -> np.ndarray:
        if len(self.vertices) > self.SMALL:
            return super().exit_distances(xs, vs)
        xs = np.asarray(xs, dtype=float).reshape(-1, 2)
        vs = np.asarray(vs, dtype=float).reshape(-1, 2)
        denom = vs @ self.normals.T
        slack = self.offsets[None, :] - xs @ self.normals.T
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = np.where(denom > 0, slack / denom, np.inf)
        return t.min(axis=1)

    def edge_index(self, theta: float) -> tuple[int, np.ndarray]:
        u = unit(theta)
        x = self.basepoint
        if len(self.vertices) <= self.SMALL:
            denom = self.normals @ u
            slack = self.offsets - self.normals @ x
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                t = np.where(denom > 0, slack / denom, np.inf)
            k = int(np.argmin(t))
            return k, x + t[k] * u
        k = self._locate_edge(x, u)
        e = self.edges[k]
        t = cross(self.vertices[k] - x, e) / cross(u, e)
        return k, x + t * u

    def vertex_at(self, theta: float, tol: float = TOL_GEO) -> int | None:
        """Index of the vertex hit by the ray at ``theta``, if any."""
        k, pt = self.edge_index(theta)
        m = len(self.vertices)
        for j in (k, (k + 1) % m):
            if np.linalg.norm(pt - self.vertices[j]) <= tol:
                return j
        return None

    def normal_at(self, theta: float):
        j = self.vertex_at(theta)
        if j is not None:
            return self.normals[j - 1], self.normals[j]
        k, _ = self.edge_index(theta)
        return self.normals[k], self.normals[k]

    def tangents(self, theta: float):
        j = self.vertex_at(theta)
        if j is not None:
            return self.directions[j], self.directions[j - 1]
        k, _ = self.edge_index(theta)
        return self.directions[k], self.directions[k]

    def curvature(self, theta: float) -> float:
        return 0.0

    def breakpoints(self) -> np.ndarray:
        rel = self.vertices - self.basepoint
        return np.sort(np.arctan2(rel[:, 1], rel[:, 0]) % TWO_PI)

    def sample_boundary(self, n: int) -> np.ndarray:
        return self.vertices.copy()

    def is_centrally_symmetric(self, tol: float = 1e-9) -> bool:
        m = len(self.vertices)
        if m % 2:
            return False
        rel = self.vertices - self.basepoint
        return bool(np.max(np.abs(rel + np.roll(rel, -m // 2, axis=0))) <= tol * max(1.0, np.abs(rel).max()))

    def transformed(self, matrix, shift) -> "Polygon":
        A = np.asarray(matrix, dtype=float)
        b = np.asarray(shift, dtype=float)
        return Polygon(self.vertices @ A.T + b, basepoint=A @ self.basepoint + b)


# ---------------------------------------------------------------------------------
# Ellipses
# ---------------------------------------------------------------------------------


class Ellipse(ConvexDomain):
    """Filled ellipse with semi-axes ``a`` (along ``angle``) and ``b``."""

    kind = "ellipse"
    curvature_available = True

    def __init__(self, a: float, b: float, center=(0.0, 0.0), angle: float = 0.0, basepoint=None):
        if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
            raise ValidationError("ellipse semi-axes must be positive and finite")
        self.a = float(a)
        self.b = float(b)
        self.center = as_point(center)
        self.angle = float(angle)
        c, s = math.cos(angle), math.sin(angle)
        self.rotation = np.array([[c, -s], [s, c]])
        self.shape = self.rotation @ np.diag([1.0 / a**2, 1.0 / b**2]) @ self.rotation.T
        self.rotation.setflags(write=False)
        self.shape.setflags(write=False)
        self.basepoint = self.center.copy() if basepoint is None else as_point(basepoint)
        if self.margin(self.basepoint) <= TOL_GEO:
            raise NotInterior("ellipse basepoint must be strictly interior")

    @classmethod
    def disk(cls, radius: float = 1.0, center=(0.0, 0.0)) -> "Ellipse":
        return cls(radius, radius, center)

    def _q(self, y: np.ndarray) -> float:
        return float(y @ self.shape @ y)

    def margin(self, x) -> float:
        return (1.0 - math.sqrt(self._q(np.asarray(x) - self.center))) * min(self.a, self.b)

    def _exit(self, x, v) -> float:
        y = x - self.center
        Mv = self.shape @ v
        A = float(v @ Mv)
        B = 2.0 * float(y @ Mv)
        C = self._q(y) - 1.0
        disc = math.sqrt(max(B * B - 4.0 * A * C, 0.0))
        if B >= 0:
            return -2.0 * C / (B + disc)
        return (-B + disc) / (2.0 * A)

    def exit_distances(self, xs, vs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(-1, 2)
        vs = np.asarray(vs, dtype=float).reshape(-1, 2)
        y = xs - self.center
        Mv = vs @ self.shape
        A = np.einsum("ij,ij->i", vs, Mv)
        B = 2.0 * np.einsum("ij,ij->i", y, Mv)
        C = np.einsum("ij,ij->i", y @ self.shape, y) - 1.0
        disc = np.sqrt(np.maximum(B * B - 4.0 * A * C, 0.0))
        pos = B >= 0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.where(pos, -2.0 * C / (B + disc), (-B + disc) / (2.0 * A))

    def normal_at(self, theta: float):
        p = self.boundary_point(theta)
        g = self.shape @ (p - self.center)
        n = g / np.linalg.norm(g)
        return n, n

    def curvature(self, theta: float) -> float:
        p = self.boundary_point(theta)
        local = self.rotation.T @ (p - self.center)
        ct, st = local[0] / self.a, local[1] / self.b
        return self.a * self.b / (self.a**2 * st**2 + self.b**2 * ct**2) ** 1.5

    def area(self) -> float:
        return math.pi * self.a * self.b

    def is_centrally_symmetric(self, tol: float = 1e-9) -> bool:
        return bool(np.linalg.norm(self.basepoint - self.center) <= tol * max(self.a, self.b))

    def transformed(self, matrix, shift) -> "Ellipse":
        A = np.asarray(matrix, dtype=float)
        b = np.asarray(shift, dtype=float)
        Ainv = np.linalg.inv(A)
        shape = Ainv.T @ self.shape @ Ainv
        evals, evecs = np.linalg.eigh(shape)
        axis = evecs[:, 0]
        return Ellipse(
            1.0 / math.sqrt(evals[0]),
            1.0 / math.sqrt(evals[1]),
            center=A @ self.center + b,
            angle=math.atan2(axis[1], axis[0]),
            basepoint=A @ self.basepoint + b,
        )


# ---------------------------------------------------------------------------------
# Radial profiles
# ---------------------------------------------------------------------------------


class RadialDomain(ConvexDomain):
    """Star domain ``center + rho(theta) (cos theta, sin theta)``.

    ``values`` are samples of rho on the uniform grid ``2 pi k / len(values)``;
    rho is interpolated by a periodic cubic spline, which gives curvature.
    """

    kind = "radial"
    curvature_available = True

    def __init__(self, values: Sequence[float], center=(0.0, 0.0), *, validate: bool = True, audit_samples: int = 720):
        rho = np.asarray(values, dtype=float)
        if rho.ndim != 1 or len(rho) < 8:
            raise ValidationError("radial profile needs at least 8 samples")
        if np.any(~np.isfinite(rho)) or np.any(rho <= 0):
            raise ValidationError("radial profile values must be positive and finite")
        self.values = rho
        self.center = as_point(center)
        self.basepoint = self.center.copy()
        grid = np.linspace(0.0, TWO_PI, len(rho) + 1)
        self._spline = CubicSpline(grid, np.append(rho, rho[0]), bc_type="periodic")
        self._rmax = float(np.max(self._spline(np.linspace(0, TWO_PI, 8 * len(rho))))) * 1.01
        if validate:
            self._audit(audit_samples)

    def rho(self, theta, nu: int = 0):
        return self._spline(np.mod(theta, TWO_PI), nu)

    def _audit(self, n: int) -> None:
        th = np.linspace(0.0, TWO_PI, max(n, 4 * len(self.values)), endpoint=False)
        k = self._curvature_array(th)
        if np.any(k < -1e-9):
            i = int(np.argmin(k))
            raise NonConvexInput(f"radial profile has negative curvature {k[i]:.3g} at theta={th[i]:.6f}")
        pts = self.center + self.rho(th)[:, None] * np.column_stack([np.cos(th), np.sin(th)])
        normals = self._normal_array(th)
        support = np.einsum("ij,ij->i", normals, pts)
        excess = pts @ normals.T - support[None, :]
        if np.max(excess) > 1e-8:
            i, j = np.unravel_index(np.argmax(excess), excess.shape)
            raise NonConvexInput(
                f"sample {i} lies outside the support line at sample {j} (excess {excess[i, j]:.3g})"
            )

    def _tangent_array(self, th: np.ndarray) -> np.ndarray:
        r, dr = self.rho(th), self.rho(th, 1)
        c, s = np.cos(th), np.sin(th)
        t = np.column_stack([dr * c - r * s, dr * s + r * c])
        return t / np.linalg.norm(t, axis=1)[:, None]

    def _normal_array(self, th: np.ndarray) -> np.ndarray:
        t = self._tangent_array(th)
        return np.column_stack([t[:, 1], -t[:, 0]])

    def _curvature_array(self, th: np.ndarray) -> np.ndarray:
        r, dr, ddr = self.rho(th), self.rho(th, 1), self.rho(th, 2)
        return (r * r + 2 * dr * dr - r * ddr) / (r * r + dr * dr) ** 1.5

    def margin(self, x) -> float:
        rel = np.asarray(x, dtype=float) - self.center
        return float(self.rho(math.atan2(rel[1], rel[0])) - math.hypot(rel[0], rel[1]))

    def boundary_point(self, theta: float) -> np.ndarray:
        return self.center + float(self.rho(theta)) * unit(theta)

    def _exit(self, x, v) -> float:
        if np.array_equal(x, self.center):
            return float(self.rho(math.atan2(v[1], v[0])))

        def inside(t):
            return self.margin(x + t * v)

        hi = 2.0 * self._rmax + float(np.linalg.norm(x - self.center))
        return brentq(inside, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)

    def normal_at(self, theta: float):
        n = self._normal_array(np.array([theta]))[0]
        return n, n

    def curvature(self, theta: float) -> float:
        return float(self._curvature_array(np.array([theta]))[0])

    def area(self) -> float:
        from .quadrature import adaptive_simpson

        return 0.5 * adaptive_simpson(lambda t: float(self.rho(t)) ** 2, 0.0, TWO_PI, 1e-12)

    def is_centrally_symmetric(self, tol: float = 1e-9) -> bool:
        th = np.linspace(0.0, math.pi, 64, endpoint=False)
        return bool(np.max(np.abs(self.rho(th) - self.rho(th + math.pi))) <= tol * self._rmax)


# ---------------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------------


def _check_interior(domain: ConvexDomain, x: np.ndarray, tol: float, name: str = "point") -> None:
    if domain.margin(x) <= tol:
        raise NotInterior(f"{name} {x.tolist()} is not strictly interior")


def ray_exit(domain: ConvexDomain, x, v, tol: float = TOL_GEO) -> tuple[np.ndarray, float]:
    """First boundary point on the ray ``x + t v`` and its parameter ``t > 0``."""
    x = as_point(x)
    v = as_point(v)
    if abs(math.hypot(v[0], v[1]) - 1.0) > 1e-12:
        raise NonUnitDirection(f"direction {v.tolist()} is not a unit vector")
    _check_interior(domain, x, tol)
    t = domain._exit(x, v)
    return x + t * v, t


def chord_through(domain: ConvexDomain, p, q, tol: float = TOL_GEO) -> Chord:
    """Chord a, p, q, b of the domain through two distinct interior points."""
    p = as_point(p)
    q = as_point(q)
    d = q - p
    dist = math.hypot(d[0], d[1])
    if dist <= tol:
        raise CoincidentPoints("p and q coincide")
    _check_interior(domain, p, tol, "p")
    _check_interior(domain, q, tol, "q")
    u = d / dist
    a = p - domain._exit(p, -u) * u
    b = q + domain._exit(q, u) * u
    return Chord(a=a, p=p, q=q, b=b)


def one_sided_tangents(domain: ConvexDomain, s: float):
    """Forward tangent, backward tangent and the outward normal arc at parameter ``s``.

    The normal arc is returned as its (start, end) directions; they coincide at
    smooth points.
    """
    fwd, bwd = domain.tangents(s)
    n_in, n_out = domain.normal_at(s)
    return fwd, bwd, (n_in, n_out)


def antipodal_ratio(domain: ConvexDomain, s: float, origin=None, tol: float = TOL_GEO) -> float:
    """The scalar a(p) with ``origin - a(p) (p - origin)`` on the boundary."""
    o = domain.basepoint if origin is None else as_point(origin)
    _check_interior(domain, o, tol, "origin")
    p = domain.boundary_point(s)
    rel = p - o
    r = math.hypot(rel[0], rel[1])
    return domain._exit(o, -rel / r) / r
