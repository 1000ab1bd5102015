"""Sphere lengths, ball volumes, Cantor gap series and entropy fits.

For a domain symmetric about its basepoint the Hilbert ball of radius R about
the basepoint is the scaled copy ``tanh(R) * Omega``. Throughout, the gap to the
boundary ``s = 1 - tanh(R) = 2 e^{-2R} / (1 + e^{-2R})`` is computed directly
rather than by subtraction.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientData, InvalidParameter, NoIntersection, NotSymmetric, QuadratureNonConvergent
from .geometry import TOL_GEO, ConvexDomain, Polygon
from .metric import DEFAULT_QUAD_TOL, busemann_density, polygon_ball_area, vertex_slacks
from .quadrature import adaptive_simpson, composite_nodes

MAX_BALL_POLYGON_VERTICES = 256


def boundary_gap(R: float) -> float:
    """``1 - tanh(R)`` without cancellation."""
    e = math.exp(-2.0 * R)
    return 2.0 * e / (1.0 + e)


def max_radius(tol_geo: float = TOL_GEO) -> float:
    """Largest R with ``1 - tanh(R) >= 10 tol_geo``."""
    return 0.5 * math.log(2.0 / (10.0 * tol_geo) - 1.0)


def _require_symmetric(domain: ConvexDomain) -> None:
    if not domain.is_centrally_symmetric():
        raise NotSymmetric(f"{domain.kind} domain is not centrally symmetric about its basepoint")


def _check_radius(R: float, limit: float | None) -> None:
    if not R > 0 or not math.isfinite(R):
        raise InvalidParameter(f"radius must be positive, got {R}")
    if limit is not None and R > limit:
        raise InvalidParameter(f"radius {R} exceeds the resolvable limit {limit:.3f}")


# ---------------------------------------------------------------------------------
# Tangent exits
# ---------------------------------------------------------------------------------


def tangent_exit(domain: ConvexDomain, theta: float, lam: float, sign: int = 1) -> np.ndarray:
    """Where the tangent line of the scaled boundary at ``lam gamma(theta)`` meets the boundary.

    ``sign=+1`` follows the forward tangent, ``sign=-1`` goes the other way
    along the same line. Scaling is about the basepoint.
    """
    if not 0.0 < lam < 1.0:
        raise InvalidParameter(f"lambda must lie in (0, 1), got {lam}")
    if sign not in (1, -1):
        raise InvalidParameter("sign must be +1 or -1")
    b = domain.basepoint
    x = b + lam * (domain.boundary_point(theta) - b)
    if domain.margin(x) <= 0:
        raise NoIntersection("scaled boundary point is not interior")
    fwd, _ = domain.tangents(theta)
    v = sign * fwd
    t = domain._exit(x, v)
    if not (t > 0 and math.isfinite(t)):
        raise NoIntersection(f"tangent line at theta={theta} did not meet the boundary")
    return x + t * v


# ---------------------------------------------------------------------------------
# Sphere lengths
# ---------------------------------------------------------------------------------


def _polygon_exit_parts(poly: Polygon, s: float):
    """Forward and backward exit distances along every scaled edge line.

    For edge e the scaled edge runs from ``lam V_e`` to ``lam V_{e+1}``. The
    forward exit from ``lam V_{e+1}`` lies on the first edge k after e+1 where
    ``n_e . (V_k - V_{e+1}) + s h_e`` turns negative; that quantity is monotone
    over half a turn, so a vectorised bisection finds k for all edges at once.
    """
    V = poly.vertices - poly.basepoint
    E = poly.edges
    T = poly.directions
    N = poly.normals
    m = len(V)
    half = m // 2
    h = np.einsum("ij,ij->i", N, V)
    e = np.arange(m)

    def search(anchor: np.ndarray, step: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        def delta(j):
            k = (anchor + step * j) % m
            return np.einsum("ij,ij->i", N, V[k] - V[anchor]) + s * h

        lo = np.zeros(m, dtype=np.int64)
        hi = np.full(m, half, dtype=np.int64)
        while np.any(hi - lo > 1):
            mid = (lo + hi) // 2
            pos = delta(mid) >= 0
            lo = np.where(pos, mid, lo)
            hi = np.where(pos, hi, mid)
        d0 = delta(lo)
        d1 = delta(lo + 1)
        return lo, d0 / (d0 - d1), V[anchor]

    anchor = (e + 1) % m
    j, tau, va = search(anchor, 1)
    k = (anchor + j) % m
    rel = (V[k] - va) + tau[:, None] * E[k] + s * va
    t_plus = np.einsum("ij,ij->i", T, rel)

    j, tau, va = search(e, -1)
    k = (e - j) % m
    kprev = (k - 1) % m
    rel = (V[k] - va) - tau[:, None] * E[kprev] + s * va
    t_minus = -np.einsum("ij,ij->i", T, rel)
    return t_plus, t_minus


def polygon_circle_length(poly: Polygon, R: float) -> float:
    """Exact Finsler length of ``tanh(R) * boundary`` for a symmetric polygon.

    Each scaled edge is a straight segment, hence a geodesic, and contributes
    its Hilbert length ``(log1p(L/t+) + log1p(L/t-)) / 2``.
    """
    s = boundary_gap(R)
    lam = 1.0 - s
    t_plus, t_minus = _polygon_exit_parts(poly, s)
    if np.any(t_plus <= 0) or np.any(t_minus <= 0):
        raise NoIntersection("non-positive exit distance along a scaled edge")
    L = lam * poly.lengths
    return float(0.5 * np.sum(np.log1p(L / t_plus) + np.log1p(L / t_minus)))


def circle_length(
    domain: ConvexDomain, R: float, quad_tol: float = DEFAULT_QUAD_TOL, tol_geo: float = TOL_GEO
) -> float:
    """Finsler length of the Hilbert sphere of radius R about the basepoint."""
    _require_symmetric(domain)
    if isinstance(domain, Polygon):
        _check_radius(R, None)
        return polygon_circle_length(domain, R)
    _check_radius(R, max_radius(tol_geo))
    s = boundary_gap(R)
    lam = 1.0 - s
    b = domain.basepoint

    def integrand(theta: float) -> float:
        g = domain.boundary_point(theta)
        rel = g - b
        fwd, _ = domain.tangents(theta)
        _, n = domain.normal_at(theta)
        speed = float(rel @ rel) / float(rel @ n)
        x = b + lam * rel
        tp = domain._exit(x, fwd)
        tm = domain._exit(x, -fwd)
        return 0.5 * lam * speed * (1.0 / tp + 1.0 / tm)

    # central symmetry: the second half-turn repeats the first
    return 2.0 * adaptive_simpson(integrand, 0.0, math.pi, quad_tol, initial_panels=16)


def sphere_polyline(domain: ConvexDomain, R: float, samples: int) -> np.ndarray:
    """Closed polyline through ``samples`` points of ``tanh(R) * boundary``."""
    b = domain.basepoint
    lam = 1.0 - boundary_gap(R)
    if isinstance(domain, Polygon):
        pts = b + lam * (domain.vertices - b)
    else:
        thetas = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
        pts = np.array([b + lam * (domain.boundary_point(t) - b) for t in thetas])
    return np.concatenate([pts, pts[:1]])


# ---------------------------------------------------------------------------------
# Ball volumes
# ---------------------------------------------------------------------------------


class _FanFrame:
    """Per-edge data for points ``lam ((1-t) V_i + t V_i+1)`` near edge i.

    Vectors are expressed in the frame of edge i (x along the edge, y inward), and
    every product with an edge normal is assembled from the exact vertex slacks,
    so that points at distance ``1e-17`` from the edge keep full relative accuracy.
    """

    def __init__(self, poly: Polygon, i: int, S: np.ndarray):
        V = poly.vertices - poly.basepoint
        m = len(V)
        self.i, self.j = i, (i + 1) % m
        T = poly.directions[i]
        self.h = np.einsum("ij,ij->i", poly.normals, V)
        self.S = S
        self.Xi = (V - V[self.i]) @ T
        self.Xj = (V - V[self.j]) @ T
        self.Y = S[i]
        self.Ti = float(V[self.i] @ T)
        self.Tj = float(V[self.j] @ T)

    def density(self, s_var: np.ndarray, lam: np.ndarray, t: np.ndarray, u: np.ndarray) -> np.ndarray:
        i, j, S, h = self.i, self.j, self.S, self.h
        Si, Sj = S[:, i], S[:, j]
        inner = u[:, None] * Si[None, :] + t[:, None] * Sj[None, :]
        slack = s_var[:, None] * h[None, :] + lam[:, None] * inner
        nP = h[None, :] - inner
        # n_k . (V_v - x) = u (S_ki - S_kv) + t (S_kj - S_kv) + s n_k . P
        NW = (
            u[:, None, None] * (Si[None, :, None] - S[None, :, :])
            + t[:, None, None] * (Sj[None, :, None] - S[None, :, :])
            + (s_var[:, None] * nP)[:, :, None]
        )
        px = u * self.Ti + t * self.Tj
        py = -h[i]
        wx = u[:, None] * self.Xi[None, :] + t[:, None] * self.Xj[None, :] + (s_var * px)[:, None]
        wy = (u + t)[:, None] * self.Y[None, :] + (s_var * py)[:, None]
        W = np.stack([wx, wy], axis=2)
        return math.pi / polygon_ball_area(W, NW, slack)


def polygon_ball_volume(poly: Polygon, R: float, nodes: int = 8, chunk: int = 20000) -> float:
    """Hausdorff area of the Hilbert ball about the basepoint of a symmetric polygon.

    The ball is fanned into triangles (basepoint, V_i, V_i+1) parametrised by
    ``x = lam ((1-t) V_i + t V_i+1)``. With ``tau = -log(1 - lam)`` and
    ``t = e^{-xi} / 2`` (mirrored on the other half) the integrand is smooth on
    unit panels, where composite Gauss-Legendre converges quickly.
    """
    if len(poly) > MAX_BALL_POLYGON_VERTICES:
        raise InvalidParameter(f"ball volumes are limited to polygons with {MAX_BALL_POLYGON_VERTICES} vertices")
    V = poly.vertices - poly.basepoint
    S = vertex_slacks(poly)
    s_R = boundary_gap(R)
    tau_max = -math.log(s_R)
    xi_max = -math.log(2.0 * s_R) + 30.0
    tau_edges = np.append(np.arange(0.0, tau_max, 1.0), tau_max)
    xi_edges = np.append(np.arange(0.0, xi_max, 1.0), xi_max)
    tau, w_tau = composite_nodes(tau_edges, nodes)
    xi, w_xi = composite_nodes(xi_edges, nodes)
    s_var = np.exp(-tau)
    lam = -np.expm1(-tau)
    small = 0.5 * np.exp(-xi)

    TT, XX = np.meshgrid(np.arange(len(tau)), np.arange(len(xi)), indexing="ij")
    TT = TT.ravel()
    XX = XX.ravel()
    weight = (w_tau[TT] * w_xi[XX]) * (s_var[TT] * lam[TT]) * small[XX]

    # opposite edges of a symmetric polygon contribute equally
    total = 0.0
    for i in range(len(V) // 2):
        j = (i + 1) % len(V)
        jac = V[i, 0] * V[j, 1] - V[i, 1] * V[j, 0]
        frame = _FanFrame(poly, i, S)
        for near_start in (True, False):
            acc = 0.0
            for start in range(0, len(TT), chunk):
                sl = slice(start, start + chunk)
                tt = small[XX[sl]] if near_start else 1.0 - small[XX[sl]]
                uu = 1.0 - small[XX[sl]] if near_start else small[XX[sl]]
                sigma = frame.density(s_var[TT[sl]], lam[TT[sl]], tt, uu)
                acc += float(np.dot(weight[sl], sigma))
            total += jac * acc
    return 2.0 * total


def ball_volume(
    domain: ConvexDomain, R: float, quad_tol: float = DEFAULT_QUAD_TOL, tol_geo: float = TOL_GEO
) -> float:
    """Integral of the Busemann density over the Hilbert ball of radius R."""
    _require_symmetric(domain)
    if isinstance(domain, Polygon):
        _check_radius(R, None)
        coarse = polygon_ball_volume(domain, R, nodes=8)
        fine = polygon_ball_volume(domain, R, nodes=12)
        if abs(fine - coarse) > max(quad_tol, 1e-12) * abs(fine) * 10:
            raise QuadratureNonConvergent(f"polygon ball volume unresolved at R={R}: {coarse} vs {fine}")
        return fine
    _check_radius(R, max_radius(tol_geo))
    s_R = boundary_gap(R)
    tau_max = -math.log(s_R)
    b = domain.basepoint

    def radial(theta: float) -> float:
        rel = domain.boundary_point(theta) - b
        rho2 = float(rel @ rel)

        def inner(tau: float) -> float:
            s_var = math.exp(-tau)
            lam = -math.expm1(-tau)
            return busemann_density(domain, b + lam * rel, quad_tol) * lam * s_var

        return rho2 * adaptive_simpson(inner, 0.0, tau_max, quad_tol, initial_panels=8)

    return 2.0 * adaptive_simpson(radial, 0.0, math.pi, quad_tol, initial_panels=4)


# ---------------------------------------------------------------------------------
# Entropy fits
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class RadiusGrid:
    rmin: float
    rmax: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise InvalidParameter("grid needs at least one radius")
        if self.spacing not in ("linear", "geometric"):
            raise InvalidParameter(f"unknown spacing {self.spacing!r}")
        if self.rmax < self.rmin or (self.count > 1 and self.rmax == self.rmin):
            raise InvalidParameter("grid needs rmin < rmax")
        if self.spacing == "geometric" and self.rmin <= 0:
            raise InvalidParameter("geometric grids need rmin > 0")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.rmin)])
        if self.spacing == "geometric":
            return np.geomspace(self.rmin, self.rmax, self.count)
        return np.linspace(self.rmin, self.rmax, self.count)


@dataclass(frozen=True)
class EntropyEstimate:
    radii: np.ndarray
    values: np.ndarray
    log_values: np.ndarray
    slope: float
    local_slopes: np.ndarray
    mode: str


def fit_entropy(radii: Sequence[float], values: Sequence[float], mode: str) -> EntropyEstimate:
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise InvalidParameter("radii must be strictly increasing")
    if np.any(values <= 0) or np.any(~np.isfinite(values)):
        raise InsufficientData("values must be positive and finite to take logs")
    logs = np.log(values)
    slope = float(np.polyfit(radii, logs, 1)[0]) if len(radii) >= 2 else float("nan")
    local = np.diff(logs) / np.diff(radii)
    return EntropyEstimate(radii, values, logs, slope, local, mode)


def entropy_estimate(
    domain: ConvexDomain,
    grid: RadiusGrid | Sequence[float],
    mode: str = "sphere",
    quad_tol: float = DEFAULT_QUAD_TOL,
    workers: int = 1,
) -> EntropyEstimate:
    """Sweep sphere lengths or ball volumes and fit the exponential growth rate."""
    radii = grid.values() if isinstance(grid, RadiusGrid) else np.asarray(grid, dtype=float)
    if len(radii) < 6:
        raise InsufficientData("entropy fits need at least 6 radii")
    if mode == "sphere":
        def work(R):
            return circle_length(domain, R, quad_tol)
    elif mode == "ball":
        def work(R):
            return ball_volume(domain, R, quad_tol)
    else:
        raise InvalidParameter(f"unknown mode {mode!r}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(work, radii))
    else:
        values = [work(R) for R in radii]
    return fit_entropy(radii, values, mode)


# ---------------------------------------------------------------------------------
# Cantor series
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesParams:
    """Parameters of the gap series ``sum_N c_N log(1 + C (p-2) e^{2R/(alpha+1)} / p^N)``.

    ``gap_count_rule`` selects ``c_N = 2^(N-1)`` (the number of generation-N gaps,
    "exact") or ``2^N`` ("doubled"). ``sides=2`` doubles the sum to account for
    the backward tangent term as well. ``max_generation`` truncates the sum.
    """

    p: float
    gap_count_rule: str = "exact"
    prefactor: float = 1.0
    sides: int = 1
    max_generation: int | None = None

    def __post_init__(self):
        if not self.p > 2.0:
            raise InvalidParameter(f"p must exceed 2, got {self.p}")
        if self.gap_count_rule not in ("exact", "doubled"):
            raise InvalidParameter(f"unknown gap count rule {self.gap_count_rule!r}")
        if self.prefactor < 1.0:
            raise InvalidParameter("prefactor must be at least 1")
        if self.sides not in (1, 2):
            raise InvalidParameter("sides must be 1 or 2")

    @property
    def alpha(self) -> float:
        return math.log(2.0) / math.log(self.p)

    @property
    def beta(self) -> float:
        return 1.0 / ((self.alpha + 1.0) * math.log(self.p))

    @property
    def rate(self) -> float:
        """Predicted exponential growth rate ``2 alpha / (alpha + 1)``."""
        return 2.0 * self.alpha / (self.alpha + 1.0)


@dataclass(frozen=True)
class SeriesValue:
    value: float
    terms: int
    tail_bound: float


def cantor_series(params: SeriesParams, R: float) -> SeriesValue:
    """Sum the gap series, stopping once terms drop below 1e-16 of the running sum.

    Terms eventually decay geometrically with ratio ``2/p``, so after stopping
    at term ``t`` the tail is at most ``t (2/p) / (1 - 2/p)``.
    """
    if R < 0:
        raise InvalidParameter("R must be nonnegative")
    p = params.p
    log_scale = math.log(params.prefactor * (p - 2.0)) + 2.0 * R / (params.alpha + 1.0)
    log_p = math.log(p)
    total = 0.0
    n = 0
    last = 0.0
    count_shift = -1 if params.gap_count_rule == "exact" else 0
    ratio = 2.0 / p
    while True:
        n += 1
        if params.max_generation is not None and n > params.max_generation:
            break
        y = log_scale - n * log_p
        term = math.ldexp(_log1p_exp(y), n + count_shift)
        total += term
        last = term
        if y < 0 and term < 1e-16 * total:
            break
    tail = 0.0 if params.max_generation is not None and n > params.max_generation else last * ratio / (1.0 - ratio)
    return SeriesValue(params.sides * total, n if params.max_generation is None else min(n, params.max_generation), params.sides * tail)


def _log1p_exp(y: float) -> float:
    """``log(1 + e^y)`` without overflow."""
    if y > 30.0:
        return y + math.log1p(math.exp(-y))
    return math.log1p(math.exp(y))


def cantor_series_length(params: SeriesParams, R: float) -> float:
    return cantor_series(params, R).value


def series_bounds(params: SeriesParams, R: float, corrected: bool = False) -> tuple[float, float]:
    """Closed-form lower and upper bounds of the doubled-rule series.

    ``corrected=True`` replaces the leading factor ``p - 2`` of the upper bound
    by ``p``, which restores the factor ``p / (p - 2)`` of the geometric tail
    sum; the uncorrected bound fails for p close to 2 at small R.
    """
    if R < 0:
        raise InvalidParameter("R must be nonnegative")
    p = params.p
    x = 2.0 * R * params.beta
    lower = 2.0 ** (x + 2.0) / (p * p)
    log_gap = 0.0 if p == 3.0 else math.log(p - 2.0)
    lead = p if corrected else p - 2.0
    upper = lead * 2.0**x + 2.0 ** (math.floor(x) + 1) * (1.0 + x * math.log(p) + log_gap)
    return lower, upper


def general_gap_series(gaps, alpha: float, R: float, prefactor: float = 1.0) -> float:
    """``sum_j log(C (b_j - a_j) e^{2R/(alpha+1)} + 1)`` over an ordered gap list.

    Gaps are consumed in the given (length-descending) order and the sum stops
    once a term falls below 1e-16 of the running total.
    """
    if prefactor < 1.0:
        raise InvalidParameter("prefactor must be at least 1")
    gaps = np.asarray(gaps, dtype=float).reshape(-1, 2)
    lengths = gaps[:, 1] - gaps[:, 0]
    scale = prefactor * math.exp(2.0 * R / (alpha + 1.0))
    terms = np.log1p(scale * lengths)
    total = np.cumsum(terms)
    below = np.flatnonzero(terms < 1e-16 * total)
    stop = below[0] if len(below) else len(terms)
    return float(total[stop - 1]) if stop else 0.0
