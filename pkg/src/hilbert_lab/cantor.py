"""Generalised Cantor-Lebesgue functions, their measures and convex domains.

For ``p > 2`` the unit interval is cut into pieces of relative length
``1/p, (p-2)/p, 1/p``; the function is constant on the middle piece and the
construction recurses on the outer two. At depth N the remaining ``2^N``
intervals of length ``p^-N`` are filled linearly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData, InvalidParameter, NonConvexOutput, OutOfDomain
from .geometry import TOL_GEO, Polygon

MAX_DEPTH = 48
FLAT_TOL = 1e-12


@dataclass(frozen=True)
class Piece:
    a: float
    b: float
    kind: str  # "slope" or "flat"
    value: float  # f(a)
    rise: float  # f(b) - f(a); zero on flats


@dataclass(frozen=True)
class CantorFunction:
    p: float
    depth: int

    @property
    def alpha(self) -> float:
        return math.log(2.0) / math.log(self.p)

    @property
    def error_bound(self) -> float:
        """Uniform distance to the limit function."""
        return 2.0 ** (1 - self.depth) * (self.p - 2.0) / self.p

    def __call__(self, t):
        return eval_cantor(self, t)

    def interval_starts(self, n: int | None = None) -> np.ndarray:
        """Left endpoints of the ``2^n`` depth-n support intervals, in order."""
        return _interval_starts(self.p, self.depth if n is None else n)

    def pieces(self) -> list[Piece]:
        """All pieces in order: ``2^N`` slopes interleaved with ``2^N - 1`` flats."""
        if self.depth > 20:
            raise InvalidParameter("materialising pieces is limited to depth 20")
        starts = _interval_starts(self.p, self.depth)
        length = self.p ** (-self.depth)
        rise = 2.0 ** (-self.depth)
        out: list[Piece] = []
        for k, c in enumerate(starts):
            out.append(Piece(float(c), float(c + length), "slope", k * rise, rise))
            if k + 1 < len(starts):
                out.append(Piece(float(c + length), float(starts[k + 1]), "flat", (k + 1) * rise, 0.0))
        return out


def _interval_starts(p: float, n: int) -> np.ndarray:
    """Left endpoints of the depth-n intervals in increasing order."""
    starts = np.zeros(1)
    length = 1.0
    for _ in range(n):
        length /= p
        # children of [c, c + p*length]: [c, c + length] and [c + (p-1)*length, ...]
        right = starts + (p - 1.0) * length
        starts = np.column_stack([starts, right]).ravel()
    return starts


def build_cantor_function(p: float, depth: int) -> CantorFunction:
    if not (math.isfinite(p) and p > 2.0 + 1e-9):
        raise InvalidParameter(f"p must exceed 2, got {p}")
    if int(depth) != depth or not 1 <= depth <= MAX_DEPTH:
        raise InvalidParameter(f"depth must be an integer in [1, {MAX_DEPTH}], got {depth}")
    return CantorFunction(float(p), int(depth))


def eval_cantor(cf: CantorFunction, t):
    """Evaluate the depth-N function at scalar or array ``t`` in [0, 1].

    Walks the base-p digits: left piece, middle flat, right piece. Points
    within ``FLAT_TOL`` of a flat piece (in the rescaled coordinate) get the flat
    value, so the gap endpoints ``1/p`` and ``1 - 1/p`` evaluate exactly.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise OutOfDomain("argument must lie in [0, 1]")
    x = arr.copy().reshape(-1)
    value = np.zeros_like(x)
    done = np.zeros(x.shape, dtype=bool)
    p = cf.p
    lo_cut = 1.0 / p
    hi_cut = 1.0 - 1.0 / p
    step = 1.0
    for _ in range(cf.depth):
        step *= 0.5
        active = ~done
        flat = active & (x >= lo_cut - FLAT_TOL) & (x <= hi_cut + FLAT_TOL)
        value[flat] += step
        done |= flat
        right = active & ~flat & (x > hi_cut)
        left = active & ~flat & ~right
        value[right] += step
        x[right] = p * x[right] - (p - 1.0)
        x[left] = x[left] * p
    rest = ~done
    value[rest] += 2.0 ** (-cf.depth) * np.clip(x[rest], 0.0, 1.0)
    if np.ndim(t) == 0:
        return float(value[0])
    return value.reshape(arr.shape)


# ---------------------------------------------------------------------------------
# Measure
# ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class CantorMeasure:
    """The Stieltjes measure ``df`` of a depth-N Cantor function."""

    cf: CantorFunction

    @property
    def depth(self) -> int:
        return self.cf.depth

    def intervals(self, n: int | None = None) -> np.ndarray:
        """``(2^n, 2)`` array of depth-n support intervals."""
        n = self.depth if n is None else n
        starts = _interval_starts(self.cf.p, n)
        return np.column_stack([starts, starts + self.cf.p ** (-n)])

    def weight(self, n: int) -> float:
        return 2.0 ** (-n)

    def mass(self, a, b):
        """``mu([a, b]) = f(b) - f(a)``, clipping the interval to [0, 1]."""
        a = np.clip(a, 0.0, 1.0)
        b = np.clip(b, 0.0, 1.0)
        return eval_cantor(self.cf, b) - eval_cantor(self.cf, a)

    def ball_mass(self, x, r):
        x = np.asarray(x, dtype=float)
        return self.mass(x - r, x + r)

    def sample_support(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Random points of the depth-N support (uniform w.r.t. the measure)."""
        digits = rng.integers(0, 2, size=(count, self.depth))
        scale = self.cf.p ** -np.arange(1, self.depth + 1)
        starts = digits @ ((self.cf.p - 1.0) * scale)
        return starts + rng.random(count) * self.cf.p ** (-self.depth)


def derivative_measure(cf: CantorFunction) -> CantorMeasure:
    return CantorMeasure(cf)


@dataclass(frozen=True)
class AhlforsFit:
    alpha_hat: float
    c_lo: float
    c_hi: float
    pairs: int


def default_radii(cf: CantorFunction, count: int = 24) -> np.ndarray:
    return np.geomspace(cf.p ** (-cf.depth + 2), 0.25, count)


def ahlfors_exponent_fit(measure: CantorMeasure, radii, centers) -> AhlforsFit:
    """Pooled least-squares slope of ``log mu(B(x, r))`` against ``log r``."""
    radii = np.asarray(radii, dtype=float).ravel()
    centers = np.asarray(centers, dtype=float).ravel()
    lo = measure.cf.p ** (-measure.depth + 2)
    if np.any(radii < lo * (1 - 1e-12)) or np.any(radii > 0.25 * (1 + 1e-12)):
        raise InvalidParameter(f"radii must lie in [{lo:.3g}, 0.25]")
    if radii.size * centers.size < 8:
        raise InsufficientData("need at least 8 (center, radius) pairs")
    xs, rs = np.meshgrid(centers, radii, indexing="ij")
    m = measure.ball_mass(xs.ravel(), rs.ravel())
    if np.any(m <= 0):
        raise InsufficientData("some balls carry no mass; centers must lie in the support")
    log_r = np.log(rs.ravel())
    log_m = np.log(m)
    slope, _ = np.polyfit(log_r, log_m, 1)
    ratio = m / rs.ravel() ** slope
    return AhlforsFit(float(slope), float(ratio.min()), float(ratio.max()), int(m.size))


# ---------------------------------------------------------------------------------
# Gaps
# ---------------------------------------------------------------------------------


def gap_generations(cf: CantorFunction, max_generation: int | None = None) -> list[np.ndarray]:
    """Gap left endpoints per generation (generation n has ``2^(n-1)`` gaps)."""
    top = cf.depth if max_generation is None else max_generation
    out = []
    for n in range(1, top + 1):
        parents = _interval_starts(cf.p, n - 1)
        out.append(parents + cf.p ** (-n))
    return out


def gap_list(cf: CantorFunction, max_generation: int | None = None) -> np.ndarray:
    """``(K, 2)`` array of gaps ordered by length (descending) then position.

    Lengths are constant within a generation and decrease strictly with it, so
    the order is generation-major, left to right.
    """
    rows = []
    for n, lefts in enumerate(gap_generations(cf, max_generation), start=1):
        length = (cf.p - 2.0) * cf.p ** (-n)
        rows.append(np.column_stack([lefts, lefts + length]))
    return np.concatenate(rows) if rows else np.empty((0, 2))


# ---------------------------------------------------------------------------------
# Domain
# ---------------------------------------------------------------------------------


def self_similar_integral(p: float, eps: float) -> complex:
    """``G(eps) = int_0^1 exp(i pi eps f(u)) du`` for the limit function f.

    Uses ``G(eps) = G(eps/2) (1 + w) / p + (p - 2) w / p`` with ``w = exp(i pi eps / 2)``,
    started from the first-order expansion at tiny eps.
    """
    levels = 0
    e = eps
    while e > 1e-18:
        e *= 0.5
        levels += 1
    g = 1.0 + 0.5j * math.pi * e
    for _ in range(levels):
        e *= 2.0
        w = cmath.exp(0.5j * math.pi * e)
        g = g * (1.0 + w) / p + (p - 2.0) * w / p
    return g


@dataclass(frozen=True)
class CantorBoundary:
    """Half-curve segments of a Cantor-Lebesgue domain.

    ``edges`` lists the half-curve as alternating residual chords and gap
    segments; the other half is the same list rotated by pi.
    """

    p: float
    depth: int
    edges: np.ndarray = field(repr=False)
    angles: np.ndarray = field(repr=False)
    is_gap: np.ndarray = field(repr=False)
    end: np.ndarray  # gamma(1) with gamma(0) = 0
    center: np.ndarray

    @property
    def gap_length(self) -> float:
        return float(np.sum(np.hypot(*self.edges[self.is_gap].T)))

    @property
    def chord_length(self) -> float:
        return float(np.sum(np.hypot(*self.edges[~self.is_gap].T)))


class CantorDomain(Polygon):
    """Polygon whose edges come from a :class:`CantorBoundary`."""

    kind = "cantor"

    def __init__(self, boundary: CantorBoundary, *, validate: bool = True):
        edges = np.concatenate([boundary.edges, -boundary.edges])
        verts = np.concatenate([[[0.0, 0.0]], np.cumsum(edges[:-1], axis=0)])
        self.boundary = boundary
        super().__init__(verts, basepoint=boundary.center, edge_vectors=edges, validate=False)
        if validate:
            ang = np.concatenate([boundary.angles, boundary.angles + math.pi])
            if np.any(np.diff(ang) <= 0) or ang[-1] - ang[0] >= 2 * math.pi:
                raise NonConvexOutput("edge directions of the Cantor domain are not increasing")
            closure = np.linalg.norm(verts[-1] + edges[-1])
            if closure > TOL_GEO:
                raise NonConvexOutput(f"Cantor boundary fails to close (gap {closure:.3g})")

    @property
    def p(self) -> float:
        return self.boundary.p

    @property
    def depth(self) -> int:
        return self.boundary.depth


def build_cantor_boundary(cf: CantorFunction) -> CantorBoundary:
    p, n = cf.p, cf.depth
    if n > 24:
        raise InvalidParameter("domains are limited to depth 24 (2^26 vertices)")
    count = 2**n
    k = np.arange(count)
    eps = 2.0 ** (-n)
    g = self_similar_integral(p, eps)
    chord_len = p ** (-n) * abs(g)
    chord_ang = math.pi * (2 * k + 1) / 2.0 ** (n + 1)
    # gap between interval k and k+1 has value (k+1)/2^n and generation n - (trailing ones of k)
    kk = k[:-1]
    trailing = np.zeros(count - 1, dtype=int)
    probe = kk.copy()
    while np.any(probe & 1):
        odd = (probe & 1) == 1
        trailing += odd
        probe = np.where(odd, probe >> 1, 0)
    generation = n - trailing
    gap_len = (p - 2.0) * p ** (-generation.astype(float))
    gap_ang = math.pi * (kk + 1) / 2.0**n

    angles = np.empty(2 * count - 1)
    lengths = np.empty(2 * count - 1)
    angles[0::2] = chord_ang
    lengths[0::2] = chord_len
    angles[1::2] = gap_ang
    lengths[1::2] = gap_len
    is_gap = np.zeros(2 * count - 1, dtype=bool)
    is_gap[1::2] = True
    edges = lengths[:, None] * np.column_stack([np.cos(angles), np.sin(angles)])
    end = edges.sum(axis=0)
    for arr in (edges, angles, is_gap, end):
        arr.setflags(write=False)
    return CantorBoundary(p, n, edges, angles, is_gap, end, end / 2.0)


def build_cantor_domain(cf: CantorFunction) -> CantorDomain:
    """Convex domain bounded by ``gamma(t) = int_0^t exp(i pi f)`` and its rotation by pi."""
    return CantorDomain(build_cantor_boundary(cf))
