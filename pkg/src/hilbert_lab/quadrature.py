"""One-dimensional quadrature used by the metric and entropy code.

Two families:

* adaptive Simpson for scalar integrands (Busemann volumes, circle lengths),
* Gauss-Legendre rules, fixed and adaptive, for vectorised integrands.

Both raise :class:`QuadratureNonConvergent` when the refinement cap is hit
instead of silently returning an inaccurate value.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import QuadratureNonConvergent

SIMPSON_MAX_DEPTH = 24


@lru_cache(maxsize=64)
def legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _initial_nodes(a: float, b: float, breakpoints: Iterable[float], panels: int) -> np.ndarray:
    cuts = [a, b] + [t for t in breakpoints if a < t < b]
    cuts = np.unique(np.asarray(cuts, dtype=float))
    if len(cuts) - 1 >= panels:
        return cuts
    # spread the remaining panels uniformly over [a, b] and merge with the cuts
    uniform = np.linspace(a, b, panels + 1)
    return np.unique(np.concatenate([cuts, uniform]))


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 0.0,
    *,
    breakpoints: Sequence[float] = (),
    initial_panels: int = 16,
    max_depth: int = SIMPSON_MAX_DEPTH,
) -> float:
    """Integrate a scalar function over [a, b] by adaptive Simpson refinement.

    The error target is ``max(abs_tol, rel_tol * L1)`` where ``L1`` is a coarse
    estimate of the integral of ``|f|``, distributed over panels in proportion to
    their width. ``breakpoints`` are forced panel boundaries (kinks of ``f``).
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    nodes = _initial_nodes(a, b, breakpoints, initial_panels)

    panels = []
    coarse_abs = 0.0
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
        coarse_abs += (hi - lo) / 6.0 * (abs(flo) + 4.0 * abs(fmid) + abs(fhi))
        panels.append((lo, flo, mid, fmid, hi, fhi, whole))

    tol = max(abs_tol, rel_tol * coarse_abs)
    if tol == 0.0:
        return 0.0
    span = b - a

    def refine(lo, flo, mid, fmid, hi, fhi, whole, eps, depth):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        if depth >= max_depth:
            raise QuadratureNonConvergent(
                f"adaptive Simpson hit depth cap {max_depth} on [{lo:.6g}, {hi:.6g}]"
            )
        return refine(lo, flo, lm, flm, mid, fmid, left, eps / 2.0, depth + 1) + refine(
            mid, fmid, rm, frm, hi, fhi, right, eps / 2.0, depth + 1
        )

    total = 0.0
    for lo, flo, mid, fmid, hi, fhi, whole in panels:
        total += refine(lo, flo, mid, fmid, hi, fhi, whole, tol * (hi - lo) / span, 1)
    return sign * total


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int = 20) -> float:
    """Fixed n-point Gauss-Legendre rule; ``f`` must accept an array of nodes."""
    x, w = legendre_rule(n)
    half = 0.5 * (b - a)
    t = 0.5 * (a + b) + half * x
    return float(half * np.dot(w, f(t)))


def composite_nodes(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite n-point rule on consecutive panels."""
    x, w = legendre_rule(n)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def adaptive_gauss_legendre(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 0.0,
    *,
    n: int = 10,
    max_depth: int = 30,
) -> float:
    """Bisect panels until the n- and 2n-point rules agree.

    Each panel is accepted when its two estimates differ by less than its share
    of ``max(abs_tol, rel_tol * |I|)``; ``|I|`` comes from the whole-interval
    2n-point estimate.
    """
    if a == b:
        return 0.0
    whole = gauss_legendre(f, a, b, 2 * n)
    tol = max(abs_tol, rel_tol * abs(whole))
    span = abs(b - a)
    total = 0.0
    stack = [(a, b, whole, 0)]
    while stack:
        lo, hi, fine, depth = stack.pop()
        coarse = gauss_legendre(f, lo, hi, n)
        if abs(fine - coarse) <= tol * abs(hi - lo) / span or (tol == 0.0 and fine == coarse):
            total += fine
            continue
        if depth >= max_depth:
            raise QuadratureNonConvergent(
                f"adaptive Gauss-Legendre hit depth cap {max_depth} on [{lo:.6g}, {hi:.6g}]"
            )
        mid = 0.5 * (lo + hi)
        stack.append((lo, mid, gauss_legendre(f, lo, mid, 2 * n), depth + 1))
        stack.append((mid, hi, gauss_legendre(f, mid, hi, 2 * n), depth + 1))
    return total


def adaptive_simpson_vec(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 0.0,
    *,
    breakpoints: Sequence[float] = (),
    initial_panels: int = 16,
    max_depth: int = SIMPSON_MAX_DEPTH,
) -> float:
    """Same acceptance rule as :func:`adaptive_simpson`, refined level by level.

    ``f`` takes an array of abscissae, so each refinement level costs one call.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    nodes = _initial_nodes(a, b, breakpoints, initial_panels)
    lo, hi = nodes[:-1], nodes[1:]
    mid = 0.5 * (lo + hi)
    vals = f(np.concatenate([nodes, mid]))
    flo, fhi, fmid = vals[: len(lo)], vals[1 : len(nodes)], vals[len(nodes) :]
    width = hi - lo
    whole = width / 6.0 * (flo + 4.0 * fmid + fhi)
    coarse_abs = float(np.sum(width / 6.0 * (np.abs(flo) + 4.0 * np.abs(fmid) + np.abs(fhi))))
    tol = max(abs_tol, rel_tol * coarse_abs)
    if tol == 0.0:
        return 0.0
    eps = tol * width / (b - a)
    total = 0.0
    depth = 1
    while len(lo):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        vals = f(np.concatenate([lm, rm]))
        flm, frm = vals[: len(lo)], vals[len(lo) :]
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - whole
        ok = np.abs(delta) <= 15.0 * eps
        total += float(np.sum((left + right + delta / 15.0)[ok]))
        if np.all(ok):
            break
        if depth >= max_depth:
            bad = np.flatnonzero(~ok)[0]
            raise QuadratureNonConvergent(
                f"adaptive Simpson hit depth cap {max_depth} on [{lo[bad]:.6g}, {hi[bad]:.6g}]"
            )
        keep = ~ok
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        flo, fmid, fhi, flm, frm = flo[keep], fmid[keep], fhi[keep], flm[keep], frm[keep]
        left, right, eps = left[keep], right[keep], eps[keep] / 2.0
        lo, mid, hi, flo, fmid, fhi, whole = (
            np.concatenate([lo, mid]),
            np.concatenate([lm[keep], rm[keep]]),
            np.concatenate([mid, hi]),
            np.concatenate([flo, fmid]),
            np.concatenate([flm, frm]),
            np.concatenate([fmid, fhi]),
            np.concatenate([left, right]),
        )
        eps = np.concatenate([eps, eps])
        depth += 1
    return sign * total
