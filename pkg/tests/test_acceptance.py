"""Acceptance gate: each test checks one criterion at its stated tolerance.

Every test records a PASS/FAIL line (collected in the terminal summary) and
then asserts the same condition, so a red line is also a failing test.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import oracles
from conftest import SQUARE, record_criterion

from hilbert_lab.cantor import (
    ahlfors_exponent_fit,
    build_cantor_domain,
    build_cantor_function,
    default_radii,
    derivative_measure,
    gap_list,
)
from hilbert_lab.entropy import (
    RadiusGrid,
    SeriesParams,
    ball_volume,
    cantor_series_length,
    circle_length,
    entropy_estimate,
    fit_entropy,
    general_gap_series,
    series_bounds,
)
from hilbert_lab.geometry import Ellipse, Polygon
from hilbert_lab.metric import blowup_ratio, centro_projective_area, finsler_path_length, hilbert_distance
from hilbert_lab.tree import (
    OrderedRegularSet,
    StandardTree,
    all_words,
    bilipschitz_check,
    branch_ratio_check,
    build_tree,
    distortion_constant,
    embed_ordered,
    embed_standard,
    flip_isometry_check,
    reorder_flips,
)

ENTROPY_P3 = 2 * (math.log(2) / math.log(3)) / (math.log(2) / math.log(3) + 1)  # 0.7737...


def test_criterion_01_disk_sphere_entropy():
    start = time.perf_counter()
    est = entropy_estimate(Ellipse.disk(), RadiusGrid(2.0, 8.0, 13), "sphere")
    elapsed = time.perf_counter() - start
    ok = 0.95 <= est.slope <= 1.05 and elapsed < 60
    record_criterion(1, ok, f"disk slope {est.slope:.5f} over R in [2, 8] (13 radii), {elapsed:.1f}s")
    assert ok


def test_criterion_02_disk_closed_forms():
    start = time.perf_counter()
    disk = Ellipse.disk()
    errors = []
    for R in (0.5, 1.0, 2.0, 4.0):
        errors.append(abs(circle_length(disk, R) / oracles.disk_circle_length(R) - 1))
        errors.append(abs(ball_volume(disk, R) / oracles.disk_ball_volume(R) - 1))
    elapsed = time.perf_counter() - start
    worst = max(errors)
    ok = worst < 1e-5 and elapsed < 60
    record_criterion(2, ok, f"max relative error {worst:.2e} against 2 pi sinh R and 2 pi (cosh R - 1), {elapsed:.1f}s")
    assert ok


def test_criterion_03_square_ball_growth():
    square = Polygon(SQUARE)
    radii = np.linspace(10.0, 20.0, 11)
    est = fit_entropy(radii, [ball_volume(square, R) for R in radii], "ball")
    local = est.local_slopes
    ok = bool(np.all(np.diff(local) < 0)) and local[-1] < 0.5
    record_criterion(
        3, ok, f"square local slopes {local[0]:.4f} -> {local[-1]:.4f}, strictly decreasing: {bool(np.all(np.diff(local) < 0))}"
    )
    assert ok


def test_criterion_04_series_rate_and_sandwich():
    start = time.perf_counter()
    rate_errors = {}
    violations = []
    for p in (2.5, 3.0, 4.0, 6.0):
        params = SeriesParams(p, "doubled")
        rate_errors[p] = math.log(cantor_series_length(params, 60.0)) / 60.0 - params.rate
        for R in np.linspace(0.0, 60.0, 601):
            value = cantor_series_length(params, R)
            lower, upper = series_bounds(params, R)
            if not lower <= value <= upper:
                violations.append((p, round(float(R), 1)))
    elapsed = time.perf_counter() - start
    rate_ok = all(abs(e) < 0.01 for e in rate_errors.values())
    ok = rate_ok and not violations and elapsed < 1.0
    worst = max(rate_errors.items(), key=lambda kv: abs(kv[1]))
    record_criterion(
        4,
        ok,
        f"rate error at R=60 up to {worst[1]:+.4f} (p={worst[0]}); "
        f"sandwich violations {len(violations)} {violations[:3]}; {elapsed:.2f}s",
    )
    assert ok


def test_criterion_05_cantor_geometry_vs_series():
    start = time.perf_counter()
    cf = build_cantor_function(3.0, 18)
    domain = build_cantor_domain(cf)
    gaps = gap_list(cf)
    radii = np.linspace(5.0, 9.0, 9)
    geo = fit_entropy(radii, [circle_length(domain, R) for R in radii], "sphere").local_slopes
    ana = fit_entropy(radii, [general_gap_series(gaps, cf.alpha, R) for R in radii], "series").local_slopes
    elapsed = time.perf_counter() - start
    gap = float(np.max(np.abs(geo - ana)))
    spread = float(max(np.max(np.abs(geo - ENTROPY_P3)), np.max(np.abs(ana - ENTROPY_P3))))
    ok = gap < 0.05 and spread < 0.1 and elapsed < 600
    record_criterion(5, ok, f"max slope gap {gap:.4f}, max distance from 0.7737 {spread:.4f}, {elapsed:.1f}s")
    assert ok


def test_criterion_06_blowup_limits():
    disk_value = blowup_ratio(Ellipse.disk(), 0.0, 1 - 1e-4)
    ellipse_value = blowup_ratio(Ellipse(2.0, 1.0), 0.0, 1 - 1e-4)
    disk_ok = abs(disk_value - 0.3535534) < 1e-2
    ellipse_ok = abs(ellipse_value - 0.25) < 1e-2
    ok = disk_ok and ellipse_ok
    record_criterion(6, ok, f"disk {disk_value:.6f} (target 0.3535534), ellipse major vertex {ellipse_value:.6f} (target 0.25)")
    assert ok


def test_criterion_07_centro_projective_area():
    disk = centro_projective_area(Ellipse.disk())
    square = centro_projective_area(Polygon(SQUARE))
    ellipse = centro_projective_area(Ellipse(2.0, 1.0))
    ok = abs(disk - 8.8857659) < 1e-6 and square == 0.0 and ellipse > 0
    record_criterion(7, ok, f"disk {disk:.9f}, square {square!r}, ellipse {ellipse:.9f}")
    assert ok


def test_criterion_08_holder_and_ahlfors():
    cf = build_cantor_function(3.0, 20)
    rng = np.random.default_rng(0)
    x, y = rng.random(10_000), rng.random(10_000)
    holder_ratio = float(np.max(np.abs(cf(x) - cf(y)) / np.abs(x - y) ** cf.alpha))
    mu = derivative_measure(cf)
    fit = ahlfors_exponent_fit(mu, default_radii(cf), mu.sample_support(200, rng))
    lower = (2 * cf.p) ** (-cf.alpha)
    ok = holder_ratio <= 10 and abs(fit.alpha_hat - cf.alpha) < 0.02 and fit.c_lo >= lower
    record_criterion(
        8, ok, f"Holder ratio {holder_ratio:.3f} <= 10, alpha_hat {fit.alpha_hat:.5f}, c_lo {fit.c_lo:.4f} >= {lower:.4f}"
    )
    assert ok


def test_criterion_09_tree_metric():
    tree = build_tree(OrderedRegularSet.standard(3, 10), 2**10 - 1)
    report = bilipschitz_check(tree, "exhaustive")
    k3 = branch_ratio_check(tree)
    k4 = branch_ratio_check(build_tree(OrderedRegularSet.standard(4, 10), 2**10 - 1))
    ok = report.euclid_le_tree and k3 == 1 and k4 == 2 and isinstance(k3, Fraction)
    record_criterion(
        9, ok, f"{report.pairs} exhaustive pairs with |x-y| <= d_T: {report.euclid_le_tree}; K(C3) = {k3}, K(C4) = {k4}"
    )
    assert ok


def test_criterion_10_ordered_embedding():
    src = StandardTree.of(5)
    points = sorted({x for w in all_words(8) for x in src.interval(w)})
    order_ok = True
    distortions = []
    for depth in range(8, 15):
        emb = embed_standard(5, 3, depth)
        images = [emb.boundary_map(x) for x in points]
        order_ok &= all(b > a for a, b in zip(images, images[1:]))
        distortions.append(distortion_constant(emb))
    variation = max(distortions) / min(distortions) - 1

    reversed_emb = embed_ordered(StandardTree.of(3), StandardTree.of(3), lambda x: 1 - x, depth=6)
    fixed = reorder_flips(reversed_emb)
    each_flip = all(flip_isometry_check(fixed.target, frozenset({f}), 6) for f in fixed.flips)
    repair_ok = fixed.order_preserved and each_flip and flip_isometry_check(fixed.target, fixed.flips, 6)
    ok = order_ok and variation < 0.2 and repair_ok
    record_criterion(
        10,
        ok,
        f"order kept at depths 8-14: {order_ok}, distortion {min(distortions):.4f}-{max(distortions):.4f} "
        f"({100 * variation:.1f}%), {fixed.flip_count} isometric flips repair the reversal: {repair_ok}",
    )
    assert ok


def test_criterion_11_distance_vs_path_length():
    rng = np.random.default_rng(11)
    worst = {}
    for name, dom in (("disk", Ellipse.disk()), ("square", Polygon(SQUARE)), ("ellipse", Ellipse(2.0, 1.0))):
        err = 0.0
        for _ in range(500):
            p, q = (dom.basepoint + 0.95 * rng.random() * (dom.boundary_point(2 * math.pi * rng.random()) - dom.basepoint) for _ in range(2))
            err = max(err, abs(hilbert_distance(dom, p, q) - finsler_path_length(dom, [p, q])))
        worst[name] = err
    ok = max(worst.values()) < 1e-6
    record_criterion(11, ok, "max discrepancy " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok
