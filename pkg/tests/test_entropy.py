from __future__ import annotations

import math

import numpy as np
import oracles
import pytest
from conftest import HEXAGON, SQUARE
from hypothesis import given, settings
from hypothesis import strategies as st

from hilbert_lab.cantor import build_cantor_domain, build_cantor_function, gap_list
from hilbert_lab.errors import InsufficientData, InvalidParameter, NotSymmetric
from hilbert_lab.geometry import Ellipse, Polygon
from hilbert_lab.metric import finsler_path_length
from hilbert_lab.entropy import (
    RadiusGrid,
    SeriesParams,
    ball_volume,
    boundary_gap,
    cantor_series,
    cantor_series_length,
    circle_length,
    entropy_estimate,
    fit_entropy,
    general_gap_series,
    max_radius,
    series_bounds,
    sphere_polyline,
    tangent_exit,
)

ALPHA3 = math.log(2) / math.log(3)
PS = [2.5, 3.0, 4.0, 6.0]


def test_boundary_gap_and_radius_cap():
    for R in (0.1, 1.0, 5.0):
        assert boundary_gap(R) == pytest.approx(1 - math.tanh(R), rel=1e-12)
    assert boundary_gap(30.0) == pytest.approx(2 * math.exp(-60), rel=1e-12)
    assert boundary_gap(max_radius(1e-10)) == pytest.approx(1e-9, rel=1e-9)


# --- tangent exits ---------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(theta=st.floats(0, 2 * math.pi), lam=st.floats(0.01, 0.99))
def test_tangent_exit_disk_right_triangle(theta, lam):
    disk = Ellipse.disk()
    x = lam * disk.boundary_point(theta)
    for sign in (1, -1):
        assert np.linalg.norm(tangent_exit(disk, theta, lam, sign) - x) == pytest.approx(math.sqrt(1 - lam * lam), rel=1e-10)


def test_tangent_exit_small_lambda_gives_chord(ellipse):
    plus = tangent_exit(ellipse, 0.0, 1e-9, 1)
    minus = tangent_exit(ellipse, 0.0, 1e-9, -1)
    np.testing.assert_allclose(plus, [0, 1], atol=1e-8)
    np.testing.assert_allclose(minus, [0, -1], atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0, math.pi), lam=st.floats(0.05, 0.95))
def test_tangent_exit_antipodal_symmetry(theta, lam):
    dom = Ellipse(2.0, 1.0, angle=0.5)
    x = lam * dom.boundary_point(theta)
    y = lam * dom.boundary_point(theta + math.pi)
    d_plus = np.linalg.norm(tangent_exit(dom, theta, lam, 1) - x)
    d_minus = np.linalg.norm(tangent_exit(dom, theta + math.pi, lam, -1) - y)
    assert d_plus == pytest.approx(np.linalg.norm(tangent_exit(dom, theta + math.pi, lam, 1) - y), rel=1e-9)
    assert d_minus == pytest.approx(np.linalg.norm(tangent_exit(dom, theta, lam, -1) - x), rel=1e-9)


def test_tangent_exit_rejects_bad_lambda(disk):
    with pytest.raises(InvalidParameter):
        tangent_exit(disk, 0.0, 1.0)


# --- circle lengths ----------------------------------------------------------------


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0, 4.0, 6.0])
def test_circle_length_disk(R, disk):
    assert circle_length(disk, R) == pytest.approx(oracles.disk_circle_length(R), rel=1e-7)


def test_circle_length_small_radius(disk):
    assert circle_length(disk, 1e-4) == pytest.approx(2 * math.pi * 1e-4, rel=1e-7)


@pytest.mark.parametrize("R", [0.3, 2.0, 17.5, 60.0])
def test_square_circle_length_is_linear(R, square):
    assert circle_length(square, R) == pytest.approx(8 * R, rel=1e-12)


def test_circle_length_requires_symmetry():
    tri = Polygon([[0, 0], [3, 0], [0, 3]])
    with pytest.raises(NotSymmetric):
        circle_length(tri, 1.0)
    with pytest.raises(InvalidParameter):
        circle_length(Ellipse.disk(), 20.0)


@pytest.mark.parametrize(
    "domain, R, samples",
    [(Polygon(HEXAGON), 2.0, 0), (Ellipse(2.0, 1.0, angle=0.2), 1.0, 2000)],
)
def test_circle_length_matches_path_integral(domain, R, samples):
    polyline = sphere_polyline(domain, R, samples)
    direct = finsler_path_length(domain, polyline)
    # a polyline through points of a smooth curve is a slight underestimate
    assert circle_length(domain, R) == pytest.approx(direct, rel=1e-4)


def test_cantor_circle_length_matches_path_integral():
    dom = build_cantor_domain(build_cantor_function(3, 5))
    direct = finsler_path_length(dom, sphere_polyline(dom, 1.5, 0))
    assert circle_length(dom, 1.5) == pytest.approx(direct, rel=1e-8)


# --- ball volumes ---------------------------------------------------------------------


@pytest.mark.parametrize("R", [0.5, 1.0])
def test_ball_volume_disk(R, disk):
    assert ball_volume(disk, R) == pytest.approx(oracles.disk_ball_volume(R), rel=1e-6)


@pytest.mark.parametrize("R", [0.5, 1.0])
def test_square_ball_volume_matches_tensor_quadrature(R, square):
    assert ball_volume(square, R) == pytest.approx(oracles.polygon_ball_volume(SQUARE, R), rel=1e-10)


# Frozen values: square and hexagon at larger R, produced by the fan quadrature
# and checked pointwise against the extended-precision density oracle.
@pytest.mark.parametrize(
    "vertices, R, expected",
    [
        (SQUARE, 2.0, 15.592845423074),
        (SQUARE, 10.0, 417.539947238818),
        (HEXAGON, 10.0, 584.83425730),
    ],
)
def test_polygon_ball_volume_regression(vertices, R, expected):
    assert ball_volume(Polygon(vertices), R) == pytest.approx(expected, rel=1e-9)


def test_ball_volume_small_radius(square):
    # sigma(0) = pi / 4 and the ball is tanh(R) times the square, area 4 tanh(R)^2
    R = 1e-3
    assert ball_volume(square, R) == pytest.approx(math.pi * math.tanh(R) ** 2, rel=1e-5)


# --- fits ------------------------------------------------------------------------


def test_radius_grid():
    assert RadiusGrid(2, 8, 13).values()[1] == pytest.approx(2.5)
    np.testing.assert_allclose(RadiusGrid(1, 100, 3, "geometric").values(), [1, 10, 100])
    with pytest.raises(InvalidParameter):
        RadiusGrid(1, 2, 3, "cubic")
    with pytest.raises(InvalidParameter):
        RadiusGrid(0, 2, 3, "geometric")


def test_fit_entropy_on_exact_exponential():
    R = np.linspace(1, 5, 9)
    est = fit_entropy(R, 3.0 * np.exp(0.7 * R), "series")
    assert est.slope == pytest.approx(0.7, rel=1e-12)
    np.testing.assert_allclose(est.local_slopes, 0.7, rtol=1e-12)
    assert len(est.local_slopes) == len(R) - 1


def test_entropy_estimate_disk_spheres(disk):
    est = entropy_estimate(disk, RadiusGrid(2, 8, 13), "sphere", workers=2)
    assert 0.95 <= est.slope <= 1.05


def test_entropy_estimate_needs_six_radii(disk):
    with pytest.raises(InsufficientData):
        entropy_estimate(disk, RadiusGrid(1, 2, 5))


def test_fit_entropy_rejects_unsorted():
    with pytest.raises(InvalidParameter):
        fit_entropy([1, 3, 2], [1, 2, 3], "sphere")


# --- series -------------------------------------------------------------------------


def test_series_params():
    for p in PS:
        sp = SeriesParams(p)
        assert sp.beta == pytest.approx(1 / (math.log(2) + math.log(p)), abs=1e-14)
    assert SeriesParams(3).rate == pytest.approx(0.7737056144690831, abs=1e-12)
    for bad in ({"p": 2.0}, {"p": 3, "gap_count_rule": "x"}, {"p": 3, "prefactor": 0.5}, {"p": 3, "sides": 3}):
        with pytest.raises(InvalidParameter):
            SeriesParams(**bad)


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("R", [0.0, 1.0, 10.0, 40.0])
def test_series_matches_extended_precision(p, R):
    for rule in ("doubled", "exact"):
        expected = oracles.series_direct(p, R, rule)
        assert cantor_series_length(SeriesParams(p, rule), R) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(p=st.floats(2.1, 8.0), R=st.floats(0.0, 60.0))
def test_series_rule_relation_and_monotonicity(p, R):
    doubled = cantor_series_length(SeriesParams(p, "doubled"), R)
    exact = cantor_series_length(SeriesParams(p, "exact"), R)
    assert exact == pytest.approx(doubled / 2, rel=1e-14)
    assert exact < doubled
    assert cantor_series_length(SeriesParams(p, "doubled"), R + 0.5) > doubled
    assert cantor_series_length(SeriesParams(p, "doubled", sides=2), R) == pytest.approx(2 * doubled, rel=1e-15)


def test_series_truncation_report():
    value = cantor_series(SeriesParams(3), 10.0)
    assert value.terms > 10
    assert 0 <= value.tail_bound < 1e-12 * value.value


def test_series_bounds_examples():
    sp = SeriesParams(3)
    lower, upper = series_bounds(sp, 10.0)
    assert 2 * 10 * sp.beta == pytest.approx(20 / math.log(6), abs=1e-12)
    assert lower == pytest.approx(2 ** (2 * 10 * sp.beta + 2) / 9, rel=1e-14)
    assert lower == pytest.approx(1018.5, abs=0.5)
    assert lower <= cantor_series_length(sp, 10.0) <= upper
    for p in PS:
        assert series_bounds(SeriesParams(p), 0.0)[0] == pytest.approx(4 / p**2)
        assert series_bounds(SeriesParams(p), 0.0)[0] <= cantor_series_length(SeriesParams(p, "doubled"), 0.0)


def test_series_bounds_growth_rate():
    sp = SeriesParams(3)
    lo1, up1 = series_bounds(sp, 200.0)
    lo2, up2 = series_bounds(sp, 400.0)
    assert (math.log(lo2) - math.log(lo1)) / 200 == pytest.approx(sp.rate, abs=1e-12)
    assert (math.log(up2) - math.log(up1)) / 200 == pytest.approx(sp.rate, abs=0.01)


@pytest.mark.parametrize("p", PS)
def test_corrected_upper_bound_holds_everywhere(p):
    sp = SeriesParams(p, "doubled")
    for R in np.linspace(0, 60, 601):
        lower, upper = series_bounds(sp, R, corrected=True)
        assert lower <= cantor_series_length(sp, R) <= upper


def test_general_gap_series_equals_exact_rule():
    cf = build_cantor_function(3, 16)
    gaps = gap_list(cf)
    for R in (0.0, 3.0, 8.0):
        expected = cantor_series_length(SeriesParams(3, "exact", max_generation=16), R)
        # same sum; gap lengths come from rounded endpoints, hence the small slack
        assert general_gap_series(gaps, ALPHA3, R) == pytest.approx(expected, rel=1e-11)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0, 1e6), b=st.floats(0, 1e6))
def test_log_subadditivity(a, b):
    assert math.log1p(a + b) <= math.log1p(a) + math.log1p(b) + 1e-12


def test_prefactor_changes_by_at_most_log_c_per_gap():
    gaps = gap_list(build_cantor_function(3, 10))
    for R in (0.0, 2.0, 5.0):
        one = general_gap_series(gaps, ALPHA3, R)
        five = general_gap_series(gaps, ALPHA3, R, prefactor=5.0)
        assert 0 <= five - one <= len(gaps) * math.log(5.0)
    with pytest.raises(InvalidParameter):
        general_gap_series(gaps, ALPHA3, 1.0, prefactor=0.5)


@pytest.mark.parametrize("p", PS)
def test_series_growth_rate_via_local_slope(p):
    # log S(R) = rate * R + c + o(1) with c of order 1-2, so log S / R only
    # approaches the rate like c / R while the local slope is already exact
    sp = SeriesParams(p, "doubled")
    log_s = lambda R: math.log(cantor_series_length(sp, R))  # noqa: E731
    assert (log_s(61.0) - log_s(59.0)) / 2 == pytest.approx(sp.rate, abs=1e-3)
    assert abs(log_s(600.0) / 600 - sp.rate) < 0.01
    intercept = log_s(600.0) - 600 * sp.rate
    assert log_s(60.0) / 60 - sp.rate == pytest.approx(intercept / 60, abs=1e-3)
