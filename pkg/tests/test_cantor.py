from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import oracles
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilbert_lab.cantor import (
    ahlfors_exponent_fit,
    build_cantor_boundary,
    build_cantor_domain,
    build_cantor_function,
    default_radii,
    derivative_measure,
    eval_cantor,
    gap_list,
    self_similar_integral,
)
from hilbert_lab.errors import InsufficientData, InvalidParameter, OutOfDomain

params = st.sampled_from([2.5, 3.0, 4.0, 6.0])


def test_construction_values():
    cf = build_cantor_function(3, 8)
    assert cf(1 / 3) == 0.5 and cf(2 / 3) == 0.5
    assert cf(1 / 9) == 0.25
    for p in (2.5, 3, 4, 7):
        f = build_cantor_function(p, 6)
        assert (f(0.0), f(0.5), f(1.0)) == (0.0, 0.5, 1.0)
    assert build_cantor_function(4, 5)(0.0) == 0.0


def test_point_left_of_the_first_ninth():
    # 0.11 < 1/9 sits in the support interval [2/27, 1/9], just below the flat of value 1/4
    f = build_cantor_function(3, 10)(0.11)
    assert f == pytest.approx(oracles.cantor_value(3.0, 0.11, 10), abs=1e-12)
    assert f == pytest.approx(0.23828125, abs=2.0**-10)
    assert f < 0.25 - 2.0**-9


def test_matches_recursive_oracle():
    cf = build_cantor_function(3, 12)
    ts = np.linspace(0, 1, 301)
    expected = [oracles.cantor_value(3.0, t, 12) for t in ts]
    np.testing.assert_allclose(cf(ts), expected, atol=1e-12)


def test_invalid_parameters():
    with pytest.raises(InvalidParameter):
        build_cantor_function(2.0, 4)
    with pytest.raises(InvalidParameter):
        build_cantor_function(3.0, 0)
    with pytest.raises(OutOfDomain):
        eval_cantor(build_cantor_function(3, 4), 1.5)


def test_pieces_structure():
    cf = build_cantor_function(3, 4)
    pieces = cf.pieces()
    slopes = [pc for pc in pieces if pc.kind == "slope"]
    flats = [pc for pc in pieces if pc.kind == "flat"]
    assert len(slopes) == 16 and len(flats) == 15
    assert all(abs(pc.b - pc.a - 3.0**-4) < 1e-15 and pc.rise == 2.0**-4 for pc in slopes)
    for flat in flats:
        frac = Fraction(flat.value).limit_denominator(1 << 10)
        gen = int(math.log2(frac.denominator))
        assert frac.numerator % 2 == 1
        assert flat.b - flat.a == pytest.approx(3.0**-gen, rel=1e-12)
    for left, right in zip(pieces, pieces[1:]):
        assert left.b == pytest.approx(right.a, abs=1e-15)
        assert left.value + left.rise == pytest.approx(right.value, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(p=params, t=st.floats(0, 1), s=st.floats(0, 1))
def test_monotone_symmetric_self_similar(p, t, s):
    cf = build_cantor_function(p, 24)
    lo, hi = min(t, s), max(t, s)
    assert cf(lo) <= cf(hi)
    # rounding 1 - t moves at most across one depth-N piece, each rising 2^-N
    assert cf(1 - t) == pytest.approx(1 - cf(t), abs=2.0 ** (1 - cf.depth))
    # f_N(t/p) = f_{N-1}(t)/2, so truncation enters here; rounding t/p moves the
    # argument by one ulp, which the Holder modulus turns into up to 10 ulp^alpha
    rounding = 10 * (2.0**-53) ** cf.alpha
    assert cf(t / p) == pytest.approx(cf(t) / 2, abs=cf.error_bound + rounding)


@settings(max_examples=50, deadline=None)
@given(p=params, t=st.floats(0, 1), s=st.floats(0, 1))
def test_holder_bound(p, t, s):
    cf = build_cantor_function(p, 20)
    assert abs(cf(t) - cf(s)) <= 10 * abs(t - s) ** cf.alpha + 1e-12


def test_measure():
    mu = derivative_measure(build_cantor_function(3, 10))
    assert mu.mass(0, 1 / 3) == pytest.approx(0.5, abs=1e-12)
    assert mu.mass(0, 1) == 1.0
    for n in (1, 3, 6):
        iv = mu.intervals(n)
        np.testing.assert_allclose(mu.mass(iv[:, 0], iv[:, 1]), 2.0**-n, atol=1e-12)


@pytest.mark.parametrize("p, alpha", [(3, math.log(2) / math.log(3)), (4, 0.5)])
def test_ahlfors_fit(p, alpha):
    cf = build_cantor_function(p, 20)
    mu = derivative_measure(cf)
    centers = mu.sample_support(200, np.random.default_rng(0))
    fit = ahlfors_exponent_fit(mu, default_radii(cf), centers)
    assert abs(fit.alpha_hat - alpha) < 0.02
    assert fit.c_lo >= (2 * p) ** (-cf.alpha)


def test_ahlfors_fit_rejects_bad_input():
    cf = build_cantor_function(3, 12)
    mu = derivative_measure(cf)
    with pytest.raises(InsufficientData):
        ahlfors_exponent_fit(mu, [0.1], [0.0, 1.0])
    with pytest.raises(InvalidParameter):
        ahlfors_exponent_fit(mu, [0.5] * 8, [0.0])


def test_gap_list():
    gaps = gap_list(build_cantor_function(3, 2))
    np.testing.assert_allclose(gaps, [[1 / 3, 2 / 3], [1 / 9, 2 / 9], [7 / 9, 8 / 9]], atol=1e-15)
    for p in (2.5, 3.0, 5.0):
        cf = build_cantor_function(p, 8)
        g = gap_list(cf)
        assert len(g) == 2**8 - 1
        assert np.sum(g[:, 1] - g[:, 0]) == pytest.approx(1 - (2 / p) ** 8, rel=1e-12)


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
def test_self_similar_integral_matches_piecewise_integration(p):
    # G(eps) = int_0^1 exp(i pi eps f(t)) dt for the limit function
    for eps in (1.0, 0.5, 0.125):
        expected = oracles.cantor_phase_integral(p, eps, 16)
        assert self_similar_integral(p, eps) == pytest.approx(expected, abs=2.0**-14)


def test_domain_geometry():
    cf = build_cantor_function(3, 10)
    b = build_cantor_boundary(cf)
    assert abs(b.end[0]) < 1e-14
    assert b.gap_length + (2 / 3) ** 10 == pytest.approx(1.0, abs=1e-14)
    assert (2 / 3) ** 10 * 0.999 < b.chord_length <= (2 / 3) ** 10
    gaps = b.edges[b.is_gap]
    top = np.argmax(np.hypot(*gaps.T))
    # the central gap has value 1/2, so it points straight up with length 1/3
    np.testing.assert_allclose(gaps[top], [0, 1 / 3], atol=1e-15)
    dom = build_cantor_domain(cf)
    assert dom.is_centrally_symmetric()
    assert len(dom) == 2 * (2 * 2**10 - 1)


def test_domain_endpoint_matches_direct_integral():
    b = build_cantor_boundary(build_cantor_function(4, 6))
    g = oracles.cantor_phase_integral(4.0, 1.0, 16)
    np.testing.assert_allclose(b.end, [g.real, g.imag], atol=2.0**-14)


def test_domain_depth_limit():
    with pytest.raises(InvalidParameter):
        build_cantor_domain(build_cantor_function(3, 25))
