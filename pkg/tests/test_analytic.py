from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from eigenshape import analytic
from eigenshape.errors import DegenerateInput, UnsupportedDimension


def test_dimension_constants():
    c2 = analytic.constants(2)
    assert c2.omega == pytest.approx(math.pi)
    assert c2.weyl == pytest.approx(4 * math.pi)
    assert analytic.constants(1).omega == pytest.approx(2.0)
    assert analytic.constants(3).omega == pytest.approx(4 * math.pi / 3)
    for bad in (0, 11, 2.5):
        with pytest.raises(UnsupportedDimension):
            analytic.constants(bad)


def test_ball_functionals_unit_measure():
    d = analytic.ball_of_measure(2, 1.0)
    m, p, j = analytic.functionals(d)
    assert m == pytest.approx(1.0)
    assert p == pytest.approx(2 * math.sqrt(math.pi))
    assert j == pytest.approx(1 / (2 * math.pi))


def test_cube_functionals():
    assert analytic.cube(2, 0.25).perimeter == pytest.approx(1.0)
    assert analytic.functionals(analytic.cube(3, 1.0)) == pytest.approx((1.0, 6.0, 0.25))
    assert analytic.cube_side_unit_perimeter(2) == pytest.approx(0.25)
    assert analytic.cube_side_unit_perimeter(3) == pytest.approx(6**-0.5)


def test_invalid_bodies():
    with pytest.raises(DegenerateInput):
        analytic.ball(2, -1.0)
    with pytest.raises(DegenerateInput):
        analytic.AnalyticBody.from_dict({"type": "simplex"})


def test_json_schemas_round_trip():
    for data in ({"type": "ball", "dim": 2, "radius": 1.0}, {"type": "cube", "dim": 3, "side": 0.25}, {"type": "rectangle", "sides": [1.0, 2.0]}):
        assert analytic.AnalyticBody.from_dict(data).to_dict() == data


def test_bessel_zeros_against_scipy():
    for n in range(6):
        ours = [analytic.bessel_zero(n, s) for s in range(1, 6)]
        np.testing.assert_allclose(ours, special.jn_zeros(n, 5), rtol=0, atol=1e-11)


def test_disc_spectrum_against_scipy_table():
    count = 300
    ours = analytic.ball_eigenvalues(2, 1.0, count)
    zeros = []
    for n in range(60):
        for z in special.jn_zeros(n, 30):
            zeros += [z] * (1 if n == 0 else 2)
    oracle = np.sort(np.array(zeros) ** 2)[:count]
    np.testing.assert_allclose(ours, oracle, rtol=1e-12)


def test_ball3_spectrum_against_spherical_bessel():
    vals = analytic.ball_eigenvalues(3, 1.0, 30)
    # j_0 zeros are s pi; j_1 zeros solve tan x = x
    assert vals[0] == pytest.approx(math.pi**2, rel=1e-12)
    z11 = 4.493409457909064
    assert vals[1:4] == pytest.approx([z11**2] * 3, rel=1e-10)
    for v in vals:
        z = math.sqrt(v)
        ells = [ell for ell in range(8) if abs(special.spherical_jn(ell, z)) < 1e-9]
        assert ells


def test_disc_examples():
    r = 1 / math.sqrt(math.pi)
    assert analytic.ball_eigenvalues(2, r, 1)[0] == pytest.approx(math.pi * 2.404825557695773**2, rel=1e-12)
    v = analytic.ball_eigenvalues(2, 1.0, 3)
    assert v[1] == v[2] == pytest.approx(3.831705970207512**2, rel=1e-12)
    np.testing.assert_allclose(analytic.ball_eigenvalues(2, 2.0, 50), np.array(analytic.ball_eigenvalues(2, 1.0, 50)) / 4, rtol=1e-12)


def test_ball_spectrum_limits():
    with pytest.raises(UnsupportedDimension):
        analytic.ball_eigenvalues(4, 1.0, 3)
    with pytest.raises(ValueError):
        analytic.ball_eigenvalues(2, 1.0, 10001)


def brute_box(sides, count, kmax=60):
    grids = np.meshgrid(*[np.arange(1, kmax + 1)] * len(sides), indexing="ij")
    lam = sum((g / a) ** 2 for g, a in zip(grids, sides)) * math.pi**2
    return np.sort(lam.ravel())[:count]


def test_box_spectrum_examples():
    assert analytic.box_eigenvalues([1, 1], 4) == pytest.approx([2 * math.pi**2, 5 * math.pi**2, 5 * math.pi**2, 8 * math.pi**2])
    assert analytic.box_eigenvalues([1, 2], 1)[0] == pytest.approx(1.25 * math.pi**2)


@given(st.lists(st.floats(min_value=0.3, max_value=3.0), min_size=1, max_size=3), st.integers(1, 80))
def test_box_spectrum_matches_brute_force(sides, count):
    kmax = {1: 200, 2: 60, 3: 25}[len(sides)]
    np.testing.assert_allclose(analytic.box_eigenvalues(sides, count), brute_box(sides, count, kmax), rtol=1e-12)


def test_spectra_nondecreasing_and_scaling():
    for vals in (analytic.ball_eigenvalues(2, 1.0, 500), analytic.ball_eigenvalues(3, 1.0, 500), analytic.box_eigenvalues([1.0, 1.7], 500)):
        assert np.all(np.diff(vals) >= 0)
    a = analytic.box_eigenvalues([1.0, 1.7], 100)
    b = analytic.box_eigenvalues([3.0, 5.1], 100)
    np.testing.assert_allclose(np.array(b) * 9, a, rtol=1e-12)


def test_weyl_examples():
    assert analytic.weyl_prediction(2, 1.0, 1000) == pytest.approx(4000 * math.pi)
    disc = analytic.ball_eigenvalues(2, 1 / math.sqrt(math.pi), 1000)
    assert abs(disc[-1] / analytic.weyl_prediction(2, 1.0, 1000) - 1) < 0.05
    assert analytic.weyl_prediction(2, 1.0, 1) < disc[0]


def test_li_yau_and_counting_on_analytic_spectra():
    for dim, body in ((2, analytic.ball_of_measure(2)), (3, analytic.ball_of_measure(3)), (2, analytic.cube(2, 0.25)), (3, analytic.cube(3, 6**-0.5))):
        vals = np.array(body.eigenvalues(1000))
        k = np.arange(1, 1001)
        cm = analytic.constants(dim).weyl
        assert np.all(vals >= dim / (dim + 2) * cm * (k / body.measure) ** (2 / dim))
        if body.kind == "cube":
            a = body.params[0]
            assert np.all(vals <= 4 * math.pi**2 * dim / a**2 * k ** (2 / dim))


def test_moment_bound_equality_for_balls():
    for dim in (2, 3, 5):
        b = analytic.ball(dim, 0.7)
        om = analytic.unit_ball_volume(dim)
        bound = dim / (dim + 2) * om ** (-2 / dim) * b.measure ** ((dim + 2) / dim)
        assert b.moment == pytest.approx(bound, rel=1e-12)
        c = analytic.cube(dim, 0.7)
        assert c.moment > dim / (dim + 2) * om ** (-2 / dim) * c.measure ** ((dim + 2) / dim)
