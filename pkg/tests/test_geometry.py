from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eigenshape import geometry as g
from eigenshape.errors import DegenerateInput, NonPositiveScale


def seeded_body(seed: int) -> g.ConvexBody:
    return g.random_body(np.random.default_rng(seed))


seeds = st.integers(min_value=0, max_value=2**31)


def test_make_body_canonical_order():
    pts = [(0.5, 0.5), (-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.1, 0.0)]
    body = g.make_body(pts)
    assert len(body) == 4
    np.testing.assert_allclose(body.vertices[0], [-0.5, -0.5])
    assert g._shoelace(body.vertices) > 0


def test_collinear_points_rejected():
    with pytest.raises(DegenerateInput):
        g.make_body([(0, 0), (1, 1), (2, 2)])


def test_circle_points_hull_area_below_pi(rng):
    t = np.sort(rng.uniform(0, 2 * math.pi, 100))
    body = g.make_body(np.column_stack([np.cos(t), np.sin(t)]))
    assert len(body) == 100
    # shoelace on the sorted points is an independent computation of the same area
    x, y = np.cos(t), np.sin(t)
    direct = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    assert body.measure == pytest.approx(direct, rel=1e-12)
    assert body.measure < math.pi


def test_unit_square_summary():
    s = g.unit_square().summary()
    assert s.measure == pytest.approx(1.0)
    assert s.perimeter == pytest.approx(4.0)
    assert s.moment == pytest.approx(1.0 / 6.0)
    assert s.inradius == pytest.approx(0.5)
    assert s.diameter == pytest.approx(math.sqrt(2.0))


def test_many_sided_polygon_moment_tends_to_disc_value():
    moments = [g.regular_polygon(n).moment for n in (16, 64, 256)]
    assert moments[0] > moments[1] > moments[2] > 1.0 / (2.0 * math.pi)
    assert moments[2] == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-3)


def test_translation_only_moves_centroid():
    body = seeded_body(1)
    moved = g.translate(body, (5.0, -3.0))
    a, b = body.summary(), moved.summary()
    for name in ("measure", "perimeter", "moment", "inradius", "diameter"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12)
    np.testing.assert_allclose(np.array(b.centroid) - np.array(a.centroid), [5.0, -3.0], atol=1e-12)


def test_scale_square():
    sq = g.scale(g.unit_square(), 2.0)
    assert (sq.measure, sq.perimeter, sq.moment) == pytest.approx((4.0, 8.0, 16.0 / 6.0))
    assert g.hausdorff_distance(g.scale(g.unit_square(), 1.0), g.unit_square()) == 0.0
    with pytest.raises(NonPositiveScale):
        g.scale(sq, 0.0)


def test_hausdorff_examples():
    sq = g.unit_square()
    assert g.hausdorff_distance(sq, g.scale(sq, 1.1)) == pytest.approx(0.05 * math.sqrt(2.0), rel=1e-12)
    assert g.hausdorff_distance(sq, sq) == 0.0
    assert g.hausdorff_distance(sq, g.translate(sq, (0.3, 0.4))) == pytest.approx(0.5, rel=1e-12)


def test_hausdorff_matches_dense_sampling():
    a, b = seeded_body(3), g.translate(seeded_body(4), (0.2, 0.1))
    # oracle: distances from densely sampled boundary points
    def boundary(body, n=4000):
        v = body.vertices
        w = np.roll(v, -1, axis=0)
        t = np.linspace(0, 1, n // len(v), endpoint=False)
        return np.vstack([v[i] + t[:, None] * (w[i] - v[i]) for i in range(len(v))])

    pa, pb = boundary(a), boundary(b)
    d = np.sqrt(((pa[:, None] - pb[None]) ** 2).sum(-1))
    # for convex bodies the Hausdorff distance is attained on boundaries
    oracle = max(g.distance_to_body(b, pa).max(), g.distance_to_body(a, pb).max())
    assert g.hausdorff_distance(a, b) == pytest.approx(oracle, rel=1e-9)
    assert g.hausdorff_distance(a, b) <= max(d.min(1).max(), d.min(0).max()) + 1e-12


def test_epsilon_neighborhood_square():
    sq = g.unit_square()
    nb = g.epsilon_neighborhood(sq, 0.1, 8)
    assert len(nb) == 36
    assert 1.4 < nb.measure <= 1.4 + math.pi * 0.01
    assert g.nested(sq, g.epsilon_neighborhood(sq, 0.05, 8))
    assert g.hausdorff_distance(sq, g.epsilon_neighborhood(sq, 1e-6, 8)) < 2e-6


def test_epsilon_neighborhood_within_true_neighborhood():
    body = seeded_body(5)
    nb = g.epsilon_neighborhood(body, 0.07, 6)
    assert g.nested(body, nb)
    assert g.distance_to_body(body, nb.vertices).max() <= 0.07 + 1e-12


def test_contains_and_nested():
    body = seeded_body(6)
    assert g.contains(body, body.centroid)
    sq = g.unit_square()
    assert g.nested(sq, g.scale(sq, 1.1))
    assert not g.nested(sq, g.translate(sq, (3.0, 0.0)))


def test_moment_matches_monte_carlo_double_integral(rng):
    for i in range(20):
        body = seeded_body(100 + i)
        lo, hi = body.vertices.min(0), body.vertices.max(0)
        pts = rng.uniform(lo, hi, size=(60000, 2))
        p = pts[(pts @ body.normals.T - body.offsets[None]).max(1) < 0]
        half = len(p) // 2
        x, y = p[:half], p[half : 2 * half]
        # (1/(2|A|)) double integral of |x-y|^2 equals (|A|/2) E|X-Y|^2
        samples = 0.5 * body.measure * ((x - y) ** 2).sum(1)
        se = samples.std(ddof=1) / math.sqrt(len(samples))
        assert abs(samples.mean() - body.moment) <= 3 * se


@given(seeds, st.floats(min_value=0.1, max_value=10.0))
def test_homogeneity(seed, alpha):
    a = seeded_body(seed)
    b = g.scale(a, alpha)
    for name, p in (("measure", 2), ("perimeter", 1), ("moment", 4), ("inradius", 1), ("diameter", 1)):
        assert getattr(b, name) == pytest.approx(alpha**p * getattr(a, name), rel=1e-9)


@given(seeds, st.floats(min_value=0, max_value=2 * math.pi), st.floats(-10, 10), st.floats(-10, 10))
def test_isometry_invariance(seed, angle, dx, dy):
    a = seeded_body(seed)
    b = g.translate(g.rotate(a, angle), (dx, dy))
    for name in ("measure", "perimeter", "moment", "inradius", "diameter"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-9)


@given(seeds)
def test_monotonicity_on_nested_pairs(seed):
    from eigenshape.functionals import nested_pair

    rng = np.random.default_rng(seed)
    outer = g.random_body(rng)
    inner = nested_pair(rng, outer)
    assert g.nested(inner, outer)
    tol = 1e-12
    assert inner.measure <= outer.measure + tol
    assert inner.perimeter <= outer.perimeter + tol
    assert inner.diameter <= outer.diameter + tol
    assert inner.inradius <= outer.inradius + tol
    # moment about the own centroid is the minimum of the second moment over
    # all points, which makes it monotone too
    assert inner.moment <= outer.moment * (1 + 1e-12)


@given(seeds)
def test_hausdorff_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (g.translate(g.random_body(rng), rng.uniform(-1, 1, 2)) for _ in range(3))
    dab = g.hausdorff_distance(a, b)
    assert dab == g.hausdorff_distance(b, a)
    assert g.hausdorff_distance(a, c) <= dab + g.hausdorff_distance(b, c) + 1e-12


@given(seeds)
def test_summary_invariants(seed):
    s = seeded_body(seed).summary()
    assert s.measure > 0 and s.perimeter > 0
    assert 0 < s.inradius <= s.diameter / 2
    assert s.measure <= s.inradius * s.perimeter
    assert s.perimeter**2 >= 4 * math.pi * s.measure


def test_random_bodies_are_seed_deterministic():
    a = g.random_bodies(9, 5)
    b = g.random_bodies(9, 5)
    assert [x.digest() for x in a] == [y.digest() for y in b]
    for body in a:
        assert body.measure == pytest.approx(1.0)
        assert body.inradius >= 0.05 * body.diameter


def test_json_round_trip():
    body = seeded_body(8)
    again = g.ConvexBody.from_dict(body.to_dict())
    np.testing.assert_array_equal(again.vertices, body.vertices)


def test_union_additivity_and_gap_check():
    sq = g.unit_square()
    u = g.layout_row([sq, g.scale(sq, 0.5)], 0.2)
    assert u.measure == pytest.approx(1.25)
    assert u.perimeter == pytest.approx(6.0)
    with pytest.raises(DegenerateInput):
        g.BodyUnion((sq, g.translate(sq, (0.5, 0.0))))


def test_best_fit_disc_of_regular_polygon():
    body = g.regular_polygon(128, center=(0.3, -0.2))
    center, r, dist = g.best_fit_disc(body)
    np.testing.assert_allclose(center, [0.3, -0.2], atol=1e-6)
    assert dist < 1e-3
    assert g.aligned_hausdorff(body, g.translate(body, (1.0, 2.0))) < 1e-6
