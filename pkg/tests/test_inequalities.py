from __future__ import annotations

import math

import numpy as np
import pytest

from eigenshape import analytic, geometry as g, inequalities as iq
from eigenshape.errors import HypothesisViolated, MissingEstimate
from eigenshape.spectral import SolverConfig


def by_id(certs):
    return {c.key: c for c in certs}


def test_certificate_conventions():
    c = iq.certificate("eq15c", 1.0, 3.0, ("x",))
    assert c.slack == 2.0 and c.passed
    assert not iq.certificate("eq15c", 3.0, 1.0, ("x",)).passed
    with pytest.raises(KeyError):
        iq.certificate("eq999", 0, 1, ())
    assert iq.certificate("eq15c", 1.0, 3.0, ("x",)).inputs_digest == c.inputs_digest


def test_lemma31_unit_square():
    c = by_id(iq.check_lemma31(g.unit_square()))
    assert c["eq15a"].rhs == pytest.approx(4.0)
    assert c["eq15b"].lhs == pytest.approx(1 / (math.pi * math.sqrt(2)))
    assert c["eq15c"].lhs == pytest.approx(0.25)
    assert c["eq15d"].rhs == pytest.approx(2 * math.pi * math.sqrt(2) / 2)
    assert all(x.passed for x in c.values())


def test_eq15c_tight_for_slivers_not_discs():
    # for a disc rho = 2|A|/P, so the slack is rho/2; slivers approach equality
    disc = by_id(iq.check_lemma31(g.regular_polygon(256)))["eq15c"]
    assert disc.slack == pytest.approx(disc.rhs / 2, rel=1e-3)
    thin = by_id(iq.check_lemma31(g.rectangle(1.0, 0.01)))
    assert thin["eq15c"].slack / thin["eq15c"].rhs < 0.02
    assert all(x.passed for x in thin.values())
    assert thin["eq15a"].slack > 1.0


def test_near_equality_trend_for_disc_polygons():
    slacks39 = [iq.check_moment_isoperimetric(g.regular_polygon(n)).slack for n in (16, 64, 256)]
    assert slacks39[0] > slacks39[1] > slacks39[2] >= 0
    assert slacks39[2] < 1e-3
    # regular polygons are tangential: rho = 2|A|/P, so eq15c keeps relative slack 1/2
    for n in (16, 64, 256):
        c = by_id(iq.check_lemma31(g.regular_polygon(n)))["eq15c"]
        assert c.slack / c.rhs == pytest.approx(0.5, rel=1e-12)


def test_moment_isoperimetric_square_and_scaling():
    c = iq.check_moment_isoperimetric(g.unit_square())
    assert c.lhs == pytest.approx(1 / (2 * math.pi))
    assert c.rhs == pytest.approx(1 / 6)
    for alpha in (0.1, 7.0):
        assert iq.check_moment_isoperimetric(g.scale(g.unit_square(), alpha)).slack > 0


def test_diameter_bounds():
    c = by_id(iq.check_diameter_bounds(g.unit_square()))
    assert c["eq37"].rhs == pytest.approx(2.0)
    assert c["eq41"].rhs == pytest.approx(13.856, abs=1e-3)
    slacks = [by_id(iq.check_diameter_bounds(g.rectangle(1.0, w)))["eq37"].slack for w in (0.5, 0.1, 0.01)]
    assert slacks[0] > slacks[1] > slacks[2] > 0


def test_lemma32_square_pair():
    sq = g.unit_square()
    certs = by_id(iq.check_lemma32(sq, g.scale(sq, 1.1), 1, spectra=([2 * math.pi**2], [2 * math.pi**2 / 1.21])))
    lam = certs["eqa152:k=1"]
    assert lam.lhs == pytest.approx(3.426, abs=1e-3)
    assert lam.rhs == pytest.approx(44.66, abs=1e-2)
    assert lam.tolerance_used == pytest.approx(2 * 0.01 * 2 * math.pi**2)
    same = iq.check_lemma32(sq, sq, 1, spectra=([1.0], [1.0]))
    assert all(c.lhs == 0 for c in same)
    with pytest.raises(HypothesisViolated):
        iq.check_lemma32(sq, g.scale(sq, 3.0), 1)


def test_lemma32_random_pair_near_limit():
    rng = np.random.default_rng(5)
    a = g.random_body(rng)
    b = g.scale(a, 1.0 + 0.49 * a.inradius / max(np.linalg.norm(a.vertices - a.centroid, axis=1)))
    eps = g.hausdorff_distance(a, b)
    assert 0.45 * a.inradius < eps <= 0.5 * a.inradius
    certs = iq.check_lemma32(a, b, 2, SolverConfig(resolution=48, k=2))
    assert all(c.passed for c in certs)


def test_li_yau_examples():
    disc = analytic.ball_eigenvalues(2, 1 / math.sqrt(math.pi), 1)
    c = iq.check_li_yau(disc, 1.0, 2)[0]
    assert c.lhs == pytest.approx(2 * math.pi)
    assert c.slack == pytest.approx(math.pi * 2.404825557695773**2 - 2 * math.pi)
    square = iq.check_li_yau([2 * math.pi**2], 1.0)
    assert square[0].passed
    cube = analytic.cube(2, 1.0).eigenvalues(1000)
    certs = iq.check_li_yau(cube, 1.0)
    assert len(certs) == 1000 and all(x.passed for x in certs)
    assert iq.min_slack(certs).slack > 0
    with pytest.raises(ValueError):
        iq.check_li_yau([], 1.0)


def test_convex_lambda1():
    assert iq.check_convex_lambda1(g.unit_square(), [2 * math.pi**2]).passed
    thin = g.rectangle(1.0, 0.01)
    lam = analytic.box_eigenvalues([1.0, 0.01], 1)
    c = iq.check_convex_lambda1(thin, lam)
    assert c.passed and c.rhs / c.lhs < math.pi**2 * 1.001
    for alpha in (0.2, 5.0):
        s = g.scale(g.unit_square(), alpha)
        assert iq.check_convex_lambda1(s, [2 * math.pi**2 / alpha**2]).slack > 0


def test_cube_counting():
    c = iq.check_cube_counting(2, 1)
    assert c.lhs == pytest.approx(32 * math.pi**2)
    assert c.rhs == pytest.approx(128 * math.pi**2)
    assert iq.check_cube_counting(2, 100).passed
    assert iq.check_cube_counting(3, 1).passed
    assert all(x.passed for d in (2, 3) for x in iq.check_cube_counting_all(d, 1000))
    with pytest.raises(ValueError):
        iq.check_cube_counting(4, 1)


def test_thresholds_closed_forms():
    k1 = by_id(iq.check_thresholds(2, 2 * math.sqrt(math.pi), 1 / (4 * math.pi), 1))
    assert k1["thm12iv:k=1"].slack == pytest.approx(0, abs=1e-12)
    assert k1["thm12v:k=1"].slack == pytest.approx(0, abs=1e-12)
    assert k1["thm12vi:k=1"].rhs == pytest.approx(1 / (4 * math.pi))
    assert k1["thm12vi:k=1"].lhs == pytest.approx(1 / (64 * math.pi))
    assert all(c.passed for c in k1.values())
    with pytest.raises(MissingEstimate):
        iq.check_thresholds(2, None, 0.1)


def test_suite_smoke_and_determinism(tmp_path):
    cfg = SolverConfig(resolution=32, k=2)
    a = iq.run_suite(7, 1, cfg, cube_kmax=3)
    ids = {c.id for _, _, c in a.rows}
    assert ids >= {"eq15a", "eq15b", "eq15c", "eq15d", "eq8", "eq19", "eq37", "eq39", "eq41", "eqa151", "eqa152", "rho_lambda1", "eq63"}
    assert not a.violations
    b = iq.run_suite(7, 1, cfg, cube_kmax=3)
    a.write_csv(tmp_path / "a.csv")
    b.write_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    header = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert header == "inequality_id,body_digest,lhs,rhs,slack,tolerance,pass"


def test_geometric_suite_has_no_violations():
    rep = iq.run_suite(3, 200, suite="geometry", cube_kmax=50)
    assert not rep.violations
    assert min(rep.min_slack().values()) >= -1e-9
