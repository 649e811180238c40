"""Set functionals T used as constraints: measure, perimeter, moment of
inertia and their products, with homogeneity degree, diameter-bound
constants and the isoperimetric constant T*."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analytic
from .analytic import AnalyticBody
from .errors import HypothesisViolated, UnknownFunctional
from .geometry import (
    ConvexBody,
    clip,
    hausdorff_distance,
    make_body,
    nested,
    random_body,
    rotate,
    scale,
    translate,
)

DIM = 2


@dataclass(frozen=True)
class SetFunctional:
    """A constraint functional T with T(alpha body) = alpha^tau T(body).

    ``diameter_constants`` is (K, t) such that
    diam <= K T^t |body|^((1 - t tau)/m) on convex bodies.
    """

    name: str
    tau: float
    evaluator: Callable[[object], float] = field(compare=False, repr=False)
    diameter_constants: tuple[float, float] | None = None
    extremal_body: AnalyticBody | None = None
    dim: int = DIM

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("homogeneity degree must be positive")
        if self.diameter_constants is not None:
            _, t = self.diameter_constants
            # t = 1/tau is allowed: the planar perimeter bound sits exactly there
            if t < 1.0 / self.tau - 1e-12:
                raise ValueError("diameter exponent t must satisfy t >= 1/tau")

    def __call__(self, body) -> float:
        return float(self.evaluator(body))


def _measure(body) -> float:
    return body.measure


def _perimeter(body) -> float:
    return body.perimeter


def _moment(body) -> float:
    return body.moment


def builtin(name: str, dim: int = DIM) -> SetFunctional:
    """``measure``, ``perimeter`` or ``moment`` in dimension ``dim``."""
    analytic.constants(dim)  # validates dim
    unit_ball = analytic.ball_of_measure(dim, 1.0)
    if name == "measure":
        return SetFunctional("measure", float(dim), _measure, None, None, dim)
    if name == "perimeter":
        om_lower = analytic.unit_ball_volume(dim - 1)
        k = dim ** (2 - dim) / om_lower
        return SetFunctional("perimeter", float(dim - 1), _perimeter, (k, float(dim - 1)), unit_ball, dim)
    if name == "moment":
        k = 4.0 * math.sqrt(dim * (dim + 1) ** 2 * (dim + 2))
        return SetFunctional("moment", float(dim + 2), _moment, (k, 0.5), unit_ball, dim)
    raise UnknownFunctional(name)


def product(a: SetFunctional, b: SetFunctional) -> SetFunctional:
    """Pointwise product; degrees add, diameter constants combine as
    t = t1 t2/(t1 + t2), K = max(K1, K2) when both are present and the
    extremal bodies coincide."""
    if a.dim != b.dim:
        raise ValueError("functionals live in different dimensions")
    consts = None
    extremal = None
    if a.extremal_body is not None and a.extremal_body == b.extremal_body:
        extremal = a.extremal_body
    if a.diameter_constants and b.diameter_constants and extremal is not None:
        (k1, t1), (k2, t2) = a.diameter_constants, b.diameter_constants
        consts = (max(k1, k2), t1 * t2 / (t1 + t2))
    fa, fb = a.evaluator, b.evaluator
    return SetFunctional(f"{a.name}*{b.name}", a.tau + b.tau, lambda body: fa(body) * fb(body), consts, extremal, a.dim)


def parse(spec: str, dim: int = DIM) -> SetFunctional:
    """Functional from a CLI string such as ``perimeter*moment``."""
    parts = [p.strip() for p in spec.split("*") if p.strip()]
    if not parts:
        raise UnknownFunctional(spec)
    f = builtin(parts[0], dim)
    for p in parts[1:]:
        f = product(f, builtin(p, dim))
    return f


@dataclass(frozen=True)
class FunctionalConstants:
    t_star: float
    attained_by: str
    estimate_only: bool = False


def t_star(f: SetFunctional, dim: int | None = None, estimate: Callable[[SetFunctional], float] | None = None) -> FunctionalConstants:
    """inf T over convex bodies of unit measure.

    Closed form when the extremal body is known; otherwise ``estimate`` (a
    numerical minimiser, see ``variational.estimate_t_star``) supplies an
    upper-biased value flagged as an estimate.
    """
    dim = f.dim if dim is None else dim
    if f.name == "measure":
        return FunctionalConstants(1.0, "any body of unit measure")
    if f.extremal_body is not None:
        return FunctionalConstants(f(f.extremal_body), f"ball of unit measure in dimension {dim}")
    if estimate is None:
        from .variational import estimate_t_star

        estimate = estimate_t_star
    return FunctionalConstants(float(estimate(f)), "numerical minimiser", estimate_only=True)


# -- hypothesis checks -------------------------------------------------------

def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def random_isometry(rng: np.random.Generator, body: ConvexBody) -> ConvexBody:
    return translate(rotate(body, float(rng.uniform(0, 2 * math.pi))), rng.uniform(-5, 5, size=2))


def nested_pair(rng: np.random.Generator, body: ConvexBody) -> ConvexBody:
    """A convex body inside ``body``: a random half-plane cut, or a shrunk
    copy about an interior point."""
    if rng.random() < 0.5:
        ang = rng.uniform(0, 2 * math.pi)
        nrm = np.array([math.cos(ang), math.sin(ang)])
        h = body.support(nrm[None])[0]
        lo = -body.support(-nrm[None])[0]
        return clip(body, nrm, lo + rng.uniform(0.3, 0.95) * (h - lo))
    c = body.incenter
    return make_body(c + rng.uniform(0.3, 0.95) * (body.vertices - c))


@dataclass
class HypothesisReport:
    functional: str
    samples: int
    worst_slack: dict[str, float]
    violations: list[tuple[str, int, float]]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_hypotheses(f: SetFunctional, samples: int, seed: int, t_star_value: float | None = None, tol: float = 1e-9) -> HypothesisReport:
    """Randomised test of isometry invariance, homogeneity, monotonicity,
    positivity, the diameter bound and T(body)/|body|^(tau/m) >= T*.

    Slacks are relative where a scale is natural; violations are recorded,
    never raised.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    m = f.dim
    if t_star_value is None and (f.extremal_body is not None or f.name == "measure"):
        t_star_value = t_star(f).t_star
    worst: dict[str, float] = {}
    viol: list[tuple[str, int, float]] = []

    def record(key: str, i: int, slack: float, allowed: float = -tol):
        worst[key] = min(worst.get(key, math.inf), slack)
        if slack < allowed:
            viol.append((key, i, slack))

    for i in range(samples):
        body = random_body(rng)
        val = f(body)
        worst["positivity"] = min(worst.get("positivity", math.inf), val)
        if not val > 0:
            viol.append(("positivity", i, val))
        iso = random_isometry(rng, body)
        record("isometry", i, tol - _rel(f(iso), val), allowed=0.0)
        alpha = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
        record("homogeneity", i, tol - _rel(f(scale(body, alpha)), alpha**f.tau * val), allowed=0.0)
        inner = nested_pair(rng, body)
        if nested(inner, body):
            record("monotonicity", i, (val - f(inner)) / val)
        if f.diameter_constants is not None:
            k, t = f.diameter_constants
            rhs = k * val**t * body.measure ** ((1 - t * f.tau) / m)
            record("diameter_bound", i, (rhs - body.diameter) / rhs)
        if t_star_value is not None:
            lhs = val / body.measure ** (f.tau / m)
            record("t_star_bound", i, (lhs - t_star_value) / t_star_value)
    return HypothesisReport(f.name, samples, worst, viol)


def hausdorff_perturbation_bound(f: SetFunctional, a: ConvexBody, b: ConvexBody):
    """Certificate for |T(a) - T(b)| <= 2 tau 3^tau eps / rho(a) T(a),
    eps = d_H(a, b) <= rho(a)/2."""
    from .inequalities import certificate

    eps = hausdorff_distance(a, b)
    rho = a.inradius
    if eps > rho / 2.0 * (1 + 1e-12):
        raise HypothesisViolated(f"Hausdorff distance {eps:.4g} exceeds half the inradius {rho / 2:.4g}")
    ta = f(a)
    lhs = abs(ta - f(b))
    rhs = 2.0 * f.tau * 3.0**f.tau * eps / rho * ta
    return certificate("eqa151", lhs, rhs, (a, b, f.name), tolerance=1e-9 * max(ta, 1.0), label=f.name)
