"""Balls, cubes and boxes in dimension m with closed-form functionals and
Dirichlet spectra.  These are the reference bodies every numerical result
is checked against."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateInput, UnsupportedDimension

MAX_DIM = 10


@dataclass(frozen=True)
class DimensionConstants:
    dim: int
    omega: float  # volume of the unit ball
    weyl: float  # C_m = 4 pi^2 omega_m^(-2/m)


def unit_ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


def constants(dim: int) -> DimensionConstants:
    if not (isinstance(dim, (int, np.integer)) and 1 <= dim <= MAX_DIM):
        raise UnsupportedDimension(f"dimension must be an integer in [1, {MAX_DIM}], got {dim!r}")
    om = unit_ball_volume(int(dim))
    return DimensionConstants(int(dim), om, 4.0 * math.pi**2 * om ** (-2.0 / dim))


@dataclass(frozen=True)
class AnalyticBody:
    """Ball (params = (radius,)), cube (params = (side,)) or box
    (params = side lengths, dim = len(params))."""

    kind: str
    dim: int
    params: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("ball", "cube", "rectangle"):
            raise DegenerateInput(f"unknown analytic body kind {self.kind!r}")
        if self.dim < 1:
            raise UnsupportedDimension("dimension must be >= 1")
        p = tuple(float(x) for x in self.params)
        if not p or any(not x > 0 for x in p):
            raise DegenerateInput("analytic body parameters must be positive")
        if self.kind == "rectangle" and len(p) != self.dim:
            raise DegenerateInput("a rectangle needs one side length per dimension")
        if self.kind != "rectangle" and len(p) != 1:
            raise DegenerateInput(f"a {self.kind} takes exactly one parameter")
        object.__setattr__(self, "params", p)

    @property
    def sides(self) -> tuple[float, ...]:
        if self.kind == "ball":
            raise AttributeError("balls have no sides")
        return self.params if self.kind == "rectangle" else self.params * self.dim

    @property
    def measure(self) -> float:
        if self.kind == "ball":
            return unit_ball_volume(self.dim) * self.params[0] ** self.dim
        return float(np.prod(self.sides))

    @property
    def perimeter(self) -> float:
        m = self.dim
        if self.kind == "ball":
            return m * unit_ball_volume(m) * self.params[0] ** (m - 1)
        s = np.array(self.sides)
        vol = float(np.prod(s))
        return float(2.0 * (vol / s).sum())

    @property
    def moment(self) -> float:
        m = self.dim
        if self.kind == "ball":
            r = self.params[0]
            return m * unit_ball_volume(m) * r ** (m + 2) / (m + 2)
        s = np.array(self.sides)
        return float(self.measure * (s**2).sum() / 12.0)

    @property
    def inradius(self) -> float:
        if self.kind == "ball":
            return self.params[0]
        return 0.5 * min(self.sides)

    @property
    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.params[0]
        return float(np.sqrt((np.array(self.sides) ** 2).sum()))

    def scaled(self, alpha: float) -> "AnalyticBody":
        return AnalyticBody(self.kind, self.dim, tuple(alpha * p for p in self.params))

    def eigenvalues(self, count: int) -> list[float]:
        if self.kind == "ball":
            return ball_eigenvalues(self.dim, self.params[0], count)
        return box_eigenvalues(self.sides, count)

    def to_dict(self) -> dict:
        if self.kind == "ball":
            return {"type": "ball", "dim": self.dim, "radius": self.params[0]}
        if self.kind == "cube":
            return {"type": "cube", "dim": self.dim, "side": self.params[0]}
        return {"type": "rectangle", "sides": list(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "AnalyticBody":
        kind = data.get("type")
        if kind == "ball":
            return cls("ball", int(data["dim"]), (float(data["radius"]),))
        if kind == "cube":
            return cls("cube", int(data["dim"]), (float(data["side"]),))
        if kind == "rectangle":
            sides = tuple(float(s) for s in data["sides"])
            return cls("rectangle", len(sides), sides)
        raise DegenerateInput(f"unknown analytic body type {kind!r}")


def ball(dim: int, radius: float) -> AnalyticBody:
    return AnalyticBody("ball", dim, (radius,))


def ball_of_measure(dim: int, measure: float = 1.0) -> AnalyticBody:
    return ball(dim, (measure / unit_ball_volume(dim)) ** (1.0 / dim))


def cube(dim: int, side: float) -> AnalyticBody:
    return AnalyticBody("cube", dim, (side,))


def box(sides) -> AnalyticBody:
    sides = tuple(sides)
    return AnalyticBody("rectangle", len(sides), sides)


def functionals(body: AnalyticBody) -> tuple[float, float, float]:
    return body.measure, body.perimeter, body.moment


# -- Bessel zeros ---------------------------------------------------------

def bessel_j(n: int, x: np.ndarray) -> np.ndarray:
    """J_n(x) for integer n >= 0 from the periodic integral
    J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt.

    The trapezoidal rule with M nodes is exact up to J_{M-n}(x), which is
    negligible once M exceeds n + x by a safety margin.
    """
    x = np.asarray(x, dtype=float)
    xmax = float(np.abs(x).max()) if x.size else 0.0
    m = int(n + xmax + 10.0 * max(xmax, 1.0) ** (1.0 / 3.0) + 40)
    t = 2.0 * math.pi * np.arange(m) / m
    out = np.empty_like(x)
    flat = x.ravel()
    res = out.ravel()
    chunk = max(1, 2_000_000 // m)
    for i in range(0, flat.size, chunk):
        xs = flat[i : i + chunk]
        res[i : i + chunk] = np.cos(n * t[None, :] - xs[:, None] * np.sin(t)[None, :]).mean(axis=1)
    return res.reshape(x.shape)


def spherical_bessel_j(order: int, x: np.ndarray) -> np.ndarray:
    """Spherical j_l(x) by upward recurrence; accurate for x >= l, which
    covers every zero since j_{l,1} > l + 1/2."""
    x = np.asarray(x, dtype=float)
    j0 = np.sin(x) / x
    if order == 0:
        return j0
    j1 = np.sin(x) / x**2 - np.cos(x) / x
    for ell in range(1, order):
        j0, j1 = j1, (2 * ell + 1) / x * j1 - j0
    return j1


def _bisect(f, lo: np.ndarray, hi: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    flo = f(lo)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _zeros_below(func, start: float, limit: float, step: float = 0.5) -> np.ndarray:
    if limit <= start:
        return np.empty(0)
    grid = np.arange(start, limit + step, step)
    vals = func(grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if idx.size == 0:
        return np.empty(0)
    z = _bisect(func, grid[idx], grid[idx + 1])
    return z[z < limit]


@lru_cache(maxsize=None)
def bessel_zeros_below(dim: int, limit: float) -> tuple[tuple[float, int], ...]:
    """All Dirichlet zeros below ``limit`` for the unit ball, as
    (zero, multiplicity) pairs.  dim 2 uses J_n, dim 3 spherical j_l."""
    out: list[tuple[float, int]] = []
    n = 0
    while n < limit:
        if dim == 2:
            zs = _zeros_below(lambda x, n=n: bessel_j(n, x), max(n, 0.25), limit)
            mult = 1 if n == 0 else 2
        else:
            zs = _zeros_below(lambda x, n=n: spherical_bessel_j(n, x), n + 0.5, limit)
            mult = 2 * n + 1
        if zs.size == 0 and n > 0:
            break
        out.extend((float(z), mult) for z in zs)
        n += 1
    out.sort()
    return tuple(out)


def bessel_zero(n: int, s: int) -> float:
    """s-th positive zero of J_n."""
    limit = n + math.pi * (s + 1) + 10.0
    zs = _zeros_below(lambda x: bessel_j(n, x), max(n, 0.25), limit)
    return float(zs[s - 1])


def ball_eigenvalues(dim: int, radius: float, count: int) -> list[float]:
    """First ``count`` Dirichlet eigenvalues of a disc (dim 2) or ball (dim 3)
    with multiplicity."""
    if dim not in (2, 3):
        raise UnsupportedDimension("ball spectra are available for dim 2 and 3 only")
    if count < 1 or count > 10000:
        raise ValueError("count must lie in [1, 10000]")
    # Weyl: N(z^2) ~ z^2/4 (disc), 2 z^3/(9 pi) (ball) for the unit ball
    if dim == 2:
        limit = 2.0 * math.sqrt(count) + 10.0
    else:
        limit = (4.5 * math.pi * count) ** (1.0 / 3.0) + 10.0
    while True:
        limit = round(limit, 6)
        table = bessel_zeros_below(dim, limit)
        vals = [z for z, mult in table for _ in range(mult)]
        if len(vals) >= count:
            break
        limit *= 1.25
    return [(z / radius) ** 2 for z in vals[:count]]


def box_eigenvalues(sides, count: int) -> list[float]:
    """Sorted spectrum pi^2 sum (k_i/a_i)^2 over k_i >= 1, first ``count``."""
    a = np.asarray(sides, dtype=float)
    if a.ndim != 1 or a.size < 1 or np.any(a <= 0):
        raise DegenerateInput("box sides must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    m = a.size
    om = unit_ball_volume(m)
    # Weyl estimate for the cutoff, doubled until enough lattice points fall below it
    lam = 4.0 * math.pi**2 * (count / (om * np.prod(a))) ** (2.0 / m) * 2.0 + (math.pi**2) * float((1.0 / a**2).sum())
    while True:
        kmax = np.floor(np.sqrt(lam) * a / math.pi).astype(int)
        if np.all(kmax >= 1):
            axes = [(np.arange(1, km + 1) / ai) ** 2 for km, ai in zip(kmax, a)]
            total = axes[0]
            for ax in axes[1:]:
                total = (total[:, None] + ax[None, :]).ravel()
                total = total[total * math.pi**2 <= lam]
            vals = np.sort(total[total * math.pi**2 <= lam]) * math.pi**2
            if vals.size >= count:
                return [float(v) for v in vals[:count]]
        lam *= 2.0


def weyl_prediction(dim: int, measure: float, k: int) -> float:
    """Leading Weyl term C_m (k/|D|)^(2/m)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return constants(dim).weyl * (k / measure) ** (2.0 / dim)


def cube_side_unit_perimeter(dim: int) -> float:
    """Side of the cube with unit surface area, (2m)^(-1/(m-1))."""
    return (2.0 * dim) ** (-1.0 / (dim - 1))
