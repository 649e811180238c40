"""Convex polygons in the plane: construction, functionals, metrics.

A :class:`ConvexBody` is stored as its vertex list in counterclockwise order,
starting at the lexicographically smallest vertex.  The polygon stands for
the open interior; the distinction plays no role for any functional here.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateInput, NonPositiveScale

MIN_AREA = 1e-14
VERTEX_MERGE = 1e-12
CONTAINS_TOL = 1e-12


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; collinear points are dropped.

    Returns the hull counterclockwise, starting from the lexicographically
    smallest point.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)  # lexsorted
    if len(pts) < 3:
        return pts
    scale = max(float(np.ptp(pts[:, 0])), float(np.ptp(pts[:, 1])), 1e-300)
    eps = 1e-13 * scale * scale

    def chain(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= eps:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _merge_close(v: np.ndarray) -> np.ndarray:
    keep = [0]
    for i in range(1, len(v)):
        if np.max(np.abs(v[i] - v[keep[-1]])) > VERTEX_MERGE:
            keep.append(i)
    if len(keep) > 1 and np.max(np.abs(v[keep[-1]] - v[keep[0]])) <= VERTEX_MERGE:
        keep.pop()
    return v[keep]


@dataclass(frozen=True)
class GeometricSummary:
    measure: float
    perimeter: float
    moment: float
    inradius: float
    diameter: float
    centroid: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "measure": self.measure,
            "perimeter": self.perimeter,
            "moment": self.moment,
            "inradius": self.inradius,
            "diameter": self.diameter,
            "centroid": list(self.centroid),
        }


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Open convex polygon given by its canonical vertex list.

    Use :func:`make_body` to build one from arbitrary points; the constructor
    only validates.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DegenerateInput("a convex body needs at least 3 planar vertices")
        if not np.all(np.isfinite(v)):
            raise DegenerateInput("non-finite vertex coordinates")
        if _shoelace(v) < MIN_AREA:
            raise DegenerateInput("polygon has (near) zero area or is clockwise")
        e = np.roll(v, -1, axis=0) - v
        if np.min(np.max(np.abs(e), axis=1)) <= VERTEX_MERGE:
            raise DegenerateInput("coincident vertices")
        turn = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(turn <= 0):
            raise DegenerateInput("vertices are not in strictly convex position")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"ConvexBody(n={len(self)}, measure={self.measure:.6g})"

    # -- edge data ---------------------------------------------------------
    @cached_property
    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(self.edges[:, 0], self.edges[:, 1])

    @cached_property
    def normals(self) -> np.ndarray:
        """Outward unit normals, one per edge (edge i runs v_i -> v_{i+1})."""
        e = self.edges / self.edge_lengths[:, None]
        return np.column_stack([e[:, 1], -e[:, 0]])

    @cached_property
    def offsets(self) -> np.ndarray:
        """Half-plane offsets b with the body = {x : normals @ x < b}."""
        return np.einsum("ij,ij->i", self.normals, self.vertices)

    # -- functionals -------------------------------------------------------
    @cached_property
    def measure(self) -> float:
        return _shoelace(self.vertices)

    @cached_property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    @cached_property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        c = ((v + w) * cr[:, None]).sum(axis=0) / (6.0 * self.measure)
        c.setflags(write=False)
        return c

    @cached_property
    def moment(self) -> float:
        """Second moment of area about the centroid, summed over triangles
        fanned from the centroid."""
        a = self.vertices - self.centroid
        b = np.roll(a, -1, axis=0)
        area = 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        sq = (a * a).sum(1) + (b * b).sum(1) + (a * b).sum(1)
        return float((area * sq).sum() / 6.0)

    @cached_property
    def _chebyshev(self) -> tuple[np.ndarray, float]:
        return chebyshev_center(self.normals, self.offsets)

    @property
    def incenter(self) -> np.ndarray:
        return self._chebyshev[0]

    @property
    def inradius(self) -> float:
        return self._chebyshev[1]

    @cached_property
    def diameter(self) -> float:
        v = self.vertices
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d * d).sum(-1).max()))

    def summary(self) -> GeometricSummary:
        c = self.centroid
        return GeometricSummary(
            measure=self.measure,
            perimeter=self.perimeter,
            moment=self.moment,
            inradius=self.inradius,
            diameter=self.diameter,
            centroid=(float(c[0]), float(c[1])),
        )

    def support(self, directions: np.ndarray) -> np.ndarray:
        """Support function h(u) = max_x x.u for rows u of ``directions``."""
        return (np.asarray(directions) @ self.vertices.T).max(axis=1)

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.vertices, dtype="<f8").tobytes()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {"type": "polygon", "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ConvexBody":
        if data.get("type") != "polygon":
            raise DegenerateInput(f"expected a polygon body, got type {data.get('type')!r}")
        return make_body(data["vertices"])


def chebyshev_center(normals: np.ndarray, offsets: np.ndarray) -> tuple[np.ndarray, float]:
    """Largest inscribed disc of {x : normals @ x <= offsets}.

    The LP optimum is polished by solving the active constraints exactly, so
    the radius is accurate to round-off rather than to solver tolerance.
    """
    n = len(offsets)
    b = np.asarray(offsets, dtype=float)
    a_ub = np.column_stack([normals, np.ones(n)])
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=a_ub,
        b_ub=b,
        bounds=[(None, None), (None, None), (0, None)],
        method="highs",
    )
    if res.status != 0:
        raise DegenerateInput(f"inradius LP failed: {res.message}")
    x = np.asarray(res.x, dtype=float)
    slack = b - a_ub @ x
    scale = max(float(np.abs(b).max()), x[2], 1e-300)
    active = slack <= 1e-7 * scale
    if active.sum() >= 2:
        sol, *_ = np.linalg.lstsq(a_ub[active], b[active], rcond=None)
        if np.all(b - a_ub @ sol >= -1e-12 * scale) and sol[2] > 0:
            x = sol
    return x[:2].copy(), float(x[2])


def make_body(points: Iterable[Sequence[float]]) -> ConvexBody:
    """Convex hull of ``points`` as a canonical :class:`ConvexBody`."""
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise DegenerateInput("need at least three 2D points")
    hull = convex_hull(pts)
    if len(hull) >= 3:
        hull = _merge_close(hull)
    if len(hull) < 3 or _shoelace(hull) < MIN_AREA:
        raise DegenerateInput("points span a hull of zero area")
    hull = convex_hull(hull)
    return ConvexBody(hull)


def summary(body: ConvexBody) -> GeometricSummary:
    return body.summary()


def transform(body: ConvexBody, matrix: np.ndarray | None = None, shift: Sequence[float] = (0.0, 0.0)) -> ConvexBody:
    v = body.vertices if matrix is None else body.vertices @ np.asarray(matrix, dtype=float).T
    return make_body(v + np.asarray(shift, dtype=float))


def translate(body: ConvexBody, shift: Sequence[float]) -> ConvexBody:
    return transform(body, None, shift)


def rotate(body: ConvexBody, angle: float, about: Sequence[float] | None = None) -> ConvexBody:
    c = body.centroid if about is None else np.asarray(about, dtype=float)
    cs, sn = math.cos(angle), math.sin(angle)
    rot = np.array([[cs, -sn], [sn, cs]])
    return make_body((body.vertices - c) @ rot.T + c)


def scale(body: ConvexBody, alpha: float) -> ConvexBody:
    """Homothety by ``alpha`` about the centroid."""
    if not alpha > 0:
        raise NonPositiveScale(f"scale factor must be positive, got {alpha}")
    if alpha == 1.0:
        return body
    c = body.centroid
    return make_body(c + alpha * (body.vertices - c))


def normalize_measure(body: ConvexBody, target: float = 1.0) -> ConvexBody:
    return scale(body, math.sqrt(target / body.measure))


def distance_to_body(body: ConvexBody, points: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the closed polygon (0 inside)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    v = body.vertices
    e = body.edges
    rel = p[:, None, :] - v[None, :, :]
    t = np.clip((rel * e[None]).sum(-1) / (e * e).sum(-1)[None], 0.0, 1.0)
    diff = rel - t[..., None] * e[None]
    d = np.sqrt((diff * diff).sum(-1)).min(axis=1)
    inside = (p @ body.normals.T <= body.offsets[None] + CONTAINS_TOL).all(axis=1)
    d[inside] = 0.0
    return d


def hausdorff_distance(a: ConvexBody, b: ConvexBody) -> float:
    """Exact Hausdorff distance; for convex polygons the maximum is attained
    at a vertex."""
    return float(max(distance_to_body(b, a.vertices).max(), distance_to_body(a, b.vertices).max()))


def contains(body: ConvexBody, point: Sequence[float], tol: float = CONTAINS_TOL) -> bool:
    p = np.asarray(point, dtype=float)
    return bool(np.all(body.normals @ p <= body.offsets + tol))


def nested(a: ConvexBody, b: ConvexBody, tol: float = CONTAINS_TOL) -> bool:
    """True when ``a`` is contained in ``b``."""
    return bool(np.all(a.vertices @ b.normals.T <= b.offsets[None] + tol))


def epsilon_neighborhood(body: ConvexBody, eps: float, arc_segments: int = 8) -> ConvexBody:
    """Polygon inscribed in the open eps-neighbourhood and containing the body.

    Each corner is replaced by ``arc_segments`` chords of the eps-circle
    around the vertex, spanning the angle between adjacent edge normals.
    """
    if not eps > 0:
        raise NonPositiveScale("eps must be positive")
    if arc_segments < 2:
        raise ValueError("arc_segments must be at least 2")
    nrm = body.normals
    ang = np.arctan2(nrm[:, 1], nrm[:, 0])
    pts = []
    for i, v in enumerate(body.vertices):
        a0 = ang[i - 1]
        a1 = ang[i]
        if a1 < a0:
            a1 += 2 * math.pi
        phi = np.linspace(a0, a1, arc_segments + 1)
        pts.append(v + eps * np.column_stack([np.cos(phi), np.sin(phi)]))
    return make_body(np.vstack(pts))


def regular_polygon(n: int, measure: float = 1.0, center: Sequence[float] = (0.0, 0.0), phase: float = 0.0) -> ConvexBody:
    """Regular n-gon of the given area."""
    circ = math.sqrt(2.0 * measure / (n * math.sin(2.0 * math.pi / n)))
    t = phase + 2.0 * math.pi * np.arange(n) / n
    return make_body(np.column_stack([center[0] + circ * np.cos(t), center[1] + circ * np.sin(t)]))


def rectangle(width: float, height: float, center: Sequence[float] = (0.0, 0.0)) -> ConvexBody:
    cx, cy = center
    w, h = width / 2.0, height / 2.0
    return make_body([(cx - w, cy - h), (cx + w, cy - h), (cx + w, cy + h), (cx - w, cy + h)])


def unit_square() -> ConvexBody:
    return rectangle(1.0, 1.0)


def random_body(rng: np.random.Generator, min_points: int = 4, max_points: int = 40, fatness: float = 0.05) -> ConvexBody:
    """Hull of uniform points in the unit disc, rejected while
    inradius < fatness * diameter, scaled to unit area about its centroid."""
    while True:
        n = int(rng.integers(min_points, max_points + 1))
        r = np.sqrt(rng.random(n))
        t = 2.0 * math.pi * rng.random(n)
        try:
            body = make_body(np.column_stack([r * np.cos(t), r * np.sin(t)]))
        except Exception:
            continue
        if body.inradius >= fatness * body.diameter:
            body = normalize_measure(body)
            return translate(body, -body.centroid)


def random_bodies(seed: int, count: int, **kw) -> list[ConvexBody]:
    rng = np.random.default_rng(seed)
    return [random_body(rng, **kw) for _ in range(count)]


def clip(body: ConvexBody, normal: Sequence[float], offset: float) -> ConvexBody:
    """Intersection of the body with the half-plane normal.x <= offset."""
    nrm = np.asarray(normal, dtype=float)
    v = body.vertices
    s = v @ nrm - offset
    out = []
    for i in range(len(v)):
        j = (i + 1) % len(v)
        if s[i] <= 0:
            out.append(v[i])
        if (s[i] < 0 < s[j]) or (s[j] < 0 < s[i]):
            t = s[i] / (s[i] - s[j])
            out.append(v[i] + t * (v[j] - v[i]))
    return make_body(np.array(out))


def unit_directions(count: int, phase: float = 0.0) -> np.ndarray:
    t = phase + 2.0 * math.pi * np.arange(count) / count
    return np.column_stack([np.cos(t), np.sin(t)])


def disc_hausdorff(body: ConvexBody, center: Sequence[float], radius: float) -> float:
    """Exact Hausdorff distance between the body and a disc."""
    c = np.asarray(center, dtype=float)
    far = float(np.sqrt(((body.vertices - c) ** 2).sum(1)).max())
    if contains(body, c):
        near = float((body.offsets - body.normals @ c).min())
        return max(far - radius, radius - near)
    # center outside: the disc's far side is farthest from the body
    return max(far - radius, float(distance_to_body(body, c[None])[0]) + radius)


_FIT_DIRECTIONS = 2048


def best_fit_disc(body: ConvexBody, radius: float | None = None) -> tuple[np.ndarray, float, float]:
    """Disc minimising the Hausdorff distance to ``body``.

    With ``radius`` given only the center is optimised.  Solved as a minimax
    fit of support functions on a dense direction sample, then the distance
    is re-evaluated exactly.  Returns (center, radius, distance).
    """
    u = unit_directions(_FIT_DIRECTIONS)
    h = body.support(u)
    m = len(u)
    if radius is None:
        # vars (cx, cy, r, d): |h - u.c - r| <= d
        a = np.vstack([np.column_stack([-u, -np.ones(m), -np.ones(m)]), np.column_stack([u, np.ones(m), -np.ones(m)])])
        b = np.concatenate([-h, h])
        res = linprog([0, 0, 0, 1], A_ub=a, b_ub=b, bounds=[(None, None)] * 2 + [(0, None)] * 2, method="highs")
        c, r = res.x[:2], float(res.x[2])
    else:
        a = np.vstack([np.column_stack([-u, -np.ones(m)]), np.column_stack([u, -np.ones(m)])])
        b = np.concatenate([-(h - radius), h - radius])
        res = linprog([0, 0, 1], A_ub=a, b_ub=b, bounds=[(None, None)] * 2 + [(0, None)], method="highs")
        c, r = res.x[:2], float(radius)
    return np.asarray(c), r, disc_hausdorff(body, c, r)


def aligned_hausdorff(a: ConvexBody, b: ConvexBody, rotations: int = 0) -> float:
    """Hausdorff distance minimised over translations of ``b`` (and over
    rotations when ``rotations`` > 0 gives the coarse angle grid size)."""
    u = unit_directions(_FIT_DIRECTIONS)
    ha = a.support(u)
    m = len(u)
    lhs = np.vstack([np.column_stack([u, -np.ones(m)]), np.column_stack([-u, -np.ones(m)])])

    def fit(body: ConvexBody) -> float:
        diff = ha - body.support(u)
        res = linprog([0, 0, 1], A_ub=lhs, b_ub=np.concatenate([diff, -diff]), bounds=[(None, None)] * 2 + [(0, None)], method="highs")
        return hausdorff_distance(a, translate(body, res.x[:2]))

    if rotations <= 0:
        return fit(b)
    angles = 2 * math.pi * np.arange(rotations) / rotations
    vals = [fit(rotate(b, t)) for t in angles]
    i = int(np.argmin(vals))
    best = vals[i]
    lo, hi = angles[i] - 2 * math.pi / rotations, angles[i] + 2 * math.pi / rotations
    for t in np.linspace(lo, hi, 17):
        best = min(best, fit(rotate(b, float(t))))
    return best


@dataclass(frozen=True, eq=False)
class BodyUnion:
    """Finite union of convex bodies with pairwise disjoint closures."""

    components: tuple[ConvexBody, ...]
    min_gap: float = field(default=1e-9, compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DegenerateInput("a union needs at least one component")
        object.__setattr__(self, "components", comps)
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                if polygon_gap(comps[i], comps[j]) <= self.min_gap:
                    raise DegenerateInput(f"components {i} and {j} are not separated")

    @property
    def measure(self) -> float:
        return float(sum(c.measure for c in self.components))

    @property
    def perimeter(self) -> float:
        return float(sum(c.perimeter for c in self.components))

    @property
    def centroid(self) -> np.ndarray:
        w = np.array([c.measure for c in self.components])
        return (np.array([c.centroid for c in self.components]) * w[:, None]).sum(0) / w.sum()

    @property
    def moment(self) -> float:
        g = self.centroid
        return float(sum(c.moment + c.measure * float(((c.centroid - g) ** 2).sum()) for c in self.components))

    @property
    def diameter(self) -> float:
        v = np.vstack([c.vertices for c in self.components])
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d * d).sum(-1).max()))

    @property
    def inradius(self) -> float:
        return max(c.inradius for c in self.components)

    def to_dict(self) -> dict:
        return {"type": "union", "components": [c.to_dict() for c in self.components]}

    @classmethod
    def from_dict(cls, data: dict) -> "BodyUnion":
        return cls(tuple(ConvexBody.from_dict(c) for c in data["components"]))


def polygon_gap(a: ConvexBody, b: ConvexBody) -> float:
    """Distance between two convex polygons (0 when they intersect)."""
    if nested(a, b) or nested(b, a):
        return 0.0
    # separating axis: overlap on every edge normal means intersection
    for p, q in ((a, b), (b, a)):
        proj = q.vertices @ p.normals.T - p.offsets[None]
        if np.any(proj.min(axis=0) >= 0):
            break
    else:
        return 0.0
    return float(min(distance_to_body(b, a.vertices).min(), distance_to_body(a, b.vertices).min()))


def layout_row(bodies: Sequence[ConvexBody], gap: float) -> BodyUnion:
    """Translate bodies into a left-to-right row separated by ``gap``."""
    placed = []
    x = 0.0
    for body in bodies:
        lo = body.vertices.min(axis=0)
        hi = body.vertices.max(axis=0)
        placed.append(translate(body, (x - lo[0], -0.5 * (lo[1] + hi[1]))))
        x += float(hi[0] - lo[0]) + gap
    return BodyUnion(tuple(placed))
