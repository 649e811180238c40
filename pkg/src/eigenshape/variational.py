"""Desk-scale shape optimisation for eigenvalue problems with a set-function
constraint.

Convex candidates are described by support heights on ``N`` uniform
directions, searched through their low Fourier modes.  Unions of convex
components carry one log-size per component.  The search is a compass
(pattern) search with a shrinking step; feasibility is restored exactly by
scaling after every move, so the search itself is unconstrained.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import analytic, functionals
from .errors import DegenerateInput, HypothesisFailed, MismatchedRuns, ResolutionTooCoarse
from .functionals import SetFunctional
from .geometry import (
    BodyUnion,
    ConvexBody,
    aligned_hausdorff,
    best_fit_disc,
    layout_row,
    make_body,
    normalize_measure,
    random_body,
    scale,
    unit_directions,
)
from .spectral import SolverConfig, eigenvalues_normalized, merge_spectra

KINDS = ("Ik", "Jk", "Mk", "Pk", "Hk", "Lk", "Nk", "Tk")
J01 = 2.404825557695773
J11 = 3.831705970207512


def n_tau(tau: float) -> float:
    """n(tau) = (tau/2)^(2/(tau+2)) + (2/tau)^(tau/(tau+2))."""
    return (tau / 2.0) ** (2.0 / (tau + 2.0)) + (2.0 / tau) ** (tau / (tau + 2.0))


def optimal_scale(lam: float, t_value: float, tau: float) -> float:
    """Dilation minimising lam a^-2 + T a^tau: (2 lam/(tau T))^(1/(tau+2))."""
    return (2.0 * lam / (tau * t_value)) ** (1.0 / (tau + 2.0))


# -- problem and run records --------------------------------------------------

@dataclass(frozen=True)
class VariationalProblem:
    kind: str
    k: int
    functional: SetFunctional | None = None
    c: float | None = None
    components: int = 1
    dim: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.c is not None and not self.c > 0:
            raise ValueError("constraint value must be positive")
        if self.components < 1:
            raise ValueError("components must be >= 1")
        if self.kind in ("Ik", "Lk", "Nk", "Hk", "Tk") and self.functional is None:
            raise ValueError(f"{self.kind} needs a constraint functional")
        if self.kind in ("Ik", "Lk", "Nk", "Hk", "Tk") and self.components != 1:
            raise ValueError(f"{self.kind} is posed over single convex bodies")
        if self.kind in ("Ik", "Jk") and self.c is None:
            raise ValueError(f"{self.kind} needs a constraint value c")
        if self.dim != 2:
            raise ValueError("optimisation runs in the plane only")

    @property
    def union(self) -> bool:
        return self.kind in ("Jk", "Mk", "Pk")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "functional": self.functional.name if self.functional else None,
            "c": self.c,
            "components": self.components,
            "dim": self.dim,
        }


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings.  ``search`` is the cheap solver used inside the loop,
    ``final`` the solver used to report the value of the minimiser."""

    search_resolution: int = 32
    final_resolution: int = 128
    directions: int = 64
    modes: int = 8
    union_modes: int = 5
    restarts: int = 2
    max_evals: int = 400  # eigensolves per restart
    step0: float = 0.3
    min_step: float = 2e-3
    threads: int = 1
    start_extremal: bool = True  # first restart at the ball (equal balls for unions)

    def __post_init__(self):
        if self.directions < 8 or self.modes < 2 or self.modes >= self.directions // 2:
            raise ValueError("need directions >= 8 and 2 <= modes < directions/2")
        if self.restarts < 1 or self.max_evals < 1:
            raise ValueError("restarts and max_evals must be >= 1")
        if self.restarts * self.max_evals > 2000:
            raise ValueError("eigensolve budget per run is capped at 2000")

    def search_cfg(self, k: int) -> SolverConfig:
        return SolverConfig(resolution=self.search_resolution, k=k)

    def final_cfg(self, k: int) -> SolverConfig:
        return SolverConfig(resolution=self.final_resolution, k=k)

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


@dataclass
class OptimizationRun:
    problem: VariationalProblem
    minimizer: BodyUnion
    value: float
    iterations: int
    seed: int
    history: list[tuple[int, float]]
    diagnostics: dict
    search_value: float = math.nan
    params: np.ndarray | None = field(default=None, repr=False)

    @property
    def body(self) -> ConvexBody:
        if len(self.minimizer.components) != 1:
            raise ValueError("minimiser has several components")
        return self.minimizer.components[0]

    def history_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "value"])
        for it, v in self.history:
            w.writerow([it, f"{v:.17g}"])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "problem": self.problem.as_dict(),
            "minimizer": self.minimizer.to_dict(),
            "value": self.value,
            "search_value": self.search_value,
            "iterations": self.iterations,
            "seed": self.seed,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class ThresholdEstimates:
    mu_k: float
    pi_k: float
    k: int
    method: str  # "closed-form", "optimizer" or "mixed"

    def __post_init__(self):
        if not (self.mu_k > 0 and self.pi_k > 0):
            raise ValueError("threshold estimates must be positive")

    @property
    def estimate(self) -> bool:
        return self.method != "closed-form"


# -- shape parameterisation ---------------------------------------------------

def project_convex(h: np.ndarray, sweeps: int = 20000, tol: float = 1e-13) -> np.ndarray:
    """Cyclic projection onto h[i-1] + h[i+1] >= 2 cos(2 pi/N) h[i]."""
    h = np.array(h, dtype=float)
    n = h.size
    c2 = 2.0 * math.cos(2.0 * math.pi / n)
    g = np.array([1.0, -c2, 1.0])
    gg = float(g @ g)
    for _ in range(sweeps):
        worst = 0.0
        for i in range(n):
            a, b = (i - 1) % n, (i + 1) % n
            v = h[a] + h[b] - c2 * h[i]
            if v < 0:
                worst = min(worst, v)
                step = v / gg
                h[a] -= step
                h[i] += c2 * step
                h[b] -= step
        if worst > -tol * max(1.0, float(np.abs(h).max())):
            break
    return h


def heights_to_body(h: np.ndarray, directions: np.ndarray) -> ConvexBody:
    """Polygon {x : x.u_i <= h_i} for convex-consistent heights."""
    u = directions
    un = np.roll(u, -1, axis=0)
    hn = np.roll(h, -1)
    det = u[:, 0] * un[:, 1] - u[:, 1] * un[:, 0]
    x = (h * un[:, 1] - hn * u[:, 1]) / det
    y = (u[:, 0] * hn - un[:, 0] * h) / det
    return make_body(np.column_stack([x, y]))


@dataclass(frozen=True)
class ShapeBasis:
    """Support heights h(theta) = 1 + sum_{j=2}^{J} a_j cos(j theta) + b_j sin(j theta).

    Mode 1 is a translation and is left out; the mean is fixed because
    every objective is restored by scaling.
    """

    directions: int = 64
    modes: int = 8

    @property
    def size(self) -> int:
        return 2 * (self.modes - 1)

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.directions) / self.directions

    @property
    def unit(self) -> np.ndarray:
        return unit_directions(self.directions)

    @property
    def step_scales(self) -> np.ndarray:
        j = np.repeat(np.arange(2, self.modes + 1), 2)
        return 3.0 / (j * j - 1.0)

    def heights(self, coeffs: np.ndarray) -> np.ndarray:
        t = self.theta
        h = np.ones_like(t)
        for idx, j in enumerate(range(2, self.modes + 1)):
            h += coeffs[2 * idx] * np.cos(j * t) + coeffs[2 * idx + 1] * np.sin(j * t)
        return h

    def body(self, coeffs: np.ndarray) -> ConvexBody:
        return heights_to_body(project_convex(self.heights(coeffs)), self.unit)

    def coeffs_of(self, body: ConvexBody) -> np.ndarray:
        """Low-mode coefficients of the support heights of ``body`` about its
        centroid, normalised to unit mean."""
        h = body.support(self.unit) - self.unit @ body.centroid
        spec = np.fft.rfft(h) / self.directions
        mean = spec[0].real
        out = np.empty(self.size)
        for idx, j in enumerate(range(2, self.modes + 1)):
            out[2 * idx] = 2.0 * spec[j].real / mean
            out[2 * idx + 1] = -2.0 * spec[j].imag / mean
        return out


def random_start(rng: np.random.Generator, basis: ShapeBasis) -> np.ndarray:
    return basis.coeffs_of(random_body(rng))


# -- search --------------------------------------------------------------------

class Budget(Exception):
    pass


def pattern_search(
    fun: Callable[[np.ndarray], float],
    x0: np.ndarray,
    scales: np.ndarray,
    step0: float,
    min_step: float,
    on_accept: Callable[[float], None] | None = None,
) -> tuple[np.ndarray, float, int]:
    """Opportunistic compass search with a Hooke-Jeeves pattern move.

    Coordinates are polled in index order, + before -, and the first strict
    improvement is taken.  ``fun`` may raise :class:`Budget` to stop.
    Returns (best x, best value, accepted moves).
    """
    x = np.array(x0, dtype=float)
    fx = fun(x)
    step = step0
    moves = 0
    try:
        while step >= min_step:
            start = x.copy()
            improved = False
            for i in range(x.size):
                for sgn in (1.0, -1.0):
                    y = x.copy()
                    y[i] += sgn * step * scales[i]
                    fy = fun(y)
                    if fy < fx:
                        x, fx = y, fy
                        moves += 1
                        improved = True
                        if on_accept:
                            on_accept(fx)
                        break
            if not improved:
                step *= 0.5
                continue
            y = x + (x - start)
            fy = fun(y)
            if fy < fx:
                x, fx = y, fy
                moves += 1
                if on_accept:
                    on_accept(fx)
    except Budget:
        pass
    return x, fx, moves


class Evaluator:
    """Objective wrapper: caches unit-area spectra by shape key, counts
    eigensolves against a budget and tracks the best value seen."""

    def __init__(self, basis: ShapeBasis, cfg: SolverConfig, budget: int):
        self.basis = basis
        self.cfg = cfg
        self.budget = budget
        self.solves = 0
        self.calls = 0
        self._shapes: dict[tuple, tuple[ConvexBody, tuple[float, ...]] | None] = {}
        self.history: list[tuple[int, float]] = []
        self.best = math.inf

    def shape(self, coeffs: np.ndarray):
        """(unit-area body, unit-area spectrum) or None if infeasible."""
        key = tuple(np.round(coeffs, 13))
        if key in self._shapes:
            return self._shapes[key]
        if self.solves >= self.budget:
            raise Budget
        self.solves += 1
        try:
            body = normalize_measure(self.basis.body(coeffs))
            spec = eigenvalues_normalized(body, self.cfg).eigenvalues
            out = (body, spec)
        except (DegenerateInput, ResolutionTooCoarse):
            out = None
        self._shapes[key] = out
        return out

    def track(self, value: float) -> None:
        self.calls += 1
        if value < self.best:
            self.best = value
            self.history.append((self.calls, value))


# -- objective builders ----------------------------------------------------------

def _single_objective(problem: VariationalProblem, ev: Evaluator):
    f = problem.functional
    k = problem.k
    tau = f.tau
    nb = ev.basis.size

    def value(lam_u: float, t_u: float, s: float) -> float:
        if problem.kind in ("Ik", "Lk"):
            c = problem.c if problem.kind == "Ik" else 1.0
            alpha = (c / t_u) ** (1.0 / tau)
            return lam_u / alpha**2
        if problem.kind == "Nk":
            return lam_u * t_u ** (2.0 / tau)
        return math.exp(-2.0 * s) * lam_u + math.exp(tau * s) * t_u

    def fun(x: np.ndarray) -> float:
        got = ev.shape(x[:nb])
        if got is None:
            v = math.inf
        else:
            body, spec = got
            s = float(x[nb]) if x.size > nb else 0.0
            v = value(spec[k - 1], f(body), s)
        ev.track(v)
        return v

    return fun


def _union_restoration(problem: VariationalProblem, measure: float, perimeter: float) -> float:
    if problem.kind == "Mk":
        return measure**-0.5
    c = problem.c if problem.c is not None else 1.0
    if problem.kind == "Pk":
        return c / perimeter
    return min(measure**-0.5, c / perimeter)


def _union_layout(n: int, nb: int) -> list[tuple[int | None, slice]]:
    """Per component: index of its log-size (None for the first) and the
    slice of its shape coefficients."""
    out = []
    pos = 0
    for i in range(n):
        si = None
        if i > 0:
            si = pos
            pos += 1
        out.append((si, slice(pos, pos + nb)))
        pos += nb
    return out


def _union_parts(problem: VariationalProblem, ev: Evaluator, x: np.ndarray):
    nb = ev.basis.size
    parts = []
    for si, sl in _union_layout(problem.components, nb):
        got = ev.shape(x[sl])
        if got is None:
            return None
        s = float(x[si]) if si is not None else 0.0
        parts.append((got[0], got[1], s))
    return parts


def _union_value(problem: VariationalProblem, parts) -> tuple[float, float]:
    """(objective, restoration factor) for unit-area components with log-sizes."""
    weights = [math.exp(2.0 * s) for _, _, s in parts]
    measure = sum(weights)
    perimeter = sum(b.perimeter * math.exp(s) for b, _, s in parts)
    spectra = [[lam / w for lam in spec] for (_, spec, _), w in zip(parts, weights)]
    lam = merge_spectra(spectra, problem.k)[problem.k - 1]
    beta = _union_restoration(problem, measure, perimeter)
    return lam / beta**2, beta


def _union_objective(problem: VariationalProblem, ev: Evaluator):
    def fun(x: np.ndarray) -> float:
        parts = _union_parts(problem, ev, x)
        v = math.inf if parts is None else _union_value(problem, parts)[0]
        ev.track(v)
        return v

    return fun


# -- driver ------------------------------------------------------------------------

def _basis(problem: VariationalProblem, opt: OptimizerConfig) -> ShapeBasis:
    modes = opt.modes if problem.components == 1 else min(opt.modes, opt.union_modes)
    return ShapeBasis(opt.directions, modes)


def _dimension(problem: VariationalProblem, basis: ShapeBasis) -> int:
    if problem.union:
        return problem.components * basis.size + problem.components - 1
    return basis.size + (1 if problem.kind in ("Hk", "Tk") else 0)


def _scales(problem: VariationalProblem, basis: ShapeBasis) -> np.ndarray:
    if problem.union:
        out = []
        for si, _ in _union_layout(problem.components, basis.size):
            if si is not None:
                out.append(1.0)
            out.extend(basis.step_scales)
        return np.array(out)
    sc = basis.step_scales
    if problem.kind in ("Hk", "Tk"):
        sc = np.append(sc, 1.0)
    return sc


def _starts(problem: VariationalProblem, basis: ShapeBasis, opt: OptimizerConfig, seed: int, x0: np.ndarray | None) -> list[np.ndarray]:
    """Warm start (if any), then the ball, then seeded random hulls."""
    rng = np.random.default_rng(seed)
    dim = _dimension(problem, basis)
    starts = []
    if x0 is not None:
        starts.append(np.array(x0, dtype=float))
    ball_ok = problem.union or problem.functional.extremal_body is not None
    if opt.start_extremal and ball_ok and len(starts) < opt.restarts:
        starts.append(np.zeros(dim))
    while len(starts) < opt.restarts:
        x = np.zeros(dim)
        if problem.union:
            for si, sl in _union_layout(problem.components, basis.size):
                x[sl] = random_start(rng, basis)
                if si is not None:
                    x[si] = rng.uniform(-0.3, 0.3)
        else:
            x[: basis.size] = random_start(rng, basis)
        starts.append(x)
    return starts


def _one_restart(problem, basis, opt, x0):
    ev = Evaluator(basis, opt.search_cfg(problem.k), opt.max_evals)
    fun = _union_objective(problem, ev) if problem.union else _single_objective(problem, ev)
    x, fx, moves = pattern_search(fun, x0, _scales(problem, basis), opt.step0, opt.min_step)
    return x, fx, moves, ev


def _realise(problem: VariationalProblem, basis: ShapeBasis, x: np.ndarray, opt: OptimizerConfig):
    """Minimiser body and final value, using the fine solver."""
    fine = opt.final_cfg(problem.k)
    if problem.union:
        nb = basis.size
        comps = []
        for si, sl in _union_layout(problem.components, nb):
            unit = normalize_measure(basis.body(x[sl]))
            s = float(x[si]) if si is not None else 0.0
            comps.append((unit, eigenvalues_normalized(unit, fine).eigenvalues, s))
        value, beta = _union_value(problem, comps)
        bodies = [scale(b, beta * math.exp(s)) for b, _, s in comps]
        gap = 0.1 * max(b.diameter for b in bodies)
        return layout_row(bodies, gap), value
    unit = normalize_measure(basis.body(x[: basis.size]))
    lam_u = eigenvalues_normalized(unit, fine).eigenvalues[problem.k - 1]
    f = problem.functional
    t_u = f(unit)
    if problem.kind in ("Ik", "Lk"):
        c = problem.c if problem.kind == "Ik" else 1.0
        alpha = (c / t_u) ** (1.0 / f.tau)
        body = scale(unit, alpha)
        return BodyUnion((body,)), lam_u / alpha**2
    if problem.kind == "Nk":
        return BodyUnion((unit,)), lam_u * t_u ** (2.0 / f.tau)
    # the dilation costs no eigensolve, so it is re-tuned against the fine spectrum
    s0 = float(x[basis.size])
    pen = lambda s: math.exp(-2.0 * s) * lam_u + math.exp(f.tau * s) * t_u
    res = minimize_scalar(pen, bracket=(s0 - 0.1, s0 + 0.1), tol=1e-12)
    s = float(res.x) if res.fun < pen(s0) else s0
    body = scale(unit, math.exp(s))
    return BodyUnion((body,)), pen(s)


def _diagnostics(problem: VariationalProblem, minimizer: BodyUnion) -> dict:
    d = {
        "inradius": minimizer.inradius,
        "diameter": minimizer.diameter,
        "measure": minimizer.measure,
        "perimeter": minimizer.perimeter,
        "components": len(minimizer.components),
    }
    f = problem.functional
    if problem.kind in ("Ik", "Lk"):
        c = problem.c if problem.kind == "Ik" else 1.0
        d["constraint_residual"] = abs(f(minimizer.components[0]) - c) / c
    elif problem.union:
        c = problem.c
        meas, per = minimizer.measure, minimizer.perimeter
        if problem.kind == "Mk":
            d["constraint_residual"] = abs(meas - 1.0)
            d["binding"] = "measure"
        elif problem.kind == "Pk":
            c = 1.0 if c is None else c
            d["constraint_residual"] = abs(per - c) / c
            d["binding"] = "perimeter"
        else:
            excess = max(0.0, meas - 1.0, per / c - 1.0)
            on_measure = abs(meas - 1.0) <= 1e-9
            on_perimeter = abs(per / c - 1.0) <= 1e-9
            d["constraint_residual"] = excess
            d["binding"] = "both" if on_measure and on_perimeter else ("measure" if on_measure else "perimeter")
    else:
        d["constraint_residual"] = 0.0
    if len(minimizer.components) == 1:
        body = minimizer.components[0]
        _, r, dist = best_fit_disc(body)
        d["hausdorff_to_disc"] = dist
        d["disc_radius"] = r
    return d


def optimize(problem: VariationalProblem, opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, x0: np.ndarray | None = None) -> OptimizationRun:
    """Best of ``opt.restarts`` seeded pattern searches, re-evaluated with
    the fine solver."""
    if problem.functional is not None and problem.kind in ("Ik", "Lk", "Nk", "Hk", "Tk"):
        _require_hypotheses(problem.functional)
    basis = _basis(problem, opt)
    starts = _starts(problem, basis, opt, seed, x0)
    if opt.threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=opt.threads) as pool:
            results = list(pool.map(lambda s: _one_restart(problem, basis, opt, s), starts))
    else:
        results = [_one_restart(problem, basis, opt, s) for s in starts]
    best = min(range(len(results)), key=lambda i: (results[i][1], i))
    x, fx, _, _ = results[best]
    if not math.isfinite(fx):
        raise HypothesisFailed("no feasible candidate found")
    # best-so-far transcript across restarts, in evaluation order
    history: list[tuple[int, float]] = []
    offset = 0
    running = math.inf
    for _, _, _, ev in results:
        for it, v in ev.history:
            if v < running:
                running = v
                history.append((offset + it, v))
        offset += ev.calls
    minimizer, value = _realise(problem, basis, x, opt)
    diag = _diagnostics(problem, minimizer)
    diag["eigensolves"] = sum(ev.solves for *_, ev in results)
    return OptimizationRun(problem, minimizer, value, sum(r[2] for r in results), seed, history, diag, fx, x)


_CHECKED: dict[str, bool] = {}


def _require_hypotheses(f: SetFunctional) -> None:
    if f.name not in _CHECKED:
        rep = functionals.check_hypotheses(f, samples=20, seed=0)
        bad = [v for v in rep.violations if v[0] in ("positivity", "isometry", "homogeneity")]
        _CHECKED[f.name] = not bad
    if not _CHECKED[f.name]:
        raise HypothesisFailed(f"{f.name} fails the positivity/invariance/homogeneity hypotheses")


# -- public problem drivers ------------------------------------------------------

def minimize_Ik(f: SetFunctional, k: int, c: float, opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, x0=None) -> OptimizationRun:
    """inf lambda_k over convex bodies with T = c."""
    return optimize(VariationalProblem("Ik", k, f, c), opt, seed, x0)


def minimize_Jk(k: int, c: float, components: int | None = None, opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, x0=None) -> OptimizationRun:
    """inf lambda_k over unions with measure <= 1 and perimeter <= c."""
    components = k if components is None else components
    if not 1 <= components <= k:
        raise ValueError("components must lie in [1, k]")
    return optimize(VariationalProblem("Jk", k, None, c, components), opt, seed, x0)


def minimize_Mk(k: int, components: int | None = None, opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, x0=None) -> OptimizationRun:
    components = k if components is None else components
    return optimize(VariationalProblem("Mk", k, None, None, components), opt, seed, x0)


def minimize_Pk(k: int, components: int | None = None, c: float = 1.0, opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, x0=None) -> OptimizationRun:
    components = k if components is None else components
    return optimize(VariationalProblem("Pk", k, None, c, components), opt, seed, x0)


def minimize_Hk(f: SetFunctional, k: int, opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, x0=None) -> OptimizationRun:
    """inf lambda_k + T over convex bodies; the dilation is a search variable."""
    return optimize(VariationalProblem("Hk", k, f), opt, seed, x0)


def best_over_components(kind: str, k: int, opt: OptimizerConfig, seed: int, c: float | None = None, max_components: int | None = None) -> OptimizationRun:
    """Best run over component counts 1..max_components."""
    top = k if max_components is None else max_components
    runs = [optimize(VariationalProblem(kind, k, None, c if kind != "Mk" else None, n), opt, seed + 1000 * (n - 1)) for n in range(1, top + 1)]
    return min(runs, key=lambda r: r.value)


# -- J_k curve -----------------------------------------------------------------------

def closed_form_J1(c: float) -> float:
    return max(math.pi * J01**2, 4.0 * math.pi**2 * J01**2 / c**2)


def envelope(c_grid: Sequence[float], values: Sequence[float]) -> list[float]:
    """Lowest values consistent with J nonincreasing and c^2 J nondecreasing.

    Each candidate is itself an upper bound at c_i: any value found at a
    smaller c (feasible sets only grow), or one found at a larger c_j
    rescaled by (c_j/c_i)^2 (shrinking a union scales perimeter linearly).
    """
    c = list(map(float, c_grid))
    f = list(map(float, values))
    n = len(c)
    out = []
    for i in range(n):
        best = min(f[: i + 1])
        for j in range(i + 1, n):
            best = min(best, (c[j] / c[i]) ** 2 * f[j])
        out.append(best)
    # round-off guard so both orderings hold exactly in floating point
    for i in range(n - 1):
        if out[i + 1] > out[i]:
            out[i + 1] = out[i]
        while c[i + 1] ** 2 * out[i + 1] < c[i] ** 2 * out[i]:
            out[i + 1] = math.nextafter(out[i + 1], math.inf)
    return out


@dataclass
class CurvePoint:
    c: float
    value: float
    raw: float
    regime: str
    run: OptimizationRun = field(repr=False)


def jk_curve(k: int, c_grid: Sequence[float], opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, components: int | None = None) -> list[CurvePoint]:
    """J_k along an increasing grid, warm-started from the previous point and
    reported as the monotone envelope."""
    grid = [float(c) for c in c_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("c_grid must be strictly increasing")
    runs = []
    x0 = None
    for i, c in enumerate(grid):
        run = minimize_Jk(k, c, components, opt, seed + i, x0)
        runs.append(run)
        x0 = run.params
    raw = [r.value for r in runs]
    env = envelope(grid, raw)
    return [CurvePoint(c, v, r.value, r.diagnostics.get("binding", ""), r) for c, v, r in zip(grid, env, runs)]


# -- penalised problem ---------------------------------------------------------------

@dataclass
class PenalizedReport:
    tau: float
    n_tau: float
    N_k: float
    predicted_T_k: float
    direct_T_k: float
    relative_gap: float
    t_scale: float
    shape_distance: float  # aligned d^H / diam between t Omega* and the direct minimiser
    direct_run: OptimizationRun = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "tau": self.tau,
            "n_tau": self.n_tau,
            "N_k": self.N_k,
            "predicted_T_k": self.predicted_T_k,
            "direct_T_k": self.direct_T_k,
            "relative_gap": self.relative_gap,
            "t_scale": self.t_scale,
            "shape_distance": self.shape_distance,
        }


def penalized_equivalence(run_ik: OptimizationRun, opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, direct: OptimizationRun | None = None) -> PenalizedReport:
    """Compare the direct H_k optimum with n(tau) N_k^(tau/(tau+2)) built from
    an I_k minimiser, and the rescaled minimiser with the direct one."""
    p = run_ik.problem
    if p.kind not in ("Ik", "Lk"):
        raise MismatchedRuns("penalized_equivalence needs an I_k run")
    f = p.functional
    tau = f.tau
    body = run_ik.body
    lam = run_ik.value
    t_val = f(body)
    nk = lam * t_val ** (2.0 / tau)
    predicted = n_tau(tau) * nk ** (tau / (tau + 2.0))
    t = optimal_scale(lam, t_val, tau)
    if direct is None:
        direct = minimize_Hk(f, p.k, opt, seed)
    rescaled = scale(body, t)
    dist = aligned_hausdorff(direct.body, rescaled, rotations=24) / direct.body.diameter
    return PenalizedReport(tau, n_tau(tau), nk, predicted, direct.value, abs(direct.value - predicted) / predicted, t, dist, direct)


# -- convergence to the ball -----------------------------------------------------------

@dataclass
class ConvergenceReport:
    rows: list[dict]
    distances: list[float]
    inversions: list[tuple[int, float]]
    trend_ok: bool

    def as_dict(self) -> dict:
        return {"rows": self.rows, "inversions": self.inversions, "trend_ok": self.trend_ok}


def eq29_bound(f: SetFunctional, c: float) -> float:
    m = f.dim
    t_d = functionals.t_star(f).t_star
    return (m / (m + 2.0)) ** (m / 2.0) * (c / t_d) ** (m / f.tau)


def eq30_bound(f: SetFunctional, c: float) -> float:
    if f.diameter_constants is None:
        raise HypothesisFailed(f"{f.name} carries no diameter constants")
    m = f.dim
    big_k, t = f.diameter_constants
    t_d = functionals.t_star(f).t_star
    e = t * f.tau - 1.0
    return big_k * ((m + 2.0) / m) ** (e / 2.0) * c ** (1.0 / f.tau) * t_d ** (e / f.tau)


def trend_inversions(values: Sequence[float]) -> list[tuple[int, float]]:
    """(index, increase) for every step where the sequence goes up."""
    return [(i + 1, values[i + 1] - values[i]) for i in range(len(values) - 1) if values[i + 1] > values[i]]


def convergence_diagnostics(runs: Sequence[OptimizationRun], allowed_fraction: float = 0.1) -> ConvergenceReport:
    """Per-k distance to the limiting ball and the finite-k forms of the
    asymptotic measure and diameter bounds."""
    if not runs:
        raise MismatchedRuns("no runs given")
    p0 = runs[0].problem
    for i, r in enumerate(runs):
        p = r.problem
        if p.kind != "Ik" or p.functional.name != p0.functional.name or p.c != p0.c or p.k != p0.k + i:
            raise MismatchedRuns("runs must be I_k runs for consecutive k with one functional and one c")
    f, c = p0.functional, p0.c
    t_d = functionals.t_star(f).t_star
    alpha_c = (c / t_d) ** (1.0 / f.tau)
    radius = alpha_c / math.sqrt(math.pi)
    m29 = eq29_bound(f, c)
    d30 = eq30_bound(f, c) if f.diameter_constants else math.nan
    rows, dists = [], []
    for r in runs:
        body = r.body
        _, _, dist = best_fit_disc(body, radius)
        dists.append(dist)
        rows.append(
            {
                "k": r.problem.k,
                "value": r.value,
                "hausdorff_to_ball": dist,
                "measure": body.measure,
                "eq29_rhs": m29,
                "diameter": body.diameter,
                "eq30_rhs": d30,
                "inradius": body.inradius,
                "eq14_rhs": 2.0**-1.5 * r.value**-0.5,
            }
        )
    inv = trend_inversions(dists)
    top = max(dists)
    ok = len(inv) <= 1 and all(step < allowed_fraction * top for _, step in inv)
    return ConvergenceReport(rows, dists, inv, ok)


# -- thresholds and T* ------------------------------------------------------------------

def closed_form_thresholds(k: int) -> dict[str, float]:
    out = {}
    if k == 1:
        out["mu_k"] = 2.0 * math.sqrt(math.pi)
        out["pi_k"] = 1.0 / (4.0 * math.pi)
    elif k == 2:
        out["mu_k"] = 2.0 * math.sqrt(2.0 * math.pi)
    return out


def estimate_thresholds(k: int, opt: OptimizerConfig = OptimizerConfig(), seed: int = 0, max_components: int | None = None) -> ThresholdEstimates:
    """mu_k (perimeter of a measure minimiser) and pi_k (measure of a
    perimeter minimiser); closed forms where known, optimiser otherwise."""
    if k < 1:
        raise ValueError("k must be >= 1")
    known = closed_form_thresholds(k)
    mu = known.get("mu_k")
    pi = known.get("pi_k")
    if mu is None:
        mu = best_over_components("Mk", k, opt, seed, max_components=max_components).minimizer.perimeter
    if pi is None:
        pi = best_over_components("Pk", k, opt, seed + 1, c=1.0, max_components=max_components).minimizer.measure
    method = "closed-form" if len(known) == 2 else ("optimizer" if not known else "mixed")
    return ThresholdEstimates(mu, pi, k, method)


def estimate_t_star(f: SetFunctional, seed: int = 0, opt: OptimizerConfig = OptimizerConfig()) -> float:
    """Upper estimate of inf T over unit-measure convex polygons."""
    basis = ShapeBasis(opt.directions, opt.modes)
    rng = np.random.default_rng(seed)
    m = f.dim

    def fun(x):
        try:
            body = basis.body(x)
        except DegenerateInput:
            return math.inf
        return f(body) / body.measure ** (f.tau / m)

    best = math.inf
    for _ in range(opt.restarts):
        _, fx, _ = pattern_search(fun, random_start(rng, basis), basis.step_scales, opt.step0, 1e-4)
        best = min(best, fx)
    return best


def eq11_bound(f: SetFunctional, k: int, c: float) -> float:
    """lambda_k(alpha_c D), an upper bound for I_k(c)."""
    d = f.extremal_body
    if d is None:
        raise HypothesisFailed(f"{f.name} has no extremal body")
    lam_d = analytic.ball_eigenvalues(d.dim, d.params[0], k)[-1]
    return (f(d) / c) ** (2.0 / f.tau) * lam_d


__all__ = [
    "ConvergenceReport",
    "CurvePoint",
    "OptimizationRun",
    "OptimizerConfig",
    "PenalizedReport",
    "ShapeBasis",
    "ThresholdEstimates",
    "VariationalProblem",
    "closed_form_J1",
    "closed_form_thresholds",
    "convergence_diagnostics",
    "envelope",
    "eq11_bound",
    "eq29_bound",
    "eq30_bound",
    "estimate_t_star",
    "estimate_thresholds",
    "heights_to_body",
    "jk_curve",
    "minimize_Hk",
    "minimize_Ik",
    "minimize_Jk",
    "minimize_Mk",
    "minimize_Pk",
    "n_tau",
    "optimal_scale",
    "optimize",
    "pattern_search",
    "penalized_equivalence",
    "project_convex",
]
