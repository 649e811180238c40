"""Certificates for the inequalities relating spectra, inradius, diameter,
perimeter, measure and moment of convex bodies.

Every inequality is normalised to ``lhs <= rhs``; ``slack = rhs - lhs`` and
a certificate passes when ``slack >= -tolerance``.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import analytic, functionals
from .analytic import AnalyticBody
from .errors import HypothesisViolated, MissingEstimate
from .geometry import ConvexBody, hausdorff_distance, make_body, random_body
from .spectral import SolverConfig, SpectralResult, eigenvalues_normalized, rel_allowance

GEOMETRIC_TOL = 1e-9

CATALOGUE = {
    "eq15a": "diam <= 2m omega_{m-1}^-1 rho^(1-m) |body|",
    "eq15b": "2^(m-1) (m omega_m)^-1 diam^(1-m) |body| <= rho",
    "eq15c": "|body| / perimeter <= rho",
    "eq15d": "perimeter <= m omega_m (diam/2)^(m-1)",
    "eq8": "T* <= T(body) / |body|^(tau/m)",
    "eq19": "m C_m/(m+2) (k/|body|)^(2/m) <= lambda_k",
    "eq37": "diam <= m^(2-m) omega_{m-1}^-1 perimeter^(m-1) |body|^(2-m)",
    "eq39": "m/(m+2) omega_m^(-2/m) |body|^((m+2)/m) <= moment",
    "eq41": "diam <= K moment^(1/2) |body|^(-1/2)",
    "eqa151": "|T(A) - T(B)| <= 2 tau 3^tau eps/rho(A) T(A)",
    "eqa152": "|lambda_k(A) - lambda_k(B)| <= 16 eps/rho(A) lambda_k(A)",
    "rho_lambda1": "(2 rho)^-2 <= lambda_1",
    "eq63": "lambda_k(Q_a) <= 4 pi^2 m/a^2 k^(2/m)",
    "thm12iv": "m omega_m^(1/m) <= mu_k",
    "thm12v": "pi_k <= m^(-m/(m-1)) omega_m^(-1/(m-1))",
    "thm12vi": "(2m)^(-m/(m-1)) (m+2)^(-m/2) omega_m^-1 <= pi_k",
}


@dataclass(frozen=True)
class InequalityCertificate:
    id: str
    lhs: float
    rhs: float
    slack: float
    inputs_digest: str
    tolerance_used: float
    label: str = ""

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance_used

    @property
    def key(self) -> str:
        return f"{self.id}:{self.label}" if self.label else self.id

    def as_dict(self) -> dict:
        return {
            "id": self.key,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "tolerance": self.tolerance_used,
            "pass": self.passed,
            "inputs_digest": self.inputs_digest,
        }


def digest(*items) -> str:
    h = hashlib.sha256()
    for it in items:
        if isinstance(it, ConvexBody):
            h.update(np.ascontiguousarray(it.vertices, dtype="<f8").tobytes())
        elif isinstance(it, (tuple, list)):
            h.update(digest(*it).encode())
        elif isinstance(it, np.ndarray):
            h.update(np.ascontiguousarray(it, dtype="<f8").tobytes())
        else:
            h.update(repr(it).encode())
    return h.hexdigest()[:16]


def certificate(ineq_id: str, lhs: float, rhs: float, inputs, tolerance: float = GEOMETRIC_TOL, label: str = "") -> InequalityCertificate:
    if ineq_id not in CATALOGUE:
        raise KeyError(f"unregistered inequality {ineq_id!r}")
    lhs, rhs = float(lhs), float(rhs)
    return InequalityCertificate(ineq_id, lhs, rhs, rhs - lhs, digest(inputs), float(tolerance), label)


def _dim(body) -> int:
    return body.dim if isinstance(body, AnalyticBody) else 2


# -- geometric ---------------------------------------------------------------

def check_lemma31(body) -> list[InequalityCertificate]:
    """Inradius/diameter/perimeter/measure relations for a convex body."""
    m = _dim(body)
    om = analytic.unit_ball_volume(m)
    om1 = analytic.unit_ball_volume(m - 1)
    rho, diam, vol, per = body.inradius, body.diameter, body.measure, body.perimeter
    inputs = body if isinstance(body, ConvexBody) else body.to_dict()
    return [
        certificate("eq15a", diam, 2 * m / om1 * rho ** (1 - m) * vol, inputs),
        certificate("eq15b", 2 ** (m - 1) / (m * om) * diam ** (1 - m) * vol, rho, inputs),
        certificate("eq15c", vol / per, rho, inputs),
        certificate("eq15d", per, m * om * (0.5 * diam) ** (m - 1), inputs),
    ]


def check_moment_isoperimetric(body) -> InequalityCertificate:
    m = _dim(body)
    om = analytic.unit_ball_volume(m)
    bound = m / (m + 2.0) * om ** (-2.0 / m) * body.measure ** ((m + 2.0) / m)
    inputs = body if isinstance(body, ConvexBody) else body.to_dict()
    return certificate("eq39", bound, body.moment, inputs, tolerance=GEOMETRIC_TOL * max(1.0, body.moment))


def check_diameter_bounds(body) -> list[InequalityCertificate]:
    """Diameter bounds through perimeter and through the moment of inertia."""
    m = _dim(body)
    om1 = analytic.unit_ball_volume(m - 1)
    vol = body.measure
    k_moment = 4.0 * math.sqrt(m * (m + 1) ** 2 * (m + 2))
    inputs = body if isinstance(body, ConvexBody) else body.to_dict()
    return [
        certificate("eq37", body.diameter, m ** (2 - m) / om1 * body.perimeter ** (m - 1) * vol ** (2 - m), inputs),
        certificate("eq41", body.diameter, k_moment * math.sqrt(body.moment / vol), inputs),
    ]


def check_t_star(body, f: functionals.SetFunctional, t_star_value: float | None = None) -> InequalityCertificate:
    if t_star_value is None:
        t_star_value = functionals.t_star(f).t_star
    ratio = f(body) / body.measure ** (f.tau / f.dim)
    inputs = body if isinstance(body, ConvexBody) else body.to_dict()
    return certificate("eq8", t_star_value, ratio, (inputs, f.name), tolerance=GEOMETRIC_TOL * max(1.0, ratio), label=f.name)


def check_lemma32_geometric(a: ConvexBody, b: ConvexBody, funcs: Sequence[functionals.SetFunctional] | None = None) -> list[InequalityCertificate]:
    funcs = funcs if funcs is not None else [functionals.builtin(n) for n in ("measure", "perimeter", "moment")]
    return [functionals.hausdorff_perturbation_bound(f, a, b) for f in funcs]


# -- spectral ----------------------------------------------------------------

def spectral_tolerance(values: Iterable[float], cfg: SolverConfig) -> float:
    return 2.0 * rel_allowance(cfg) * max(values)


def check_lemma32(
    a: ConvexBody,
    b: ConvexBody,
    k: int,
    cfg: SolverConfig = SolverConfig(),
    funcs: Sequence[functionals.SetFunctional] | None = None,
    spectra: tuple[Sequence[float], Sequence[float]] | None = None,
) -> list[InequalityCertificate]:
    """Hausdorff perturbation bounds for the functionals and for lambda_k.

    The eigenvalue certificate tolerates twice the solver error allowance.
    """
    eps = hausdorff_distance(a, b)
    rho = a.inradius
    if eps > rho / 2.0 * (1 + 1e-12):
        raise HypothesisViolated(f"Hausdorff distance {eps:.4g} exceeds half the inradius {rho / 2:.4g}")
    certs = check_lemma32_geometric(a, b, funcs)
    if spectra is None:
        c = cfg.with_k(k)
        spectra = (eigenvalues_normalized(a, c).eigenvalues, eigenvalues_normalized(b, c).eigenvalues)
    la, lb = spectra[0][k - 1], spectra[1][k - 1]
    certs.append(
        certificate(
            "eqa152",
            abs(la - lb),
            16.0 * eps / rho * la,
            (a, b, k, cfg.resolution, cfg.extrapolate),
            tolerance=spectral_tolerance((la, lb), cfg),
            label=f"k={k}",
        )
    )
    return certs


def check_li_yau(spectrum: SpectralResult | Sequence[float], measure: float, dim: int = 2, allowance: float = 0.0) -> list[InequalityCertificate]:
    """One certificate per index; ``allowance`` is relative to lambda_k."""
    vals = spectrum.eigenvalues if isinstance(spectrum, SpectralResult) else tuple(spectrum)
    if not vals:
        raise ValueError("empty spectrum")
    cm = analytic.constants(dim).weyl
    out = []
    for k, lam in enumerate(vals, start=1):
        bound = dim * cm / (dim + 2.0) * (k / measure) ** (2.0 / dim)
        tol = max(allowance * lam, GEOMETRIC_TOL * lam)
        out.append(certificate("eq19", bound, lam, (measure, dim, k, lam), tolerance=tol, label=f"k={k}"))
    return out


def min_slack(certs: Iterable[InequalityCertificate]) -> InequalityCertificate:
    return min(certs, key=lambda c: c.slack)


def check_convex_lambda1(body: ConvexBody, spectrum: SpectralResult | Sequence[float], allowance: float = 0.0) -> InequalityCertificate:
    vals = spectrum.eigenvalues if isinstance(spectrum, SpectralResult) else tuple(spectrum)
    lam1 = vals[0]
    return certificate("rho_lambda1", (2.0 * body.inradius) ** -2, lam1, (body, lam1), tolerance=max(allowance * lam1, GEOMETRIC_TOL))


def check_cube_counting(dim: int, k: int, spectrum: Sequence[float] | None = None) -> InequalityCertificate:
    """Counting bound for the unit-perimeter cube, exact lattice spectrum."""
    if dim not in (2, 3):
        raise ValueError("cube counting checks use dim 2 or 3")
    if not 1 <= k <= 10000:
        raise ValueError("k must lie in [1, 10000]")
    a = analytic.cube_side_unit_perimeter(dim)
    lam = spectrum[k - 1] if spectrum is not None else analytic.box_eigenvalues([a] * dim, k)[-1]
    bound = 4.0 * math.pi**2 * dim / a**2 * k ** (2.0 / dim)
    return certificate("eq63", lam, bound, ("cube", dim, k), tolerance=GEOMETRIC_TOL * bound, label=f"m={dim},k={k}")


def check_cube_counting_all(dim: int, kmax: int) -> list[InequalityCertificate]:
    a = analytic.cube_side_unit_perimeter(dim)
    spec = analytic.box_eigenvalues([a] * dim, kmax)
    return [check_cube_counting(dim, k, spec) for k in range(1, kmax + 1)]


def threshold_bounds(dim: int) -> dict[str, float]:
    m = dim
    om = analytic.unit_ball_volume(m)
    return {
        "mu_lower": m * om ** (1.0 / m),
        "pi_upper": m ** (-m / (m - 1.0)) * om ** (-1.0 / (m - 1)),
        "pi_lower": (2.0 * m) ** (-m / (m - 1.0)) * (m + 2.0) ** (-m / 2.0) / om,
    }


def check_thresholds(dim: int, mu_k: float | None, pi_k: float | None, k: int | None = None, estimate: bool = False) -> list[InequalityCertificate]:
    """Bounds on the perimeter of measure minimisers (mu_k) and the measure
    of perimeter minimisers (pi_k)."""
    if mu_k is None or pi_k is None:
        raise MissingEstimate("both mu_k and pi_k are required")
    b = threshold_bounds(dim)
    label = ("estimate " if estimate else "") + (f"k={k}" if k is not None else "")
    tol = GEOMETRIC_TOL
    return [
        certificate("thm12iv", b["mu_lower"], mu_k, (dim, k, mu_k), tolerance=tol * max(1.0, mu_k), label=label),
        certificate("thm12v", pi_k, b["pi_upper"], (dim, k, pi_k), tolerance=tol, label=label),
        certificate("thm12vi", b["pi_lower"], pi_k, (dim, k, pi_k), tolerance=tol, label=label),
    ]


# -- randomised suite ----------------------------------------------------------

CSV_COLUMNS = ("inequality_id", "body_digest", "lhs", "rhs", "slack", "tolerance", "pass")


@dataclass
class SuiteReport:
    seed: int
    samples: int
    rows: list[tuple[str, str, InequalityCertificate]] = field(default_factory=list)

    def add(self, body_digest: str, cert: InequalityCertificate) -> None:
        self.rows.append((cert.key, body_digest, cert))

    @property
    def violations(self) -> list[tuple[str, str, InequalityCertificate]]:
        return [r for r in self.rows if not r[2].passed]

    def min_slack(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for key, _, c in self.rows:
            base = c.id
            out[base] = min(out.get(base, math.inf), c.slack)
        return out

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for _, _, c in self.rows:
            out[c.id] = out.get(c.id, 0) + 1
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for key, dig, c in self.rows:
                w.writerow([key, dig, f"{c.lhs:.17g}", f"{c.rhs:.17g}", f"{c.slack:.17g}", f"{c.tolerance_used:.17g}", int(c.passed)])


def perturbed_pair(rng: np.random.Generator, a: ConvexBody) -> ConvexBody:
    """A convex body within Hausdorff distance rho(a)/2 of ``a``."""
    rho = a.inradius
    s = rng.uniform(0.05, 0.6) * rho
    jitter = rng.standard_normal(a.vertices.shape)
    while True:
        b = make_body(a.vertices + s * jitter)
        if hausdorff_distance(a, b) <= 0.5 * rho:
            return b
        s *= 0.5


def geometric_checks(body: ConvexBody, funcs, t_stars) -> list[InequalityCertificate]:
    certs = check_lemma31(body)
    certs += check_diameter_bounds(body)
    certs.append(check_moment_isoperimetric(body))
    certs += [check_t_star(body, f, t) for f, t in zip(funcs, t_stars)]
    return certs


def run_suite(
    seed: int,
    samples: int,
    cfg: SolverConfig = SolverConfig(resolution=64, k=4),
    suite: str = "all",
    spectral_samples: int = 100,
    cube_kmax: int = 1000,
    progress=None,
) -> SuiteReport:
    """Generate ``samples`` seeded random bodies and certify every inequality.

    ``suite`` selects geometry-only, spectral-only or all checks; spectral
    checks run on the first ``spectral_samples`` bodies.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if suite not in ("geometry", "spectral", "all"):
        raise ValueError(f"unknown suite {suite!r}")
    rng = np.random.default_rng(seed)
    funcs = [functionals.builtin(n) for n in ("measure", "perimeter", "moment")]
    t_stars = [functionals.t_star(f).t_star for f in funcs]
    report = SuiteReport(seed, samples)
    geometric = suite in ("geometry", "all")
    spectral = suite in ("spectral", "all")
    allowance = rel_allowance(cfg)
    for i in range(samples):
        a = random_body(rng)
        b = perturbed_pair(rng, a)
        dig = a.digest()
        if geometric:
            for c in geometric_checks(a, funcs, t_stars):
                report.add(dig, c)
            for c in check_lemma32_geometric(a, b, funcs):
                report.add(dig, c)
        if spectral and i < spectral_samples:
            spec_a = eigenvalues_normalized(a, cfg)
            spec_b = eigenvalues_normalized(b, cfg)
            for c in check_li_yau(spec_a, a.measure, 2, allowance):
                report.add(dig, c)
            report.add(dig, check_convex_lambda1(a, spec_a, allowance))
            for k in range(1, cfg.k + 1):
                report.add(dig, check_lemma32(a, b, k, cfg, funcs=[], spectra=(spec_a.eigenvalues, spec_b.eigenvalues))[-1])
        if progress is not None:
            progress(i)
    if geometric:
        for dim in (2, 3):
            for c in check_cube_counting_all(dim, cube_kmax):
                report.add(digest("cube", dim), c)
    return report
