"""Command-line interface: ``eval``, ``check``, ``optimize``, ``jk-curve`` and
``thresholds``.

Exit codes: 0 ok, 1 inequality violations, 2 usage or input error,
3 numerical failure.  Files carry the data; stdout gets summary lines only.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__, analytic, functionals, inequalities, variational
from .analytic import AnalyticBody
from .errors import (
    DegenerateInput,
    EigenshapeError,
    HypothesisFailed,
    ResolutionTooCoarse,
    SolverNoConvergence,
    UnknownFunctional,
    UnsupportedDimension,
)
from .geometry import BodyUnion, ConvexBody
from .spectral import SolverConfig, eigenvalues, eigenvalues_union, rel_allowance

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "seed": 0,
    "threads": None,
    "k": 4,
    "resolution": 128,
    "extrapolate": True,
    "suite": "all",
    "samples": 1000,
    "spectral_samples": 100,
    "check_resolution": 64,
    "cube_kmax": 1000,
    "problem": "Ik",
    "functional": "perimeter",
    "c": None,
    "components": None,
    "restarts": 2,
    "max_evals": 400,
    "search_resolution": 32,
    "final_resolution": 128,
    "modes": 8,
    "start_extremal": True,
    "cmin": 1.0,
    "cmax": 6.0,
    "steps": 11,
    "grid": None,
}


class UsageError(Exception):
    pass


# -- serialisation -----------------------------------------------------------

def dump_json(data, path: Path) -> None:
    # repr floats are the shortest strings that round-trip exactly
    text = json.dumps(data, indent=2, sort_keys=True, allow_nan=True)
    path.write_text(text + "\n", encoding="utf-8")


def file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(path: Path, command: str, config: dict, inputs: dict[str, str], outputs: list[Path]) -> None:
    dump_json(
        {
            "command": command,
            "config": config,
            "seed": config.get("seed"),
            "inputs": inputs,
            "outputs": {str(p.name): file_digest(p) for p in outputs},
            "version": __version__,
        },
        path,
    )


def load_body(path: str):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read body JSON {path}: {exc}") from exc
    if not isinstance(data, dict) or "type" not in data:
        raise UsageError("body JSON must be an object with a 'type' key")
    try:
        kind = data["type"]
        if kind == "polygon":
            return ConvexBody.from_dict(data)
        if kind == "union":
            return BodyUnion.from_dict(data)
        return AnalyticBody.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid body JSON: {exc}") from exc


def read_config(path: str | None) -> dict:
    """key=value lines; '#' starts a comment."""
    if path is None:
        return {}
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _coerce(key: str, raw):
    if raw is None or not isinstance(raw, str):
        return raw
    default = DEFAULTS.get(key)
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, int) or key in ("threads", "components", "seed"):
            return int(raw)
        if isinstance(default, float) or key == "c":
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"{key}: {exc}") from exc
    return raw


def resolve(args: argparse.Namespace) -> dict:
    """flags > config file > defaults."""
    cfg = read_config(args.config)
    out = {}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None and key in cfg:
            val = _coerce(key, cfg[key])
        out[key] = default if val is None else val
    if out["threads"] is None:
        out["threads"] = os.cpu_count() or 1
    return out


# -- eval --------------------------------------------------------------------

def _analytic_from_args(args) -> AnalyticBody:
    kind = args.analytic
    dim = args.dim
    try:
        if kind == "ball":
            if args.radius is None:
                raise UsageError("--analytic ball needs --radius")
            return analytic.ball(dim, args.radius)
        if kind == "cube":
            if args.side is None:
                raise UsageError("--analytic cube needs --side")
            return analytic.cube(dim, args.side)
        if not args.sides:
            raise UsageError("--analytic rectangle needs --sides")
        return analytic.box([float(s) for s in args.sides.split(",")])
    except (DegenerateInput, UnsupportedDimension, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(str(exc)) from exc


def _summary(body) -> dict:
    d = {
        "measure": body.measure,
        "perimeter": body.perimeter,
        "moment": body.moment,
        "inradius": body.inradius,
        "diameter": body.diameter,
    }
    if isinstance(body, (ConvexBody, BodyUnion)):
        d["centroid"] = [float(x) for x in body.centroid]
    return d


def _eval_certificates(body, spectrum, allowance: float) -> list[inequalities.InequalityCertificate]:
    certs = []
    convex = isinstance(body, (ConvexBody, AnalyticBody))
    m = body.dim if isinstance(body, AnalyticBody) else 2
    if convex and m >= 2:
        certs += inequalities.check_lemma31(body)
        certs += inequalities.check_diameter_bounds(body)
        certs.append(inequalities.check_moment_isoperimetric(body))
    if spectrum:
        certs += inequalities.check_li_yau(spectrum, body.measure, m, allowance)
        if convex:
            certs.append(inequalities.certificate("rho_lambda1", (2.0 * body.inradius) ** -2, spectrum[0], (body.inradius, spectrum[0]), tolerance=max(allowance * spectrum[0], 1e-9)))
    return certs


def cmd_eval(args, conf: dict) -> int:
    if args.analytic:
        body = _analytic_from_args(args)
        source = {"analytic": json.dumps(body.to_dict(), sort_keys=True)}
    elif args.body:
        body = load_body(args.body)
        source = {"body": file_digest(Path(args.body))}
    else:
        raise UsageError("eval needs a body JSON path or --analytic")
    k = conf["k"]
    if k < 1:
        raise UsageError("--k must be >= 1")
    if isinstance(body, AnalyticBody):
        if body.kind == "ball" and body.dim not in (2, 3):
            spectrum, spec_dict = [], {"eigenvalues": [], "note": "ball spectra are tabulated for dim 2 and 3"}
        else:
            spectrum = body.eigenvalues(k)
            spec_dict = {"eigenvalues": spectrum, "method": "closed form"}
        allowance = 0.0
    else:
        cfg = SolverConfig(resolution=conf["resolution"], k=k, extrapolate=conf["extrapolate"])
        res = eigenvalues(body, cfg) if isinstance(body, ConvexBody) else eigenvalues_union(body, cfg)
        spectrum = list(res.eigenvalues)
        spec_dict = res.as_dict()
        allowance = rel_allowance(cfg)
    certs = _eval_certificates(body, spectrum, allowance)
    out = Path(args.out)
    dump_json(
        {
            "body": body.to_dict(),
            "summary": _summary(body),
            "spectrum": spec_dict,
            "certificates": [c.as_dict() for c in certs],
        },
        out,
    )
    write_manifest(out.with_suffix(".manifest.json"), "eval", conf, source, [out])
    failed = [c for c in certs if not c.passed]
    print(f"eval: {len(spectrum)} eigenvalues, {len(certs)} certificates, {len(failed)} failed -> {out}")
    return EXIT_VIOLATION if failed else EXIT_OK


# -- check -------------------------------------------------------------------

def cmd_check(args, conf: dict) -> int:
    if conf["samples"] < 1:
        raise UsageError("--samples must be >= 1")
    if conf["suite"] not in ("geometry", "spectral", "all"):
        raise UsageError("--suite must be geometry, spectral or all")
    cfg = SolverConfig(resolution=conf["check_resolution"], k=4)
    report = inequalities.run_suite(conf["seed"], conf["samples"], cfg, conf["suite"], conf["spectral_samples"], conf["cube_kmax"])
    out = Path(args.out)
    report.write_csv(out)
    write_manifest(out.with_suffix(".manifest.json"), "check", conf, {}, [out])
    viol = report.violations
    for ident, slack in sorted(report.min_slack().items()):
        print(f"{ident:12s} min slack {slack:+.6g}")
    print(f"check: {len(report.rows)} certificates, {len(viol)} violations -> {out}")
    return EXIT_VIOLATION if viol else EXIT_OK


# -- optimize ----------------------------------------------------------------

def _optimizer_config(conf: dict) -> variational.OptimizerConfig:
    try:
        return variational.OptimizerConfig(
            search_resolution=conf["search_resolution"],
            final_resolution=conf["final_resolution"],
            modes=conf["modes"],
            restarts=conf["restarts"],
            max_evals=conf["max_evals"],
            threads=conf["threads"],
            start_extremal=conf["start_extremal"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _problem(conf: dict) -> variational.VariationalProblem:
    kind = conf["problem"]
    k = conf["k"]
    f = None
    if kind in ("Ik", "Lk", "Nk", "Hk", "Tk"):
        try:
            f = functionals.parse(conf["functional"])
        except (UnknownFunctional, KeyError) as exc:
            raise UsageError(f"unknown functional {conf['functional']!r}") from exc
    c = conf["c"]
    comps = conf["components"]
    if kind in ("Jk", "Mk", "Pk"):
        comps = k if comps is None else comps
        if kind == "Pk" and c is None:
            c = 1.0
    else:
        comps = 1
    try:
        return variational.VariationalProblem(kind, k, f, c, comps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_optimize(args, conf: dict) -> int:
    problem = _problem(conf)
    opt = _optimizer_config(conf)
    run = variational.optimize(problem, opt, conf["seed"])
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_path = out_dir / "run.json"
    hist_path = out_dir / "history.csv"
    body_path = out_dir / "minimizer.json"
    hist_path.write_text(run.history_csv(), encoding="utf-8")
    dump_json(run.minimizer.components[0].to_dict() if len(run.minimizer.components) == 1 else run.minimizer.to_dict(), body_path)
    data = run.as_dict()
    data["history_csv"] = hist_path.name
    data["optimizer"] = opt.as_dict() | {"threads": None}
    if problem.kind in ("Hk", "Tk") and problem.functional is not None:
        f = problem.functional
        data["scaling"] = {"n_tau": variational.n_tau(f.tau)}
    dump_json(data, run_path)
    write_manifest(out_dir / "manifest.json", "optimize", conf, {}, [run_path, hist_path, body_path])
    print(f"optimize {problem.kind} k={problem.k}: value {run.value:.10g} ({run.diagnostics['eigensolves']} eigensolves) -> {out_dir}")
    return EXIT_OK


# -- jk-curve ----------------------------------------------------------------

def _grid(conf: dict) -> list[float]:
    if conf["grid"]:
        try:
            return [float(x) for x in str(conf["grid"]).split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(f"--grid: {exc}") from exc
    lo, hi, n = conf["cmin"], conf["cmax"], conf["steps"]
    if not (0 < lo < hi) or n < 2:
        raise UsageError("need 0 < cmin < cmax and steps >= 2")
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def cmd_jk_curve(args, conf: dict) -> int:
    grid = _grid(conf)
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] <= 0:
        raise UsageError("c grid must be positive and strictly increasing")
    opt = _optimizer_config(conf)
    points = variational.jk_curve(conf["k"], grid, opt, conf["seed"], conf["components"])
    out = Path(args.out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["c", "J_k", "raw", "regime_label"])
        for p in points:
            w.writerow([f"{p.c:.17g}", f"{p.value:.17g}", f"{p.raw:.17g}", p.regime])
    write_manifest(out.with_suffix(".manifest.json"), "jk-curve", conf, {}, [out])
    print(f"jk-curve k={conf['k']}: {len(points)} points -> {out}")
    return EXIT_OK


# -- thresholds --------------------------------------------------------------

def cmd_thresholds(args, conf: dict) -> int:
    k = conf["k"]
    opt = _optimizer_config(conf)
    est = variational.estimate_thresholds(k, opt, conf["seed"])
    certs = inequalities.check_thresholds(2, est.mu_k, est.pi_k, k, est.estimate)
    out = Path(args.out)
    dump_json({"k": k, "mu_k": est.mu_k, "pi_k": est.pi_k, "method": est.method, "certificates": [c.as_dict() for c in certs]}, out)
    write_manifest(out.with_suffix(".manifest.json"), "thresholds", conf, {}, [out])
    failed = [c for c in certs if not c.passed]
    print(f"thresholds k={k}: mu={est.mu_k:.10g} pi={est.pi_k:.10g} ({est.method}), {len(failed)} failed -> {out}")
    return EXIT_VIOLATION if failed else EXIT_OK


# -- parser ------------------------------------------------------------------

def _bool_flag(p, name: str, dest: str, help_text: str) -> None:
    p.add_argument(f"--{name}", dest=dest, action="store_const", const=True, default=None, help=help_text)
    p.add_argument(f"--no-{name}", dest=dest, action="store_const", const=False)


def _optimizer_flags(p) -> None:
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-evals", dest="max_evals", type=int, help="eigensolves per restart")
    p.add_argument("--search-resolution", dest="search_resolution", type=int)
    p.add_argument("--final-resolution", dest="final_resolution", type=int)
    p.add_argument("--modes", type=int, help="highest Fourier mode of the support heights")
    _bool_flag(p, "start-extremal", "start_extremal", "also start from the extremal ball (default on)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--config", help="key=value file; flags override it")

    ap = argparse.ArgumentParser(prog="eigenshape", description="Dirichlet eigenvalue shape optimisation and inequality certificates.", parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="functionals, spectrum and certificates of one body")
    p.add_argument("body", nargs="?", help="body JSON")
    p.add_argument("--analytic", choices=("ball", "cube", "rectangle"))
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--radius", type=float)
    p.add_argument("--side", type=float)
    p.add_argument("--sides", help="comma separated side lengths")
    p.add_argument("--k", type=int)
    p.add_argument("--resolution", type=int)
    _bool_flag(p, "extrapolate", "extrapolate", "Richardson step (default on)")
    p.add_argument("--out", default="eval.json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", parents=[common], help="randomised inequality suite")
    p.add_argument("--suite", choices=("geometry", "spectral", "all"))
    p.add_argument("--samples", type=int)
    p.add_argument("--spectral-samples", dest="spectral_samples", type=int)
    p.add_argument("--resolution", dest="check_resolution", type=int)
    p.add_argument("--cube-kmax", dest="cube_kmax", type=int)
    p.add_argument("--out", default="check.csv")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("optimize", parents=[common], help="shape optimisation run")
    p.add_argument("--problem", choices=variational.KINDS)
    p.add_argument("--functional")
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--components", type=int)
    _optimizer_flags(p)
    p.add_argument("--out-dir", dest="out_dir", default="run")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("jk-curve", parents=[common], help="J_k(c) along a grid of c")
    p.add_argument("--k", type=int)
    p.add_argument("--cmin", type=float)
    p.add_argument("--cmax", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--grid", help="explicit comma separated c values")
    p.add_argument("--components", type=int)
    _optimizer_flags(p)
    p.add_argument("--out", default="jk_curve.csv")
    p.set_defaults(func=cmd_jk_curve)

    p = sub.add_parser("thresholds", parents=[common], help="mu_k and pi_k with their certificates")
    p.add_argument("--k", type=int)
    _optimizer_flags(p)
    p.add_argument("--out", default="thresholds.json")
    p.set_defaults(func=cmd_thresholds)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        conf = resolve(args)
        code = args.func(args, conf)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverNoConvergence, ResolutionTooCoarse, HypothesisFailed) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DegenerateInput, UnsupportedDimension, UnknownFunctional) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EigenshapeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wall time {time.perf_counter() - started:.2f} s")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
