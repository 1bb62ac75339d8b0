"""Command-line front end.

Exit codes: 0 when every asserted invariant passes, 1 when one fails,
2 for configuration errors and 3 for domain or singularity errors. Claim
comparisons produce verdicts and never change the exit code.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .analysis import ARCS, CASES, horizon_extent, metric_shape, trace_horizon_branch
from .catalog import (BUILDERS, IDENTITY_NAMES, g00_bound_check, g00_lower_bound, get_metric,
                      property1_residuals, pullback_audit, sample_regular_points)
from .catalog.identities import THETA_BAND
from .constructor import (CASCADE_ORDER, CLOSED_FORM_SIGN, TypeITemplate, cascade_residual_report,
                          g11_closed_form, parse_ansatz, solve_v, template_from_ansatz,
                          v_from_ansatz)
from .dsl.parser import parse_metric_document
from .dsl.spec import Chart, MetricSpec
from .errors import (BracketError, DomainError, HorizonInfeasible, MetricSyntaxError,
                     ProvisoError, QuadratureError)
from .geometry import (bundle_discrepancy, curvature_at, fd_curvature_oracle, field_residual_at,
                       map_points, metric_at)
from .report import horizon_csv, horizon_svg, to_json
from .sampling import sample_points

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3

AGREES, DISAGREES, NOT_APPLICABLE = "AGREES_WITH_PAPER", "DISAGREES", "NOT_APPLICABLE"

DEFAULT_SEED = 42
DEFAULT_SAMPLES = {"verify": 100, "identities": 1000, "horizons": 200, "construct": 20}
DEFAULT_TOL = {"verify": 1e-6, "identities": 1e-10, "horizons": 1e-12, "construct": 1e-6}

CLAIM_RTOL = 1e-10  # relative size below which a claimed-zero field counts as zero
PULLBACK_TOL = 1e-8
SYMMETRY_TOL = 1e-9
MINKOWSKI_TOL = 1e-12
SCHWARZSCHILD_RICCI_TOL = 1e-9
SCHWARZSCHILD_K_TOL = 1e-8
G11_TOL = 1e-8
PULLBACK_SAMPLES = 20

TIME_PERIODIC = ("time-periodic", "time-periodic-tilde")


class ConfigError(Exception):
    pass


# -- configuration --------------------------------------------------------------------

def parse_param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    name = name.strip()
    if not sep or not name:
        raise ConfigError(f"--param expects name=value, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise ConfigError(f"--param {name}: {value!r} is not a number") from None


def load_metric(source: str, params: dict[str, float]) -> MetricSpec:
    """Catalog entry or path to a ``.gmet`` document, with overrides applied."""
    if source in BUILDERS:
        try:
            return get_metric(source, **params)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigError(f"unknown metric {source!r}: not a catalog name "
                              f"({', '.join(sorted(BUILDERS))}) and not a file")
        spec = parse_metric_document(path.read_text("utf-8"))
    try:
        return spec.with_params(**params) if params else spec
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]) if exc.args else str(exc)) from None


def config_echo(args, command: str) -> dict:
    return {
        "command": command,
        "metric": args.metric,
        "params": dict(sorted(args.params.items())),
        "lambda": args.lam,
        "samples": args.samples,
        "seed": args.seed,
        "tol": args.tol,
    }


# -- verify ---------------------------------------------------------------------------

def _calibration() -> dict:
    mink = get_metric("minkowski")
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for pt in rng.uniform(-5, 5, size=(5, 4)):
        worst = max(worst, curvature_at(mink, None, pt).max_abs())
    schw = get_metric("schwarzschild", mu=1.0)
    rows, ok = [], True
    for r in (3.0, 5.0, 10.0):
        b = curvature_at(schw, None, (0.0, r, math.pi / 2, 0.0))
        expected = 48.0 / r ** 6
        rel = abs(b.kretschmann - expected) / expected
        ricci = float(np.max(np.abs(b.ricci)))
        ok &= ricci <= SCHWARZSCHILD_RICCI_TOL and rel <= SCHWARZSCHILD_K_TOL
        rows.append({"r": r, "max_abs_ricci": ricci, "kretschmann": b.kretschmann,
                     "kretschmann_expected": expected, "kretschmann_rel_error": rel})
    return {
        "minkowski": {"max_abs_component": worst, "tol": MINKOWSKI_TOL,
                      "pass": worst <= MINKOWSKI_TOL},
        "schwarzschild": {"mu": 1.0, "points": rows, "ricci_tol": SCHWARZSCHILD_RICCI_TOL,
                          "kretschmann_rel_tol": SCHWARZSCHILD_K_TOL, "pass": bool(ok)},
    }


def _pipeline_stats(bundles, residuals) -> dict:
    res = np.array([np.max(np.abs(r)) for r in residuals])
    return {
        "field_residual": {"max": float(res.max()), "mean": float(res.mean())},
        "riemann_max_abs": max(float(np.max(np.abs(b.riemann_low))) for b in bundles),
        "ricci_max_abs": max(float(np.max(np.abs(b.ricci))) for b in bundles),
        "scalar_max_abs": max(abs(b.scalar) for b in bundles),
        "kretschmann_max_abs": max(abs(b.kretschmann) for b in bundles),
    }


def _claim_sizes(bundle, residual) -> dict[str, float]:
    """Each claimed-zero field at one point, relative to the size of the terms
    that must cancel for it to vanish (squared for the quadratic invariant)."""
    s = 1.0 + bundle.term_scale
    return {
        "field_equation_residual_vanishes": float(np.max(np.abs(residual))) / s,
        "riemann_vanishes": float(np.max(np.abs(bundle.riemann_low))) / s,
        "ricci_vanishes": float(np.max(np.abs(bundle.ricci))) / s,
        "kretschmann_vanishes": abs(bundle.kretschmann) / s ** 2,
    }


def _verdict(applicable: bool, vanishes: bool) -> str:
    if not applicable:
        return NOT_APPLICABLE
    return AGREES if vanishes else DISAGREES


def _pullback_block(spec: MetricSpec, params: dict, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    audits, attempts = [], 0
    while len(audits) < PULLBACK_SAMPLES and attempts < 50 * PULLBACK_SAMPLES:
        attempts += 1
        pt = (rng.uniform(-1, 1), rng.uniform(-1, 1),
              rng.uniform(THETA_BAND, math.pi - THETA_BAND), rng.uniform(0, 2 * math.pi))
        try:
            audits.append(pullback_audit(params, pt))
        except DomainError:
            continue
    if not audits:
        raise DomainError("no regular points found for the pullback audit")
    by_entry = np.max(np.stack([np.abs(a.discrepancy) for a in audits]), axis=0)
    scale = 1.0 + max(float(np.max(np.abs(a.tilde_metric))) for a in audits)
    worst = float(np.max(by_entry))
    return {
        "points": len(audits),
        "max_abs": worst,
        "max_rel": worst / scale,
        "max_abs_by_entry": by_entry.tolist(),
        "tol": PULLBACK_TOL,
        "verdict": AGREES if worst / scale <= PULLBACK_TOL else DISAGREES,
    }


def run_verify(args) -> tuple[dict, int]:
    spec = load_metric(args.metric, args.params)
    params = spec.resolve_params()
    pts = sample_points(spec, params, args.samples, args.seed)

    def one(pt):
        jet = curvature_at(spec, params, pt)
        orc = fd_curvature_oracle(spec, params, pt)
        res_j = jet.einstein + args.lam * jet.g
        res_o = orc.einstein + args.lam * orc.g
        return jet, orc, res_j, res_o

    results = map_points(one, list(pts), args.workers)
    jets = [r[0] for r in results]
    orcs = [r[1] for r in results]
    disc = max(bundle_discrepancy(j, o) for j, o in zip(jets, orcs))
    sym = max(max(j.symmetry_residuals().values()) for j in jets)
    jet_stats = _pipeline_stats(jets, [r[2] for r in results])
    orc_stats = _pipeline_stats(orcs, [r[3] for r in results])
    calib = _calibration()

    invariants = {
        "calibration_minkowski": calib["minkowski"]["pass"],
        "calibration_schwarzschild": calib["schwarzschild"]["pass"],
        "pipeline_agreement": {"value": disc, "tol": args.tol, "pass": disc <= args.tol},
        "riemann_symmetries": {"value": sym, "tol": SYMMETRY_TOL, "pass": sym <= SYMMETRY_TOL},
    }
    applicable = spec.name in TIME_PERIODIC or spec.name == "minkowski"
    sizes = [_claim_sizes(j, r[2]) for j, r in zip(jets, results)]
    claims = {}
    for key, field in (("field_equation_residual_vanishes", "field_residual"),
                       ("riemann_vanishes", "riemann_max_abs"),
                       ("ricci_vanishes", "ricci_max_abs"),
                       ("kretschmann_vanishes", "kretschmann_max_abs")):
        measured = jet_stats[field]["max"] if field == "field_residual" else jet_stats[field]
        rel = max(z[key] for z in sizes)
        claims[key] = {"measured_max_abs": measured, "measured_max_rel": rel,
                       "rel_threshold": CLAIM_RTOL,
                       "verdict": _verdict(applicable, rel <= CLAIM_RTOL)}
    if spec.name in TIME_PERIODIC:
        claims["pullback"] = _pullback_block(spec, params, args.seed)
    else:
        claims["pullback"] = {"verdict": NOT_APPLICABLE}

    passed = all(v if isinstance(v, bool) else v["pass"] for v in invariants.values())
    report = {
        "engine_version": __version__,
        "config": config_echo(args, "verify"),
        "metric_name": spec.name,
        "resolved_params": dict(sorted(params.items())),
        "calibration": calib,
        "pipelines": {"jet": jet_stats, "oracle": orc_stats},
        "invariants": invariants,
        "claims": claims,
        "pass": passed,
    }
    return report, EXIT_OK if passed else EXIT_FAIL


# -- identities -----------------------------------------------------------------------

def _time_periodic_params(args) -> dict[str, float]:
    if args.metric != "time-periodic":
        raise ConfigError("this command works on the 'time-periodic' catalog metric only")
    return load_metric(args.metric, args.params).resolve_params()


def run_identities(args) -> tuple[dict, int]:
    params = _time_periodic_params(args)
    pts = sample_regular_points(params, args.samples, args.seed)
    rows = map_points(lambda p: property1_residuals(params, p).values, list(pts), args.workers)
    worst = np.max(np.abs(np.array(rows)), axis=0)
    table = {name: {"max_abs": float(w), "pass": bool(w <= args.tol)}
             for name, w in zip(IDENTITY_NAMES, worst)}
    n_pass = sum(v["pass"] for v in table.values())
    min_g = g00_bound_check(params, samples=max(args.samples, 1), seed=args.seed)
    bound = g00_lower_bound(params["eps"])
    g00_ok = min_g >= bound - 1e-12
    passed = n_pass == len(table) and g00_ok
    report = {
        "engine_version": __version__,
        "config": config_echo(args, "identities"),
        "resolved_params": dict(sorted(params.items())),
        "identities": table,
        "identities_passed": f"{n_pass}/{len(table)}",
        "failed": [n for n, v in table.items() if not v["pass"]],
        "g00_bound": {"min_g00": min_g, "bound": bound, "pass": g00_ok},
        "pass": passed,
    }
    return report, EXIT_OK if passed else EXIT_FAIL


# -- horizons -------------------------------------------------------------------------

def _split(text: str, allowed: Sequence[str], flag: str) -> list[str]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    bad = [x for x in items if x not in allowed]
    if bad:
        raise ConfigError(f"{flag}: unknown value(s) {bad}; choose from {list(allowed)}")
    return items


def horizon_run(args):
    params = _time_periodic_params(args)
    eps, m = params["eps"], params["m"]
    if not (eps > 0 and m > 0):
        raise ConfigError(f"horizons need eps > 0 and m > 0 (got eps={eps}, m={m})")
    cases = _split(args.cases, CASES, "--cases")
    arcs = _split(args.arcs, ARCS, "--arcs")
    ks = range(args.k_min, args.k_max + 1)
    branches, notices, markers = [], [], {}
    for case in cases:
        try:
            ext = horizon_extent(params, case)
        except HorizonInfeasible as exc:
            notices.append(f"{exc} (ratio={exc.ratio:.17g})")
            markers[case] = [("m", m)]
            continue
        if case == "I":
            markers[case] = [("r-", ext.r_hi), ("m", m)]
        else:
            markers[case] = [("m", m), ("r0", ext.r_lo), ("r+", ext.r_hi)]
        for k in ks:
            for arc in arcs:
                branches.append(trace_horizon_branch(params, k, case, arc, args.samples))
    return params, cases, branches, notices, markers


def run_horizons(args) -> tuple[dict | str | dict[str, str], int]:
    params, cases, branches, notices, markers = horizon_run(args)
    worst = max((b.max_residual() for b in branches), default=0.0)
    code = EXIT_OK if worst <= args.tol else EXIT_FAIL
    if args.format == "csv":
        return horizon_csv(branches, notices), code
    if args.format == "svg":
        return {case: horizon_svg([b for b in branches if b.case == case], markers[case],
                                  f"horizon candidate set, case {case}",
                                  [n for n in notices if n.startswith(f"case {case} ")])
                for case in cases}, code
    summary = [{"case": b.case, "k": b.k, "arc": b.arc, "r_lo": b.r_lo, "r_hi": b.r_hi,
                "t_start": b.t_start, "t_end": b.t_end, "trend": b.trend,
                "max_abs_f": b.max_residual(), "samples": len(b.r)}
               for b in sorted(branches, key=lambda b: (b.case, b.k, b.arc))]
    report = {"engine_version": __version__, "config": config_echo(args, "horizons"),
              "resolved_params": dict(sorted(params.items())), "notices": notices,
              "markers": {c: [[lab, v] for lab, v in mk] for c, mk in markers.items()},
              "branches": summary, "max_abs_f": worst, "pass": code == EXIT_OK}
    return report, code


# -- construct ------------------------------------------------------------------------

def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"--x-range expects lo,hi, got {text!r}") from None
    if not hi > lo:
        raise ConfigError("--x-range needs lo < hi")
    return lo, hi


def _ansatz_block(args) -> dict:
    ansatz = parse_ansatz(args.ansatz, args.rho_t, args.sigma_t, args.v0)
    chart = Chart(("t", "x", "y", "z"))
    template = template_from_ansatz(ansatz, chart)
    lo, hi = _parse_range(args.x_range)
    x0 = lo if args.x0 is None else args.x0
    v_x0 = v_from_ansatz(ansatz, (0.0, x0, 0.0, 0.0))
    sol = solve_v(template, (lo, hi), x0, v_x0, n_grid=args.grid)
    closed = np.array([v_from_ansatz(ansatz, (0.0, x, 0.0, 0.0)) for x in sol.x])
    rel = np.abs(sol.v - closed) / np.maximum(np.abs(closed), 1e-300)
    worst = float(np.max(rel))
    return {"f": args.ansatz, "rho_t": args.rho_t, "sigma_t": args.sigma_t, "v0": args.v0,
            "x": sol.x.tolist(), "v_quadrature": sol.v.tolist(), "v_closed_form": closed.tolist(),
            "max_rel_error": worst, "tol": args.tol, "pass": worst <= args.tol}


def _g11_block(spec: MetricSpec, params: dict, pts) -> dict:
    comp = spec.component
    template = TypeITemplate(chart=spec.chart, u=comp(0, 0), p=comp(0, 2), q=comp(0, 3),
                             rho=comp(2, 2), sigma=comp(3, 3), v=comp(0, 1),
                             parameters=tuple(sorted(params.items())))
    worst = 0.0
    for pt in pts:
        engine = field_residual_at(spec, params, pt)[1, 1]
        closed = CLOSED_FORM_SIGN * g11_closed_form(template, pt)
        worst = max(worst, abs(closed - engine) / max(abs(engine), 1.0))
    return {"closed_form_sign": CLOSED_FORM_SIGN, "max_rel_error": worst, "tol": G11_TOL,
            "pass": worst <= G11_TOL}


def run_construct(args) -> tuple[dict, int]:
    report = {"engine_version": __version__, "config": config_echo(args, "construct")}
    checks = []
    if args.ansatz is not None:
        block = _ansatz_block(args)
        report["ansatz"] = block
        checks.append(block["pass"])
    else:
        spec = load_metric(args.metric, args.params)
        params = spec.resolve_params()
        pts = sample_points(spec, params, args.samples, args.seed)
        cas = cascade_residual_report(spec, args.lam, pts, params, oracle=True,
                                      workers=args.workers)
        disc = cas.pipeline_discrepancy()
        report["metric_name"] = spec.name
        report["resolved_params"] = dict(sorted(params.items()))
        report["cascade"] = {
            "order": [lab for lab, _ in CASCADE_ORDER],
            "points": pts.tolist(),
            "residuals": {lab: row.tolist() for lab, row in zip(cas.labels, cas.residuals)},
            "max_abs": cas.max_abs(),
            "pipeline_discrepancy": disc,
            "pipeline_tol": args.tol,
        }
        checks.append(disc <= args.tol)
        report["shape"] = metric_shape(spec)
        if report["shape"] == "type-I":
            report["g11_closed_form"] = _g11_block(spec, params, pts)
            checks.append(report["g11_closed_form"]["pass"])
    report["pass"] = all(checks)
    return report, EXIT_OK if report["pass"] else EXIT_FAIL


# -- argument parsing -----------------------------------------------------------------

def _common(p: argparse.ArgumentParser, command: str, formats: Sequence[str]) -> None:
    p.add_argument("--metric", default=("time-periodic-tilde" if command == "construct"
                                        else "time-periodic"),
                   help="catalog name or path to a .gmet file")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                   help="parameter override (repeatable)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="cosmological constant")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES[command])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL[command])
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--workers", type=int, default=1,
                   help="threads for sample evaluation; output does not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tpgr", description="Curvature audits of metrics "
                                     "given in closed form, including the time-periodic family.")
    parser.add_argument("--version", action="version", version=f"tpgr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="calibration plus curvature audit of a metric")
    _common(p, "verify", ("json",))

    p = sub.add_parser("identities", help="helper-identity suite and g00 bound")
    _common(p, "identities", ("json",))

    p = sub.add_parser("horizons", help="trace horizon candidate sets")
    _common(p, "horizons", ("csv", "svg", "json"))
    p.add_argument("--k-min", type=int, default=0)
    p.add_argument("--k-max", type=int, default=2)
    p.add_argument("--cases", default="I,II")
    p.add_argument("--arcs", default="principal,conjugate")

    p = sub.add_parser("construct", help="Type-I construction checks and residual cascade")
    _common(p, "construct", ("json",))
    p.add_argument("--ansatz", default=None, metavar="F",
                   help="f(t, x) of the exponential ansatz; runs the quadrature comparison")
    p.add_argument("--rho-t", default="-1")
    p.add_argument("--sigma-t", default="-1")
    p.add_argument("--v0", default="1")
    p.add_argument("--x-range", default="0,1")
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--grid", type=int, default=20)
    return parser


COMMANDS: dict[str, Callable] = {
    "verify": run_verify,
    "identities": run_identities,
    "horizons": run_horizons,
    "construct": run_construct,
}


def _validate(args) -> None:
    if args.samples < 1 and args.command != "horizons":
        raise ConfigError("--samples must be at least 1")
    if args.command == "horizons" and args.samples < 2:
        raise ConfigError("--samples must be at least 2 for horizon tracing")
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    if not args.tol > 0:
        raise ConfigError("--tol must be positive")
    if args.command == "horizons" and args.format == "svg" and args.out is None:
        raise ConfigError("--format svg needs --out (one file is written per case)")
    args.params = dict(parse_param(p) for p in args.param)


def _emit(result, args) -> None:
    if isinstance(result, dict) and args.format == "svg":
        stem = Path(args.out)
        base = stem.with_suffix("") if stem.suffix == ".svg" else stem
        for case, text in result.items():
            target = base.parent / f"{base.name}-case-{case}.svg"
            target.write_text(text, encoding="utf-8")
            print(f"wrote {target}")
        return
    text = to_json(result) if isinstance(result, dict) else result
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        result, code = COMMANDS[args.command](args)
        _emit(result, args)
        return code
    except BrokenPipeError:
        # The reader went away (``| head``); stop quietly with the real verdict.
        # Point stdout at devnull so the interpreter's final flush stays silent.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return code
    except (ConfigError, MetricSyntaxError, OSError) as exc:
        print(f"tpgr: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProvisoError, QuadratureError, BracketError, DomainError) as exc:
        print(f"tpgr: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:  # invalid values reaching a builder or parser
        print(f"tpgr: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
