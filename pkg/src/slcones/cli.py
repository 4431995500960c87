"""Command-line interface: ``slcones <command> [options]``.

Exit status is 0 when every check passes, 1 when a verification or
identity check fails and 2 for usage or parameter errors.  Options may
also come from a flat ``key = value`` file given with ``--config``;
flags on the command line take precedence.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .errors import (CannotNormalizeError, DegenerateAlphaError, DegenerateLatticeError,
                     DomainError, InvalidLevelError, SlconesError)
from .io_utils import SCHEMA_VERSION, atomic_write_text, to_jsonable, write_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
log = logging.getLogger("slcones")


class UsageError(Exception):
    pass


# Errors that mean the requested parameters are outside the valid domain.
PARAMETER_ERRORS = (InvalidLevelError, DomainError, DegenerateAlphaError,
                    CannotNormalizeError, DegenerateLatticeError)


# ---------------------------------------------------------------- argument types

def _floats(text: str, n: int | None = None):
    try:
        vals = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def triple(text):
    return tuple(_floats(text, 3))


def pair(text):
    return tuple(_floats(text, 2))


def sweep_range(text):
    lo, hi, step = _floats(text, 3)
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("range must be lo,hi,step with lo <= hi and step > 0")
    return lo, hi, step


def positive_float(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def grid_size(text):
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("grid size must be at least 2")
    return n


def level(text):
    x = float(text)
    if not (math.isfinite(x) and -1.0 <= x <= 1.0):
        raise argparse.ArgumentTypeError(f"level {text} is outside [-1, 1]")
    return x


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


# ---------------------------------------------------------------- config

def read_config(path) -> dict:
    """Flat ``key = value`` pairs; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            key, value = (x.strip() for x in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _apply_config(sub: argparse.ArgumentParser, config: dict):
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in config.items():
        act = actions.get(key)
        if act is None or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        try:
            if isinstance(act, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                defaults[key] = _bool(raw)
            elif act.type is not None:
                defaults[key] = act.type(raw)
            else:
                defaults[key] = raw
            if act.choices is not None and defaults[key] not in act.choices:
                raise argparse.ArgumentTypeError(f"invalid choice {raw!r}")
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from exc
    sub.set_defaults(**defaults)


# ---------------------------------------------------------------- output

def _emit(payload: dict, path):
    if path:
        write_json(path, payload)
        log.info("wrote %s", path)
    else:
        data = {"schema_version": SCHEMA_VERSION}
        data.update(to_jsonable(payload))
        print(json.dumps(data, indent=2))


def _cone_params(args):
    from .cone2 import derive_params
    return derive_params(args.theta, args.b_level, args.c_level)


def _triple_params(args):
    from .cone3 import TripleParams, normalize_signs, solve_bg_from_alpha
    alpha = np.asarray(args.alpha, float)
    alpha = alpha / np.linalg.norm(alpha)
    beta, gamma = solve_bg_from_alpha(alpha)
    alpha, beta, gamma, _ = normalize_signs(alpha, beta, gamma)
    return TripleParams(tuple(alpha), tuple(beta), tuple(gamma),
                        args.a_level, args.b_level, args.c_level)


# ---------------------------------------------------------------- commands

def cmd_verify(args) -> int:
    if args.three:
        from .cone3 import GridSpec3, default_r_range, maximal_interval, verify_sl3
        from .strands import initial_state
        params = _triple_params(args)
        ca = params.coeffs()[0]
        interval = maximal_interval(ca, initial_state(ca, params.A))
        grid = GridSpec3(default_r_range(interval), n=args.grid)
        report = verify_sl3(params, grid, tol=args.tol)
        payload = report.to_dict()
        payload["relation_residuals"] = params.relation_residuals()
    else:
        from .cone2 import period_box_grid, verify_sl
        params = _cone_params(args)
        report = verify_sl(params, period_box_grid(params, n=args.grid), tol=args.tol)
        payload = report.to_dict()
    _emit(payload, args.out)
    log.info("worst residual %.3e (tol %.1e)", report.worst, args.tol)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_diagnose(args) -> int:
    from . import spectral
    from .diagnostics import diagnose
    params = _cone_params(args)
    rep, curve = diagnose(params, n_points=args.points, h=args.h, seed=args.seed,
                          curve_samples=args.curve_samples)
    if curve and (args.curve_csv or args.curve_json):
        if args.curve_csv:
            atomic_write_text(args.curve_csv, spectral.curve_to_csv(curve))
        if args.curve_json:
            blk = rep["blocks"]["curve"]
            write_json(args.curve_json, {"kind": "spectral_curve", "D": rep["blocks"]["spectral"]["D"],
                                         "E": rep["blocks"]["spectral"]["E"], "xi": rep["xi"],
                                         "involutions": blk["values"], "samples": blk["samples"]})
    _emit(rep, args.out)
    for name in rep["failed_blocks"]:
        log.warning("identity block failed: %s", name)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_torus_search(args) -> int:
    from .periodicity import (candidate_key, catalog_summary_csv, find_candidates,
                              finish_candidate, read_catalog, write_catalog)
    fixed, sweep = {}, {}
    if args.theta is not None:
        fixed["theta"] = args.theta
    if args.b_level is not None:
        fixed["B"] = args.b_level
    for name, rng in (("C", args.c_range), ("theta", args.theta_range), ("B", args.b_range)):
        if rng is not None:
            sweep[name] = rng
    records = read_catalog(args.out) if (args.resume and args.out) else []
    done = {candidate_key(r) for r in records}
    if records:
        log.info("resuming with %d catalogued records", len(records))
    cands = find_candidates(args.case, fixed, sweep, args.max_den, args.tol, args.limit,
                            args.workers)
    failed = 0
    for cand in cands:
        if candidate_key(cand) in done:
            continue
        rec = finish_candidate(cand, verify=not args.no_verify)
        if rec.verification is not None and rec.verification > args.verify_tol:
            failed += 1
        records.append(rec.to_dict())
        if args.out:
            write_catalog(args.out, records)
    if args.summary:
        atomic_write_text(args.summary, catalog_summary_csv(records))
    if not args.out:
        for r in records:
            print(json.dumps(to_jsonable(r), sort_keys=True))
    log.info("%d candidates (%d failed verification)", len(records), failed)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_mesh(args) -> int:
    from .mesh import grid_faces, project, quadric_residuals, write_mesh
    if args.three:
        from .cone3 import build_triple_strands, immersion3, maximal_interval
        from .strands import initial_state
        params = _triple_params(args)
        ca = params.coeffs()[0]
        interval = maximal_interval(ca, initial_state(ca, params.A))
        s_range = args.s_range or (0.0, 5.0)
        t_range = args.t_range or (0.0, 5.0)
        strands = build_triple_strands(params, (min(0.0, args.r), max(0.0, args.r)),
                                       s_range, t_range, interval=interval)
        S, T = np.meshgrid(np.linspace(*s_range, args.n), np.linspace(*t_range, args.n),
                           indexing="ij")
        pts = immersion3(params, strands, args.r, S, T).reshape(-1, 3)
        extra = {}
    else:
        from .mesh import sample_surface
        params = _cone_params(args)
        pts, strands = sample_surface(params, args.n, args.n, args.s_range, args.t_range, args.r)
        extra = {}
        if params.B == 0.0 and params.C == 0.0:
            lo, hi = strands.s_span, strands.t_span
            lit, mov = quadric_residuals(params, strands, np.linspace(*lo, args.n),
                                         np.linspace(*hi, args.n), args.r)
            extra = {"quadric_t0_row": lit, "quadric_moving_plane": mov}
    verts = project(pts, args.projection)
    faces = None if args.points_only else grid_faces(args.n, args.n)
    write_mesh(args.out, verts, faces, args.format,
               comment=f"projection {args.projection}")
    print(json.dumps(to_jsonable({"schema_version": SCHEMA_VERSION, "vertices": len(verts),
                                  "faces": 0 if faces is None else len(faces),
                                  "out": args.out, **extra})))
    return EXIT_OK


def cmd_area(args) -> int:
    from .cone2 import area, area_by_quadrature, build_strands, natural_periods
    params = _cone_params(args)
    S, T = natural_periods(params)
    S = S if S is not None else args.s_period
    T = T if T is not None else args.t_period
    if S is None or T is None:
        raise UsageError("constant potential: pass --s-period/--t-period")
    lat = np.asarray(args.lattice, dtype=int).reshape(2, 2)
    A = area(params, S, T, lat)
    payload = {"kind": "area", "params": params.to_dict(), "S": S, "T": T,
               "lattice": lat, "area": A}
    if args.quadrature:
        g1 = (lat[0, 0] * S, lat[0, 1] * T)
        g2 = (lat[1, 0] * S, lat[1, 1] * T)
        hi_s = abs(g1[0]) + abs(g2[0]) + 1.0
        hi_t = abs(g1[1]) + abs(g2[1]) + 1.0
        strands = build_strands(params, (-hi_s, hi_s), (-hi_t, hi_t), tol=1e-12)
        n = [max(48, int(40 * (abs(g[0]) / S + abs(g[1]) / T))) for g in (g1, g2)]
        Q = area_by_quadrature(params, strands, g1, g2, nodes=n)
        payload.update(area_quadrature=Q, relative_difference=abs(A - Q) / abs(A))
    _emit(payload, args.out)
    return EXIT_OK


def cmd_strand_trace(args) -> int:
    from .cone2 import derive_params
    from .strands import StrandCoefficients, initial_state, integrate_strand
    if args.coeffs is not None:
        coeffs = StrandCoefficients.of(args.coeffs)
    else:
        p = derive_params(args.theta, 0.0, 0.0)
        coeffs = StrandCoefficients.of(p.beta if args.strand == "y" else p.gamma)
    traj = integrate_strand(coeffs, initial_state(coeffs, args.level), args.span, tol=args.tol,
                            backend=args.backend)
    text = traj.to_csv(samples=np.linspace(*args.span, args.samples))
    if args.out:
        atomic_write_text(args.out, f"# schema_version {SCHEMA_VERSION}\n" + text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _cone_args(p, theta=1.0, b=0.3, c=0.4):
    p.add_argument("--theta", type=float, default=theta, help="angle fixing beta and gamma")
    p.add_argument("--b-level", type=level, default=b, help="conserved level B of the y strand")
    p.add_argument("--c-level", type=level, default=c, help="conserved level C of the z strand")


def _three_args(p):
    p.add_argument("--three", action="store_true", help="use the three-variable family")
    p.add_argument("--alpha", type=triple, default=(0.267, 0.534, 0.802),
                   help="alpha vector for --three (normalized)")
    p.add_argument("--a-level", type=level, default=0.2, help="level A of the x strand")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slcones", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    def sub(name, fn, help_):
        p = subs.add_parser(name, help=help_)
        p.add_argument("--config", help="flat key = value file of option defaults")
        p.add_argument("--out", help="output path (default: stdout where applicable)")
        p.add_argument("-v", "--verbose", action="store_true")
        p.set_defaults(func=fn)
        return p

    p = sub("verify", cmd_verify, "check the special Lagrangian conditions on a grid")
    _cone_args(p)
    _three_args(p)
    p.add_argument("--grid", type=grid_size, default=20)
    p.add_argument("--tol", type=positive_float, default=1e-9)

    p = sub("diagnose", cmd_diagnose, "harmonic-map, Toda, Killing-field and spectral checks")
    _cone_args(p)
    p.add_argument("--points", type=grid_size, default=10)
    p.add_argument("--h", type=positive_float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--curve-samples", type=grid_size, default=512)
    p.add_argument("--curve-csv")
    p.add_argument("--curve-json")

    p = sub("torus-search", cmd_torus_search, "search for doubly-periodic cones")
    p.add_argument("--case", choices=("a", "b", "c", "generic"), default="a")
    p.add_argument("--theta", type=float)
    p.add_argument("--b-level", type=level)
    p.add_argument("--c-range", type=sweep_range)
    p.add_argument("--theta-range", type=sweep_range)
    p.add_argument("--b-range", type=sweep_range)
    p.add_argument("--max-den", type=int, default=40)
    p.add_argument("--tol", type=positive_float, default=1e-7)
    p.add_argument("--limit", type=int)
    p.add_argument("--workers", type=int, help="overrides SLCONES_WORKERS")
    p.add_argument("--verify-tol", type=positive_float, default=1e-6)
    p.add_argument("--no-verify", action="store_true")
    p.add_argument("--resume", action="store_true", help="continue an existing catalog")
    p.add_argument("--summary", help="summary CSV path")

    p = sub("mesh", cmd_mesh, "export a sampled surface as OBJ or PLY")
    _cone_args(p)
    _three_args(p)
    p.add_argument("--n", type=grid_size, default=64)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--s-range", type=pair)
    p.add_argument("--t-range", type=pair)
    p.add_argument("--projection", default="re1,re2,re3")
    p.add_argument("--format", choices=("obj", "ply"))
    p.add_argument("--points-only", action="store_true")

    p = sub("area", cmd_area, "area of a torus link from the closed form")
    _cone_args(p)
    p.add_argument("--lattice", type=lambda t: tuple(int(round(x)) for x in _floats(t, 4)),
                   default=(1, 0, 0, 1), help="a11,a12,a21,a22")
    p.add_argument("--s-period", type=positive_float)
    p.add_argument("--t-period", type=positive_float)
    p.add_argument("--quadrature", action="store_true")

    p = sub("strand-trace", cmd_strand_trace, "integrate one strand and export CSV")
    p.add_argument("--coeffs", type=triple)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--strand", choices=("y", "z"), default="y")
    p.add_argument("--level", type=level, default=0.3)
    p.add_argument("--span", type=pair, default=(0.0, 10.0))
    p.add_argument("--tol", type=positive_float, default=1e-10)
    p.add_argument("--samples", type=grid_size, default=200)
    p.add_argument("--backend", choices=("cython", "python"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.config:
            sub = parser._subparsers._group_actions[0].choices[args.command]
            _apply_config(sub, read_config(args.config))
            args = parser.parse_args(argv)
        if args.command == "mesh" and not args.out:
            raise UsageError("mesh needs --out")
        return args.func(args)
    except (UsageError, ValueError, OSError, *PARAMETER_ERRORS) as exc:
        print(f"slcones: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SlconesError as exc:
        print(f"slcones: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
