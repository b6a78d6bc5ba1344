"""Command-line front-end: TOML configs in, JSON reports and CSV paths out.

Subcommands: verify, classify, mobius, map, flow, collar.  ``--json``
switches stdout to machine output; output is deterministic for a fixed
config.  Exit codes: 0 pass, 1 usage or config error, 2 definitive fail,
3 inconclusive (horizon-limited or fit trouble).
"""

from __future__ import annotations

import argparse
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import verify as vf
from .classify import (
    FixedPointInDomain,
    GeodesicEscape,
    InvalidCut,
    NonOrthogonal,
    NotHkvf,
    ReductionMismatch,
    SymmetryMismatch,
    TorusFixedPoint,
    classify_flow,
    collar_extend,
)
from .conformal_maps import MapChain, check_conformal
from .expr import EvalDomainError
from .geometry import ConformalMetric, VectorField, flow_path
from .mobius import INF, MobiusTransform, from_three_points
from .surfaces import CanonicalSurface
from .verify import VerificationReport, VerifyOptions

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3

AXIOMS = ("killing", "nonzero", "slip", "complete", "boundary_complete")
CHECK_NAMES = AXIOMS + ("periodicity",)

CSV_HEADER = "t,x,y,lambda,speed_g"


class UsageError(ValueError):
    pass


class ConfigError(UsageError):
    pass


# -- argv plumbing ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags, which collides with "fail"; raise instead
    def error(self, message):
        raise UsageError(message)


_VALUE_FLAGS = {
    "--config", "--out", "--surface", "--rho", "--pi1", "--pi2",
    "--lambda", "--field", "--seed", "--horizon", "--grid-n",
    "--boundary-samples", "--escape-radius", "--tol-killing", "--tol-slip",
    "--tol-zero", "--tol-return", "--tol", "--samples", "--chain",
    "--apply", "--inverse", "--point", "--points", "--eps", "--extension",
    "--checks",
}


def _glue(argv):
    """Join value flags with values that look like flags (e.g. --seed -1,0)."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok in _VALUE_FLAGS and nxt is not None
                and nxt.startswith("-") and not nxt.startswith("--")):
            out.append(tok + "=" + nxt)
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _pair(text: str, what: str = "point"):
    parts = str(text).split(",")
    if len(parts) != 2:
        raise UsageError(f"{what} must be 'x,y', got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise UsageError(f"{what} must be two reals, got {text!r}") from None


def _sphere_point(text: str):
    if str(text).strip().lower() == "inf":
        return INF
    return _pair(text)


# -- config loading -----------------------------------------------------------

_TOP_KEYS = {"surface", "metric", "field", "checks", "options", "output", "collar"}
_METRIC_KEYS = {"lambda"}
_FIELD_KEYS = {"tag", "u", "v"}
_OPTION_KEYS = {
    "grid_n", "boundary_samples", "horizon", "tol_killing", "tol_slip",
    "tol_zero", "tol_return", "escape_radius", "seeds",
}
_OUTPUT_KEYS = {"json", "csv"}
_COLLAR_KEYS = {"point", "eps", "extension"}


def _reject_unknown(table: dict, allowed: set, where: str):
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(unknown)}")


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    except tomllib.TOMLDecodeError as err:
        # the decoder message carries line and column
        raise ConfigError(f"{path}: {err}") from None
    _reject_unknown(cfg, _TOP_KEYS, "config")
    for key, allowed in (("metric", _METRIC_KEYS), ("field", _FIELD_KEYS),
                         ("options", _OPTION_KEYS), ("output", _OUTPUT_KEYS),
                         ("collar", _COLLAR_KEYS)):
        if key in cfg:
            if not isinstance(cfg[key], dict):
                raise ConfigError(f"[{key}] must be a table")
            _reject_unknown(cfg[key], allowed, f"[{key}]")
    if "checks" in cfg:
        names = cfg["checks"]
        if (not isinstance(names, list)
                or any(not isinstance(n, str) for n in names)):
            raise ConfigError("checks must be an array of strings")
        bad = sorted(set(names) - set(CHECK_NAMES))
        if bad:
            raise ConfigError(f"unknown checks: {', '.join(bad)}")
    return cfg


def _surface_from(cfg: dict, args) -> CanonicalSurface:
    table = dict(cfg.get("surface", {}))
    if getattr(args, "surface", None):
        table["kind"] = args.surface
    if getattr(args, "rho", None) is not None:
        table["rho"] = args.rho
    for name in ("pi1", "pi2"):
        value = getattr(args, name, None)
        if value is not None:
            w = _pair(value, name)
            table[name] = [w.real, w.imag]
    if "kind" not in table:
        raise ConfigError("no surface given (config [surface] or --surface)")
    try:
        return CanonicalSurface.from_dict(table)
    except ValueError as err:
        raise ConfigError(str(err)) from None


def _field_from(cfg: dict, args) -> VectorField:
    table = dict(cfg.get("field", {}))
    spec = getattr(args, "field", None)
    if spec:
        if spec in ("rotational", "translational"):
            table = {"tag": spec}
        elif "," in spec:
            u, v = spec.split(",", 1)
            table = {"u": u.strip(), "v": v.strip()}
        else:
            raise UsageError(
                f"--field must be 'rotational', 'translational' or 'u,v', got {spec!r}")
    tag = table.get("tag")
    if tag is not None:
        if "u" in table or "v" in table:
            raise ConfigError("give either field.tag or field.u/field.v, not both")
        if tag == "rotational":
            return VectorField.rotational()
        if tag == "translational":
            return VectorField.translational()
        raise ConfigError(f"unknown field tag {tag!r}")
    if "u" not in table or "v" not in table:
        raise ConfigError("no field given (field.tag or field.u and field.v)")
    try:
        return VectorField(str(table["u"]), str(table["v"]))
    except ValueError as err:
        raise ConfigError(f"bad field expression: {err}") from None


def _metric_from(cfg: dict, surface: CanonicalSurface, args) -> ConformalMetric:
    table = cfg.get("metric", {})
    lam = getattr(args, "lam", None) or table.get("lambda")
    if lam is None:
        raise ConfigError("no metric given (config metric.lambda or --lambda)")
    try:
        return ConformalMetric(surface, str(lam))
    except ValueError as err:
        raise ConfigError(f"bad lambda expression: {err}") from None


def _positive(name: str, value, integer: bool = False):
    kind = int if integer else float
    try:
        value = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if value <= 0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def _options_from(cfg: dict, args) -> VerifyOptions:
    table = dict(cfg.get("options", {}))
    kwargs = {}
    ints = {"grid_n", "boundary_samples"}
    for key in sorted(_OPTION_KEYS - {"seeds"}):
        value = table.get(key)
        if getattr(args, key, None) is not None:
            value = getattr(args, key)
        if value is not None:
            kwargs[key] = _positive(key, value, integer=key in ints)
    seeds = table.get("seeds")
    if getattr(args, "seed", None):
        seeds = args.seed
    if seeds is not None:
        if not isinstance(seeds, (list, tuple)):
            raise ConfigError("options.seeds must be an array of [x, y] pairs")
        parsed = []
        for s in seeds:
            if isinstance(s, str):
                parsed.append(_pair(s, "seed"))
            elif isinstance(s, (list, tuple)) and len(s) == 2:
                parsed.append(complex(float(s[0]), float(s[1])))
            else:
                raise ConfigError(f"bad seed {s!r}: want [x, y]")
        kwargs["seeds"] = tuple(parsed)
    return VerifyOptions(**kwargs)


def _output_paths(cfg: dict, args):
    table = cfg.get("output", {})
    json_path = table.get("json")
    csv_path = table.get("csv")
    out = getattr(args, "out", None)
    if out:
        if getattr(args, "command", "") == "flow":
            csv_path = out
        else:
            json_path = out
    return json_path, csv_path


# -- emission -----------------------------------------------------------------

def _json_body(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _emit(args, payload: dict, lines, json_path=None):
    body = _json_body(payload)
    if args.json:
        sys.stdout.write(body)
    else:
        sys.stdout.write("\n".join(lines) + "\n")
    if json_path:
        with open(json_path, "w") as fh:
            fh.write(body)


def _emit_error(args, err: Exception):
    payload = {"error": {"type": type(err).__name__, "message": str(err)}}
    if getattr(args, "json", False):
        sys.stdout.write(_json_body(payload))
    else:
        print(f"error ({type(err).__name__}): {err}", file=sys.stderr)


def _fmt(value: float) -> str:
    return repr(float(value))


def _fmt_point(z) -> str:
    if z is INF:
        return "inf"
    z = complex(z)
    return f"{_fmt(z.real)},{_fmt(z.imag)}"


# -- verify -------------------------------------------------------------------

def _run_checks(g, X, opts, names):
    checks = []
    for name in names:
        if name == "killing":
            checks.append(vf.check_killing(g, X, opts))
        elif name == "nonzero":
            grid = vf.sample_interior_grid(
                g.surface, opts.grid_n, opts.grid_puncture_margin)
            checks.append(vf.check_nonzero(X, grid, opts))
        elif name == "slip":
            checks.append(vf.check_slip(g, X, opts))
        elif name == "complete":
            checks.append(vf.check_complete(g, X, opts))
        elif name == "boundary_complete":
            checks.append(vf.check_boundary_complete(g, X, opts))
    return checks


def _checks_exit(checks) -> int:
    if any(c.status == vf.FAIL for c in checks):
        return EXIT_FAIL
    if any(c.status == vf.INCONCLUSIVE for c in checks):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _check_lines(report: VerificationReport, full: bool):
    s = report.surface
    extra = ""
    if s.rho is not None:
        extra = f" (rho={_fmt(s.rho)})"
    if s.pi1 is not None:
        extra = f" (pi1={_fmt_point(s.pi1)}, pi2={_fmt_point(s.pi2)})"
    lines = [f"surface: {s.kind}{extra}"]
    for c in report.checks:
        msg = f"{c.name}: {c.status} (worst {c.worst:.3e}, tol {c.tolerance:.1e})"
        if c.detail:
            msg += f" - {c.detail}"
        if c.escape_time is not None:
            msg += f" [escape at t={c.escape_time:.3f}]"
        lines.append(msg)
    if report.periodic is not None:
        p = report.periodic
        if p.periodic:
            lines.append(f"periodic: yes (period {_fmt(p.period)})")
        else:
            lines.append(f"periodic: no ({p.detail})")
    if full:
        lines.append(f"verdict: {'hkvf' if report.is_hkvf else 'not an hkvf'}")
    else:
        names = ", ".join(c.name for c in report.checks)
        lines.append(f"verdict: requested checks only ({names})")
    return lines


def cmd_verify(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    surface = _surface_from(cfg, args)
    g = _metric_from(cfg, surface, args)
    X = _field_from(cfg, args)
    opts = _options_from(cfg, args)
    names = cfg.get("checks")
    if getattr(args, "checks", None):
        names = [n.strip() for n in args.checks.split(",") if n.strip()]
        bad = sorted(set(names) - set(CHECK_NAMES))
        if bad:
            raise UsageError(f"unknown checks: {', '.join(bad)}")
    full = names is None or set(names) >= set(AXIOMS)
    if names is None:
        names = list(CHECK_NAMES)
    axiom_names = [n for n in names if n != "periodicity"]
    checks = _run_checks(g, X, opts, axiom_names)
    periodic = None
    if "periodicity" in names and all(c.passed for c in checks):
        periodic = vf.detect_periodic(g, X, opts)
    ok = bool(checks) and all(c.passed for c in checks) and full
    report = VerificationReport(surface, ok, checks, periodic)
    payload = report.to_dict()
    if not full:
        del payload["is_hkvf"]
    json_path, _ = _output_paths(cfg, args)
    _emit(args, payload, _check_lines(report, full), json_path)
    return _checks_exit(checks)


# -- classify -----------------------------------------------------------------

def _chain_text(chain: MapChain) -> str:
    if not chain.atoms:
        return "identity"
    return " -> ".join(a.kind for a in chain.atoms)


def cmd_classify(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    surface = _surface_from(cfg, args)
    g = _metric_from(cfg, surface, args)
    X = _field_from(cfg, args)
    opts = _options_from(cfg, args)
    res = classify_flow(surface, g, X, options=opts)
    payload = res.to_dict()
    lines = [
        f"source: {surface.kind}",
        f"target: {res.target.kind}",
        f"chain: {_chain_text(res.chain)}",
        f"normal form: {res.normal_form}",
        f"rescale: {_fmt(res.rescale)}",
        f"periodic branch: {'yes' if res.periodic_branch else 'no'}",
    ]
    if res.lattice is not None:
        lines.append(f"lattice generator: {_fmt_point(res.lattice)}")
    for key in sorted(res.residuals):
        lines.append(f"residual {key}: {res.residuals[key]:.3e}")
    json_path, _ = _output_paths(cfg, args)
    _emit(args, payload, lines, json_path)
    return EXIT_OK


# -- mobius -------------------------------------------------------------------

def _matrix_from(tokens) -> MobiusTransform:
    if len(tokens) == 1:
        tokens = tokens[0].replace(",", " ").split()
    try:
        reals = [float(t) for t in tokens]
    except ValueError:
        raise UsageError(f"matrix entries must be reals: {tokens!r}") from None
    if len(reals) != 8:
        raise UsageError(
            "matrix needs 8 reals: a.re a.im b.re b.im c.re c.im d.re d.im")
    a, b, c, d = (complex(reals[i], reals[i + 1]) for i in (0, 2, 4, 6))
    return MobiusTransform(a, b, c, d)


def _points_from(pairs) -> MobiusTransform:
    if len(pairs) != 3:
        raise UsageError("need exactly three --points pairs")
    sources, targets = [], []
    for pair in pairs:
        if ":" not in pair:
            raise UsageError(f"point pair must be 'src:dst', got {pair!r}")
        src, dst = pair.split(":", 1)
        sources.append(_sphere_point(src))
        targets.append(_sphere_point(dst))
    return from_three_points(sources, targets)


def cmd_mobius(args) -> int:
    if bool(args.matrix) == bool(args.points):
        raise UsageError("give exactly one of --matrix or --points")
    m = _matrix_from(args.matrix) if args.matrix else _points_from(args.points)
    cls = m.classify(args.tol) if args.tol else m.classify()
    fixed = ["inf" if z is INF else [complex(z).real, complex(z).imag]
             for z in cls.fixed_points]
    payload = {
        "kind": cls.kind,
        "matrix": [[m.a.real, m.a.imag], [m.b.real, m.b.imag],
                   [m.c.real, m.c.imag], [m.d.real, m.d.imag]],
        "trace": [cls.trace.real, cls.trace.imag],
        "fixed_points": fixed,
    }
    lines = [
        cls.kind,
        f"matrix: a={m.a} b={m.b} c={m.c} d={m.d}",
        f"trace: {cls.trace}",
    ]
    if cls.kind == "identity":
        lines.append("fixed points: every point")
    else:
        lines.append("fixed points: "
                     + "  ".join(_fmt_point(z) for z in cls.fixed_points))
    _emit(args, payload, lines, args.out or None)
    return EXIT_OK


# -- map ----------------------------------------------------------------------

def _load_chain(path: str) -> MapChain:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read chain {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: {err}") from None
    if "chain" in data:  # allow a whole classification result
        data = data["chain"]
    try:
        return MapChain.from_dict(data)
    except (KeyError, ValueError) as err:
        raise ConfigError(f"bad chain file {path}: {err}") from None


def cmd_map(args) -> int:
    chain = _load_chain(args.chain)
    payload = {
        "source": chain.source.to_dict(),
        "target": chain.target.to_dict(),
        "atoms": [a.kind for a in chain.atoms],
    }
    lines = [
        f"source: {chain.source.kind}",
        f"target: {chain.target.kind}",
        f"chain: {_chain_text(chain)}",
    ]
    for label, inputs, func in (("apply", args.apply, chain.apply),
                                ("inverse", args.inverse, chain.apply_inverse)):
        if not inputs:
            continue
        rows = []
        for text in inputs:
            z = _pair(text, label)
            w = complex(func(z))
            rows.append({"input": [z.real, z.imag], "output": [w.real, w.imag]})
            lines.append(f"{label} {_fmt_point(z)} -> {_fmt_point(w)}")
        payload[label] = rows
    code = EXIT_OK
    if args.check:
        pts = vf.sample_interior_grid(chain.source, args.samples or 11)
        report = check_conformal(chain, pts)
        back = np.abs(chain.apply_inverse(chain.apply(np.asarray(pts))) - pts)
        report["max_roundtrip"] = float(np.max(back))
        payload["check"] = report
        ok = (report["max_dbar"] <= 1e-6
              and report["max_deriv_mismatch"] <= 1e-6
              and report["max_roundtrip"] <= 1e-8)
        payload["check"]["passed"] = bool(ok)
        lines.append(
            "check: "
            + ("pass" if ok else "fail")
            + f" (dbar {report['max_dbar']:.3e},"
            + f" deriv mismatch {report['max_deriv_mismatch']:.3e},"
            + f" roundtrip {report['max_roundtrip']:.3e})")
        if not ok:
            code = EXIT_FAIL
    _emit(args, payload, lines, args.out or None)
    return code


# -- flow ---------------------------------------------------------------------

def _trajectory_rows(g, X, seed, t_stop, samples, opts):
    sol = flow_path(X, seed, t_stop, opts.ode)
    rows = []
    for t in np.linspace(0.0, t_stop, samples):
        x, y = (float(v) for v in sol.sol(t))
        z = complex(x, y)
        try:
            lam = float(g.lam_at(z))
            speed = float(g.norm(z, X.at(z)))
        except (EvalDomainError, ValueError):
            continue  # metric undefined exactly at the escape point
        rows.append([float(t), x, y, lam, speed])
    return rows


def cmd_flow(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    surface = _surface_from(cfg, args)
    g = _metric_from(cfg, surface, args)
    X = _field_from(cfg, args)
    opts = _options_from(cfg, args)
    seeds = opts.seeds or vf.default_seeds(surface)
    samples = args.samples or 201
    _positive("samples", samples, integer=True)
    outcomes = []
    lines = [f"surface: {surface.kind}", f"horizon: {_fmt(opts.horizon)}"]
    for seed in seeds:
        out = vf.flow_on_surface(surface, X, seed, opts.horizon, opts)
        if out.escaped and out.escape_time is None:
            raise RuntimeError(f"integration failed from seed {seed}: {out.reason}")
        t_stop = out.escape_time if out.escaped else opts.horizon
        rows = _trajectory_rows(g, X, seed, t_stop, samples, opts)
        entry = {
            "seed": [seed.real, seed.imag],
            "escaped": bool(out.escaped),
            "rows": rows,
        }
        if out.escaped:
            entry["escape_time"] = float(out.escape_time)
            entry["reason"] = out.reason
            if out.escape_point is not None:
                entry["escape_point"] = [out.escape_point.real,
                                         out.escape_point.imag]
            lines.append(
                f"seed {_fmt_point(seed)}: escape at t={out.escape_time:.3f}"
                f" ({out.reason}), csv truncated at escape")
        else:
            lines.append(
                f"seed {_fmt_point(seed)}: no escape within horizon"
                f" (t={_fmt(opts.horizon)})")
        outcomes.append(entry)
    payload = {"surface": surface.to_dict(), "horizon": float(opts.horizon),
               "trajectories": outcomes}
    json_path, csv_path = _output_paths(cfg, args)

    def block(entry):
        out = [CSV_HEADER]
        out += [",".join(_fmt(v) for v in row) for row in entry["rows"]]
        return "\n".join(out) + "\n"

    if csv_path:
        targets = ([csv_path] if len(outcomes) == 1 else
                   [_indexed(csv_path, i) for i in range(len(outcomes))])
        for path, entry in zip(targets, outcomes):
            with open(path, "w") as fh:
                fh.write(block(entry))
        lines.append("csv: " + ", ".join(targets))
    _emit(args, payload, lines, json_path)
    if not csv_path and not args.json:
        for entry in outcomes:
            sys.stdout.write("\n# seed " + _fmt_point(complex(*entry["seed"]))
                             + "\n" + block(entry))
    return EXIT_OK


def _indexed(path: str, i: int) -> str:
    if path.endswith(".csv"):
        return f"{path[:-4]}-{i}.csv"
    return f"{path}-{i}"


# -- collar -------------------------------------------------------------------

def cmd_collar(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    surface = _surface_from(cfg, args)
    g = _metric_from(cfg, surface, args)
    X = _field_from(cfg, args)
    table = cfg.get("collar", {})
    point = args.point or table.get("point")
    if point is None:
        raise ConfigError("no boundary point given (--point or collar.point)")
    if isinstance(point, (list, tuple)):
        point = complex(float(point[0]), float(point[1]))
    else:
        point = _pair(point, "point")
    eps = args.eps if args.eps is not None else table.get("eps", 0.3)
    eps = _positive("eps", eps)
    extension = args.extension if args.extension is not None \
        else table.get("extension")
    if extension is not None:
        extension = _positive("extension", extension)
    chart = collar_extend(g, X, point, eps=eps, extension=extension)
    payload = chart.to_dict()
    lines = [
        f"surface: {surface.kind}",
        f"base point: {_fmt_point(chart.base_point)}",
        f"depth: {_fmt(chart.depth)} (extension {_fmt(chart.extension)})",
        f"grid: {len(chart.depth_values)} x {len(chart.flow_values)}",
        f"conformality residual: {chart.conformality_residual:.3e}",
        f"orthogonality max: {chart.orthogonality_max:.3e}",
    ]
    json_path, _ = _output_paths(cfg, args)
    _emit(args, payload, lines, json_path)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_output_flags(sp):
    sp.add_argument("--json", action="store_true",
                    help="machine-readable output on stdout")
    sp.add_argument("--out", help="also write the report to this path")


def _add_problem_flags(sp):
    sp.add_argument("--config", help="TOML job description")
    sp.add_argument("--surface", help="surface kind (see catalog)")
    sp.add_argument("--rho", type=float, help="inner radius for annulus kinds")
    sp.add_argument("--pi1", help="torus period 'x,y'")
    sp.add_argument("--pi2", help="torus period 'x,y'")
    sp.add_argument("--lambda", dest="lam", help="conformal factor expression")
    sp.add_argument("--field",
                    help="'rotational', 'translational' or 'u_expr,v_expr'")
    sp.add_argument("--seed", action="append",
                    help="flow seed 'x,y' (repeatable; overrides config)")
    sp.add_argument("--horizon", type=float, help="flow time horizon")
    sp.add_argument("--grid-n", dest="grid_n", type=int)
    sp.add_argument("--boundary-samples", dest="boundary_samples", type=int)
    sp.add_argument("--escape-radius", dest="escape_radius", type=float)
    sp.add_argument("--tol-killing", dest="tol_killing", type=float)
    sp.add_argument("--tol-slip", dest="tol_slip", type=float)
    sp.add_argument("--tol-zero", dest="tol_zero", type=float)
    sp.add_argument("--tol-return", dest="tol_return", type=float)


def build_parser() -> _Parser:
    parser = _Parser(prog="hkvf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command",
                                parser_class=_Parser)

    sp = sub.add_parser("verify", help="check the flow axioms")
    _add_problem_flags(sp)
    _add_output_flags(sp)
    sp.add_argument("--checks", help="comma list of checks to run")

    sp = sub.add_parser("classify", help="reduce a verified flow to normal form")
    _add_problem_flags(sp)
    _add_output_flags(sp)

    sp = sub.add_parser("mobius", help="classify a Mobius transformation")
    sp.add_argument("--matrix", nargs="+",
                    help="8 reals: a.re a.im b.re b.im c.re c.im d.re d.im")
    sp.add_argument("--points", action="append", metavar="SRC:DST",
                    help="point pair 'x,y:x,y' ('inf' allowed); give three")
    sp.add_argument("--tol", type=float, help="classification tolerance")
    _add_output_flags(sp)

    sp = sub.add_parser("map", help="evaluate or check a conformal map chain")
    sp.add_argument("--chain", required=True,
                    help="JSON chain (or classify output) file")
    sp.add_argument("--apply", action="append", help="evaluate at 'x,y'")
    sp.add_argument("--inverse", action="append",
                    help="evaluate the inverse at 'x,y'")
    sp.add_argument("--check", action="store_true",
                    help="finite-difference conformality and roundtrip check")
    sp.add_argument("--samples", type=int, help="grid size for --check")
    _add_output_flags(sp)

    sp = sub.add_parser("flow", help="integrate orbits and export CSV")
    _add_problem_flags(sp)
    _add_output_flags(sp)
    sp.add_argument("--samples", type=int, help="rows per trajectory")

    sp = sub.add_parser("collar", help="build a boundary collar chart")
    _add_problem_flags(sp)
    _add_output_flags(sp)
    sp.add_argument("--point", help="boundary base point 'x,y'")
    sp.add_argument("--eps", type=float, help="inward geodesic depth")
    sp.add_argument("--extension", type=float, help="outward extension depth")

    return parser


_HANDLERS = {
    "verify": cmd_verify,
    "classify": cmd_classify,
    "mobius": cmd_mobius,
    "map": cmd_map,
    "flow": cmd_flow,
    "collar": cmd_collar,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(_glue(argv))
        except SystemExit as err:  # --help
            return EXIT_OK if not err.code else int(err.code)
        if args.command is None:
            raise UsageError("missing subcommand "
                             "(verify, classify, mobius, map, flow, collar)")
        # a metric only matters to flow output columns; default to flat
        if args.command == "flow" and not getattr(args, "lam", None):
            cfg_probe = load_config(args.config) if args.config else {}
            if "metric" not in cfg_probe:
                args.lam = "1"
        return _HANDLERS[args.command](args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ReductionMismatch, SymmetryMismatch) as err:
        _emit_error(args, err)
        return EXIT_INCONCLUSIVE
    except (NotHkvf, TorusFixedPoint, InvalidCut, GeodesicEscape,
            NonOrthogonal, FixedPointInDomain) as err:
        _emit_error(args, err)
        return EXIT_FAIL
    except (EvalDomainError, ValueError, RuntimeError) as err:
        _emit_error(args, err)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
