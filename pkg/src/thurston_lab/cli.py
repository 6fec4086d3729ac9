"""Command-line front door.

Exit codes: 0 success or PASS, 1 FAIL, 2 usage error, 3 computational error
(a JSON error object is printed on stdout).  ``THURSTON_BITS`` and
``THURSTON_DEPTH`` override the default precision and enumeration depth.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import asdict, dataclass

import gmpy2

from . import acceptance
from . import precision as P
from .curves import EnumerationControl, MappingClass, Slope, SurfaceKind, enumerate_slopes
from .errors import ThurstonLabError
from .geometry import (
    delta_twist,
    dual_sphere,
    facet,
    facets_csv,
    integrate_stretch,
    thurston_distance,
    thurston_norm,
)
from .holonomy import TeichPoint, build_point, curve_length, remark
from .lab import (
    LinearMap2,
    facet_asymptotics,
    gamma_linearity_defect,
    isometry_check,
    longest_facet_correspondence,
    mapping_class_differential,
    surface_discriminator,
    twist_length_ratio,
)
from .precision import Vec2

ENV_BITS = "THURSTON_BITS"
ENV_DEPTH = "THURSTON_DEPTH"
FORMATS = ("json", "csv", "svg")
_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class CliConfig:
    command: str
    surface: str = "s11"
    l: str | None = None
    tau: str | None = None
    bits: int = P.DEFAULT_BITS
    depth: int = 14
    seed: int = 7
    fmt: str = "json"
    output: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CliConfig":
        return cls(**data)


class UsageError(Exception):
    pass


# --- parsing helpers ------------------------------------------------------------------


def _symmetric_length(kind: SurfaceKind):
    l = 2 * gmpy2.acosh(gmpy2.mpfr(3) / 2)
    return l if kind is SurfaceKind.ONCE_PUNCTURED_TORUS else 2 * l


def parse_point_spec(text: str, flag: str) -> tuple[str, str]:
    """``l=<decimal|L0>,tau=<decimal|T0>``; L0 and T0 name the symmetric point."""
    fields = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"{flag}: expected key=value pairs, got {part!r}")
        k, v = (x.strip() for x in part.split("=", 1))
        if k not in ("l", "tau"):
            raise UsageError(f"{flag}: unknown key {k!r} (use l and tau)")
        fields[k] = v
    l = fields.get("l", "L0")
    tau = fields.get("tau", "T0")
    if l != "L0" and not _DECIMAL.match(l):
        raise UsageError(f"{flag}: l must be a decimal or L0, got {l!r}")
    if tau != "T0" and not _DECIMAL.match(tau):
        raise UsageError(f"{flag}: tau must be a decimal or T0, got {tau!r}")
    return l, tau


def make_point(kind, l: str, tau: str, bits: int) -> TeichPoint:
    kind = SurfaceKind.parse(kind)
    with P.working_precision(bits):
        lv = _symmetric_length(kind) if l == "L0" else P.to_mpfr(l)
        # T0 makes the slopes 0/1, 1/1 and -1/1 symmetric; S(0,4) lengths follow the torus at l/2
        tv = (-lv / 2 if kind is SurfaceKind.ONCE_PUNCTURED_TORUS else -lv / 4) if tau == "T0" else P.to_mpfr(tau)
        return build_point(kind, lv, tv, bits)


def parse_slope(text: str, flag: str) -> Slope:
    try:
        return Slope.parse(text)
    except (ValueError, ArithmeticError) as exc:
        raise UsageError(f"{flag}: not a slope: {text!r}") from exc


def parse_range(text: str, flag: str) -> range:
    m = re.match(r"^(-?\d+)(?::|\.\.)(-?\d+)$", text.strip())
    if not m:
        raise UsageError(f"{flag}: expected a:b, got {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    if b < a:
        raise UsageError(f"{flag}: empty range {text!r}")
    return range(a, b + 1)


def parse_pair(text: str, flag: str) -> tuple[str, str]:
    parts = [x.strip() for x in text.split(",")]
    if len(parts) != 2 or not all(_DECIMAL.match(p) for p in parts):
        raise UsageError(f"{flag}: expected two decimals x,y, got {text!r}")
    return parts[0], parts[1]


def parse_matrix(text: str, flag: str, integer: bool = False):
    parts = [x.strip() for x in text.split(",")]
    if len(parts) != 4:
        raise UsageError(f"{flag}: expected four entries a,b,c,d, got {text!r}")
    if integer:
        try:
            return MappingClass(*(int(p) for p in parts))
        except ValueError as exc:
            raise UsageError(f"{flag}: {exc}") from exc
    if not all(_DECIMAL.match(p) for p in parts):
        raise UsageError(f"{flag}: entries must be decimals")
    return parts


# --- output -----------------------------------------------------------------------------


def _jsonable(x, bits):
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, Slope):
        return str(x)
    if isinstance(x, Vec2):
        return [_jsonable(x.x, bits), _jsonable(x.y, bits)]
    if isinstance(x, TeichPoint):
        return x.to_dict()
    if isinstance(x, dict):
        return {str(k): _jsonable(v, bits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v, bits) for v in x]
    return P.to_decimal_string(x, bits)


def _envelope(cfg: CliConfig, result: dict, converged: bool, verdict: str | None = None) -> dict:
    out = {
        "command": cfg.command,
        "config": cfg.to_dict(),
        "meta": {"bits": cfg.bits, "depth": cfg.depth, "converged": converged},
        "result": _jsonable(result, cfg.bits),
    }
    if verdict is not None:
        out["verdict"] = verdict
    return out


def _flat_csv(env: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for section in ("meta", "result"):
        for k, v in env[section].items():
            w.writerow([k, json.dumps(v) if isinstance(v, (list, dict)) else v])
    if "verdict" in env:
        w.writerow(["verdict", env["verdict"]])
    return buf.getvalue()


def _emit(cfg: CliConfig, text: str):
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_envelope(cfg: CliConfig, env: dict):
    _emit(cfg, _flat_csv(env) if cfg.fmt == "csv" else json.dumps(env, indent=2) + "\n")


def _emit_report(cfg: CliConfig, report, extra: dict | None = None):
    if cfg.fmt == "csv":
        _emit(cfg, report.to_csv())
    else:
        d = report.to_dict()
        d["config"] = cfg.to_dict()
        if extra:
            d.update(_jsonable(extra, cfg.bits))
        _emit(cfg, json.dumps(d, indent=2) + "\n")


# --- subcommands -------------------------------------------------------------------------


def _point(cfg: CliConfig, args, attr: str = "point", kind=None) -> TeichPoint:
    l, tau = parse_point_spec(getattr(args, attr), "--" + attr.rstrip("_").replace("_", "-"))
    return make_point(kind or cfg.surface, l, tau, cfg.bits)


def cmd_distance(cfg, args):
    X = _point(cfg, args, "from_")
    Y = _point(cfg, args, "to")
    r = thurston_distance(X, Y, EnumerationControl(depth=cfg.depth))
    _emit_envelope(cfg, _envelope(cfg, {"distance": r.value, "witness": r.witness, "X": X, "Y": Y}, r.converged))
    return 0


def cmd_norm(cfg, args):
    X = _point(cfg, args)
    with X.precision():
        x, y = parse_pair(args.vector, "--vector")
        v = Vec2(P.to_mpfr(x), P.to_mpfr(y))
        r = thurston_norm(X, v, EnumerationControl(depth=cfg.depth))
    _emit_envelope(cfg, _envelope(cfg, {"norm": r.value, "witness": r.witness, "vector": v, "X": X}, r.converged))
    return 0


def cmd_sphere(cfg, args):
    X = _point(cfg, args)
    sphere = dual_sphere(X, EnumerationControl(depth=cfg.depth))
    if cfg.fmt == "svg":
        highlight = [parse_slope(s, "--highlight") for s in args.highlight] if args.highlight else []
        _emit(cfg, sphere.to_svg(primal=args.primal, label_depth=args.label_depth, highlight=highlight))
    elif cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["slope", "cov_l", "cov_tau"])
        for v in sphere.to_dict()["vertices"]:
            w.writerow([v["slope"], *v["cov"]])
        _emit(cfg, buf.getvalue())
    else:
        d = sphere.to_dict()
        d.update({"bits": cfg.bits, "converged": True, "point": X.to_dict()})
        _emit(cfg, json.dumps(d, indent=2) + "\n")
    return 0


def _facet_dict(f):
    return {"slope": f.slope, "l_alpha": f.l_alpha, "facet_length": f.length, "reverse_length": f.reverse_length,
            "v_minus": f.v_minus, "v_plus": f.v_plus, "converged": f.converged, "depth": f.depth,
            "bits": f.bits}


def cmd_facet(cfg, args):
    X = _point(cfg, args)
    f = facet(X, parse_slope(args.slope, "--slope"), EnumerationControl(depth=cfg.depth))
    _emit_envelope(cfg, _envelope(cfg, _facet_dict(f), f.converged))
    return 0


def cmd_facet_table(cfg, args):
    X = _point(cfg, args)
    ctrl = EnumerationControl(depth=cfg.depth)
    fs = [facet(X, s, ctrl) for s in enumerate_slopes(args.levels)]
    if cfg.fmt == "csv":
        _emit(cfg, facets_csv(fs))
    else:
        env = _envelope(cfg, {"facets": [_facet_dict(f) for f in fs]}, all(f.converged for f in fs))
        _emit(cfg, json.dumps(env, indent=2) + "\n")
    return 0


def cmd_stretch(cfg, args):
    X = _point(cfg, args)
    alpha = parse_slope(args.slope, "--slope")
    if not _DECIMAL.match(args.t):
        raise UsageError(f"--t: expected a decimal, got {args.t!r}")
    Y = integrate_stretch(X, alpha, args.sign, args.t, ctrl=EnumerationControl(depth=cfg.depth))
    with X.precision():
        t = P.to_mpfr(args.t)
        ratio = curve_length(Y, alpha) / curve_length(X, alpha)
        err = abs(ratio / gmpy2.exp(t) - 1)
    ok = bool(err <= gmpy2.mpfr("1e-6"))
    env = _envelope(cfg, {"start": X, "end": Y, "length_ratio": ratio, "exp_t": gmpy2.exp(t),
                          "relative_error": err}, True, "PASS" if ok else "FAIL")
    _emit_envelope(cfg, env)
    return 0 if ok else 1


def cmd_delta(cfg, args):
    for flag, v in (("--l", args.l), ("--t", args.t)):
        if not _DECIMAL.match(v):
            raise UsageError(f"{flag}: expected a decimal, got {v!r}")
    value = delta_twist(args.l, args.t, cfg.bits)
    _emit_envelope(cfg, _envelope(cfg, {"l": args.l, "t": args.t, "delta": value}, True))
    return 0


def cmd_gamma(cfg, args):
    X = _point(cfg, args, "from_")
    Y = _point(cfg, args, "to")
    defect, report = gamma_linearity_defect(X, Y, args.samples, EnumerationControl(depth=cfg.depth), seed=cfg.seed)
    coincide = X == Y
    ok = bool((defect <= gmpy2.mpfr("1e-10")) == coincide) and bool(
        report.fitted["norm_preservation"] <= gmpy2.mpfr("1e-8"))
    report.verdicts = {"linear_iff_coincident": ok}
    _emit_report(cfg, report)
    return 0 if ok else 1


def cmd_facet_asym(cfg, args):
    X = _point(cfg, args)
    r = facet_asymptotics(X, parse_slope(args.alpha, "--alpha"), parse_slope(args.beta, "--beta"),
                          parse_range(args.n, "--n"), EnumerationControl(depth=cfg.depth),
                          fit_from=args.fit_from)
    _emit_report(cfg, r)
    return 0 if r.passed else 1


def cmd_longest_facet(cfg, args):
    X = _point(cfg, args)
    r = longest_facet_correspondence(X, parse_slope(args.alpha, "--alpha"), parse_slope(args.beta, "--beta"),
                                     parse_range(args.n, "--n"), EnumerationControl(depth=cfg.depth))
    _emit_report(cfg, r)
    return 0 if r.passed else 1


def cmd_twist_ratio(cfg, args):
    X = _point(cfg, args)
    if args.n == 0:
        raise UsageError("--n: must be nonzero")
    r = twist_length_ratio(X, parse_slope(args.alpha, "--alpha"), parse_slope(args.beta, "--beta"), args.n)
    ok = bool(abs(r - 1) <= gmpy2.mpfr(args.tol))
    _emit_envelope(cfg, _envelope(cfg, {"n": args.n, "ratio": r}, True, "PASS" if ok else "FAIL"))
    return 0 if ok else 1


def cmd_discriminate(cfg, args):
    X11 = _point(cfg, args, "s11_point", SurfaceKind.ONCE_PUNCTURED_TORUS)
    X04 = _point(cfg, args, "s04_point", SurfaceKind.FOUR_PUNCTURED_SPHERE)
    r = surface_discriminator(X11, X04, EnumerationControl(depth=cfg.depth))
    _emit_report(cfg, r)
    return 0 if r.passed else 1


def cmd_isometry_check(cfg, args):
    X = _point(cfg, args)
    if args.mapping_class:
        g = parse_matrix(args.mapping_class, "--mapping-class", integer=True)
        Y = remark(X, g)
        phi = mapping_class_differential(X, g)
    else:
        entries = parse_matrix(args.matrix, "--matrix")
        Y = X if args.to is None else _point(cfg, args, "to")
        with X.precision():
            phi = LinearMap2(*(P.to_mpfr(e) for e in entries))
    res = isometry_check(phi, X, Y, args.samples, EnumerationControl(depth=cfg.depth), seed=cfg.seed)
    ok = res.matching is not None and all(b != "Unmatched" for _, b in res.matching)
    res.report.verdicts = {"isometry": ok}
    _emit_report(cfg, res.report)
    return 0 if ok else 1


def cmd_selftest(cfg, args):
    only = None
    if args.only:
        try:
            only = [int(x) for x in args.only.split(",")]
        except ValueError as exc:
            raise UsageError(f"--only: expected comma-separated criterion numbers, got {args.only!r}") from exc
        bad = [k for k in only if k not in acceptance.CRITERIA]
        if bad:
            raise UsageError(f"--only: unknown criteria {bad}")
    echo = (lambda line: print(line, file=sys.stderr)) if cfg.output or cfg.fmt != "json" else None
    results = acceptance.run_all(cfg.bits, cfg.depth, cfg.seed, only=only, echo=echo)
    passed = all(r.passed for r in results)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["criterion", "title", "result", "detail"])
        for r in results:
            d = r.to_dict()
            w.writerow([d["criterion"], d["title"], d["result"], json.dumps(d["detail"])])
        _emit(cfg, buf.getvalue())
    else:
        d = {
            "header": {"experiment": "selftest", "seed": cfg.seed, "bits": cfg.bits, "depth": cfg.depth},
            "rows": [r.to_dict() for r in results],
            "verdict": {"checks": {str(r.number): "PASS" if r.passed else "FAIL" for r in results},
                        "result": "PASS" if passed else "FAIL"},
        }
        _emit(cfg, json.dumps(d, indent=2) + "\n")
    return 0 if passed else 1


COMMANDS = {
    "distance": (cmd_distance, ("json", "csv")),
    "norm": (cmd_norm, ("json", "csv")),
    "sphere": (cmd_sphere, ("json", "csv", "svg")),
    "facet": (cmd_facet, ("json", "csv")),
    "facet-table": (cmd_facet_table, ("json", "csv")),
    "stretch": (cmd_stretch, ("json", "csv")),
    "delta": (cmd_delta, ("json", "csv")),
    "gamma": (cmd_gamma, ("json", "csv")),
    "facet-asym": (cmd_facet_asym, ("json", "csv")),
    "longest-facet": (cmd_longest_facet, ("json", "csv")),
    "twist-ratio": (cmd_twist_ratio, ("json", "csv")),
    "discriminate": (cmd_discriminate, ("json", "csv")),
    "isometry-check": (cmd_isometry_check, ("json", "csv")),
    "selftest": (cmd_selftest, ("json", "csv")),
}


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"environment variable {name} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", default="s11", choices=["s11", "s04"])
    common.add_argument("--bits", type=int, default=None, help=f"significand bits (env {ENV_BITS}, default 128)")
    common.add_argument("--depth", type=int, default=None, help=f"Stern-Brocot depth (env {ENV_DEPTH}, default 14)")
    common.add_argument("--seed", type=int, default=7)
    common.add_argument("--format", dest="fmt", default="json", choices=FORMATS)
    common.add_argument("--output", default=None, help="write to this path instead of stdout")

    parser = argparse.ArgumentParser(prog="thurston-lab", description="Thurston metric laboratory for S(1,1) and S(0,4).")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    point_help = "l=<decimal|L0>,tau=<decimal|T0> (default: the symmetric point)"
    p = add("distance", "Thurston distance d(X, Y)")
    p.add_argument("--from", dest="from_", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--to", default="l=L0,tau=T0", help=point_help)

    p = add("norm", "Thurston norm of a tangent vector")
    p.add_argument("--point", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--vector", required=True, help="dl,dtau")

    p = add("sphere", "dual sphere polygon (json/csv) or plot (svg)")
    p.add_argument("--point", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--primal", action="store_true", help="plot the unit ball instead of the dual polygon")
    p.add_argument("--label-depth", type=int, default=3)
    p.add_argument("--highlight", action="append", help="slope whose facet is drawn in red (with --primal)")

    p = add("facet", "facet of one slope")
    p.add_argument("--point", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--slope", required=True)

    p = add("facet-table", "facets of all slopes up to a tree level")
    p.add_argument("--point", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--levels", type=int, default=3)

    p = add("stretch", "integrate a stretch line and check the e^t law")
    p.add_argument("--point", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--slope", default="1/0")
    p.add_argument("--sign", default="+", choices=["+", "-"])
    p.add_argument("--t", default="0.1")

    p = add("delta", "evaluate the twist-gap formula")
    p.add_argument("--l", required=True)
    p.add_argument("--t", required=True)

    p = add("gamma", "linearity defect of the comparison map")
    p.add_argument("--from", dest="from_", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--to", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--samples", type=int, default=20)

    p = add("facet-asym", "facet lengths along a twist family")
    p.add_argument("--point", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--alpha", default="0/1")
    p.add_argument("--beta", default="1/0")
    p.add_argument("--n", default="6:12", help="a:b inclusive")
    p.add_argument("--fit-from", type=int, default=None)

    p = add("longest-facet", "longest facet in the gap next to a twist axis")
    p.add_argument("--point", default="l=8,tau=0.3", help=point_help)
    p.add_argument("--alpha", default="1/0")
    p.add_argument("--beta", default="0/1")
    p.add_argument("--n", default="3:8", help="a:b inclusive")

    p = add("twist-ratio", "l(D^n_alpha beta) / (|n| l_alpha i(alpha, beta))")
    p.add_argument("--point", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--alpha", default="0/1")
    p.add_argument("--beta", default="1/0")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--tol", default="0.05")

    p = add("discriminate", "facet decay exponents on both surfaces")
    p.add_argument("--s11-point", default="l=L0,tau=T0", help=point_help)
    p.add_argument("--s04-point", default="l=L0,tau=T0", help=point_help)

    p = add("isometry-check", "does a linear map carry one unit sphere onto another")
    p.add_argument("--point", default="l=2.3,tau=0.45", help=point_help)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--mapping-class", help="integer a,b,c,d; checks its differential against Y = g.X")
    group.add_argument("--matrix", help="decimal a,b,c,d acting on tangent vectors")
    p.add_argument("--to", default=None, help="target point for --matrix (default: the same point)")
    p.add_argument("--samples", type=int, default=16)

    p = add("selftest", "run the acceptance suite")
    p.add_argument("--only", default=None, help="comma-separated criterion numbers")
    return parser


def config_from_args(args) -> CliConfig:
    fmts = COMMANDS[args.command][1]
    if args.fmt not in fmts:
        raise UsageError(f"--format: {args.command} supports {', '.join(fmts)}, not {args.fmt}")
    bits = args.bits if args.bits is not None else _env_int(ENV_BITS, P.DEFAULT_BITS)
    depth = args.depth if args.depth is not None else _env_int(ENV_DEPTH, 14)
    if bits < P.MIN_BITS:
        raise UsageError(f"--bits: must be >= {P.MIN_BITS}, got {bits}")
    if depth < 1:
        raise UsageError(f"--depth: must be >= 1, got {depth}")
    l = tau = None
    spec = getattr(args, "point", None) or getattr(args, "from_", None)
    if spec is not None:
        l, tau = parse_point_spec(spec, "--point" if hasattr(args, "point") else "--from")
    return CliConfig(args.command, args.surface, l, tau, bits, depth, args.seed, args.fmt, args.output)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command][0](cfg, args)
    except UsageError as exc:
        parser.error(str(exc))
    except ThurstonLabError as exc:
        print(json.dumps(exc.to_dict()))
        return 3
    except (ValueError, ArithmeticError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 3
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
