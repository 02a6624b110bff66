"""Command-line entry point.

Exit status is 0 when every check passes, 1 when a check fails and 2 on
usage errors, including violated hypotheses of the regularity formulas.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import jsonio
from .errors import GeometryError, HelmshapeError, NotSupported
from .geometry import StarCurve, VelocityField
from .mie import WaveParameters
from .regularity import RegularityError, RegularityQuery, regularity_report

__all__ = ["main", "run", "build_parser", "load_config", "UsageError"]

FIELDS = ("dilation", "translation", "normal", "tangential", "random")
TARGETS = ("MD", "SD", "CMD", "CSD", "Stability", "StabilityTrace", "Lie")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# parser

def _problem_args(p, beta=True):
    if beta:
        p.add_argument("--beta", type=int, choices=(0, 1, 2, 3), default=0)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--kappa1", type=float, default=3.0)
    p.add_argument("--mu0", type=float, default=1.0)
    p.add_argument("--mu1", type=float, default=2.0)
    p.add_argument("--incident", type=float, default=0.3, help="plane-wave angle")
    p.add_argument("--curve", choices=("disc", "ellipse"), default="disc")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.2, help="ellipse-like perturbation amplitude")
    p.add_argument("--harmonic", type=int, default=2)
    p.add_argument("--N", type=int, default=None, help="boundary nodes")
    p.add_argument("--backend", choices=("auto", "mie", "bie"), default="auto")


def _field_args(p, default="dilation"):
    p.add_argument("--field", choices=FIELDS, default=default)


def _common(p, formats=("json", "table")):
    p.add_argument("--format", choices=("json", "csv", "table"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="file of `key = value` lines")
    p.set_defaults(_formats=formats)


def build_parser():
    parser = _Parser(prog="helmshape", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("regularity", help="Sobolev indices of solutions and derivatives")
    p.add_argument("--r", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--k", default=None, help="velocity class, defaults to r")
    p.add_argument("--beta", type=int, choices=(0, 1, 2, 3), required=True)
    p.add_argument("--mode", choices=("classic", "sharp"), default="sharp")
    _common(p)

    p = sub.add_parser("solve", help="boundary traces of the total field")
    _problem_args(p)
    _common(p)

    p = sub.add_parser("derive", help="shape and material derivative traces")
    _problem_args(p)
    _field_args(p)
    p.add_argument("--reading", choices=("conormal", "grad", "normal"), default="conormal")
    _common(p)

    p = sub.add_parser("taylor", help="Taylor remainder study")
    _problem_args(p)
    _field_args(p)
    p.add_argument("--target", choices=TARGETS, default="MD")
    p.add_argument("--ladder", default=None, help="comma-separated decreasing t values")
    _common(p, ("json", "csv", "table"))

    p = sub.add_parser("hadamard", help="dependence on the normal component only")
    _problem_args(p)
    _common(p)

    p = sub.add_parser("mp-residual", help="boundary value problem residual of the material derivative")
    _problem_args(p)
    _field_args(p, "normal")
    _common(p)

    p = sub.add_parser("crosscheck", help="series versus integral-equation solver")
    _problem_args(p)
    _field_args(p, "normal")
    _common(p)

    p = sub.add_parser("suite", help="the full acceptance battery")
    p.add_argument("--quick", action="store_true")
    _common(p)
    return parser


# ---------------------------------------------------------------------------
# config

def load_config(path):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected `key = value`")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(parser, argv):
    """Install config values as subcommand defaults so flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    ns, _ = pre.parse_known_args(argv)
    if not ns.config:
        return
    try:
        sp = _subparser(parser, ns.command)
    except KeyError:
        return
    cfg = load_config(ns.config)
    known = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(cfg) - set(known))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    defaults = {}
    for key, text in cfg.items():
        act = known[key]
        if isinstance(act, argparse._StoreTrueAction):
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects a boolean")
            value = text.lower() in ("true", "1", "yes")
        else:
            try:
                value = act.type(text) if act.type else text
            except ValueError:
                raise UsageError(f"config key {key!r}: invalid value {text!r}") from None
            if act.choices is not None and value not in act.choices:
                raise UsageError(f"config key {key!r}: {text!r} not in {list(act.choices)}")
        defaults[key] = value
        act.required = False
    sp.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# builders

def _params(a):
    return WaveParameters(a.kappa, eta=a.eta, kappa1=a.kappa1, mu0=a.mu0, mu1=a.mu1)


def _curve(a):
    if a.curve == "disc":
        return StarCurve.circle(a.radius, a.N or 128)
    return StarCurve.ellipse_like(a.eps, a.harmonic, a.N or 256)


def _velocity(a, curve):
    if a.field == "dilation":
        return VelocityField.dilation(tuple(curve.center))
    if a.field == "translation":
        return VelocityField.translation((0.6, -0.3))
    if a.field == "normal":
        return VelocityField.normal_profile(curve, lambda p: 1.0 + 0.3 * np.cos(2 * p))
    if a.field == "tangential":
        return VelocityField.tangential_profile(curve, lambda p: 0.5 + np.cos(p))
    rng = np.random.default_rng(a.seed)
    cn, ct = rng.uniform(-0.3, 0.3, 4), rng.uniform(-0.3, 0.3, 2)
    vn = VelocityField.normal_profile(
        curve, lambda p: 1.0 + cn[0] * np.cos(2 * p) + cn[1] * np.sin(2 * p)
        + cn[2] * np.cos(3 * p) + cn[3] * np.sin(p))
    vt = VelocityField.tangential_profile(
        curve, lambda p: ct[0] * np.cos(p) + ct[1] * np.sin(2 * p))
    return vn + vt


def _profile(a):
    rng = np.random.default_rng(a.seed)
    c = rng.uniform(-0.3, 0.3, 3)
    return lambda p: 1.0 + c[0] * np.cos(2 * p) + c[1] * np.sin(3 * p) + c[2] * np.cos(p)


def _cx(arr):
    return [[float(z.real), float(z.imag)] for z in np.asarray(arr).ravel()]


# ---------------------------------------------------------------------------
# commands; each returns (payload, passed)

def cmd_regularity(a):
    q = RegularityQuery(a.r, a.q, a.r if a.k is None else a.k, a.beta, a.mode)
    out = regularity_report(q).to_dict()
    out["provenance"] = jsonio.provenance(command="regularity")
    return out, True


def cmd_solve(a):
    from .problem import solve
    params = _params(a).validate(a.beta)
    sol = solve(a.beta, _curve(a), params, a.incident, backend=a.backend)
    traces = {s: {"lam": _cx(sol.state(s).lam), "sigma": _cx(sol.state(s).sigma)}
              for s in sol.sides}
    out = {"provenance": jsonio.provenance(command="solve", incident=a.incident,
                                           **sol.provenance()),
           "traces": traces}
    if sol.backend == "bie":
        from .bie import boundary_residual
        res = boundary_residual(sol.raw)
        out["boundary_residual"] = res
    return out, True


def cmd_derive(a):
    from .derivatives import derive
    from .problem import solve
    params = _params(a).validate(a.beta)
    curve = _curve(a)
    base = solve(a.beta, curve, params, a.incident, backend=a.backend)
    out = derive(base, _velocity(a, curve), reading=a.reading).to_json()
    out["provenance"] = jsonio.provenance(command="derive", incident=a.incident,
                                          field=a.field, **out["provenance"])
    return out, True


def cmd_taylor(a):
    from .verify import TaylorStudy, default_ladder, taylor_study
    params = _params(a).validate(a.beta)
    curve = _curve(a)
    if a.ladder:
        try:
            ladder = tuple(float(x) for x in a.ladder.split(","))
        except ValueError:
            raise UsageError(f"invalid ladder {a.ladder!r}") from None
    else:
        ladder = default_ladder()
    study = TaylorStudy(a.beta, params, curve, _velocity(a, curve), a.target, ladder,
                        incident=a.incident, backend=a.backend, seed=a.seed,
                        label=f"{a.target}-{a.curve}-{a.field}-beta{a.beta}")
    rep = taylor_study(study)
    return rep, rep.passed


def cmd_hadamard(a):
    from .verify import hadamard_check
    params = _params(a).validate(a.beta)
    out = hadamard_check(a.beta, _curve(a), params, _profile(a), incident=a.incident,
                         backend=a.backend)
    return out, out["passed"]


def cmd_mp_residual(a):
    from .derivatives import derive
    from .problem import solve
    from .verify import mp_residual_check
    if a.beta == 3:
        raise NotSupported("mp-residual covers beta = 0, 1, 2")
    params = _params(a).validate(a.beta)
    curve = _curve(a)
    base = solve(a.beta, curve, params, a.incident, backend=a.backend)
    out = mp_residual_check(derive(base, _velocity(a, curve)))
    return out, out["passed"]


def cmd_crosscheck(a):
    from .verify import cross_backend_check
    params = _params(a).validate(a.beta)
    v = None
    if a.field != "normal":
        v = _velocity(a, StarCurve.circle(a.radius, a.N or 256))
    out = cross_backend_check(a.beta, params, v, N=a.N or 256, radius=a.radius,
                              incident=a.incident)
    return out, out["passed"]


def cmd_suite(a):
    from .verify import run_suite
    report, timings = run_suite(quick=a.quick, seed=a.seed)
    for key, sec in timings.items():
        flag = "pass" if report["criteria"][key]["passed"] else "FAIL"
        print(f"[{flag}] {key:>10s} {sec:8.2f} s", file=sys.stderr)
    return report, report["passed"]


COMMANDS = {"regularity": cmd_regularity, "solve": cmd_solve, "derive": cmd_derive,
            "taylor": cmd_taylor, "hadamard": cmd_hadamard, "mp-residual": cmd_mp_residual,
            "crosscheck": cmd_crosscheck, "suite": cmd_suite}


# ---------------------------------------------------------------------------
# output

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and len(obj) > 8:
        yield prefix, f"[{len(obj)} values]"
    else:
        yield prefix, jsonio.dumps(obj, indent=0).strip()


def _table(payload):
    rows = list(_flatten(jsonio.to_plain(payload)))
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def render(payload, fmt):
    if fmt == "csv":
        return payload.to_csv()
    if fmt == "table":
        return _table(payload)
    return jsonio.dumps(payload)


def run(argv=None, stdout=None):
    """Execute one command; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        argv = sys.argv[1:] if argv is None else list(argv)
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.format not in args._formats:
            raise UsageError(f"--format {args.format} is not available for {args.command}")
        threads = os.environ.get("HELMSHAPE_THREADS", "1").strip()
        if not threads.isdigit() or int(threads) < 1:
            raise UsageError("HELMSHAPE_THREADS must be a positive integer")
        payload, passed = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"helmshape: error: {exc}", file=sys.stderr)
        return 2
    except (RegularityError, NotSupported, GeometryError) as exc:
        print(f"helmshape: error: {exc}", file=sys.stderr)
        return 2
    except HelmshapeError as exc:
        print(f"helmshape: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"helmshape: error: {exc}", file=sys.stderr)
        return 2
    try:
        stdout.write(render(payload, args.format))
        stdout.flush()
    except BrokenPipeError:
        sys.stdout = None
    return 0 if passed else 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
