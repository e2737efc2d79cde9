"""Command-line front end.

Exit status: 0 when every requested check passes, 1 on a failed check or a
numerical failure, 2 on a usage error (bad flags, bad input, unwritable
output).  Configuration comes from flags or a JSON file given by
``--config``; flags given explicitly win over the file.
"""

from __future__ import annotations

import argparse
import contextlib
import io as _stdio
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import io, metric, quantify, rotation, surfaces, waves
from .errors import SpaceRotError
from .exprparse import parse_expr

FORMATS = ("json", "csv", "obj")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        # "--c" must never be read as an abbreviation of "--config"
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(n: int):
    def parse(text: str):
        try:
            vals = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated reals, got {text!r}") from None
        if len(vals) != n or not all(math.isfinite(v) for v in vals):
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated finite reals, got {text!r}")
        return vals
    return parse


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive real, got {text!r}")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=_positive, default=1.0, help="speed of light in chosen units")
    p.add_argument("--tol", type=_positive, default=None)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--config", default=None, help="JSON file of option defaults")
    return p


def build_parser() -> tuple[_Parser, dict]:
    common = _common()
    root = _Parser(prog="spacerot", description="Rotating-frame metrics, stable surfaces and wave checks.")
    sub = root.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    p = sub.add_parser("props", parents=[common], help="rotation property suite")
    p.add_argument("--trials", type=int, default=100)
    subs["props"] = p

    p = sub.add_parser("metric", parents=[common], help="interval coefficients at a point")
    p.add_argument("--expr", required=True)
    p.add_argument("--point", type=_floats(3), required=True)
    p.add_argument("--time", type=float, default=0.0)
    p.add_argument("--average", action="store_true", help="long-time average instead of instantaneous")
    subs["metric"] = p

    p = sub.add_parser("surface", parents=[common], help="stable-surface mesh or radius table")
    p.add_argument("--expr", required=True)
    p.add_argument("--resolution", type=_floats(2), default=[32.0, 16.0])
    p.add_argument("--r-max", type=_positive, default=None)
    p.add_argument("--closed-form", action="store_true",
                   help="use the ellipsoid formula for z(w1)*x(w2)*y(w3)")
    subs["surface"] = p

    p = sub.add_parser("residual", parents=[common], help="wave-equation residual reports")
    p.add_argument("equation", choices=("schrodinger", "kleingordon"))
    p.add_argument("--profile", choices=("gaussian", "constant", "plane", "exp", "sinc", "chirp"),
                   default="gaussian")
    p.add_argument("--sigma", type=_positive, default=1.0)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=3.0)
    p.add_argument("--omega", type=_positive, default=5.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--h", type=_positive, default=0.02)
    p.add_argument("--half-width", type=_positive, default=0.4)
    p.add_argument("--order", type=int, choices=(2, 4), default=2)
    subs["residual"] = p

    p = sub.add_parser("quantify", parents=[common], help="allowed sizes from Bessel zeros")
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--count", type=int, default=5)
    subs["quantify"] = p

    p = sub.add_parser("twosource", parents=[common], help="external cancellation scan")
    p.add_argument("--sign", choices=("same", "opposite"), default="same")
    p.add_argument("--points", type=int, default=400)
    subs["twosource"] = p
    return root, subs


def _apply_config(root: _Parser, subs: dict, argv: Sequence[str]) -> argparse.Namespace:
    pre = _Parser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known_args, _ = pre.parse_known_args(argv)
    if known_args.config is not None and known_args.command in subs:
        try:
            with open(known_args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {known_args.config!r}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        sub = subs[known_args.command]
        actions = {a.dest: a for a in sub._actions}
        unknown = sorted(set(cfg) - set(actions) - {"help"})
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        # file values become defaults, so explicit flags still win
        for key in cfg:
            actions[key].required = False
        sub.set_defaults(**cfg)
    args = root.parse_args(argv)
    if not (args.c > 0) or (args.tol is not None and not args.tol > 0):
        raise UsageError("c and tol must be positive")
    return args


# ---------------------------------------------------------------------------
# commands: each returns (payload, passed, writer) where writer(fmt, fh) emits

def _cmd_props(args):
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    result = rotation.property_suite(args.trials, args.seed, args.tol or 1e-12)
    return result, result["passed"], ("json",)


def _cmd_metric(args):
    expr = parse_expr(args.expr)
    if args.average:
        form = metric.time_average_metric(expr, args.point, args.c)
    else:
        form = metric.interval_general(expr, args.point, args.time, args.c)
    payload = form.to_dict()
    payload.update(dt2=form.dt2, expr=expr.to_text(), point=list(args.point),
                   time=None if args.average else args.time, average=args.average)
    rows = [(key, payload[key]) for key in metric.KEYS]
    return payload, True, ("json", "csv"), lambda fh: io.write_csv(("coefficient", "value"), rows, fh)


def _surface(args, expr):
    leaves = list(expr.leaves())
    if isinstance(expr, rotation.Leaf):
        return surfaces.cylinder_surface(expr.spec.omega, args.c), expr.spec.axis
    if args.closed_form:
        labels = [lf.spec.axis.label for lf in leaves]
        if not isinstance(expr, rotation.Product) or labels != ["z", "x", "y"]:
            raise UsageError("--closed-form needs an expression of the form z(w1)*x(w2)*y(w3)")
        return surfaces.ellipsoid_surface(*(lf.spec.omega for lf in leaves), args.c), None
    w = max(lf.spec.omega for lf in leaves)
    if not w > 0:
        raise UsageError("expression has no rotation")
    r_max = args.r_max or 4 * args.c / w
    return surfaces.numeric_surface(expr, r_max, args.c), None


def _cmd_surface(args):
    expr = parse_expr(args.expr)
    surf, axis = _surface(args, expr)
    res = tuple(int(v) for v in args.resolution)
    mesh = surfaces.mesh_surface(surf, res)
    if axis is not None and axis.label != "z":
        mesh.vertices = mesh.vertices @ axis.frame().T
    payload = {"expr": expr.to_text(), "kind": surf.kind, "c": args.c, "resolution": list(res),
               "vertices": int(len(mesh.vertices)), "faces": int(len(mesh.faces)),
               "closed": mesh.is_closed_oriented()}
    if surf.kind == "cylinder":
        payload.update(radius=surf.radius, z_half=surf.z_half)
    else:
        payload["signed_volume"] = mesh.signed_volume()
    writers = {"obj": lambda fh: surfaces.write_obj(mesh, fh),
               "csv": lambda fh: surfaces.write_radius_csv(mesh, fh)}
    return payload, True, ("obj", "json", "csv"), writers


def _profile(args) -> waves.SpatialProfile:
    return {
        "gaussian": lambda: waves.gaussian(args.sigma),
        "constant": lambda: waves.constant(),
        "plane": lambda: waves.plane_phase((args.k, 0.0, 0.0)),
        "exp": lambda: waves.exp_decay(1.0 / args.k if args.k else 1.0),
        "sinc": lambda: waves.radial_sinc(args.k),
        "chirp": lambda: waves.chirp(args.k, args.nu),
    }[args.profile]()


def _cmd_residual(args):
    wave = waves.build_boosted_wave(_profile(args), args.omega, args.beta)
    grid = waves.Grid.cube(args.half_width, args.h, order=args.order)
    if args.equation == "schrodinger":
        report = waves.schrodinger_residual(wave, grid)
        payload = {"equation": "schrodinger", "report": report.to_dict()}
        passed = True
    else:
        report, scalar = waves.klein_gordon_residual(wave, grid)
        payload = {"equation": "kleingordon", "report": report.to_dict(), "scalar": scalar.to_dict()}
        passed = scalar.uniform
    if args.tol is not None:
        passed = passed and report.max <= args.tol
    payload.update(profile=wave.profile.name, omega=args.omega, beta=args.beta, passed=passed)
    return payload, passed, ("json",)


def _cmd_quantify(args):
    if args.l < 0 or args.count < 1:
        raise UsageError("--l must be >= 0 and --count >= 1")
    mode = quantify.ModeSpec(args.l, args.parity)
    spec = quantify.quantified_sizes(mode, args.k, args.count)
    ok = [quantify.boundary_condition_check(mode, args.k, r) for r in spec.sizes]
    payload = spec.to_dict()
    payload["boundary_check"] = ok
    rows = [(i + 1, a, r) for i, (a, r) in enumerate(zip(spec.roots, spec.sizes))]
    return payload, all(ok), ("json", "csv"), lambda fh: io.write_csv(("n", "root", "size"), rows, fh)


def _cmd_twosource(args):
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    sign = 1 if args.sign == "same" else -1
    a_grid = np.linspace(0.0, 4 * np.pi, args.points + 1)[1:]
    scan = quantify.external_cancellation_scan(quantify.sin_profile, sign, a_grid, args.tol or 1e-12)
    payload = scan.to_dict()
    payload["sign"] = args.sign
    rows = list(zip(scan.a, scan.amplitude))
    return payload, True, ("json", "csv"), lambda fh: io.write_csv(("a", "amplitude"), rows, fh)


COMMANDS = {"props": _cmd_props, "metric": _cmd_metric, "surface": _cmd_surface,
            "residual": _cmd_residual, "quantify": _cmd_quantify, "twosource": _cmd_twosource}


def _emit(payload, formats, writer, fmt, fh):
    if fmt not in formats:
        raise UsageError(f"format {fmt!r} not available; choose from {', '.join(formats)}")
    if fmt == "json":
        io.write_json(payload, fh)
    elif isinstance(writer, dict):
        writer[fmt](fh)
    else:
        writer(fh)


def run_command(argv: Sequence[str], stdout=None, stderr=None) -> int:
    """Run one CLI invocation and return its exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    root, subs = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = _apply_config(root, subs, list(argv))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    try:
        result = COMMANDS[args.command](args)
        payload, passed, formats = result[:3]
        writer = result[3] if len(result) > 3 else None
        fmt = args.format or formats[0]
        buf = _stdio.StringIO(newline="")
        _emit(payload, formats, writer, fmt, buf)
    except UsageError as exc:
        print(f"error: {args.command}: {exc}", file=stderr)
        return 2
    except (SpaceRotError, ValueError) as exc:
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=stderr)
        return 1 if isinstance(exc, RuntimeError) else 2
    except RuntimeError as exc:
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    text = buf.getvalue()
    if args.out == "-":
        stdout.write(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.out!r}: {exc}", file=stderr)
            return 2
    return 0 if passed else 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
