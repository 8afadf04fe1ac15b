"""Command-line front end.

    multiqpm curve    --material PPLN --pols o:e,o --order 2 --t 20:40
    multiqpm solve    --material PPSLT --pols o:o,o --t 72.1
    multiqpm coincide --material PPLN --process II/o:e,o/2 --process I/o:e,e/3 --period 18
    multiqpm sagnac   --process type0 --hwp-offset 45
    multiqpm materials list

Exit codes: 0 success, 2 usage, 3 material/domain error, 4 no solution.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coincidence import dual_type_at_period, find_dual_type, find_triple_type
from .materials import BUNDLED_DIR, DomainError, MaterialError, available_materials, find_material, load_material
from .qpm import (
    DEFAULT_INTERVALS,
    DEFAULT_TOL,
    NoSolutionError,
    PmProcess,
    angle_vs_temperature_curve,
    bulk_mismatch,
    collinear_solution,
    grating_vector,
    noncollinear_solution,
    normalize_type,
    period_vs_temperature_curve,
    solve_period,
    solve_temperature_collinear,
)
from .sagnac import bell_fidelities, build_sagnac_state

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NO_SOLUTION = 0, 2, 3, 4
FORMATS = ("csv", "json", "table")

log = logging.getLogger("multiqpm")


class CliError(Exception):
    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code = code
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("E_USAGE", message, EXIT_USAGE)


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"range {text!r} is empty")
    return lo, hi


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _phase(text: str) -> float:
    """Radians; accepts plain numbers and multiples of pi such as ``pi/2`` or ``-pi``."""
    t = text.strip().lower().replace(" ", "")
    try:
        if "pi" not in t:
            return float(t)
        head, _, tail = t.partition("pi")
        head = head.rstrip("*")
        coef = {"": 1.0, "-": -1.0, "+": 1.0}.get(head)
        coef = float(head) if coef is None else coef
        if tail:
            if not tail.startswith("/"):
                raise ValueError
            coef /= float(tail[1:])
        return coef * math.pi
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read phase {text!r}") from None


def _common(parser):
    g = parser.add_argument_group("global options")
    g.add_argument("--materials-dir", default=argparse.SUPPRESS,
                   help="directory of material JSON files (default ./materials, else bundled)")
    g.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS, help="output format")
    g.add_argument("--out", default=argparse.SUPPRESS, metavar="PATH",
                   help="output file (default stdout); a bare format name selects the format")
    g.add_argument("--tolerance", type=_positive, default=argparse.SUPPRESS,
                   help=f"root residual tolerance in rad/um (default {DEFAULT_TOL:g})")


def _process_args(parser):
    parser.add_argument("--material", required=True)
    parser.add_argument("--type", dest="pm_type", help="0, I or II (checked against --pols)")
    parser.add_argument("--pols", required=True, help="pump:signal,idler in o/e notation, e.g. o:e,o")
    parser.add_argument("--order", type=int, default=1)
    parser.add_argument("--pump-wl", type=_positive, default=0.775, help="um")
    parser.add_argument("--signal-wl", type=_positive, default=1.55, help="um")
    parser.add_argument("--theta-max", type=_positive, default=30.0, help="internal angle ceiling, deg")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multiqpm", description="Multi-type QPM solver for periodically poled crystals.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("curve", help="period or exit angle versus temperature")
    _common(p)
    _process_args(p)
    p.add_argument("--t", type=_range, required=True, metavar="LO:HI", help="temperature range, C")
    p.add_argument("--points", type=int, default=501)
    p.add_argument("--kind", choices=("period", "angle"), default="period")
    p.add_argument("--period", type=_positive, help="poling period for --kind angle, um")

    p = sub.add_parser("solve", help="solve one operating point")
    _common(p)
    _process_args(p)
    p.add_argument("--t", type=float, help="fixed temperature, C")
    p.add_argument("--period", type=_positive, help="fixed poling period, um")
    p.add_argument("--t-range", type=_range, metavar="LO:HI", help="search range for temperature roots")
    p.add_argument("--geometry", choices=("collinear", "noncollinear"), default="collinear")

    p = sub.add_parser("coincide", help="dual- or triple-type operating points")
    _common(p)
    p.add_argument("--material", required=True)
    p.add_argument("--process", action="append", default=[], metavar="[TYPE/]POLS/ORDER",
                   help="repeat 2 or 3 times; first is the collinear anchor, e.g. II/o:e,o/2")
    p.add_argument("--t", type=_range, metavar="LO:HI", help="temperature range, C")
    p.add_argument("--t-step", type=_positive, default=0.05)
    p.add_argument("--window", type=_range, default=(0.0, 20.0), metavar="LO:HI",
                   help="companion exit-angle window, deg")
    p.add_argument("--period", type=_positive, help="fix the poling period (dual search)")
    p.add_argument("--period-step", type=_positive, help="round anchor periods down onto this grid, um")
    p.add_argument("--pump-wl", type=_positive, default=0.775)
    p.add_argument("--signal-wl", type=_positive, default=1.55)
    p.add_argument("--theta-max", type=_positive, default=30.0)

    p = sub.add_parser("sagnac", help="two-photon state from the Sagnac source")
    _common(p)
    p.add_argument("--process", required=True)
    p.add_argument("--hwp-offset", type=float, default=0.0, help="deg")
    p.add_argument("--phase", type=_phase, default=0.0, help="relative phase, rad (pi, pi/2 ... allowed)")

    p = sub.add_parser("materials", help="material database")
    _common(p)
    msub = p.add_subparsers(dest="action", parser_class=_Parser, required=True)
    _common(msub.add_parser("list", help="list available materials"))
    return parser


def _materials_dir(args) -> Path:
    given = getattr(args, "materials_dir", None)
    if given is not None:
        return Path(given)
    local = Path("materials")
    return local if local.is_dir() else BUNDLED_DIR


def _material(args):
    return find_material(args.material, _materials_dir(args))


def _proc(args, material, pols, order, pm_type=None, geometry="collinear") -> PmProcess:
    try:
        return PmProcess.from_notation(material, pols, order, pm_type=pm_type, pump_wl=args.pump_wl,
                                       signal_wl=args.signal_wl, geometry=geometry)
    except MaterialError:
        raise
    except ValueError as exc:
        raise CliError("E_USAGE", str(exc), EXIT_USAGE) from None


def _tol(args) -> float:
    return getattr(args, "tolerance", DEFAULT_TOL)


def _fmt(args, default: str) -> str:
    return getattr(args, "format", None) or default


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _deg(rad: float) -> str:
    return f"{math.floor(math.degrees(rad) + 0.5):d}"


def cmd_curve(args) -> str:
    mat = _material(args)
    proc = _proc(args, mat, args.pols, args.order, args.pm_type)
    if args.points < 2:
        raise CliError("E_USAGE", "--points must be at least 2", EXIT_USAGE)
    if args.kind == "period":
        curve = period_vs_temperature_curve(proc, args.t, args.points)
    else:
        if args.period is None:
            raise CliError("E_USAGE", "--kind angle needs --period", EXIT_USAGE)
        curve = angle_vs_temperature_curve(proc, args.period, args.t, args.points,
                                           theta_max=math.radians(args.theta_max))
    if not len(curve):
        print(f"warning[W_EMPTY]: no phase-matching points for {curve.process_tag} in {args.t}",
              file=sys.stderr)
    fmt = _fmt(args, "csv")
    if fmt == "json":
        return _json(curve.to_record())
    if fmt == "csv":
        return curve.to_csv()
    digits = 3 if args.kind == "period" else 2
    lines = [f"# {curve.process_tag}", f"{curve.abscissa_name:>14}  {curve.ordinate_name:>14}"]
    lines += [f"{x:>14.2f}  {y:>14.{digits}f}" for x, y in curve.points]
    return "\n".join(lines) + "\n"


def _solution_rows(proc, solutions):
    header = ["process", "temperature_C", "period_um", "order", "theta_s_int_deg", "theta_i_int_deg",
              "theta_s_ext_deg", "theta_i_ext_deg", "residual_rad_per_um"]
    rows = [[proc.tag, s.temperature, s.period, s.order, math.degrees(s.theta_s_int),
             math.degrees(s.theta_i_int), math.degrees(s.theta_s_ext), math.degrees(s.theta_i_ext),
             s.residual] for s in solutions]
    return header, rows


def cmd_solve(args) -> str:
    mat = _material(args)
    proc = _proc(args, mat, args.pols, args.order, args.pm_type, args.geometry)
    tol = _tol(args)
    if args.geometry == "noncollinear":
        if args.t is None or args.period is None:
            raise CliError("E_USAGE", "noncollinear solve needs both --t and --period", EXIT_USAGE)
        solutions = [noncollinear_solution(proc, args.t, args.period,
                                           theta_max=math.radians(args.theta_max), tol=tol)]
    elif (args.t is None) == (args.period is None):
        raise CliError("E_USAGE", "give exactly one of --t or --period", EXIT_USAGE)
    elif args.t is not None:
        solutions = [solve_period(proc, args.t)]
    else:
        t_range = args.t_range or mat.temperature_window
        roots = solve_temperature_collinear(proc, args.period, t_range, tol=tol)
        if not roots:
            grid = np.linspace(*t_range, DEFAULT_INTERVALS + 1)
            dk = np.asarray(bulk_mismatch(proc, grid)) - grating_vector(proc.order, args.period)
            i = int(np.argmin(np.abs(dk)))
            raise NoSolutionError(
                f"no temperature root for {proc.tag} at period {args.period:g} um in "
                f"[{t_range[0]:g}, {t_range[1]:g}] C; scanned {DEFAULT_INTERVALS} intervals, "
                f"min |dk| = {abs(dk[i]):.4g} rad/um at {grid[i]:.2f} C, dk range "
                f"[{dk.min():.4g}, {dk.max():.4g}]"
            )
        solutions = [collinear_solution(proc, T, args.period) for T in roots]
    fmt = _fmt(args, "table")
    header, rows = _solution_rows(proc, solutions)
    if fmt == "json":
        return _json([{"process": proc.tag, **s.to_dict()} for s in solutions])
    if fmt == "csv":
        return _csv([header, *rows])
    out = []
    for s in solutions:
        out += [
            f"process            {proc.tag}",
            f"temperature        {s.temperature:.1f} C",
            f"poling period      {s.period:.3f} um",
            f"order              {s.order}",
            f"signal angle       {math.degrees(s.theta_s_int):.3f} deg internal, "
            f"{math.degrees(s.theta_s_ext):.3f} deg external",
            f"idler angle        {math.degrees(s.theta_i_int):.3f} deg internal, "
            f"{math.degrees(s.theta_i_ext):.3f} deg external",
            f"residual           {s.residual:.3e} rad/um",
            "",
        ]
    return "\n".join(out)


def _parse_process_spec(text: str):
    parts = text.split("/")
    if len(parts) == 2:
        pm_type, (pols, order) = None, parts
    elif len(parts) == 3:
        pm_type, pols, order = parts
    else:
        raise CliError("E_USAGE", f"process {text!r} must look like [TYPE/]POLS/ORDER", EXIT_USAGE)
    try:
        return (normalize_type(pm_type) if pm_type else None), pols, int(order)
    except ValueError as exc:
        raise CliError("E_USAGE", f"process {text!r}: {exc}", EXIT_USAGE) from None


def render_coincidences(points, fmt: str) -> str:
    if fmt == "json":
        return _json([p.to_record() for p in points])
    if fmt == "csv":
        rows = [["material", "temperature_C", "period_um", "type", "process", "order",
                 "output_angle_deg", "residual_rad_per_um"]]
        for p in points:
            for r in p.to_record()["processes"]:
                rows.append([p.material, p.temperature, p.period, r["type"], r["process"], r["order"],
                             r["output_angle_deg"], r["residual_rad_per_um"]])
        return _csv(rows)
    if not points:
        return "no coincidence found\n"
    widths = (9, 8, 14, 18, 6, 12)
    head = ("Material", "Temp.", "Poling period", "Process", "Order", "Output angle")
    line = "  ".join(f"{h:<{w}}" for h, w in zip(head, widths)).rstrip()
    out = [line, "-" * len(line)]
    for p in points:
        for k, (proc, sol) in enumerate(zip(p.processes, p.solutions)):
            cells = (
                p.material if k == 0 else "",
                f"{p.temperature:.1f}C" if k == 0 else "",
                f"{p.period:.3f}um" if k == 0 else "",
                f"{proc.type_label}:{proc.arrow}",
                str(proc.order),
                f"{_deg(sol.theta_s_ext)}deg",
            )
            out.append("  ".join(f"{c:<{w}}" for c, w in zip(cells, widths)).rstrip())
    return "\n".join(out) + "\n"


def cmd_coincide(args) -> str:
    if len(args.process) not in (2, 3):
        raise CliError("E_USAGE", f"coincide needs 2 or 3 --process specs, got {len(args.process)}",
                       EXIT_USAGE)
    mat = _material(args)
    specs = [_parse_process_spec(s) for s in args.process]
    procs = [_proc(args, mat, pols, order, pm_type) for pm_type, pols, order in specs]
    t_range = args.t or mat.temperature_window
    theta_max = math.radians(args.theta_max)
    if len(procs) == 3:
        try:
            points = find_triple_type(procs, t_range, step=args.t_step)
        except ValueError as exc:
            if isinstance(exc, DomainError):
                raise
            raise CliError("E_USAGE", str(exc), EXIT_USAGE) from None
    elif args.period is not None:
        points = dual_type_at_period(procs[0], procs[1], args.period, t_range, args.window,
                                     theta_max=theta_max, tol=_tol(args))
    else:
        points = find_dual_type(procs[0], procs[1], t_range, args.window, step=args.t_step,
                                period_step=args.period_step, theta_max=theta_max, tol=_tol(args))
    if not points:
        print("note: no coincidence found", file=sys.stderr)
    return render_coincidences(points, _fmt(args, "table"))


def cmd_sagnac(args) -> str:
    try:
        process = normalize_type(args.process)
    except ValueError as exc:
        raise CliError("E_USAGE", str(exc), EXIT_USAGE) from None
    state = build_sagnac_state(process, math.radians(args.hwp_offset), args.phase)
    fids = bell_fidelities(state)
    fmt = _fmt(args, "table")
    if fmt == "json":
        return _json({
            "process": process,
            "paths": list(state.paths),
            "hwp_offset_deg": args.hwp_offset,
            "phase_rad": args.phase,
            "amplitudes": [{"ket": k, "re": re, "im": im} for k, re, im in state.as_rows()],
            "bell_fidelities": fids,
        })
    if fmt == "csv":
        rows = [["ket", "re", "im"], *state.as_rows(), [], ["bell_state", "fidelity"], *fids.items()]
        return _csv(rows)
    p1, p2 = state.paths
    out = [f"process {process}  paths {p1},{p2}  hwp-offset {args.hwp_offset:g} deg  phase {args.phase:.6f} rad",
           "ket   re          im"]
    out += [f"{k:<4}  {_clean(re):+.9f}  {_clean(im):+.9f}" for k, re, im in state.as_rows()]
    out.append("bell  fidelity")
    out += [f"{name:<4}  {_clean(f):.12f}" for name, f in fids.items()]
    return "\n".join(out) + "\n"


def _clean(x: float) -> float:
    # keep rendering stable: no "-0.000000000" from roundoff
    return 0.0 if abs(x) < 5e-13 else x


def cmd_materials(args) -> str:
    directory = _materials_dir(args)
    known = available_materials(directory)
    fmt = _fmt(args, "table")
    rows = []
    for name, path in known.items():
        mat = load_material(path)
        rows.append((name, mat.wavelength_window, mat.temperature_window, sorted(mat.axes), mat.source))
    if fmt == "json":
        return _json([{"name": n, "wavelength_window_um": list(w), "temperature_window_C": list(t),
                       "axes": a, "source": s} for n, w, t, a, s in rows])
    if fmt == "csv":
        return _csv([["name", "lambda_min_um", "lambda_max_um", "t_min_C", "t_max_C", "axes", "source"],
                     *[[n, *w, *t, "".join(a), s] for n, w, t, a, s in rows]])
    out = [f"materials in {directory}"]
    out += [f"{n:<8} {w[0]:g}-{w[1]:g} um  {t[0]:g}-{t[1]:g} C  axes {''.join(a)}  {s}" for n, w, t, a, s in rows]
    return "\n".join(out) + "\n"


COMMANDS = {"curve": cmd_curve, "solve": cmd_solve, "coincide": cmd_coincide,
            "sagnac": cmd_sagnac, "materials": cmd_materials}


def _emit(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="warning[W_RANGE]: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        out = getattr(args, "out", None)
        if out in FORMATS:
            args.format = getattr(args, "format", None) or out
            args.out = None
        _emit(args, COMMANDS[args.command](args))
        return EXIT_OK
    except CliError as exc:
        _fail(exc.code, str(exc))
        return exc.status
    except NoSolutionError as exc:
        _fail("E_NO_SOLUTION", str(exc))
        return EXIT_NO_SOLUTION
    except MaterialError as exc:
        _fail("E_MATERIAL", str(exc))
        return EXIT_DOMAIN
    except DomainError as exc:
        _fail("E_DOMAIN", str(exc))
        return EXIT_DOMAIN


def _fail(code: str, message: str) -> None:
    print(f"error[{code}]: {' '.join(message.split())}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
