"""Operating points where several QPM processes run in one crystal at once."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qpm import (
    DEFAULT_THETA_MAX,
    DEFAULT_TOL,
    NoSolutionError,
    PmProcess,
    QpmSolution,
    TotalInternalReflectionError,
    bulk_mismatch,
    collinear_solution,
    find_roots,
    mismatch_components,
    noncollinear_solution,
    solve_period_collinear,
    solve_temperature_collinear,
)

PERIOD_TOL = 1e-3  # um
T_STEP = 0.05  # C


@dataclass(frozen=True)
class CoincidencePoint:
    temperature: float
    period: float
    processes: tuple[PmProcess, ...]
    solutions: tuple[QpmSolution, ...]
    residual_max: float

    def __post_init__(self):
        if len(self.processes) != len(self.solutions) or len(self.solutions) < 2:
            raise ValueError("a coincidence needs one solution per process, at least two")
        for sol in self.solutions:
            if sol.temperature != self.temperature or sol.period != self.period:
                raise ValueError("all solutions of a coincidence must share (T, period)")
        if len({p.pm_type for p in self.processes}) < 2:
            raise ValueError("a coincidence needs at least two distinct phase-matching types")

    @property
    def material(self) -> str:
        return self.processes[0].material.name

    def to_record(self) -> dict:
        rows = []
        for proc, sol in zip(self.processes, self.solutions):
            rows.append({
                "type": proc.type_label,
                "process": proc.arrow,
                "order": proc.order,
                "output_angle_deg": math.degrees(sol.theta_s_ext),
                "idler_output_angle_deg": math.degrees(sol.theta_i_ext),
                "internal_angle_deg": math.degrees(sol.theta_s_int),
                "residual_rad_per_um": sol.residual,
            })
        return {
            "material": self.material,
            "temperature_C": self.temperature,
            "poling_period_um": self.period,
            "residual_max_rad_per_um": self.residual_max,
            "processes": rows,
        }


def revalidate(point: CoincidencePoint) -> float:
    """Largest mismatch magnitude over the member processes, recomputed from indices."""
    worst = 0.0
    for proc, sol in zip(point.processes, point.solutions):
        lon, tra = mismatch_components(proc, point.temperature, point.period,
                                       sol.theta_s_int, sol.theta_i_int)
        worst = max(worst, math.hypot(lon, tra))
    return worst


def _point(T, period, procs, sols) -> CoincidencePoint:
    return CoincidencePoint(T, period, tuple(procs), tuple(sols), max(s.residual for s in sols))


def _check_shared(procs):
    first = procs[0]
    for p in procs[1:]:
        if p.material is not first.material and p.material.name != first.material.name:
            raise ValueError("processes must share one material")
        if p.pump_wl != first.pump_wl:
            raise ValueError("processes must share one pump wavelength")


def _temperature_grid(proc: PmProcess, T_range, step: float) -> np.ndarray:
    lo, hi = T_range
    if not lo < hi or step <= 0:
        raise ValueError("temperature range must be non-empty and the step positive")
    n = int(round((hi - lo) / step)) + 1
    grid = np.round(np.linspace(lo, hi, n), 10)
    wlo, whi = proc.material.temperature_window
    return grid[(grid >= wlo) & (grid <= whi)]


def _companion(companion, T, period, angle_window, theta_max, tol):
    try:
        sol = noncollinear_solution(companion, T, period, theta_max=theta_max, tol=tol)
    except (NoSolutionError, TotalInternalReflectionError):
        return None
    lo, hi = angle_window
    return sol if lo <= math.degrees(sol.theta_s_ext) <= hi else None


def find_dual_type(anchor: PmProcess, companion: PmProcess, T_range, angle_window=(0.0, 20.0), *,
                   step: float = T_STEP, period_step: float | None = None,
                   theta_max: float = DEFAULT_THETA_MAX,
                   tol: float = DEFAULT_TOL) -> list[CoincidencePoint]:
    """Walk the anchor's collinear period curve and keep points the companion can join.

    The companion runs non-collinearly; a point is kept when its signal exit
    angle falls inside ``angle_window`` (degrees). With ``period_step`` the
    anchor period is rounded down onto that grid, so the anchor itself goes
    slightly non-collinear and reports its own small angle.
    """
    _check_shared((anchor, companion))
    points = []
    for T in _temperature_grid(anchor, T_range, step):
        T = float(T)
        try:
            period = solve_period_collinear(anchor, T)
        except NoSolutionError:
            continue
        if period_step:
            period = round(math.floor(period / period_step + 1e-9) * period_step, 10)
            try:
                anchor_sol = noncollinear_solution(anchor, T, period, theta_max=theta_max, tol=tol)
            except (NoSolutionError, TotalInternalReflectionError):
                continue
        else:
            anchor_sol = collinear_solution(anchor, T, period)
        comp_sol = _companion(companion, T, period, angle_window, theta_max, tol)
        if comp_sol is not None:
            points.append(_point(T, period, (anchor, companion), (anchor_sol, comp_sol)))
    return points


def dual_type_at_period(anchor: PmProcess, companion: PmProcess, period: float, T_range=None,
                        angle_window=(0.0, 20.0), *, theta_max: float = DEFAULT_THETA_MAX,
                        tol: float = DEFAULT_TOL) -> list[CoincidencePoint]:
    """Dual-type points for a fixed poling period: anchor temperature roots, companion angles."""
    _check_shared((anchor, companion))
    points = []
    for T in solve_temperature_collinear(anchor, period, T_range, tol=tol):
        comp_sol = _companion(companion, T, period, angle_window, theta_max, tol)
        if comp_sol is not None:
            sols = (collinear_solution(anchor, T, period), comp_sol)
            points.append(_point(T, period, (anchor, companion), sols))
    return points


def _identity(p: PmProcess):
    return (p.pm_type, p.pols_tuple, p.order, p.pump_wl, p.signal_wl, p.idler_wl)


def find_triple_type(procs, T_range=None, *, step: float = T_STEP,
                     period_tol: float = PERIOD_TOL) -> list[CoincidencePoint]:
    """Temperatures where three collinear period curves meet.

    Roots of period_A(T) - period_B(T) are refined with Brent's method and
    kept when the third curve passes within ``period_tol`` um.
    """
    procs = tuple(procs)
    if len(procs) != 3:
        raise ValueError("triple-type search needs exactly three processes")
    if any(p.geometry != "collinear" for p in procs):
        raise ValueError("triple-type search needs collinear processes")
    if len({_identity(p) for p in procs}) != 3:
        raise ValueError("processes not distinct")
    _check_shared(procs)
    a, b, c = procs
    lo, hi = T_range if T_range is not None else a.material.temperature_window
    a.material.check_domain(a.pump_wl, [lo, hi])

    def period_of(p, T):
        bulk = np.asarray(bulk_mismatch(p, T), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(bulk > 0, 2 * math.pi * p.order / bulk, np.nan)

    def gap(T):
        return period_of(a, T) - period_of(b, T)

    intervals = max(int(round((hi - lo) / step)), 1)
    points = []
    for T in find_roots(gap, lo, hi, intervals=intervals, tol=1e-12):
        period = float(period_of(a, T))
        if not abs(float(period_of(c, T)) - period) <= period_tol:
            continue
        sols = tuple(collinear_solution(p, T, period) for p in procs)
        points.append(_point(T, period, procs, sols))
    return points


def sensitivity(anchor: PmProcess, period: float, delta: float, T_range=None,
                T_ref: float | None = None) -> float:
    """Temperature shift that restores collinear phase matching after a period change."""
    before = solve_temperature_collinear(anchor, period, T_range)
    after = solve_temperature_collinear(anchor, period + delta, T_range)
    if not before or not after:
        side = period if not before else period + delta
        raise NoSolutionError(f"no phase-matching temperature for {anchor.tag} at period {side:g} um")
    T0 = before[0] if T_ref is None else min(before, key=lambda t: abs(t - T_ref))
    T1 = min(after, key=lambda t: abs(t - T0))
    return T1 - T0
