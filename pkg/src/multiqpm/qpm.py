"""Wavevector bookkeeping and QPM solvers for degenerate and non-degenerate SPDC.

Angles are radians internally; curves report exit angles in degrees.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .materials import (
    EXTRAORDINARY_AXIS,
    ORDINARY_AXIS,
    DomainError,
    MaterialDispersion,
    MaterialError,
    effective_extraordinary_index,
    refractive_index,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-10  # rad/um
DEFAULT_INTERVALS = 400
DEFAULT_MAXITER = 80
DEFAULT_THETA_MAX = math.radians(30.0)

PM_TYPES = ("type0", "typeI", "typeII")
WAVES = ("pump", "signal", "idler")


class NoSolutionError(RuntimeError):
    """No phase-matching root exists for the requested configuration."""


class TotalInternalReflectionError(DomainError):
    """A ray inside the crystal cannot leave through the output face."""


def normalize_type(name: str) -> str:
    key = name.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
    key = key.removeprefix("type")
    table = {"0": "type0", "i": "typeI", "1": "typeI", "ii": "typeII", "2": "typeII"}
    if key not in table:
        raise ValueError(f"unknown phase-matching type {name!r}; expected 0, I or II")
    return table[key]


def classify(pump_pol: str, signal_pol: str, idler_pol: str) -> str:
    if signal_pol != idler_pol:
        return "typeII"
    return "type0" if signal_pol == pump_pol else "typeI"


def parse_pols(text: str) -> tuple[str, str, str]:
    """Parse ``pump:signal,idler`` in o/e notation, e.g. ``o:e,o``."""
    try:
        pump, pair = text.split(":")
        signal, idler = pair.split(",")
    except ValueError:
        raise ValueError(f"polarizations {text!r} must look like 'o:e,o'") from None
    pols = tuple(p.strip().lower() for p in (pump, signal, idler))
    if any(p not in ("o", "e") for p in pols):
        raise ValueError(f"polarizations {text!r} may only use 'o' and 'e'")
    return pols


@dataclass(frozen=True)
class PmProcess:
    """One SPDC configuration in a given crystal."""

    material: MaterialDispersion
    pm_type: str
    pump_pol: str
    signal_pol: str
    idler_pol: str
    pump_wl: float = 0.775
    signal_wl: float = 1.55
    idler_wl: float | None = None
    order: int = 1
    geometry: str = "collinear"

    def __post_init__(self):
        if self.idler_wl is None:
            inv = 1.0 / self.pump_wl - 1.0 / self.signal_wl
            if inv <= 0:
                raise ValueError("signal wavelength must exceed the pump wavelength")
            object.__setattr__(self, "idler_wl", 1.0 / inv)
        if min(self.pump_wl, self.signal_wl, self.idler_wl) <= 0:
            raise ValueError("wavelengths must be positive")
        energy = 1.0 / self.pump_wl - 1.0 / self.signal_wl - 1.0 / self.idler_wl
        if abs(energy) > 1e-12:
            raise ValueError(f"energy conservation violated by {energy:.3e} 1/um")
        for pol in (self.pump_pol, self.signal_pol, self.idler_pol):
            if pol not in ("o", "e"):
                raise ValueError(f"polarization must be 'o' or 'e', got {pol!r}")
        if self.pm_type not in PM_TYPES:
            raise ValueError(f"pm_type must be one of {PM_TYPES}")
        actual = classify(self.pump_pol, self.signal_pol, self.idler_pol)
        if actual != self.pm_type:
            raise ValueError(
                f"polarizations {self.pols} describe {actual}, not {self.pm_type}"
            )
        if not isinstance(self.order, (int, np.integer)) or self.order < 1:
            raise ValueError("QPM order must be a positive integer")
        if self.geometry not in ("collinear", "noncollinear"):
            raise ValueError("geometry must be 'collinear' or 'noncollinear'")
        axes = {ORDINARY_AXIS if p == "o" else EXTRAORDINARY_AXIS for p in self.pols_tuple}
        if "e" in self.pols_tuple:
            axes.add("x")
        for axis in sorted(axes):
            if not self.material.has_axis(axis):
                raise MaterialError(f"{self.material.name}: missing axis {axis!r} needed by {self.tag}")

    @classmethod
    def from_notation(cls, material, pols: str, order: int = 1, *, pm_type=None,
                      pump_wl=0.775, signal_wl=1.55, idler_wl=None, geometry="collinear"):
        pump, signal, idler = parse_pols(pols)
        inferred = classify(pump, signal, idler)
        if pm_type is not None and normalize_type(pm_type) != inferred:
            raise ValueError(f"polarizations {pols!r} describe {inferred}, not {pm_type}")
        return cls(material, inferred, pump, signal, idler, pump_wl, signal_wl,
                   idler_wl, int(order), geometry)

    @property
    def pols_tuple(self) -> tuple[str, str, str]:
        return self.pump_pol, self.signal_pol, self.idler_pol

    @property
    def pols(self) -> str:
        return f"{self.pump_pol}:{self.signal_pol},{self.idler_pol}"

    @property
    def arrow(self) -> str:
        return f"{self.pump_pol}->{self.signal_pol}+{self.idler_pol}"

    @property
    def type_label(self) -> str:
        return {"type0": "type-0", "typeI": "type-I", "typeII": "type-II"}[self.pm_type]

    @property
    def tag(self) -> str:
        return f"{self.material.name} {self.type_label} {self.arrow} m={self.order}"

    @property
    def degenerate_pair(self) -> bool:
        return self.signal_wl == self.idler_wl and self.signal_pol == self.idler_pol

    def wavelength(self, wave: str) -> float:
        return {"pump": self.pump_wl, "signal": self.signal_wl, "idler": self.idler_wl}[wave]

    def polarization(self, wave: str) -> str:
        return {"pump": self.pump_pol, "signal": self.signal_pol, "idler": self.idler_pol}[wave]

    def with_geometry(self, geometry: str) -> PmProcess:
        return self if geometry == self.geometry else replace(self, geometry=geometry)


@dataclass(frozen=True)
class QpmSolution:
    temperature: float
    period: float
    order: int
    theta_s_int: float = 0.0
    theta_i_int: float = 0.0
    theta_s_ext: float = 0.0
    theta_i_ext: float = 0.0
    residual: float = 0.0

    @property
    def collinear(self) -> bool:
        return self.theta_s_int == 0.0 and self.theta_i_int == 0.0

    def to_dict(self) -> dict:
        return {
            "temperature_C": self.temperature,
            "period_um": self.period,
            "order": self.order,
            "theta_s_int_deg": math.degrees(self.theta_s_int),
            "theta_i_int_deg": math.degrees(self.theta_i_int),
            "theta_s_ext_deg": math.degrees(self.theta_s_ext),
            "theta_i_ext_deg": math.degrees(self.theta_i_ext),
            "residual_rad_per_um": self.residual,
        }


@dataclass(frozen=True)
class CurveSeries:
    abscissa_name: str
    ordinate_name: str
    points: tuple[tuple[float, float], ...]
    process_tag: str = ""

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if not all(math.isfinite(x) and math.isfinite(y) for x, y in pts):
            raise ValueError("curve points must be finite")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("curve abscissae must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def y(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([self.abscissa_name, self.ordinate_name])
        for x, y in self.points:
            writer.writerow([repr(x), repr(y)])
        return buf.getvalue()

    def to_record(self) -> dict:
        return {
            "abscissa": self.abscissa_name,
            "ordinate": self.ordinate_name,
            "process_tag": self.process_tag,
            "points": [list(p) for p in self.points],
        }

    @classmethod
    def from_record(cls, record: dict) -> CurveSeries:
        return cls(record["abscissa"], record["ordinate"],
                   tuple(tuple(p) for p in record["points"]), record.get("process_tag", ""))

    def crossings(self, level: float) -> list[float]:
        """Abscissae where the polyline crosses ``level`` (linear interpolation)."""
        out = []
        for (x0, y0), (x1, y1) in zip(self.points, self.points[1:]):
            d0, d1 = y0 - level, y1 - level
            if d0 == 0.0:
                out.append(x0)
            elif d0 * d1 < 0:
                out.append(x0 + (x1 - x0) * d0 / (d0 - d1))
        if self.points and self.points[-1][1] == level:
            out.append(self.points[-1][0])
        return out


def wave_number(n, lam):
    """Magnitude of the wavevector, 2*pi*n/lam in rad/um."""
    if np.any(np.asarray(n) <= 0) or np.any(np.asarray(lam) <= 0):
        raise ValueError("index and wavelength must be positive")
    return TWO_PI * n / lam


def index_for_wave(proc: PmProcess, wave: str, T, theta=0.0):
    """Index seen by ``wave``: n_y for ordinary light, the angled ellipse index for extraordinary."""
    lam = proc.wavelength(wave)
    if proc.polarization(wave) == "o":
        return refractive_index(proc.material, ORDINARY_AXIS, lam, T)
    return effective_extraordinary_index(proc.material, lam, T, theta)


def _k(proc, wave, T, theta=0.0):
    return TWO_PI * np.asarray(index_for_wave(proc, wave, T, theta)) / proc.wavelength(wave)


def bulk_mismatch(proc: PmProcess, T):
    """k_p - k_s - k_i with all waves along the pump axis."""
    out = _k(proc, "pump", T) - _k(proc, "signal", T) - _k(proc, "idler", T)
    return float(out) if np.ndim(out) == 0 else out


def grating_vector(order: int, period):
    return TWO_PI * order / period


def phase_mismatch_collinear(proc: PmProcess, T, period):
    """Collinear mismatch k_p - k_s - k_i - m 2pi/period (rad/um)."""
    return bulk_mismatch(proc, T) - grating_vector(proc.order, period)


def solve_period_collinear(proc: PmProcess, T: float) -> float:
    bulk = bulk_mismatch(proc, T)
    if not bulk > 0:
        raise NoSolutionError(
            f"no forward QPM for {proc.tag} at {T:g} C (bulk mismatch {bulk:.6g} rad/um)"
        )
    return TWO_PI * proc.order / bulk


def find_roots(f, lo: float, hi: float, *, intervals: int = DEFAULT_INTERVALS,
               tol: float = DEFAULT_TOL, maxiter: int = DEFAULT_MAXITER) -> list[float]:
    """All roots of a vectorized ``f`` on [lo, hi].

    A uniform pre-scan finds sign changes, each refined with Brent's method.
    Grid points where |f| <= tol count as roots themselves. Roots whose
    refined residual exceeds ``tol`` (poles, discontinuities) are dropped.
    """
    x = np.linspace(lo, hi, intervals + 1)
    y = np.asarray(f(x), dtype=float)
    scalar = lambda t: float(f(t))  # noqa: E731
    on_grid = np.abs(y) <= tol
    roots = [float(v) for v in x[on_grid]]
    for i in range(intervals):
        a, b = y[i], y[i + 1]
        if on_grid[i] or on_grid[i + 1] or not (np.isfinite(a) and np.isfinite(b)):
            continue
        if (a < 0) != (b < 0):
            r, info = brentq(scalar, x[i], x[i + 1], xtol=1e-14, maxiter=maxiter,
                             full_output=True, disp=False)
            if abs(scalar(r)) <= tol:
                roots.append(float(r))
            else:
                log.debug("dropping bracket [%g, %g]: residual %g after %d iterations",
                          x[i], x[i + 1], scalar(r), info.iterations)
    return sorted(roots)


def solve_temperature_collinear(proc: PmProcess, period: float, T_range=None, *,
                                intervals: int = DEFAULT_INTERVALS,
                                tol: float = DEFAULT_TOL) -> list[float]:
    """Every temperature in ``T_range`` where the collinear mismatch vanishes, ascending."""
    lo, hi = T_range if T_range is not None else proc.material.temperature_window
    proc.material.check_domain(proc.pump_wl, [lo, hi])
    K = grating_vector(proc.order, period)
    return find_roots(lambda T: bulk_mismatch(proc, T) - K, lo, hi, intervals=intervals, tol=tol)


def _idler_angle(proc, T, q):
    """Solve k_i(phi) sin(phi) = q for phi; NaN where no solution exists."""
    q = np.asarray(q, dtype=float)
    k0 = _k(proc, "idler", T, 0.0)
    with np.errstate(invalid="ignore"):
        phi = np.arcsin(q / k0)
    if proc.idler_pol == "o":
        return phi
    for _ in range(100):
        with np.errstate(invalid="ignore"):
            nxt = np.arcsin(q / _k(proc, "idler", T, np.nan_to_num(phi)))
        nxt = np.where(np.isnan(phi), np.nan, nxt)
        done = np.nanmax(np.abs(nxt - phi), initial=0.0) <= 1e-16
        phi = nxt
        if done:
            break
    return phi


def angle_equations(proc: PmProcess, T: float, period: float):
    """Return (F, idler_angle) for the non-collinear problem at fixed (T, period).

    F(theta_s) is the longitudinal mismatch k_s cos + k_i cos - (k_p - m K_g)
    with theta_i eliminated through transverse balance.
    """
    target = float(_k(proc, "pump", T)) - grating_vector(proc.order, period)
    if proc.degenerate_pair:
        def F(theta):
            return 2.0 * _k(proc, "signal", T, theta) * np.cos(theta) - target

        def idler(theta):
            return theta
    else:
        def idler(theta):
            return _idler_angle(proc, T, _k(proc, "signal", T, theta) * np.sin(theta))

        def F(theta):
            phi = idler(theta)
            return (_k(proc, "signal", T, theta) * np.cos(theta)
                    + _k(proc, "idler", T, np.nan_to_num(phi)) * np.cos(phi) - target)
    return F, idler


def emission_angle_roots(proc: PmProcess, T: float, period: float, *,
                         theta_max: float = DEFAULT_THETA_MAX,
                         intervals: int = DEFAULT_INTERVALS,
                         tol: float = DEFAULT_TOL) -> list[tuple[float, float]]:
    """All internal (theta_s, theta_i) pairs on [0, theta_max], smallest first."""
    proc.material.check_domain([proc.pump_wl, proc.signal_wl, proc.idler_wl], T)
    F, idler = angle_equations(proc, T, period)
    roots = find_roots(F, 0.0, theta_max, intervals=intervals, tol=tol)
    out = []
    for th in roots:
        if proc.degenerate_pair:
            out.append((th, th))
        else:
            out.append((th, float(idler(th))))
    return out


def solve_emission_angles(proc: PmProcess, T: float, period: float, *,
                          theta_max: float = DEFAULT_THETA_MAX,
                          intervals: int = DEFAULT_INTERVALS,
                          tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Internal signal and idler angles (radians) of the smallest-angle solution.

    Raises:
        NoSolutionError: no root on [0, theta_max].
    """
    if proc.geometry != "noncollinear":
        raise ValueError(f"{proc.tag} is configured collinear; use with_geometry('noncollinear')")
    roots = emission_angle_roots(proc, T, period, theta_max=theta_max, intervals=intervals, tol=tol)
    if not roots:
        raise NoSolutionError(
            f"no non-collinear solution for {proc.tag} at {T:g} C, period {period:g} um "
            f"within {math.degrees(theta_max):g} deg"
        )
    return roots[0]


def external_angle(theta_int: float, n: float) -> float:
    """Exit angle into air through a face normal to the pump (Snell's law)."""
    s = n * math.sin(theta_int)
    if abs(s) > 1.0:
        raise TotalInternalReflectionError(
            f"internal angle {math.degrees(theta_int):.3f} deg with n={n:.5f} is totally reflected"
        )
    return math.asin(s)


def mismatch_components(proc: PmProcess, T: float, period: float,
                        theta_s: float, theta_i: float) -> tuple[float, float]:
    """(longitudinal, transverse) mismatch of a candidate solution, from scratch."""
    ks = float(_k(proc, "signal", T, theta_s))
    ki = float(_k(proc, "idler", T, theta_i))
    kp = float(_k(proc, "pump", T))
    longitudinal = ks * math.cos(theta_s) + ki * math.cos(theta_i) - (kp - grating_vector(proc.order, period))
    transverse = ks * math.sin(theta_s) - ki * math.sin(theta_i)
    return longitudinal, transverse


def collinear_solution(proc: PmProcess, T: float, period: float) -> QpmSolution:
    return QpmSolution(T, period, proc.order,
                       residual=abs(phase_mismatch_collinear(proc, T, period)))


def noncollinear_solution(proc: PmProcess, T: float, period: float, *,
                          theta_max: float = DEFAULT_THETA_MAX,
                          tol: float = DEFAULT_TOL) -> QpmSolution:
    proc = proc.with_geometry("noncollinear")
    ts, ti = solve_emission_angles(proc, T, period, theta_max=theta_max, tol=tol)
    if ts == 0.0 and ti == 0.0:
        return collinear_solution(proc, T, period)
    es = external_angle(ts, float(index_for_wave(proc, "signal", T, ts)))
    ei = external_angle(ti, float(index_for_wave(proc, "idler", T, ti)))
    lon, tra = mismatch_components(proc, T, period, ts, ti)
    return QpmSolution(T, period, proc.order, ts, ti, es, ei, math.hypot(lon, tra))


def solve_period(proc: PmProcess, T: float) -> QpmSolution:
    period = solve_period_collinear(proc, T)
    return collinear_solution(proc, T, period)


def _grid(proc, T_range, n_points):
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    lo, hi = T_range
    if not lo < hi:
        raise ValueError(f"temperature range {T_range} is empty")
    grid = np.round(np.linspace(lo, hi, n_points), 10)
    wlo, whi = proc.material.temperature_window
    inside = (grid >= wlo) & (grid <= whi)
    if not inside.all():
        log.warning("%s: %d of %d temperatures lie outside the validity window [%g, %g] C and are skipped",
                    proc.material.name, int((~inside).sum()), n_points, wlo, whi)
    return [float(t) for t in grid[inside]]


def period_vs_temperature_curve(proc: PmProcess, T_range, n_points: int) -> CurveSeries:
    points = []
    for T in _grid(proc, T_range, n_points):
        try:
            points.append((T, solve_period_collinear(proc, T)))
        except NoSolutionError:
            continue
    return CurveSeries("temperature_C", "period_um", tuple(points), proc.tag)


def angle_vs_temperature_curve(proc: PmProcess, period: float, T_range, n_points: int, *,
                               theta_max: float = DEFAULT_THETA_MAX) -> CurveSeries:
    """Signal exit angle (degrees) versus temperature at a fixed poling period."""
    points = []
    for T in _grid(proc, T_range, n_points):
        try:
            sol = noncollinear_solution(proc, T, period, theta_max=theta_max)
        except (NoSolutionError, TotalInternalReflectionError):
            continue
        points.append((T, math.degrees(sol.theta_s_ext)))
    return CurveSeries("temperature_C", "exit_angle_deg", tuple(points), f"{proc.tag} period={period:g}um")
