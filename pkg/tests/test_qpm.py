import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiqpm.materials import DomainError, refractive_index
from multiqpm.qpm import (
    CurveSeries,
    NoSolutionError,
    PmProcess,
    TotalInternalReflectionError,
    angle_vs_temperature_curve,
    collinear_solution,
    emission_angle_roots,
    external_angle,
    find_roots,
    index_for_wave,
    mismatch_components,
    noncollinear_solution,
    normalize_type,
    parse_pols,
    period_vs_temperature_curve,
    phase_mismatch_collinear,
    solve_emission_angles,
    solve_period_collinear,
    solve_temperature_collinear,
    wave_number,
)

ARCSIN_2SIN10 = 0.3546864566501974  # asin(2 sin 10 deg), computed by hand


def _kw(mat, pol, lam, T):
    """Collinear wave number straight from the principal-axis index."""
    return 2 * math.pi * refractive_index(mat, "y" if pol == "o" else "z", lam, T) / lam


# --- process model -------------------------------------------------------

def test_process_defaults(type2_m2):
    assert type2_m2.pm_type == "typeII"
    assert type2_m2.idler_wl == pytest.approx(1.55, abs=1e-12)
    assert type2_m2.arrow == "o->e+o"
    assert type2_m2.order == 2


@pytest.mark.parametrize("name, expected", [("0", "type0"), ("I", "typeI"), ("type-II", "typeII"),
                                            ("typeii", "typeII")])
def test_normalize_type(name, expected):
    assert normalize_type(name) == expected


@pytest.mark.parametrize("bad", ["o:e", "o-e,o", "o:x,o"])
def test_parse_pols_rejects(bad):
    with pytest.raises(ValueError):
        parse_pols(bad)


def test_process_validation(ppln):
    with pytest.raises(ValueError, match="describe typeII"):
        PmProcess.from_notation(ppln, "o:e,o", pm_type="I")
    with pytest.raises(ValueError, match="energy conservation"):
        PmProcess(ppln, "type0", "e", "e", "e", 0.775, 1.55, 1.50)
    with pytest.raises(ValueError, match="positive integer"):
        PmProcess.from_notation(ppln, "e:e,e", 0)


# --- wave numbers and indices --------------------------------------------

def test_wave_number():
    assert wave_number(1.0, 1.0) == 2 * math.pi
    assert wave_number(2.0, 0.5) == pytest.approx(8 * math.pi, rel=1e-15)
    with pytest.raises(ValueError):
        wave_number(0.0, 1.0)


def test_index_for_wave_dispatch(ppln, type2_m2):
    assert index_for_wave(type2_m2, "pump", 30.0) == refractive_index(ppln, "y", 0.775, 30.0)
    assert index_for_wave(type2_m2, "signal", 30.0) == refractive_index(ppln, "z", 1.55, 30.0)
    assert index_for_wave(type2_m2, "idler", 30.0, 0.2) == refractive_index(ppln, "y", 1.55, 30.0)
    assert index_for_wave(type2_m2, "signal", 30.0, 0.2) != refractive_index(ppln, "z", 1.55, 30.0)


# --- collinear -----------------------------------------------------------

def test_period_against_hand_mismatch(ppln, type2_m2):
    T = 25.1
    bulk = _kw(ppln, "o", 0.775, T) - _kw(ppln, "e", 1.55, T) - _kw(ppln, "o", 1.55, T)
    assert solve_period_collinear(type2_m2, T) == pytest.approx(4 * math.pi / bulk, rel=1e-12)


def test_period_golden(type2_m2, ppslt):
    assert solve_period_collinear(type2_m2, 25.1) == pytest.approx(18.000, abs=0.15)
    type0 = PmProcess.from_notation(ppslt, "o:o,o", 1)
    assert solve_period_collinear(type0, 72.1) == pytest.approx(20.826, abs=0.15)


@pytest.mark.parametrize("T", [20.0, 25.1, 64.4, 150.0, 200.0])
def test_period_closed_form_inverse(type2_m2, T):
    period = solve_period_collinear(type2_m2, T)
    assert abs(phase_mismatch_collinear(type2_m2, T, period)) <= 1e-10


def test_period_scales_with_order(ppln):
    base = PmProcess.from_notation(ppln, "e:e,e", 1)
    for m in (2, 3, 5):
        higher = PmProcess.from_notation(ppln, "e:e,e", m)
        assert solve_period_collinear(higher, 40.0) == pytest.approx(m * solve_period_collinear(base, 40.0),
                                                                     rel=1e-14)


def test_mismatch_tends_to_bulk_for_long_period(type2_m2):
    bulk = phase_mismatch_collinear(type2_m2, 30.0, math.inf)
    for period in (1e6, 1e9, 1e12):
        assert phase_mismatch_collinear(type2_m2, 30.0, period) == pytest.approx(bulk, abs=2e-5 / period * 1e6)


def test_no_forward_qpm(ppln):
    # an e pump with an o pair sees the small extraordinary index: k_p < k_s + k_i
    proc = PmProcess.from_notation(ppln, "e:o,o")
    with pytest.raises(NoSolutionError, match="no forward QPM"):
        solve_period_collinear(proc, 30.0)


def test_temperature_goldens(type2_m2):
    [T0] = solve_temperature_collinear(type2_m2, 18.000, (20.0, 40.0))
    [T1] = solve_temperature_collinear(type2_m2, 18.004, (20.0, 40.0))
    assert T0 == pytest.approx(25.1, abs=1.5)
    assert T1 - T0 == pytest.approx(0.3, abs=0.15)
    for T in (T0, T1):
        assert abs(phase_mismatch_collinear(type2_m2, T, 18.000 if T is T0 else 18.004)) <= 1e-10


def test_temperature_no_root_is_empty(type2_m2):
    assert solve_temperature_collinear(type2_m2, 5.0, (20.0, 40.0)) == []


def test_temperature_range_checked(type2_m2):
    with pytest.raises(DomainError):
        solve_temperature_collinear(type2_m2, 18.0, (0.0, 40.0))


@settings(max_examples=60, deadline=None)
@given(T=st.floats(21.0, 199.0))
def test_temperature_round_trip(type2_m2, T):
    period = solve_period_collinear(type2_m2, T)
    roots = solve_temperature_collinear(type2_m2, period)
    assert min(abs(r - T) for r in roots) < 1e-6


def test_find_roots_simple():
    roots = find_roots(np.sin, 1.0, 10.0, intervals=50)
    assert roots == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], abs=1e-12)
    # a pole is bracketed by a sign change but is not a root
    assert find_roots(np.tan, 1.0, 2.0, intervals=9) == []


# --- non-collinear -------------------------------------------------------

def test_emission_requires_noncollinear(type2_m2):
    with pytest.raises(ValueError, match="collinear"):
        solve_emission_angles(type2_m2, 25.1, 18.0)


def test_type1_exit_angle_golden(type1_m3):
    sol = noncollinear_solution(type1_m3, 25.1, 18.000)
    assert math.degrees(sol.theta_s_ext) == pytest.approx(7.0, abs=2.0)
    assert sol.theta_s_int == sol.theta_i_int
    assert sol.residual <= 1e-8


def test_type0_exit_angle_golden(ppln):
    proc = PmProcess.from_notation(ppln, "o:o,o", 2, geometry="noncollinear")
    sol = noncollinear_solution(proc, 64.4, 28.002)
    assert math.degrees(sol.theta_s_ext) == pytest.approx(11.0, abs=2.0)


def test_collinear_limit(ppln):
    proc = PmProcess.from_notation(ppln, "o:o,o", 2, geometry="noncollinear")
    period = solve_period_collinear(proc, 64.4)
    ts, ti = solve_emission_angles(proc, 64.4, period)
    assert ts == pytest.approx(0.0, abs=1e-6) and ti == ts


def test_no_noncollinear_solution(type1_m3):
    # a period longer than the collinear one needs cos > 1
    period = solve_period_collinear(type1_m3, 25.1) * 1.05
    with pytest.raises(NoSolutionError, match="no non-collinear solution"):
        solve_emission_angles(type1_m3, 25.1, period)


def test_mixed_polarization_balances(type2_m2):
    proc = type2_m2.with_geometry("noncollinear")
    period = solve_period_collinear(proc, 40.0) * 0.995
    ts, ti = solve_emission_angles(proc, 40.0, period)
    assert ts > 0 and ti > 0 and ts != ti
    lon, tra = mismatch_components(proc, 40.0, period, ts, ti)
    assert abs(lon) <= 1e-8 and abs(tra) <= 1e-8


def test_external_angle_cases():
    assert external_angle(0.0, 2.1) == 0.0
    assert external_angle(math.radians(10), 2.0) == pytest.approx(ARCSIN_2SIN10, rel=1e-15)
    with pytest.raises(TotalInternalReflectionError):
        external_angle(math.radians(35), 2.0)


def test_solution_dict(type1_m3):
    record = noncollinear_solution(type1_m3, 25.1, 18.0).to_dict()
    assert set(record) >= {"temperature_C", "period_um", "theta_s_ext_deg", "residual_rad_per_um"}
    assert collinear_solution(type1_m3, 25.1, 18.0).collinear


# --- curves --------------------------------------------------------------

def test_period_curve_contract(type2_m2):
    curve = period_vs_temperature_curve(type2_m2, (20.0, 40.0), 201)
    assert len(curve) == 201
    assert np.all(np.diff(curve.x) > 0)
    [cross] = curve.crossings(18.000)
    assert cross == pytest.approx(25.1, abs=1.5)


def test_curve_skips_out_of_window(type2_m2, caplog):
    curve = period_vs_temperature_curve(type2_m2, (15.0, 40.0), 26)
    assert curve.x[0] == 20.0 and len(curve) == 21
    assert "outside the validity window" in caplog.text


def test_curve_args(type2_m2):
    with pytest.raises(ValueError):
        period_vs_temperature_curve(type2_m2, (20.0, 40.0), 1)
    with pytest.raises(ValueError):
        period_vs_temperature_curve(type2_m2, (40.0, 20.0), 10)


def test_angle_curve_onset_matches_period_crossing(type2_m2):
    proc = type2_m2.with_geometry("noncollinear")
    angles = angle_vs_temperature_curve(proc, 18.000, (20.0, 40.0), 401)
    [cross] = period_vs_temperature_curve(type2_m2, (20.0, 40.0), 401).crossings(18.000)
    assert angles.x[0] >= cross - 0.05
    assert angles.x[0] == pytest.approx(cross, abs=0.2)
    assert np.all(np.diff(angles.y) > 0)


def test_curve_serialization_round_trip():
    curve = CurveSeries("temperature_C", "period_um", ((20.0, 17.9), (20.05, 17.91)), "tag")
    again = CurveSeries.from_record(json.loads(json.dumps(curve.to_record())))
    assert again == curve
    lines = curve.to_csv().splitlines()
    assert lines[0] == "temperature_C,period_um"
    assert [tuple(map(float, line.split(","))) for line in lines[1:]] == list(curve.points)


@pytest.mark.parametrize("points", [((1.0, 2.0), (1.0, 3.0)), ((1.0, math.nan),)])
def test_curve_rejects(points):
    with pytest.raises(ValueError):
        CurveSeries("x", "y", points)


# --- brute-force oracles -------------------------------------------------

def test_temperature_roots_bracketed_by_grid(ppslt):
    proc = PmProcess.from_notation(ppslt, "e:e,e", 1)
    period = solve_period_collinear(proc, 90.3)
    Ts = np.linspace(20.0, 200.0, 181)
    bulk = np.array([_kw(ppslt, "e", 0.775, T) - 2 * _kw(ppslt, "e", 1.55, T) for T in Ts])
    dk = bulk - 2 * math.pi / period
    cells = [(Ts[i], Ts[i + 1]) for i in range(len(Ts) - 1) if dk[i] * dk[i + 1] <= 0]
    roots = solve_temperature_collinear(proc, period)
    assert len(roots) == len(cells)
    for r, (a, b) in zip(roots, cells):
        assert a <= r <= b


def test_emission_roots_bracketed_by_grid(type1_m3, ppln):
    T, period = 25.1, 18.0
    theta = np.linspace(0, math.radians(30), 301)
    nx = refractive_index(ppln, "x", 1.55, T)
    nz = refractive_index(ppln, "z", 1.55, T)
    n = nx * nz / np.sqrt(nx**2 * np.cos(theta) ** 2 + nz**2 * np.sin(theta) ** 2)
    k_s = 2 * math.pi * n / 1.55
    target = _kw(ppln, "o", 0.775, T) - 2 * math.pi * 3 / period
    F = 2 * k_s * np.cos(theta) - target
    cells = [(theta[i], theta[i + 1]) for i in range(len(theta) - 1) if F[i] * F[i + 1] <= 0]
    roots = emission_angle_roots(type1_m3, T, period)
    assert len(roots) == len(cells) == 1
    assert cells[0][0] <= roots[0][0] <= cells[0][1]
