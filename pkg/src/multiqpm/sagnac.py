"""Jones-calculus model of the multi-type Sagnac entangled-pair source.

Two-photon states live on the ordered basis (HH, HV, VH, VV); the first
letter is photon 1. The loop is idealized: the PBS transmits H and reflects
V, and the dual-wavelength HWP acts identically on pump and pair photons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BASIS = ("HH", "HV", "VH", "VV")
H = np.array([1.0, 0.0], dtype=complex)
V = np.array([0.0, 1.0], dtype=complex)

# crystal emission for an H-polarized pump, photon 1 listed first
EMISSION = {"type0": (H, H), "typeII": (H, V), "typeI": (V, V)}
PATHS = {"type0": ("1", "2"), "typeII": ("3", "4"), "typeI": ("5", "6")}

NORM_TOL = 1e-12


class StateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwoPhotonState:
    amplitudes: np.ndarray
    paths: tuple[str, str] = ("1", "2")

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(4)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state is not normalized (|psi|^2 = {norm:.15g})")

    @classmethod
    def from_kets(cls, terms, paths=("1", "2")) -> TwoPhotonState:
        """Normalize a superposition given as {basis label: amplitude}."""
        amps = np.zeros(4, dtype=complex)
        for label, amp in dict(terms).items():
            amps[BASIS.index(label)] += amp
        return cls(amps / np.linalg.norm(amps), paths)

    def as_rows(self):
        return [(label, float(a.real), float(a.imag)) for label, a in zip(BASIS, self.amplitudes)]


@dataclass(frozen=True)
class ElementSetting:
    element: str  # "HWP", "QWP" or "phase"
    value: float  # fast-axis angle, or phase, in radians
    acts_on: str = "both"  # "1", "2" or "both"

    def __post_init__(self):
        if self.element not in ("HWP", "QWP", "phase"):
            raise ValueError(f"unknown element {self.element!r}")
        if self.acts_on not in ("1", "2", "both"):
            raise ValueError("acts_on must be '1', '2' or 'both'")

    def matrix(self) -> np.ndarray:
        if self.element == "phase":
            return np.diag([1.0, np.exp(1j * self.value)])
        return waveplate_matrix(self.element, self.value)


def waveplate_matrix(element: str, angle: float) -> np.ndarray:
    """Jones matrix of a half- or quarter-wave plate with its fast axis at ``angle``."""
    retardance = {"HWP": math.pi, "QWP": math.pi / 2}[element.upper()]
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, s], [-s, c]])
    return rot.T @ np.diag([1.0, np.exp(1j * retardance)]) @ rot


def apply_elements(state: TwoPhotonState, settings) -> TwoPhotonState:
    amps = state.amplitudes.reshape(2, 2)
    for setting in settings:
        m = setting.matrix()
        left = m if setting.acts_on in ("1", "both") else np.eye(2)
        right = m if setting.acts_on in ("2", "both") else np.eye(2)
        amps = left @ amps @ right.T
    return TwoPhotonState(amps.reshape(4), state.paths)


def _pair(a, b):
    return np.kron(a, b)


def _phase_of(vec: np.ndarray) -> complex:
    lead = vec[int(np.argmax(np.abs(vec).round(12)))]
    return lead / abs(lead)


def build_sagnac_state(process: str, hwp_offset: float = 0.0, pump_phase: float = 0.0,
                       pump_global_phase: float = 0.0) -> TwoPhotonState:
    """Two-photon state leaving the loop for one SPDC type.

    The 45-degree pump splits on the PBS: the reflected V part is turned to H
    by the in-loop HWP before the crystal (clockwise), the transmitted H part
    pumps the crystal directly and its pair is flipped by the same HWP
    (counter-clockwise). Phase compensation after the loop cancels the
    arm-dependent phases and leaves ``pump_phase`` between the two terms.
    ``hwp_offset`` is the fast-axis angle of a half-wave plate on the second
    photon's path; 45 degrees turns the Phi family into Psi.
    """
    if process not in EMISSION:
        raise ValueError(f"process must be one of {sorted(EMISSION)}")
    loop_hwp = waveplate_matrix("HWP", math.pi / 4)
    pump = np.exp(1j * pump_global_phase) * np.array([1.0, 1.0]) / math.sqrt(2)
    a, b = EMISSION[process]

    cw_pump = (loop_hwp @ (pump[1] * V))[0]  # V -> H before the crystal
    cw = cw_pump * _pair(a, b)
    ccw = pump[0] * _pair(loop_hwp @ a, loop_hwp @ b)

    out = np.kron(np.eye(2), waveplate_matrix("HWP", hwp_offset))
    cw, ccw = out @ cw, out @ ccw

    # compensation: equalize arm phases, then set the requested relative phase
    ccw = ccw * (_phase_of(cw) / _phase_of(ccw)) * np.exp(1j * pump_phase)
    amps = cw + ccw
    return TwoPhotonState(amps / np.linalg.norm(amps), PATHS[process])


def fidelity(state: TwoPhotonState, target: TwoPhotonState) -> float:
    """|<target|state>|^2."""
    for s in (state, target):
        norm = float(np.vdot(s.amplitudes, s.amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state is not normalized (|psi|^2 = {norm:.15g})")
    return float(min(1.0, abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2))


def bell_states(paths=("1", "2")) -> dict[str, TwoPhotonState]:
    r = 1 / math.sqrt(2)
    return {
        "Phi+": TwoPhotonState([r, 0, 0, r], paths),
        "Phi-": TwoPhotonState([r, 0, 0, -r], paths),
        "Psi+": TwoPhotonState([0, r, r, 0], paths),
        "Psi-": TwoPhotonState([0, r, -r, 0], paths),
    }


def bell_fidelities(state: TwoPhotonState) -> dict[str, float]:
    return {name: fidelity(state, target) for name, target in bell_states(state.paths).items()}
