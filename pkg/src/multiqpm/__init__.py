"""Quasi-phase-matching solvers for multi-type SPDC in periodically poled crystals."""

__version__ = "0.1.0"

from .materials import (
    DomainError,
    MaterialDispersion,
    MaterialError,
    SellmeierModel,
    effective_extraordinary_index,
    find_material,
    load_material,
    refractive_index,
)
from .qpm import (
    CurveSeries,
    NoSolutionError,
    PmProcess,
    QpmSolution,
    angle_vs_temperature_curve,
    external_angle,
    index_for_wave,
    period_vs_temperature_curve,
    phase_mismatch_collinear,
    solve_emission_angles,
    solve_period_collinear,
    solve_temperature_collinear,
    wave_number,
)
from .coincidence import CoincidencePoint, find_dual_type, find_triple_type, sensitivity
from .sagnac import TwoPhotonState, build_sagnac_state, fidelity, waveplate_matrix

__all__ = [
    "CoincidencePoint", "CurveSeries", "DomainError", "MaterialDispersion", "MaterialError",
    "NoSolutionError", "PmProcess", "QpmSolution", "SellmeierModel", "TwoPhotonState",
    "angle_vs_temperature_curve", "build_sagnac_state", "effective_extraordinary_index",
    "external_angle", "fidelity", "find_dual_type", "find_material", "find_triple_type",
    "index_for_wave", "load_material", "period_vs_temperature_curve", "phase_mismatch_collinear",
    "refractive_index", "sensitivity", "solve_emission_angles", "solve_period_collinear",
    "solve_temperature_collinear", "waveplate_matrix", "wave_number",
]
