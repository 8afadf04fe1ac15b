"""Temperature-dependent dispersion of periodically poled crystals.

Coefficients live in JSON files (one per crystal); this module parses them,
validates them and evaluates principal-axis and angled extraordinary indices.
Wavelengths are in micrometers and temperatures in degrees Celsius throughout.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

import numpy as np

AXES = ("x", "y", "z")

# Ordinary light is evaluated on y, extraordinary on z; x only enters the
# angled extraordinary index and falls back to y for uniaxial crystals.
ORDINARY_AXIS = "y"
EXTRAORDINARY_AXIS = "z"

BUNDLED_DIR = Path(__file__).resolve().parent / "materials"


class MaterialError(ValueError):
    """A material file is missing, malformed or inconsistent."""


class DomainError(ValueError):
    """A wavelength or temperature lies outside a material's validity window."""


def _gayer(c, lam, T):
    f = (T - 24.5) * (T + 570.82)
    l2 = lam * lam
    n2 = (
        c["a1"]
        + c["b1"] * f
        + (c["a2"] + c["b2"] * f) / (l2 - (c["a3"] + c["b3"] * f) ** 2)
        + (c["a4"] + c["b4"] * f) / (l2 - (c["a5"] + c.get("b5", 0.0) * f) ** 2)
        - c["a6"] * l2
    )
    return np.sqrt(n2)


def _kato(c, lam, T):
    l2 = lam * lam
    n_ref = np.sqrt(c["A"] + c["B"] / (l2 - c["C"]) + c["D"] / (l2 - c["E"]))
    dndt = (c["t3"] / lam**3 + c["t2"] / l2 + c["t1"] / lam + c["t0"]) * 1e-5
    return n_ref + dndt * (T - c["t_ref"])


_GAYER_NAMES = ("a1", "a2", "a3", "a4", "a5", "a6", "b1", "b2", "b3", "b4")

# form name -> (ordered coefficient names, evaluator)
FORMS: dict[str, tuple[tuple[str, ...], Callable]] = {
    "gayer2008": (_GAYER_NAMES, _gayer),
    "dolev2009": (_GAYER_NAMES + ("b5",), _gayer),
    "kato2002": (("A", "B", "C", "D", "E", "t3", "t2", "t1", "t0", "t_ref"), _kato),
}


@dataclass(frozen=True)
class SellmeierModel:
    form: str
    coefficients: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if self.form not in FORMS:
            raise MaterialError(f"unknown Sellmeier form {self.form!r}")
        expected = FORMS[self.form][0]
        if len(self.coefficients) != len(expected):
            raise MaterialError(
                f"form {self.form!r} takes {len(expected)} coefficients, got {len(self.coefficients)}"
            )
        names = {name for name, _ in self.coefficients}
        if names != set(expected):
            missing = sorted(set(expected) - names)
            extra = sorted(names - set(expected))
            raise MaterialError(f"form {self.form!r}: missing {missing}, unexpected {extra}")

    def __call__(self, lam, T):
        return FORMS[self.form][1](dict(self.coefficients), lam, T)


@dataclass(frozen=True)
class MaterialDispersion:
    name: str
    axes: Mapping[str, SellmeierModel]
    wavelength_window: tuple[float, float]
    temperature_window: tuple[float, float]
    source: str = ""
    path: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "axes", MappingProxyType(dict(self.axes)))
        for label, (lo, hi) in (
            ("wavelength_window_um", self.wavelength_window),
            ("temperature_window_C", self.temperature_window),
        ):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise MaterialError(f"{self.name}: {label} [{lo}, {hi}] is empty")
        unknown = set(self.axes) - set(AXES)
        if unknown:
            raise MaterialError(f"{self.name}: unknown crystal axes {sorted(unknown)}")

    def model(self, axis: str) -> SellmeierModel:
        if axis in self.axes:
            return self.axes[axis]
        if axis == "x" and ORDINARY_AXIS in self.axes:
            return self.axes[ORDINARY_AXIS]
        raise MaterialError(f"{self.name}: no Sellmeier model for axis {axis!r}")

    def has_axis(self, axis: str) -> bool:
        return axis in self.axes or (axis == "x" and ORDINARY_AXIS in self.axes)

    def check_domain(self, lam, T) -> None:
        lo, hi = self.wavelength_window
        lam = np.asarray(lam, dtype=float)
        if np.any(~np.isfinite(lam)) or np.any(lam < lo) or np.any(lam > hi):
            raise DomainError(
                f"{self.name}: wavelength {_fmt(lam)} um outside validity window [{lo}, {hi}] um"
            )
        lo, hi = self.temperature_window
        T = np.asarray(T, dtype=float)
        if np.any(~np.isfinite(T)) or np.any(T < lo) or np.any(T > hi):
            raise DomainError(
                f"{self.name}: temperature {_fmt(T)} C outside validity window [{lo}, {hi}] C"
            )


def _fmt(a: np.ndarray) -> str:
    if a.ndim == 0:
        return f"{float(a):g}"
    return f"[{float(np.min(a)):g}, {float(np.max(a)):g}]"


def _as_result(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def refractive_index(mat: MaterialDispersion, axis: str, lam, T):
    """Principal-axis index n_axis(lam, T); scalars or broadcastable arrays."""
    mat.check_domain(lam, T)
    return _as_result(mat.model(axis)(np.asarray(lam, float), np.asarray(T, float)))


def effective_extraordinary_index(mat: MaterialDispersion, lam, T, theta):
    """Index of extraordinary light travelling at ``theta`` (radians) from the x axis.

    Interpolates on the x-z index ellipse: n_x n_z / sqrt(n_x^2 cos^2 + n_z^2 sin^2).
    """
    nx = np.asarray(refractive_index(mat, "x", lam, T))
    nz = np.asarray(refractive_index(mat, EXTRAORDINARY_AXIS, lam, T))
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    s = np.sin(theta)
    # exact at the principal directions, avoiding rounding in the sqrt
    out = np.where(
        s == 0.0,
        nz,
        np.where(c == 0.0, nx, nx * nz / np.sqrt(nx**2 * c**2 + nz**2 * s**2)),
    )
    return _as_result(out)


def _window(raw, key: str, where: str) -> tuple[float, float]:
    value = raw.get(key)
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise MaterialError(f"{where}: field {key!r} must be a [min, max] pair")
    try:
        return float(value[0]), float(value[1])
    except (TypeError, ValueError) as exc:
        raise MaterialError(f"{where}: field {key!r} is not numeric") from exc


def parse_material(raw: Mapping, where: str = "<memory>", required_axes=(ORDINARY_AXIS, EXTRAORDINARY_AXIS)):
    """Build a MaterialDispersion from a decoded JSON tree."""
    if not isinstance(raw, Mapping):
        raise MaterialError(f"{where}: top level must be an object")
    for key in ("name", "axes", "wavelength_window_um", "temperature_window_C"):
        if key not in raw:
            raise MaterialError(f"{where}: missing field {key!r}")
    axes_raw = raw["axes"]
    if not isinstance(axes_raw, Mapping):
        raise MaterialError(f"{where}: field 'axes' must be an object")
    for axis in required_axes:
        if axis not in axes_raw:
            raise MaterialError(f"{where}: missing axis {axis!r} in field 'axes'")
    axes = {}
    for axis, spec in axes_raw.items():
        label = f"{where}: axes.{axis}"
        if axis not in AXES:
            raise MaterialError(f"{label}: unknown crystal axis")
        if not isinstance(spec, Mapping) or "form" not in spec or "coefficients" not in spec:
            raise MaterialError(f"{label}: needs 'form' and 'coefficients'")
        coeffs = spec["coefficients"]
        if not isinstance(coeffs, Mapping):
            raise MaterialError(f"{label}.coefficients: must be an object of name: value")
        try:
            pairs = tuple((str(k), float(v)) for k, v in coeffs.items())
        except (TypeError, ValueError) as exc:
            raise MaterialError(f"{label}.coefficients: non-numeric value") from exc
        try:
            axes[axis] = SellmeierModel(str(spec["form"]), pairs)
        except MaterialError as exc:
            raise MaterialError(f"{label}: {exc}") from None
    try:
        return MaterialDispersion(
            name=str(raw["name"]),
            axes=axes,
            wavelength_window=_window(raw, "wavelength_window_um", where),
            temperature_window=_window(raw, "temperature_window_C", where),
            source=str(raw.get("source", "")),
            path=None if where == "<memory>" else where,
        )
    except MaterialError as exc:
        raise MaterialError(f"{where}: {exc}") from None


def load_material(path, required_axes=(ORDINARY_AXIS, EXTRAORDINARY_AXIS)) -> MaterialDispersion:
    """Read and validate a material data file.

    Raises:
        MaterialError: unreadable or malformed file; the message names the
            file and the offending field.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise MaterialError(f"{path}: cannot read material file ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise MaterialError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc
    mat = parse_material(raw, str(path), required_axes)
    # window sanity: indices must be physical everywhere inside the windows
    lam = np.linspace(*mat.wavelength_window, 9)
    T = np.linspace(*mat.temperature_window, 5)[:, None]
    for axis in mat.axes:
        n = refractive_index(mat, axis, lam, T)
        if not np.all(np.isfinite(n)) or np.any(n <= 1.0) or np.any(n >= 4.0):
            raise MaterialError(f"{path}: axes.{axis} gives unphysical index inside the validity windows")
    return mat


def material_to_dict(mat: MaterialDispersion) -> dict:
    return {
        "name": mat.name,
        "source": mat.source,
        "wavelength_window_um": list(mat.wavelength_window),
        "temperature_window_C": list(mat.temperature_window),
        "axes": {
            axis: {"form": m.form, "coefficients": dict(m.coefficients)}
            for axis, m in mat.axes.items()
        },
    }


def available_materials(directory) -> dict[str, Path]:
    """Map material name (file stem) to file path for every JSON file in ``directory``."""
    directory = Path(directory)
    if not directory.is_dir():
        return {}
    return {p.stem: p for p in sorted(directory.glob("*.json"))}


def find_material(name: str, directory=None) -> MaterialDispersion:
    directory = BUNDLED_DIR if directory is None else Path(directory)
    known = available_materials(directory)
    for stem, path in known.items():
        if stem.lower() == name.lower():
            return load_material(path)
    listing = ", ".join(known) or "none"
    raise MaterialError(f"unknown material {name!r} in {directory} (available: {listing})")
