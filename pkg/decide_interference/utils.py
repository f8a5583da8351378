import csv
import dataclasses
import enum
import io
import json
import logging
import math
import re
import sys

import numpy as np

from .core import CONSTANTS
from .exceptions import ScenarioValidationError

APP_LOGGER = "decide_interference"

# -----------------------------
# Logging Helpers
# -----------------------------

def logger(name: str | None = None) -> logging.Logger:
    """
    Return the package logger, or a named child of it.
    Library code only emits records; handlers are installed by the CLI.
    """
    if not name:
        return logging.getLogger(APP_LOGGER)
    return logging.getLogger(f"{APP_LOGGER}.{name}")


def log_error(message: str, title: str) -> None:
    """
    Record an error entry under a short title, e.g. a failed sweep point.
    """
    logger().error(f"{title}: {message}")


def configure_logging(level: str = "WARNING") -> None:
    """
    Send all package log records to stderr; stdout stays reserved for payloads.
    """
    root = logger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.WARNING))
    root.propagate = False


# -----------------------------
# Unit Parsing
# -----------------------------

# factor to SI per accepted suffix, grouped by dimension
UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9, "pm": 1e-12},
    "area": {"m2": 1.0, "cm2": 1e-4, "um2": 1e-12, "nm2": 1e-18},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "min": 60.0, "h": 3600.0},
    "temperature": {"K": 1.0, "mK": 1e-3},
    "pressure": {"Pa": 1.0, "mbar": 100.0, "bar": 1e5, "Torr": 133.322368},
    "mass": {"kg": 1.0, "g": 1e-3, "amu": CONSTANTS.amu, "u": CONSTANTS.amu},
    "density": {"kg/m3": 1.0, "g/cm3": 1e3},
    "angular_frequency": {"rad/s": 1.0, "Hz": 2.0 * math.pi, "kHz": 2e3 * math.pi},
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "nW": 1e-9, "pW": 1e-12, "fW": 1e-15},
    "intensity": {"W/m2": 1.0, "W/cm2": 1e4, "W/mm2": 1e6},
    # intensity absorption coefficient; ppm/cm is a fractional loss of 1e-6 per cm
    "absorption": {"1/m": 1.0, "1/cm": 1e2, "ppm/cm": 1e-4, "ppb/cm": 1e-7},
    "rate": {"1/s": 1.0, "s-1": 1.0, "Hz": 1.0},
    "force_noise": {"N/sqrt(Hz)": 1.0, "uN/sqrt(Hz)": 1e-6, "mN/sqrt(Hz)": 1e-3},
    "angle": {"rad": 1.0, "mrad": 1e-3},
    "dimensionless": {"": 1.0},
}

_QUANTITY_RE = re.compile(
    r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$"
)


def _normalize_unit(unit: str) -> str:
    return unit.replace("µ", "u").replace("μ", "u").replace("^", "").replace(" ", "")


def parse_quantity(value, dimension: str, field: str) -> float:
    """
    Convert a scenario value to SI.

    Args:
        value: plain number (taken as SI) or string such as "16 K", "1e-13 Pa"
        dimension: key of UNITS the field expects
        field: dotted scenario path, used in diagnostics

    Returns:
        float: value in SI units
    """
    if isinstance(value, bool):
        raise ScenarioValidationError("expected a number, got a boolean", field)
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ScenarioValidationError(f"expected a number or unit string, got {value!r}", field)

    match = _QUANTITY_RE.match(value)
    if not match:
        raise ScenarioValidationError(f"cannot parse quantity {value!r}", field)

    number = float(match.group(1))
    unit = _normalize_unit(match.group(2))
    table = UNITS[dimension]
    if unit not in table:
        accepted = ", ".join(sorted(u for u in table if u)) or "no unit"
        raise ScenarioValidationError(
            f"unit {unit!r} is not a {dimension} unit (accepted: {accepted})", field
        )
    return number * table[unit]


def parse_complex(value, field: str) -> complex:
    """
    Accept "2.1+0.57i", "2.1+0.57j", [re, im] or a plain real number.
    """
    if isinstance(value, bool):
        raise ScenarioValidationError("expected a complex number", field)
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError):
            raise ScenarioValidationError(f"cannot parse complex {value!r}", field)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ScenarioValidationError(f"cannot parse complex {value!r}", field)
    raise ScenarioValidationError(f"cannot parse complex {value!r}", field)


# -----------------------------
# Numeric Helpers
# -----------------------------

def one_minus_sinc(z):
    """
    1 - sin(z)/z without cancellation at small z (array-aware).
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = zs**2 / 6.0 - zs**4 / 120.0
    zl = z[~small]
    out[~small] = 1.0 - np.sin(zl) / zl
    return out if out.ndim else float(out)


# -----------------------------
# Output Emission
# -----------------------------

def to_jsonable(obj):
    """
    Recursively convert results to JSON-safe builtins.
    Complex numbers become [re, im]; enums their value; numpy scalars floats.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value) or math.isinf(value):
            return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
        return value
    return obj


def dump_json(payload) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation, trailing LF)"""
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n"


def format_float(value) -> str:
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".10g")


def render_csv(header, rows) -> str:
    """
    CSV text with ',' separator, '.' decimal, header row and LF line endings.
    Floats are formatted with 10 significant digits so output is byte-stable.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()
