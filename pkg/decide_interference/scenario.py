# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Scenario documents: strict, unit-aware parsing into validated core types,
the defaults ledger, and sweep specifications.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass

import numpy as np

from .collapse import CollapseParams
from .config.defaults import DEFAULTS
from .core import Environment, Particle, PreparationMethod, Protocol, Scenario, Trap
from .decoherence import DecoherenceSettings
from .exceptions import OutputError, ScenarioValidationError
from .interference import DetectionSettings
from .prepare import ScatterSlitParams, X2Params
from .utils import logger, parse_complex, parse_quantity, to_jsonable

REQUIRED = object()

# section -> key -> (kind, default); kind is a UNITS dimension or a parser tag
FIELDS = {
    "particle": {
        "radius": ("length", REQUIRED),
        "density": ("density", DEFAULTS["particle.density"]),
        "eps_trap": ("complex", DEFAULTS["particle.eps_trap"]),
        "eps_bb": ("complex", DEFAULTS["particle.eps_bb"]),
        "internal_temperature": ("internal_temperature", DEFAULTS["particle.internal_temperature"]),
    },
    "environment": {
        "temperature": ("temperature", REQUIRED),
        "pressure": ("pressure", DEFAULTS["environment.pressure"]),
        "gas_mass": ("mass", DEFAULTS["environment.gas_mass"]),
    },
    "trap": {
        "omega": ("angular_frequency", REQUIRED),
        "wavelength": ("length", DEFAULTS["trap.wavelength"]),
        "intensity": ("intensity", DEFAULTS["trap.intensity"]),
    },
    "protocol": {
        "t1": ("time", REQUIRED),
        "t2": ("time", REQUIRED),
        "delta_x": ("length", REQUIRED),
        "method": ("method", DEFAULTS["protocol.method"]),
        "phase_jitter": ("angle", DEFAULTS["protocol.phase_jitter"]),
        "separation_model": ("string", DEFAULTS["protocol.separation_model"]),
        "x2": ("section", None),
        "scatter": ("section", None),
    },
    "protocol.x2": {
        "position": ("length", DEFAULTS["protocol.x2.position"]),
        "sigma_m": ("length", REQUIRED),
    },
    "protocol.scatter": {
        "waist": ("length", REQUIRED),
        "wavelength": ("length", REQUIRED),
        "power": ("power", REQUIRED),
        "duration": ("time", REQUIRED),
        "eps_scatter": ("optional_complex", DEFAULTS["protocol.scatter.eps_scatter"]),
        "cross_section": ("optional_area", DEFAULTS["protocol.scatter.cross_section"]),
        "localized_width": ("string", DEFAULTS["protocol.scatter.localized_width"]),
    },
    "collapse": {
        "csl_lambda": ("rate", DEFAULTS["collapse.csl_lambda"]),
        "csl_rc": ("length", DEFAULTS["collapse.csl_rc"]),
        "csl_enabled": ("bool", DEFAULTS["collapse.csl_enabled"]),
        "dp_enabled": ("bool", DEFAULTS["collapse.dp_enabled"]),
        "dp_cutoff": ("optional_length", DEFAULTS["collapse.dp_cutoff"]),
        "k_enabled": ("bool", DEFAULTS["collapse.k_enabled"]),
    },
    "detection": {
        "readout_blur": ("optional_length", DEFAULTS["detection.readout_blur"]),
        "grid_points": ("int", DEFAULTS["detection.grid_points"]),
        "span": ("dimensionless", DEFAULTS["detection.span"]),
        "shots": ("int", DEFAULTS["detection.shots"]),
        "repeats": ("int", DEFAULTS["detection.repeats"]),
    },
    "decoherence": {
        "channels": ("channels", DEFAULTS["decoherence.channels"]),
        "bulk_absorption": ("optional_absorption", DEFAULTS["decoherence.bulk_absorption"]),
    },
}

OPTIONAL_SECTIONS = ("collapse", "detection", "decoherence")
TOP_LEVEL = ("particle", "environment", "trap", "protocol", "collapse", "detection", "decoherence", "sweep", "visibility_threshold")


# -----------------------------
# Field Parsing
# -----------------------------

def _parse_bool(value, path):
    if not isinstance(value, bool):
        raise ScenarioValidationError(f"expected true or false, got {value!r}", path)
    return value


def _parse_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioValidationError(f"expected an integer, got {value!r}", path)
    return value


def _parse_string(value, path):
    if not isinstance(value, str):
        raise ScenarioValidationError(f"expected a string, got {value!r}", path)
    return value


def _parse_field(kind, value, path):
    if kind == "complex":
        return parse_complex(value, path)
    if kind == "optional_complex":
        return None if value is None else parse_complex(value, path)
    if kind.startswith("optional_"):
        return None if value is None else parse_quantity(value, kind[len("optional_") :], path)
    if kind == "bool":
        return _parse_bool(value, path)
    if kind == "int":
        return _parse_int(value, path)
    if kind == "string":
        return _parse_string(value, path)
    if kind == "method":
        try:
            return PreparationMethod(_parse_string(value, path)).value
        except ValueError:
            allowed = ", ".join(m.value for m in PreparationMethod)
            raise ScenarioValidationError(f"must be one of {allowed}, got {value!r}", path)
    if kind == "internal_temperature":
        if value in ("equilibrium", "environment"):
            return value
        return parse_quantity(value, "temperature", path)
    if kind == "channels":
        if not isinstance(value, list) or not all(isinstance(c, str) for c in value):
            raise ScenarioValidationError("expected a list of channel names", path)
        return list(value)
    return parse_quantity(value, kind, path)


def _parse_section(name, raw, defaults_used):
    if not isinstance(raw, dict):
        raise ScenarioValidationError(f"expected an object, got {type(raw).__name__}", name)
    spec = FIELDS[name]
    unknown = sorted(set(raw) - set(spec))
    if unknown:
        raise ScenarioValidationError(f"unknown key(s): {', '.join(unknown)}", f"{name}.{unknown[0]}")

    resolved = {}
    for key, (kind, default) in spec.items():
        path = f"{name}.{key}"
        if kind == "section":
            if key in raw:
                resolved[key] = raw[key]
            continue
        if key in raw:
            resolved[key] = _parse_field(kind, raw[key], path)
        elif default is REQUIRED:
            raise ScenarioValidationError("missing required key", path)
        else:
            resolved[key] = copy.deepcopy(default)
            defaults_used[path] = default
    return resolved


# -----------------------------
# Documents
# -----------------------------

def read_document(source):
    """Load a scenario document from a path or accept an already-parsed dict"""
    if isinstance(source, dict):
        return copy.deepcopy(source)
    try:
        with open(source, encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as exc:
        raise OutputError(f"cannot read scenario {source}: {exc}")
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", "scenario")
    if not isinstance(document, dict):
        raise ScenarioValidationError("scenario document must be a JSON object", "scenario")
    return document


def resolve_document(document: dict):
    """
    Strictly parse a scenario document into a fully resolved SI dict.

    Returns:
        tuple: (resolved dict, defaults ledger {dotted path: applied value})
    """
    unknown = sorted(set(document) - set(TOP_LEVEL))
    if unknown:
        raise ScenarioValidationError(f"unknown top-level key(s): {', '.join(unknown)}", unknown[0])

    defaults_used = {}
    resolved = {}
    for name in ("particle", "environment", "trap", "protocol", *OPTIONAL_SECTIONS):
        if name not in document:
            if name not in OPTIONAL_SECTIONS:
                raise ScenarioValidationError("missing required section", name)
            raw = {}
        else:
            raw = document[name]
        resolved[name] = _parse_section(name, raw, defaults_used)

    protocol = resolved["protocol"]
    method = protocol["method"]
    if method == PreparationMethod.X2_MEASUREMENT.value:
        if "x2" not in protocol:
            raise ScenarioValidationError("missing required section for method x2", "protocol.x2")
        x2 = _parse_section("protocol.x2", protocol["x2"], defaults_used)
        if x2["position"] == "delta_x/2":
            x2["position"] = protocol["delta_x"] / 2.0
            defaults_used["protocol.x2.position"] = x2["position"]
        protocol["x2"] = x2
        protocol.pop("scatter", None)
    else:
        if "scatter" not in protocol:
            raise ScenarioValidationError("missing required section for method scatter-slit", "protocol.scatter")
        protocol["scatter"] = _parse_section("protocol.scatter", protocol["scatter"], defaults_used)
        protocol.pop("x2", None)

    # "environment" and "equilibrium" stay symbolic; build_scenario resolves them
    particle = resolved["particle"]
    if particle["internal_temperature"] == "environment":
        if "particle.internal_temperature" in defaults_used:
            defaults_used["particle.internal_temperature"] = resolved["environment"]["temperature"]
    elif particle["internal_temperature"] == "equilibrium":
        if resolved["decoherence"]["bulk_absorption"] is None:
            raise ScenarioValidationError(
                "internal_temperature 'equilibrium' needs decoherence.bulk_absorption", "particle.internal_temperature"
            )
    elif resolved["decoherence"]["bulk_absorption"] is not None:
        raise ScenarioValidationError(
            "bulk_absorption only applies with internal_temperature 'equilibrium'", "decoherence.bulk_absorption"
        )

    threshold = document.get("visibility_threshold", DEFAULTS["visibility_threshold"])
    if "visibility_threshold" not in document:
        defaults_used["visibility_threshold"] = threshold
    elif threshold is not None:
        threshold = parse_quantity(threshold, "dimensionless", "visibility_threshold")
    resolved["visibility_threshold"] = threshold
    return resolved, defaults_used


def build_scenario(resolved: dict, defaults_used: dict | None = None) -> Scenario:
    """Construct validated core types from a resolved SI dict"""
    p = resolved["particle"]
    internal_temperature = p["internal_temperature"]
    if internal_temperature in ("environment", "equilibrium"):
        # the equilibrium value comes from the power balance at run time
        internal_temperature = resolved["environment"]["temperature"]
    particle = Particle(
        radius=p["radius"],
        density=p["density"],
        eps_trap=p["eps_trap"],
        eps_bb=p["eps_bb"],
        internal_temperature=internal_temperature,
    )
    environment = Environment(**resolved["environment"])
    trap = Trap(**resolved["trap"])

    proto = dict(resolved["protocol"])
    x2 = X2Params(**proto.pop("x2")) if "x2" in proto else None
    scatter = ScatterSlitParams(**proto.pop("scatter")) if "scatter" in proto else None
    protocol = Protocol(x2=x2, scatter=scatter, **proto)

    decoherence = dict(resolved["decoherence"])
    decoherence["channels"] = tuple(decoherence["channels"])
    return Scenario(
        particle=particle,
        environment=environment,
        trap=trap,
        protocol=protocol,
        collapse=CollapseParams(**resolved["collapse"]),
        detection=DetectionSettings(**resolved["detection"]),
        decoherence=DecoherenceSettings(**decoherence),
        visibility_threshold=resolved["visibility_threshold"],
        defaults=dict(defaults_used or {}),
    )


def load_scenario(source):
    """
    Read, resolve and validate a scenario.

    Args:
        source: path to a JSON scenario file, or the parsed document

    Returns:
        tuple: (Scenario, SweepSpec or None, resolved SI dict)
    """
    document = read_document(source)
    resolved, defaults_used = resolve_document(document)
    scenario = build_scenario(resolved, defaults_used)
    sweep = parse_sweep(document["sweep"], resolved) if "sweep" in document else None
    logger("scenario").debug(f"load_scenario: {len(defaults_used)} default(s) applied")
    return scenario, sweep, resolved


def scenario_to_dict(resolved: dict) -> dict:
    """JSON-ready copy of a resolved scenario (complex values as [re, im])"""
    return to_jsonable(resolved)


# -----------------------------
# Sweeps
# -----------------------------

SWEEP_KEYS = ("axis", "values", "range", "columns")
RANGE_KEYS = ("start", "stop", "count", "scale")
COLUMNS = ("quantum_visibility", "collapse_visibility", "budget")


@dataclass(frozen=True)
class SweepSpec:
    """axis: dotted scenario path of a numeric field; values in SI"""

    axis: str
    values: tuple
    columns: tuple = COLUMNS

    def __post_init__(self):
        if len(self.values) < 2:
            raise ScenarioValidationError("a sweep needs at least 2 points", "sweep.values")


def axis_kind(axis: str) -> str:
    section, _, key = axis.rpartition(".")
    spec = FIELDS.get(section)
    if spec is None or key not in spec:
        raise ScenarioValidationError(f"unknown sweep axis {axis!r}", "sweep.axis")
    kind = spec[key][0]
    if kind.startswith("optional_"):
        kind = kind[len("optional_") :]
    if kind == "internal_temperature":
        kind = "temperature"
    if kind not in ("length", "area", "time", "temperature", "pressure", "mass", "density", "angular_frequency",
                    "power", "intensity", "absorption", "rate", "angle", "dimensionless"):
        raise ScenarioValidationError(f"axis {axis!r} is not numeric", "sweep.axis")
    return kind


def set_path(resolved: dict, axis: str, value) -> dict:
    """Copy of a resolved scenario with one dotted field replaced"""
    updated = copy.deepcopy(resolved)
    node = updated
    *parents, key = axis.split(".")
    for part in parents:
        if part not in node:
            raise ScenarioValidationError(f"section {part!r} not present in this scenario", "sweep.axis")
        node = node[part]
    node[key] = value
    if axis == "protocol.delta_x" and "x2" in updated["protocol"]:
        updated["protocol"]["x2"]["position"] = value / 2.0
    return updated


def parse_sweep(raw, resolved: dict) -> SweepSpec:
    if not isinstance(raw, dict):
        raise ScenarioValidationError("expected an object", "sweep")
    unknown = sorted(set(raw) - set(SWEEP_KEYS))
    if unknown:
        raise ScenarioValidationError(f"unknown key(s): {', '.join(unknown)}", f"sweep.{unknown[0]}")
    if "axis" not in raw:
        raise ScenarioValidationError("missing required key", "sweep.axis")
    axis = raw["axis"]
    kind = axis_kind(axis)

    if ("values" in raw) == ("range" in raw):
        raise ScenarioValidationError("give exactly one of values or range", "sweep.values")
    if "values" in raw:
        if not isinstance(raw["values"], list):
            raise ScenarioValidationError("expected a list", "sweep.values")
        values = tuple(parse_quantity(v, kind, f"sweep.values[{i}]") for i, v in enumerate(raw["values"]))
    else:
        values = _parse_range(raw["range"], kind)

    columns = tuple(raw.get("columns", COLUMNS))
    bad = [c for c in columns if c not in COLUMNS]
    if bad:
        raise ScenarioValidationError(f"unknown column(s): {', '.join(bad)}", "sweep.columns")

    spec = SweepSpec(axis=axis, values=values, columns=columns)
    for index, value in enumerate(values):
        try:
            build_scenario(set_path(resolved, axis, value))
        except ScenarioValidationError as exc:
            raise ScenarioValidationError(f"value {value:g} outside the axis domain ({exc})", f"sweep.values[{index}]")
    return spec


def _parse_range(raw, kind):
    if not isinstance(raw, dict):
        raise ScenarioValidationError("expected an object", "sweep.range")
    unknown = sorted(set(raw) - set(RANGE_KEYS))
    if unknown:
        raise ScenarioValidationError(f"unknown key(s): {', '.join(unknown)}", f"sweep.range.{unknown[0]}")
    for key in ("start", "stop", "count"):
        if key not in raw:
            raise ScenarioValidationError("missing required key", f"sweep.range.{key}")
    start = parse_quantity(raw["start"], kind, "sweep.range.start")
    stop = parse_quantity(raw["stop"], kind, "sweep.range.stop")
    count = _parse_int(raw["count"], "sweep.range.count")
    scale = raw.get("scale", "linear")
    if count < 2:
        raise ScenarioValidationError("must be at least 2", "sweep.range.count")
    if scale == "log":
        if not (start > 0.0 and stop > 0.0):
            raise ScenarioValidationError("log range needs positive bounds", "sweep.range.start")
        points = np.geomspace(start, stop, count)
        # exact endpoints
        points[0], points[-1] = start, stop
    elif scale == "linear":
        points = np.linspace(start, stop, count)
    else:
        raise ScenarioValidationError(f"must be linear or log, got {scale!r}", "sweep.range.scale")
    values = tuple(float(v) for v in points)
    if not all(math.isfinite(v) for v in values):
        raise ScenarioValidationError("range produced non-finite values", "sweep.range")
    return values
