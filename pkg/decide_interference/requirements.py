# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Requirement derivation: invert the forward visibility model along one
scenario axis, and convert the thruster force-noise budget.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .config.defaults import AXIS_BRACKETS, THRUSTER
from .decoherence import BLACKBODY_CHANNELS, ChannelName, resolve_internal_temperature, standard_channels, visibility_decay
from .exceptions import ConvergenceError, InversionError, ScenarioValidationError
from .utils import log_error, logger

RELATIVE_TOLERANCE = 1e-4
FORWARD_CHECK_TOLERANCE = 1e-3
MONOTONE_SAMPLES = 5
MAX_ITERATIONS = 200


class Axis(str, enum.Enum):
    ENV_TEMP = "env-temp"
    INTERNAL_TEMP = "internal-temp"
    PRESSURE = "pressure"
    CSL_LAMBDA = "csl-lambda"


@dataclass
class RequirementResult:
    axis: Axis
    critical_value: float
    threshold_used: float
    bracket: tuple
    iterations: int
    forward_check_residual: float
    ideal_visibility: float
    log_space: bool
    bracket_visibilities: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


# -----------------------------
# Forward Model
# -----------------------------

def axis_decay(scenario, axis: Axis, value: float, path, internal_temperature: float):
    """
    Decay factor along a requirement axis. Temperature axes use the blackbody
    channels only, the pressure axis the gas channel, and the csl-lambda
    axis the collapse prediction with CSL switched on.
    """
    from .protocol import collapse_decay

    if axis is Axis.ENV_TEMP:
        env = dataclasses.replace(scenario.environment, temperature=value)
        channels = standard_channels(
            dataclasses.replace(scenario, environment=env), BLACKBODY_CHANNELS, internal_temperature
        )
        return visibility_decay(path, channels)
    if axis is Axis.INTERNAL_TEMP:
        if not value >= 0.0:
            raise ScenarioValidationError(f"must be non-negative, got {value!r}", "particle.internal_temperature")
        return visibility_decay(path, standard_channels(scenario, BLACKBODY_CHANNELS, value))
    if axis is Axis.PRESSURE:
        env = dataclasses.replace(scenario.environment, pressure=value)
        return visibility_decay(path, standard_channels(dataclasses.replace(scenario, environment=env), [ChannelName.GAS]))
    collapse = dataclasses.replace(scenario.collapse, csl_lambda=value, csl_enabled=True)
    return collapse_decay(dataclasses.replace(scenario, collapse=collapse), path)


def default_threshold(scenario, axis: Axis, path, ideal: float, internal_temperature: float) -> float:
    """
    Visibility the quantum prediction must beat: the collapse-model
    prediction, or for the csl-lambda axis the quantum prediction itself.
    """
    from .protocol import collapse_decay, quantum_decay

    if axis is Axis.CSL_LAMBDA:
        return ideal * quantum_decay(scenario, path, internal_temperature).factor
    return ideal * collapse_decay(scenario, path).factor


def _samples(lo: float, hi: float, log_space: bool):
    if log_space:
        return np.geomspace(lo, hi, MONOTONE_SAMPLES)
    return np.linspace(lo, hi, MONOTONE_SAMPLES)


def _midpoint(lo: float, hi: float, log_space: bool) -> float:
    return math.sqrt(lo * hi) if log_space else 0.5 * (lo + hi)


# -----------------------------
# Inversion
# -----------------------------

def invert(scenario, axis, threshold: float | None = None, bracket=None, ideal_visibility: float | None = None) -> RequirementResult:
    """
    Find the axis value at which the predicted visibility crosses the threshold.

    Args:
        scenario: validated Scenario
        axis: Axis or its name
        threshold: target visibility in (0, 1); defaults to the scenario's
            visibility_threshold, then to the competing prediction
        bracket: (lo, hi) in SI; defaults to AXIS_BRACKETS
        ideal_visibility: decoherence-free detected visibility; computed
            with one detection run when omitted

    Returns:
        RequirementResult: critical value with the full bisection trace
    """
    from .protocol import ideal_visibility as detected_ideal
    from .protocol import prepare_state, separation_path

    log = logger("requirements")
    try:
        axis = Axis(axis)
    except ValueError:
        raise ScenarioValidationError(f"unknown axis {axis!r}; choose from {', '.join(a.value for a in Axis)}", "axis")
    lo, hi = (float(v) for v in (bracket or AXIS_BRACKETS[axis.value]))
    if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 <= lo < hi):
        raise ScenarioValidationError(f"bracket must satisfy 0 <= lo < hi, got ({lo:g}, {hi:g})", "bracket")
    log_space = lo > 0.0 and hi / lo >= 10.0

    preparation = prepare_state(scenario)
    path = separation_path(scenario, preparation)
    internal_temperature = resolve_internal_temperature(scenario)
    ideal = detected_ideal(scenario, preparation) if ideal_visibility is None else ideal_visibility

    if threshold is None:
        threshold = scenario.visibility_threshold
    source = "given"
    if threshold is None:
        threshold = default_threshold(scenario, axis, path, ideal, internal_temperature)
        source = "collapse prediction" if axis is not Axis.CSL_LAMBDA else "quantum prediction"
    if not 0.0 < threshold < 1.0:
        raise ScenarioValidationError(f"threshold must be in (0, 1), got {threshold:g}", "visibility_threshold")

    def forward(value):
        return ideal * axis_decay(scenario, axis, float(value), path, internal_temperature).factor

    points = _samples(lo, hi, log_space)
    visibilities = [forward(v) for v in points]
    steps = np.diff(visibilities)
    if not (np.all(steps <= 1e-12) or np.all(steps >= -1e-12)):
        raise InversionError(
            f"forward visibility is not monotone over [{lo:g}, {hi:g}]",
            bracket=(lo, hi),
            visibilities=list(zip(points.tolist(), visibilities)),
        )
    v_lo, v_hi = visibilities[0], visibilities[-1]
    if (v_lo - threshold) * (v_hi - threshold) > 0.0:
        raise InversionError(
            f"bracket [{lo:g}, {hi:g}] does not straddle threshold {threshold:.6g} "
            f"(V = {v_lo:.6g} at {lo:g}, V = {v_hi:.6g} at {hi:g})",
            bracket=(lo, hi),
            visibilities=[(lo, v_lo), (hi, v_hi)],
        )

    trace = []
    a, b, v_a = lo, hi, v_lo
    for iteration in range(1, MAX_ITERATIONS + 1):
        mid = _midpoint(a, b, log_space)
        v_mid = forward(mid)
        trace.append({"iteration": iteration, "lo": a, "hi": b, "value": mid, "visibility": v_mid})
        if (v_mid > threshold) == (v_a > threshold):
            a, v_a = mid, v_mid
        else:
            b = mid
        if b - a <= RELATIVE_TOLERANCE * _midpoint(a, b, log_space):
            break
    else:
        raise ConvergenceError(f"bisection did not reach tolerance in {MAX_ITERATIONS} iterations", bracket=(a, b))

    critical = _midpoint(a, b, log_space)
    residual = abs(forward(critical) - threshold)
    if residual >= FORWARD_CHECK_TOLERANCE:
        message = f"forward check at {critical:.6g} misses threshold by {residual:.3g}"
        log_error(message, f"Inversion along {axis.value} failed")
        raise ConvergenceError(message, bracket=(a, b))

    log.info(f"invert: {axis.value} critical value {critical:.6g} (threshold {threshold:.6g}, {len(trace)} iterations)")
    return RequirementResult(
        axis=axis,
        critical_value=critical,
        threshold_used=threshold,
        bracket=(lo, hi),
        iterations=len(trace),
        forward_check_residual=residual,
        ideal_visibility=ideal,
        log_space=log_space,
        bracket_visibilities=list(zip(points.tolist(), visibilities)),
        trace=trace,
        metadata={"threshold_source": source, "internal_temperature": internal_temperature},
    )


# -----------------------------
# Thruster Noise
# -----------------------------

def thruster_accel_noise(force_noise: float, spacecraft_mass: float) -> float:
    """Acceleration noise, m/s^2/sqrt(Hz), from force noise N/sqrt(Hz)"""
    if not (isinstance(spacecraft_mass, (int, float)) and spacecraft_mass > 0.0):
        raise ScenarioValidationError(f"must be positive, got {spacecraft_mass!r}", "spacecraft_mass")
    if not (isinstance(force_noise, (int, float)) and force_noise >= 0.0):
        raise ScenarioValidationError(f"must be non-negative, got {force_noise!r}", "force_noise")
    return force_noise / spacecraft_mass


def thruster_requirement(
    force_noise: float = THRUSTER["force_noise"],
    spacecraft_mass: float = THRUSTER["spacecraft_mass"],
    quoted_bound: float = THRUSTER["quoted_bound"],
) -> dict:
    """
    Acceleration-noise requirement next to the quoted bound.

    Returns:
        dict: computed value, quoted bound, relative discrepancy, flag and warnings
    """
    value = thruster_accel_noise(force_noise, spacecraft_mass)
    discrepancy = (quoted_bound - value) / value if value > 0.0 else math.inf
    flagged = abs(discrepancy) > THRUSTER["discrepancy_flag"]
    warnings = []
    if flagged:
        message = (
            f"quoted bound {quoted_bound:.3g} differs from force/mass {value:.4g} by {discrepancy * 100:.1f}%"
        )
        logger("requirements").warning(f"thruster_requirement: {message}")
        warnings.append(message)
    return {
        "force_noise": force_noise,
        "spacecraft_mass": spacecraft_mass,
        "acceleration_noise": value,
        "quoted_bound": quoted_bound,
        "discrepancy": discrepancy,
        "flagged": flagged,
        "warnings": warnings,
    }
