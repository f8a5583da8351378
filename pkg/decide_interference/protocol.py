# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
One experimental run end to end (trap ground state, release, expansion,
slit preparation, decoherence and collapse over the free fall, detection)
and parameter sweeps over independent runs.
"""

from __future__ import annotations

import dataclasses
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .collapse import collapse_visibility
from .decoherence import (
    ChannelName,
    DecayResult,
    DecoherenceBudget,
    PathSegment,
    SeparationPath,
    decoherence_budget,
    resolve_internal_temperature,
    standard_channels,
    visibility_decay,
)
from .exceptions import DecideError, ProtocolStepError
from .interference import InterferencePattern, detect
from .prepare import PreparationResult, prepare_slit
from .utils import log_error, logger, render_csv
from .wavepacket import (
    evolve_branch,
    expansion_velocity,
    free_evolve,
    ground_state,
    overlap_time,
    pure_state,
    time_to_width,
    width_at,
)

# budget columns follow this order
CHANNEL_ORDER = tuple(ChannelName)


def _step(label: str, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except DecideError as exc:
        raise ProtocolStepError(label, exc) from exc


@dataclass
class ProtocolResult:
    pattern: InterferencePattern
    budget: DecoherenceBudget
    preparation: PreparationResult
    quantum_decay: DecayResult
    collapse_decay: DecayResult
    quantum_visibility: float
    collapse_visibility: float
    metadata: dict = field(default_factory=dict)

    def summary(self) -> dict:
        """JSON-ready digest (the pattern itself goes to CSV)"""
        return {
            "quantum_visibility": self.quantum_visibility,
            "collapse_visibility": self.collapse_visibility,
            "fringe_spacing": self.pattern.fringe_spacing,
            "decay": {
                "quantum": {"factor": self.quantum_decay.factor, "exponent": self.quantum_decay.exponent,
                            "per_channel": self.quantum_decay.per_channel},
                "collapse": {"factor": self.collapse_decay.factor, "exponent": self.collapse_decay.exponent,
                             "per_channel": self.collapse_decay.per_channel},
            },
            "budget": budget_summary(self.budget),
            "preparation": {
                "success_weight": self.preparation.success_weight,
                "scatter_probability": self.preparation.scatter_probability,
                **self.preparation.metadata,
            },
            "detection": self.pattern.metadata,
        }


def budget_summary(budget: DecoherenceBudget) -> dict:
    return {
        "separation": budget.separation,
        "windows": budget.windows,
        "internal_temperature": budget.internal_temperature,
        "gas": budget.gas,
        "totals": budget.totals,
        "channels": [
            {"name": name, "Lambda": Lambda, "gamma_sat": gamma, "exponent_t1": e1, "exponent_t2": e2}
            for name, Lambda, gamma, e1, e2 in budget.rows()
        ],
    }


# -----------------------------
# Protocol Steps
# -----------------------------

def prepare_state(scenario) -> PreparationResult:
    """
    Steps 2 to 5: trap ground state, release, free expansion for t1 and
    slit preparation.
    """
    particle, protocol = scenario.particle, scenario.protocol
    mass = particle.mass
    branch = _step("step 2 (ground state)", ground_state, mass, scenario.trap.omega)
    expanded = _step("step 4 (expansion)", free_evolve, pure_state([branch]), protocol.t1, mass)
    return _step("step 5 (prepare)", prepare_slit, expanded, protocol, particle)


def separation_path(scenario, preparation: PreparationResult) -> SeparationPath:
    """
    Branch separation over the run: none while the packet is a single
    branch (t1), then the prepared separation during t2. The ballistic
    model lets it grow linearly to the separation of the evolved centres.
    """
    protocol = scenario.protocol
    coherent = preparation.ensemble.coherent_component
    start = coherent.separation if coherent is not None else 0.0
    end = start
    if coherent is not None and protocol.separation_model == "ballistic":
        centres = [evolve_branch(b, scenario.particle.mass, protocol.t2).x0 for b in coherent.branches]
        end = max(centres) - min(centres)
    t1, t2 = protocol.t1, protocol.t2
    return SeparationPath((PathSegment(0.0, t1, 0.0, 0.0), PathSegment(t1, t1 + t2, start, end)))


def quantum_decay(scenario, path: SeparationPath, internal_temperature: float | None = None) -> DecayResult:
    channels = standard_channels(scenario, internal_temperature=internal_temperature)
    return visibility_decay(path, channels)


def collapse_decay(scenario, path: SeparationPath) -> DecayResult:
    return collapse_visibility(scenario.collapse, scenario.particle, path)


def timing(scenario, preparation: PreparationResult) -> dict:
    """Free-fall planning figures for the scenario"""
    particle, protocol = scenario.particle, scenario.protocol
    mass = particle.mass
    ground = ground_state(mass, scenario.trap.omega)
    info = {
        "expansion_velocity": expansion_velocity(mass, scenario.trap.omega),
        "ground_state_width": ground.sigma,
        "width_after_t1": width_at(ground, mass, protocol.t1),
        "t1_for_coherence_over_delta_x": time_to_width(ground.sigma, mass, protocol.delta_x),
    }
    coherent = preparation.ensemble.coherent_component
    if coherent is not None:
        sigma_b = coherent.branches[0].sigma
        info["branch_width"] = sigma_b
        info["t2_for_branch_overlap"] = overlap_time(sigma_b, mass, protocol.delta_x)
    return info


def run_protocol(scenario) -> ProtocolResult:
    """
    Simulate one run.

    Args:
        scenario: validated Scenario

    Returns:
        ProtocolResult: detected pattern (standard decoherence applied),
        decoherence budget and both visibility predictions; the collapse
        prediction multiplies the quantum one by the collapse decay factor
    """
    particle, protocol = scenario.particle, scenario.protocol
    mass = particle.mass
    log = logger("protocol")
    log.info(f"run_protocol: R={particle.radius:g} m, t1={protocol.t1:g} s, t2={protocol.t2:g} s, method={protocol.method.value}")

    preparation = prepare_state(scenario)
    path = separation_path(scenario, preparation)

    internal_temperature = _step("step 6 (decoherence)", resolve_internal_temperature, scenario)
    quantum = _step("step 6 (decoherence)", quantum_decay, scenario, path, internal_temperature)
    collapse = _step("step 6 (decoherence)", collapse_decay, scenario, path)
    budget = _step("step 6 (decoherence)", decoherence_budget, scenario, path.segments[-1].dx_start)

    pattern = _step(
        "step 7 (detect)",
        detect,
        preparation.ensemble,
        protocol.t2,
        mass,
        decay_quantum=quantum.factor,
        settings=scenario.detection,
        phase_jitter=protocol.phase_jitter,
    )
    quantum_visibility = pattern.visibility
    collapse_visibility_value = quantum_visibility * collapse.factor

    warnings = list(preparation.warnings) + list(quantum.warnings) + list(pattern.metadata.get("warnings", []))
    metadata = {
        "timing": timing(scenario, preparation),
        "separation_path": [dataclasses.asdict(s) for s in path.segments],
        "internal_temperature": internal_temperature,
        "warnings": warnings,
        "defaults": dict(scenario.defaults),
    }
    log.info(f"run_protocol: V_quantum={quantum_visibility:.6f}, V_collapse={collapse_visibility_value:.6f}")
    return ProtocolResult(
        pattern=pattern,
        budget=budget,
        preparation=preparation,
        quantum_decay=quantum,
        collapse_decay=collapse,
        quantum_visibility=quantum_visibility,
        collapse_visibility=collapse_visibility_value,
        metadata=metadata,
    )


def ideal_visibility(scenario, preparation: PreparationResult | None = None) -> float:
    """Detected visibility with every decoherence and collapse factor set to 1"""
    preparation = preparation or prepare_state(scenario)
    pattern = _step(
        "step 7 (detect)",
        detect,
        preparation.ensemble,
        scenario.protocol.t2,
        scenario.particle.mass,
        settings=scenario.detection,
        phase_jitter=scenario.protocol.phase_jitter,
    )
    return pattern.visibility


# -----------------------------
# Sweeps
# -----------------------------

def sweep_point(resolved: dict, axis: str, value: float, seed: int | None = None) -> dict:
    """
    Run the protocol for one axis value. Failures are returned, not raised,
    so one bad point never stops the sweep.
    """
    from .scenario import build_scenario, set_path

    try:
        scenario = build_scenario(set_path(resolved, axis, value))
        if seed is not None:
            scenario = dataclasses.replace(scenario, detection=dataclasses.replace(scenario.detection, seed=seed))
        result = run_protocol(scenario)
        exponents = {}
        for decay in (result.quantum_decay, result.collapse_decay):
            exponents.update(decay.per_channel)
        return {
            "success": True,
            "value": value,
            "quantum_visibility": result.quantum_visibility,
            "collapse_visibility": result.collapse_visibility,
            "decay_quantum": result.quantum_decay.factor,
            "decay_collapse": result.collapse_decay.factor,
            "exponents": exponents,
            "message": "",
        }
    except Exception as e:
        return {
            "success": False,
            "value": value,
            "message": f"{type(e).__name__}: {e}",
            "traceback": traceback.format_exc(),
        }


def run_sweep(resolved: dict, sweep, jobs: int = 1, seed: int | None = None) -> dict:
    """
    Evaluate every sweep point, in parallel when jobs > 1.

    Args:
        resolved: resolved scenario dict (scenario.load_scenario)
        sweep: SweepSpec
        jobs: worker processes
        seed: Monte Carlo detection seed applied to every point

    Returns:
        dict: success flag, message, per-point results in input order,
        error list and the CSV text
    """
    log = logger("protocol")
    log.info(f"run_sweep: {len(sweep.values)} point(s) over {sweep.axis}, jobs={jobs}")
    tasks = [(resolved, sweep.axis, value, seed) for value in sweep.values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(sweep_point, *zip(*tasks)))
    else:
        results = [sweep_point(*task) for task in tasks]

    errors = []
    for point in results:
        if not point["success"]:
            errors.append(f"{sweep.axis}={point['value']:g}: {point['message']}")
            log_error(point["traceback"], f"Sweep point {sweep.axis}={point['value']:g} failed")
    if errors:
        log.warning(f"run_sweep: {len(errors)} of {len(results)} point(s) failed")

    return {
        "success": len(errors) < len(results),
        "message": f"Evaluated {len(results) - len(errors)} of {len(results)} point(s)",
        "results": results,
        "errors": errors or None,
        "csv": sweep_table(sweep, results),
    }


def sweep_table(sweep, results) -> str:
    """CSV with one row per axis value, in input order"""
    present = {name for point in results if point["success"] for name in point["exponents"]}
    channels = [c.value for c in CHANNEL_ORDER if c.value in present]

    header = [sweep.axis]
    if "quantum_visibility" in sweep.columns:
        header.append("quantum_visibility")
    if "collapse_visibility" in sweep.columns:
        header.append("collapse_visibility")
    if "budget" in sweep.columns:
        header += ["decay_quantum", "decay_collapse"] + [f"exponent_{name}" for name in channels]
    header.append("error")

    rows = []
    for point in results:
        row = [float(point["value"])]
        ok = point["success"]
        if "quantum_visibility" in sweep.columns:
            row.append(point["quantum_visibility"] if ok else math.nan)
        if "collapse_visibility" in sweep.columns:
            row.append(point["collapse_visibility"] if ok else math.nan)
        if "budget" in sweep.columns:
            row += [point["decay_quantum"] if ok else math.nan, point["decay_collapse"] if ok else math.nan]
            row += [point["exponents"].get(name, math.nan) if ok else math.nan for name in channels]
        row.append(point["message"])
        rows.append(row)
    return render_csv(header, rows)
