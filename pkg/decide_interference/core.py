# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Physical constants, validated domain types and derived scalars
shared by every other module. All quantities are SI.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .exceptions import ScenarioValidationError

if TYPE_CHECKING:
    from .collapse import CollapseParams
    from .decoherence import DecoherenceSettings
    from .interference import DetectionSettings
    from .prepare import ScatterSlitParams, X2Params

MAX_RADIUS = 1.2e-7
SEPARATION_MODELS = ("slit", "ballistic")


@dataclass(frozen=True)
class Constants:
    """CODATA 2018 recommended values"""

    hbar: float = 1.054571817e-34
    k_B: float = 1.380649e-23
    c: float = 299792458.0
    G: float = 6.67430e-11
    amu: float = 1.66053906660e-27
    provenance: str = "CODATA 2018"


CONSTANTS = Constants()


def _require(condition: bool, field_name: str, message: str) -> None:
    if not condition:
        raise ScenarioValidationError(message, field_name)


def _finite(value, field_name: str) -> None:
    _require(isinstance(value, (int, float)) and math.isfinite(value), field_name, f"must be a finite number, got {value!r}")


@dataclass(frozen=True)
class Particle:
    """Dielectric nanosphere: geometry, density, permittivities, internal temperature"""

    radius: float
    density: float = 2300.0
    eps_trap: complex = complex(2.1, 0.0)
    eps_bb: complex = complex(2.1, 0.57)
    internal_temperature: float = 16.0

    def __post_init__(self):
        _finite(self.radius, "particle.radius")
        _require(0.0 < self.radius <= MAX_RADIUS, "particle.radius", f"must be in (0, {MAX_RADIUS:g}] m, got {self.radius:g}")
        _finite(self.density, "particle.density")
        _require(self.density > 0.0, "particle.density", f"must be positive, got {self.density:g}")
        _require(complex(self.eps_trap).imag >= 0.0, "particle.eps_trap", "imaginary part must be non-negative")
        _require(complex(self.eps_bb).imag >= 0.0, "particle.eps_bb", "imaginary part must be non-negative")
        _finite(self.internal_temperature, "particle.internal_temperature")
        _require(self.internal_temperature >= 0.0, "particle.internal_temperature", "must be non-negative")
        object.__setattr__(self, "eps_trap", complex(self.eps_trap))
        object.__setattr__(self, "eps_bb", complex(self.eps_bb))

    @property
    def mass(self) -> float:
        return particle_mass(self)


@dataclass(frozen=True)
class Environment:
    temperature: float
    pressure: float = 0.0
    gas_mass: float = 2.0 * CONSTANTS.amu

    def __post_init__(self):
        _finite(self.temperature, "environment.temperature")
        _require(self.temperature > 0.0, "environment.temperature", f"must be positive, got {self.temperature:g}")
        _finite(self.pressure, "environment.pressure")
        _require(self.pressure >= 0.0, "environment.pressure", f"must be non-negative, got {self.pressure:g}")
        _finite(self.gas_mass, "environment.gas_mass")
        _require(self.gas_mass > 0.0, "environment.gas_mass", "must be positive")


@dataclass(frozen=True)
class Trap:
    omega: float
    wavelength: float = 1.064e-6
    intensity: float = 1e9

    def __post_init__(self):
        _finite(self.omega, "trap.omega")
        _require(self.omega > 0.0, "trap.omega", f"must be positive, got {self.omega:g}")
        _finite(self.wavelength, "trap.wavelength")
        _require(self.wavelength > 0.0, "trap.wavelength", "must be positive")
        _finite(self.intensity, "trap.intensity")
        _require(self.intensity >= 0.0, "trap.intensity", "must be non-negative")


class PreparationMethod(str, enum.Enum):
    X2_MEASUREMENT = "x2"
    SCATTER_SLIT = "scatter-slit"


@dataclass(frozen=True)
class Protocol:
    """
    Timeline and slit preparation of one run.
    phase_jitter is the rms random phase (rad) between the interfering parts.
    separation_model: "slit" keeps the prepared separation during t2;
    "ballistic" follows the branch centres as they drift apart.
    """

    t1: float
    t2: float
    delta_x: float
    method: PreparationMethod = PreparationMethod.X2_MEASUREMENT
    x2: X2Params | None = None
    scatter: ScatterSlitParams | None = None
    phase_jitter: float = 0.0
    separation_model: str = "slit"

    def __post_init__(self):
        for name in ("t1", "t2", "delta_x", "phase_jitter"):
            _finite(getattr(self, name), f"protocol.{name}")
        _require(self.t1 > 0.0, "protocol.t1", f"must be positive, got {self.t1:g}")
        _require(self.t2 > self.t1, "protocol.t2", f"must exceed t1 ({self.t1:g} s), got {self.t2:g}")
        _require(self.delta_x > 0.0, "protocol.delta_x", "must be positive")
        _require(self.phase_jitter >= 0.0, "protocol.phase_jitter", "must be non-negative")
        _require(
            self.separation_model in SEPARATION_MODELS,
            "protocol.separation_model",
            f"must be one of {', '.join(SEPARATION_MODELS)}, got {self.separation_model!r}",
        )
        object.__setattr__(self, "method", PreparationMethod(self.method))
        if self.method is PreparationMethod.X2_MEASUREMENT:
            _require(self.x2 is not None, "protocol.x2", "required for the x2 method")
            _require(
                math.isclose(2.0 * self.x2.position, self.delta_x, rel_tol=1e-9),
                "protocol.x2.position",
                f"must equal delta_x/2 = {self.delta_x / 2:g} m, got {self.x2.position:g}",
            )
        else:
            _require(self.scatter is not None, "protocol.scatter", "required for the scatter-slit method")


@dataclass(frozen=True)
class Scenario:
    """One experimental run configuration"""

    particle: Particle
    environment: Environment
    trap: Trap
    protocol: Protocol
    collapse: CollapseParams
    detection: DetectionSettings
    decoherence: DecoherenceSettings
    visibility_threshold: float | None = None
    defaults: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.visibility_threshold is not None:
            _finite(self.visibility_threshold, "visibility_threshold")
            _require(0.0 <= self.visibility_threshold <= 1.0, "visibility_threshold", "must be in [0, 1]")


def particle_mass(particle: Particle) -> float:
    """
    Mass of a uniform sphere, (4/3)·π·R³·ρ.
    """
    return 4.0 / 3.0 * math.pi * particle.radius**3 * particle.density


def thermal_wavelength(temperature: float) -> float:
    """
    Characteristic blackbody wavelength scale ħc/(k_B·T).
    """
    if not temperature > 0.0:
        raise ScenarioValidationError(f"must be positive, got {temperature!r}", "temperature")
    return CONSTANTS.hbar * CONSTANTS.c / (CONSTANTS.k_B * temperature)
