import math

import pytest

from decide_interference.core import (
    CONSTANTS,
    Environment,
    Particle,
    PreparationMethod,
    Protocol,
    Trap,
    particle_mass,
    thermal_wavelength,
)
from decide_interference.exceptions import ScenarioValidationError
from decide_interference.prepare import X2Params


def test_constants_provenance():
    assert CONSTANTS.provenance == "CODATA 2018"
    assert CONSTANTS.hbar == 1.054571817e-34
    assert CONSTANTS.k_B == 1.380649e-23


def test_particle_mass_of_silica_sphere(silica_particle):
    expected = 4.0 / 3.0 * math.pi * (1e-7) ** 3 * 2300.0
    assert particle_mass(silica_particle) == pytest.approx(expected, rel=1e-15)
    assert silica_particle.mass == pytest.approx(9.634e-18, rel=1e-3)


def test_mass_scales_with_radius_cubed():
    small = Particle(radius=5e-8)
    large = Particle(radius=1e-7)
    assert large.mass / small.mass == pytest.approx(8.0, rel=1e-12)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"radius": 0.0}, "particle.radius"),
        ({"radius": 2e-7}, "particle.radius"),
        ({"radius": 1e-7, "density": -1.0}, "particle.density"),
        ({"radius": 1e-7, "eps_bb": complex(2.1, -0.1)}, "particle.eps_bb"),
        ({"radius": 1e-7, "internal_temperature": -1.0}, "particle.internal_temperature"),
    ],
)
def test_particle_rejects_invalid_fields(kwargs, field):
    with pytest.raises(ScenarioValidationError) as info:
        Particle(**kwargs)
    assert info.value.field == field
    assert field in str(info.value)


def test_environment_and_trap_validation():
    with pytest.raises(ScenarioValidationError, match="environment.temperature"):
        Environment(temperature=0.0)
    with pytest.raises(ScenarioValidationError, match="environment.pressure"):
        Environment(temperature=10.0, pressure=-1e-13)
    with pytest.raises(ScenarioValidationError, match="trap.omega"):
        Trap(omega=0.0)


def test_protocol_requires_t2_after_t1():
    x2 = X2Params(position=5e-8, sigma_m=1e-12)
    with pytest.raises(ScenarioValidationError, match="protocol.t2"):
        Protocol(t1=10.0, t2=5.0, delta_x=1e-7, x2=x2)


def test_protocol_checks_slit_position_against_separation():
    with pytest.raises(ScenarioValidationError, match="protocol.x2.position"):
        Protocol(t1=1.0, t2=100.0, delta_x=1e-7, x2=X2Params(position=1e-7, sigma_m=1e-12))
    protocol = Protocol(t1=1.0, t2=100.0, delta_x=1e-7, method="x2", x2=X2Params(position=5e-8, sigma_m=1e-12))
    assert protocol.method is PreparationMethod.X2_MEASUREMENT


def test_protocol_needs_scatter_parameters():
    with pytest.raises(ScenarioValidationError, match="protocol.scatter"):
        Protocol(t1=1.0, t2=100.0, delta_x=1e-7, method="scatter-slit")


def test_protocol_rejects_unknown_separation_model():
    x2 = X2Params(position=5e-8, sigma_m=1e-12)
    with pytest.raises(ScenarioValidationError, match="separation_model"):
        Protocol(t1=1.0, t2=100.0, delta_x=1e-7, x2=x2, separation_model="curved")


def test_thermal_wavelength():
    assert thermal_wavelength(10.0) == pytest.approx(CONSTANTS.hbar * CONSTANTS.c / (CONSTANTS.k_B * 10.0))
    assert thermal_wavelength(10.0) / thermal_wavelength(20.0) == pytest.approx(2.0)
    with pytest.raises(ScenarioValidationError):
        thermal_wavelength(0.0)
