import math
from types import SimpleNamespace

import numpy as np
import pytest
from scipy import integrate, special

from decide_interference.core import CONSTANTS, Environment, Particle, Trap
from decide_interference.decoherence import (
    ChannelName,
    DecoherenceSettings,
    LocalizationChannel,
    PathSegment,
    SeparationPath,
    bb_absorb,
    bb_emit,
    bb_scatter,
    bose_integral,
    decoherence_budget,
    emitted_power,
    gas_collision_rate,
    gas_collisions,
    internal_temperature_equilibrium,
    standard_channels,
    trap_absorption_cross_section,
    visibility_decay,
)
from decide_interference.exceptions import ScenarioValidationError


@pytest.fixture
def trap():
    return Trap(omega=6.3e4, wavelength=1.064e-6, intensity=1e9)


# -----------------------------
# Blackbody
# -----------------------------

def test_bose_integrals_match_zeta():
    assert bose_integral(3) == pytest.approx(math.pi**4 / 15.0, rel=1e-8)
    assert bose_integral(6) == pytest.approx(720.0 * special.zeta(7), rel=1e-8)


@pytest.mark.parametrize("temperature", [4.0, 16.0, 64.0])
def test_blackbody_temperature_scaling(silica_particle, temperature):
    scatter = bb_scatter(silica_particle, 2.0 * temperature).Lambda / bb_scatter(silica_particle, temperature).Lambda
    absorb = bb_absorb(silica_particle, 2.0 * temperature).Lambda / bb_absorb(silica_particle, temperature).Lambda
    emit = bb_emit(silica_particle, 2.0 * temperature).Lambda / bb_emit(silica_particle, temperature).Lambda
    assert scatter == pytest.approx(512.0, rel=1e-12)
    assert absorb == pytest.approx(64.0, rel=1e-12)
    assert emit == pytest.approx(64.0, rel=1e-12)


def scatter_localization_by_quadrature(particle, temperature):
    """
    Spectral sum over thermal photons: number density k^2 / pi^2 per mode
    occupation, Rayleigh cross-section (8 pi / 3) k^4 R^6 Re[alpha]^2 and a
    mean squared momentum kick k^2 / 3 along one axis.
    """
    eps = particle.eps_bb
    alpha_re = ((eps - 1.0) / (eps + 2.0)).real
    k_th = CONSTANTS.k_B * temperature / (CONSTANTS.hbar * CONSTANTS.c)

    def spectral(k):
        photons = k**2 / math.pi**2 / math.expm1(k / k_th)
        cross_section = 8.0 * math.pi / 3.0 * k**4 * particle.radius**6 * alpha_re**2
        return CONSTANTS.c * photons * cross_section * k**2 / 3.0

    value, _ = integrate.quad(spectral, 0.0, 80.0 * k_th, points=[8.0 * k_th], limit=200, epsrel=1e-10)
    return value


@pytest.mark.parametrize("temperature", [4.0, 16.0, 64.0])
def test_scatter_localization_matches_spectral_sum(silica_particle, temperature):
    expected = scatter_localization_by_quadrature(silica_particle, temperature)
    assert bb_scatter(silica_particle, temperature).Lambda == pytest.approx(expected, rel=0.05)


def test_blackbody_radius_scaling():
    small = Particle(radius=5e-8)
    large = Particle(radius=1e-7)
    assert bb_scatter(large, 10.0).Lambda / bb_scatter(small, 10.0).Lambda == pytest.approx(64.0, rel=1e-12)
    assert bb_absorb(large, 10.0).Lambda / bb_absorb(small, 10.0).Lambda == pytest.approx(8.0, rel=1e-12)


def test_blackbody_at_zero_temperature_is_silent(silica_particle):
    for channel in (bb_scatter(silica_particle, 0.0), bb_absorb(silica_particle, 0.0), bb_emit(silica_particle, 0.0)):
        assert channel.Lambda == 0.0
        assert channel.rate(1e-6) == 0.0


def test_emission_defaults_to_particle_temperature(silica_particle):
    assert bb_emit(silica_particle).Lambda == bb_emit(silica_particle, 10.0).Lambda


def test_blackbody_rejects_negative_temperature(silica_particle):
    with pytest.raises(ScenarioValidationError, match="environment.temperature"):
        bb_scatter(silica_particle, -1.0)


# -----------------------------
# Gas
# -----------------------------

def test_gas_collision_rate_reference_value():
    particle = Particle(radius=1.2e-7)
    env = Environment(temperature=16.0, pressure=1e-13, gas_mass=2.0 * CONSTANTS.amu)
    rate = gas_collision_rate(particle, env)
    assert rate == pytest.approx(8.4e-3, rel=2e-2)

    k_b = CONSTANTS.k_B
    density = 1e-13 / (k_b * 16.0)
    speed = math.sqrt(8.0 * k_b * 16.0 / (math.pi * 2.0 * CONSTANTS.amu))
    assert rate == pytest.approx(density * speed * math.pi * 1.2e-7**2, rel=1e-12)


def test_gas_collisions_linear_in_pressure_and_time(silica_particle):
    low = Environment(temperature=10.0, pressure=1e-13)
    high = Environment(temperature=10.0, pressure=3e-13)
    rate_low, events_low = gas_collisions(silica_particle, low, 100.0)
    rate_high, events_high = gas_collisions(silica_particle, high, 200.0)
    assert rate_high == pytest.approx(3.0 * rate_low, rel=1e-12)
    assert events_high == pytest.approx(6.0 * events_low, rel=1e-12)
    assert gas_collisions(silica_particle, Environment(temperature=10.0), 100.0) == (0.0, 0.0)


def test_gas_channel_counts_events_at_any_separation(silica_particle):
    env = Environment(temperature=10.0, pressure=1e-13)
    scenario = SimpleNamespace(particle=silica_particle, environment=env, decoherence=DecoherenceSettings())
    (gas,) = standard_channels(scenario, [ChannelName.GAS])
    assert gas.event_counting
    assert gas.rate(0.0) == gas.rate(1e-6) == gas_collision_rate(silica_particle, env)


# -----------------------------
# Visibility decay
# -----------------------------

def test_decay_of_constant_path():
    channel = LocalizationChannel(ChannelName.BB_SCATTER, 1e10)
    result = visibility_decay(SeparationPath.constant(1e-7, 100.0), [channel])
    assert result.exponent == pytest.approx(0.01, rel=1e-12)
    assert result.factor == pytest.approx(math.exp(-0.01), rel=1e-12)
    assert result.per_channel == {"bb-scatter": pytest.approx(0.01)}


def test_decay_of_linear_ramp():
    channel = LocalizationChannel(ChannelName.BB_ABSORB, 1e10)
    path = SeparationPath((PathSegment(0.0, 10.0, 0.0, 1e-7),))
    result = visibility_decay(path, [channel])
    assert result.exponent == pytest.approx(1e10 * 1e-16 * 1000.0 / 3.0, rel=1e-8)


def test_saturation_caps_rate():
    channel = LocalizationChannel(ChannelName.BB_SCATTER, 1e20, gamma_sat=1.0)
    assert channel.rate(1e-7) == 1.0
    assert channel.rate(1e-12) == pytest.approx(1e-4)
    result = visibility_decay(SeparationPath.constant(1e-7, 5.0), [channel])
    assert result.exponent == pytest.approx(5.0)


def test_decay_counts_only_the_requested_duration():
    channel = LocalizationChannel(ChannelName.BB_SCATTER, 1e10)
    path = SeparationPath.protocol(1.0, 100.0, 1e-7)
    assert visibility_decay(path, [channel]).exponent == pytest.approx(0.01)
    assert visibility_decay(path, [channel], duration=1.0).exponent == 0.0
    with pytest.raises(ScenarioValidationError, match="separation_path"):
        visibility_decay(path, [channel], duration=200.0)


def test_path_must_be_contiguous():
    with pytest.raises(ScenarioValidationError, match="undefined separation"):
        SeparationPath((PathSegment(0.0, 1.0, 0.0, 0.0), PathSegment(2.0, 3.0, 1e-7, 1e-7)))


def test_long_wavelength_validity_warning(silica_particle):
    channel = bb_scatter(silica_particle, 10.0)
    # thermal wavelength at 10 K is about 0.23 mm
    assert visibility_decay(SeparationPath.constant(1e-7, 1.0), [channel]).warnings == []
    result = visibility_decay(SeparationPath.constant(1e-4, 1.0), [channel])
    assert any("long-wavelength" in w for w in result.warnings)


def test_channel_validation():
    with pytest.raises(ScenarioValidationError, match="Lambda"):
        LocalizationChannel(ChannelName.GAS, -1.0)


# -----------------------------
# Internal temperature
# -----------------------------

def test_equilibrium_balances_power(silica_particle, trap):
    env = Environment(temperature=10.0)
    t_i = internal_temperature_equilibrium(silica_particle, trap, 1e-2, env)
    absorbed = trap.intensity * trap_absorption_cross_section(silica_particle, trap, 1e-2)
    balance = emitted_power(silica_particle, t_i) - emitted_power(silica_particle, 10.0)
    assert t_i > 10.0
    assert balance == pytest.approx(absorbed, rel=1e-6)


def test_equilibrium_rises_with_absorption(silica_particle, trap):
    env = Environment(temperature=10.0)
    weak = internal_temperature_equilibrium(silica_particle, trap, 1e-4, env)
    strong = internal_temperature_equilibrium(silica_particle, trap, 1e-2, env)
    assert 10.0 < weak < strong
    assert internal_temperature_equilibrium(silica_particle, trap, 0.0, env) == 10.0


def test_emitted_power_scales_as_fifth_power(silica_particle):
    assert emitted_power(silica_particle, 20.0) / emitted_power(silica_particle, 10.0) == pytest.approx(32.0, rel=1e-12)
    assert emitted_power(silica_particle, 0.0) == 0.0


# -----------------------------
# Budget
# -----------------------------

def test_budget_rows_and_totals(baseline_scenario):
    budget = decoherence_budget(baseline_scenario)
    names = [row[0] for row in budget.rows()]
    assert names == ["bb-scatter", "bb-absorb", "bb-emit", "gas", "dp", "k"]
    assert budget.separation == pytest.approx(1e-7)
    assert budget.internal_temperature == 10.0
    assert budget.totals["t1"] == pytest.approx(sum(e["t1"] for e in budget.exponents.values()))
    assert budget.totals["t2"] == pytest.approx(sum(e["t2"] for e in budget.exponents.values()))
    # localization channels vanish without separation, gas events do not
    assert budget.exponents["bb-scatter"]["t1"] == 0.0
    assert budget.exponents["gas"]["t1"] == pytest.approx(budget.gas["rate"] * 1.0)
    assert budget.gas["expected_events"] == pytest.approx(budget.gas["rate"] * 101.0)
    assert budget.gas["survival"] == pytest.approx(math.exp(-budget.gas["expected_events"]))


def test_budget_with_explicit_separation(baseline_scenario):
    wide = decoherence_budget(baseline_scenario, separation=2e-7)
    narrow = decoherence_budget(baseline_scenario, separation=1e-7)
    ratio = wide.exponents["bb-scatter"]["t2"] / narrow.exponents["bb-scatter"]["t2"]
    assert ratio == pytest.approx(4.0, rel=1e-12)


def test_settings_reject_collapse_channels():
    with pytest.raises(ScenarioValidationError, match="decoherence.channels"):
        DecoherenceSettings(channels=("csl",))
    with pytest.raises(ScenarioValidationError, match="decoherence.channels"):
        DecoherenceSettings(channels=("sunlight",))


def test_ppb_absorption_runs_colder_than_ppm(silica_particle):
    env = Environment(temperature=10.0)
    trap = Trap(omega=6.3e4)
    ppb = internal_temperature_equilibrium(silica_particle, trap, 1e-7, env)
    ppm = internal_temperature_equilibrium(silica_particle, trap, 1e-4, env)
    assert ppb < ppm


def test_sub_ppm_absorption_stays_below_twenty_kelvin(silica_particle):
    env = Environment(temperature=10.0)
    trap = Trap(omega=6.3e4)
    ppb = internal_temperature_equilibrium(silica_particle, trap, 2.5e-8, env)
    ppm = internal_temperature_equilibrium(silica_particle, trap, 2.5e-5, env)
    assert ppb < 20.0 < ppm
    assert ppb == pytest.approx(12.2, rel=2e-2)
    assert ppm == pytest.approx(44.3, rel=2e-2)


def test_equilibrium_balances_power_over_random_inputs():
    rng = np.random.default_rng(20260416)
    for _ in range(20):
        particle = Particle(radius=rng.uniform(3e-8, 1.2e-7))
        trap = Trap(omega=6.3e4, intensity=10.0 ** rng.uniform(8.0, 10.0))
        env = Environment(temperature=rng.uniform(2.0, 40.0))
        absorption = 10.0 ** rng.uniform(-9.0, -3.0)
        t_i = internal_temperature_equilibrium(particle, trap, absorption, env)
        absorbed = trap.intensity * trap_absorption_cross_section(particle, trap, absorption)
        assert t_i >= env.temperature
        balance = emitted_power(particle, t_i) - emitted_power(particle, env.temperature)
        assert balance == pytest.approx(absorbed, rel=1e-6)
