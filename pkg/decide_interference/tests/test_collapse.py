import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate

from decide_interference.collapse import (
    CollapseParams,
    coherence_cell,
    collapse_channels,
    collapse_visibility,
    csl_localization,
    csl_plateau,
    csl_rate,
    dp_energy,
    dp_plateau,
    dp_rate,
    enabled_rates,
    k_rate,
    mutual_energy,
    overlap_energy,
    sphere_form_factor,
)
from decide_interference.core import CONSTANTS
from decide_interference.decoherence import SeparationPath
from decide_interference.exceptions import ScenarioValidationError

G = CONSTANTS.G
HBAR = CONSTANTS.hbar


@pytest.fixture
def params():
    return CollapseParams()


def test_form_factor_branches_agree():
    assert sphere_form_factor(0.0) == 1.0
    below = sphere_form_factor(1e-2 * (1.0 - 1e-9))
    above = sphere_form_factor(1e-2 * (1.0 + 1e-9))
    assert below == pytest.approx(above, rel=1e-9)


def test_rates_vanish_without_separation(silica_particle, params):
    assert csl_rate(silica_particle, 0.0, params) == 0.0
    assert dp_rate(silica_particle, 0.0, params) == 0.0
    assert k_rate(silica_particle, 0.0)[1] == 0.0


def test_negative_separation_rejected(silica_particle, params):
    with pytest.raises(ScenarioValidationError, match="dx"):
        csl_rate(silica_particle, -1e-9, params)


# -----------------------------
# CSL
# -----------------------------

def test_csl_quadratic_onset(silica_particle, params):
    dx = 1e-10
    assert csl_rate(silica_particle, dx, params) == pytest.approx(csl_localization(silica_particle, params) * dx**2, rel=1e-4)
    ratio = csl_rate(silica_particle, 2e-10, params) / csl_rate(silica_particle, 1e-10, params)
    assert ratio == pytest.approx(4.0, rel=1e-4)


def test_csl_plateau(silica_particle, params):
    assert csl_rate(silica_particle, 1e-5, params) == pytest.approx(csl_plateau(silica_particle, params), rel=1e-2)


def test_csl_monotone_in_separation(silica_particle, params):
    rates = [csl_rate(silica_particle, dx, params) for dx in (1e-8, 1e-7, 1e-6)]
    assert rates[0] < rates[1] < rates[2]


def csl_rate_by_quadrature(particle, dx, params, n=400_001):
    """Three-dimensional CSL rate reduced by isotropy and summed on a dense k grid"""
    rc = params.csl_rc
    k = np.linspace(0.0, 12.0 / rc, n)[1:]
    kr = k * particle.radius
    mass_ft = particle.mass * 3.0 * (np.sin(kr) - kr * np.cos(kr)) / kr**3
    angular_average = 1.0 - np.sin(k * dx) / (k * dx)
    integrand = 4.0 * math.pi * k**2 * mass_ft**2 * np.exp(-((k * rc) ** 2)) * angular_average
    prefactor = params.csl_lambda / CONSTANTS.amu**2 * (4.0 * math.pi * rc**2) ** 1.5 / (2.0 * math.pi) ** 3
    return prefactor * integrate.simpson(integrand, x=k)


@pytest.mark.parametrize("dx", [1e-8, 1e-7, 3e-7, 1e-6])
def test_csl_matches_dense_quadrature(silica_particle, params, dx):
    assert csl_rate(silica_particle, dx, params) == pytest.approx(csl_rate_by_quadrature(silica_particle, dx, params), rel=1e-6)


@pytest.mark.parametrize("dx", [1e-9, 1e-7, 1e-6])
def test_csl_scales_with_mass_squared(silica_particle, params, dx):
    dense = replace(silica_particle, density=2.0 * silica_particle.density)
    assert dense.mass == pytest.approx(2.0 * silica_particle.mass, rel=1e-12)
    assert csl_rate(dense, dx, params) == pytest.approx(4.0 * csl_rate(silica_particle, dx, params), rel=1e-9)


def test_csl_linear_in_lambda(silica_particle):
    weak = csl_rate(silica_particle, 1e-7, CollapseParams(csl_lambda=1e-16))
    strong = csl_rate(silica_particle, 1e-7, CollapseParams(csl_lambda=1e-12))
    assert strong / weak == pytest.approx(1e4, rel=1e-9)
    assert csl_rate(silica_particle, 1e-7, CollapseParams(csl_lambda=0.0)) == 0.0


# -----------------------------
# Diosi-Penrose
# -----------------------------

@pytest.mark.parametrize("x", [0.25, 0.5, 1.0, 1.5, 1.9])
def test_dp_overlap_matches_polynomial(silica_particle, params, x):
    mass, radius = silica_particle.mass, silica_particle.radius
    expected = G * mass**2 / radius * (x**2 / 2.0 - 3.0 * x**3 / 16.0 + x**5 / 160.0)
    assert dp_energy(silica_particle, x * radius, params) == pytest.approx(expected, rel=1e-6)


def test_dp_continuous_at_contact(silica_particle):
    mass, radius = silica_particle.mass, silica_particle.radius
    assert overlap_energy(mass, radius, 2.0 * radius) == pytest.approx(G * mass**2 / (2.0 * radius), rel=1e-6)
    assert overlap_energy(mass, radius, 3.0 * radius) == pytest.approx(mutual_energy(mass, radius, 3.0 * radius), rel=1e-6)


def test_dp_approaches_self_energy_plateau(silica_particle, params):
    far = dp_rate(silica_particle, 1e-3, params)
    assert far < dp_plateau(silica_particle, params)
    assert far == pytest.approx(dp_plateau(silica_particle, params), rel=1e-3)


def test_dp_cutoff_replaces_radius(silica_particle):
    smeared = CollapseParams(dp_cutoff=2e-7)
    assert dp_plateau(silica_particle, smeared) == pytest.approx(dp_plateau(silica_particle, CollapseParams()) / 2.0)


# -----------------------------
# Karolyhazy
# -----------------------------

def test_k_coherence_cell_and_saturation(silica_particle):
    a_c = coherence_cell(silica_particle)
    expected = (HBAR**2 / G) ** (1.0 / 3.0) * silica_particle.radius ** (2.0 / 3.0) / silica_particle.mass
    assert a_c == pytest.approx(expected, rel=1e-12)
    plateau = HBAR / (silica_particle.mass * a_c**2)
    assert k_rate(silica_particle, 2.0 * a_c)[1] == pytest.approx(plateau)
    assert k_rate(silica_particle, 0.5 * a_c)[1] == pytest.approx(0.25 * plateau)


# -----------------------------
# Combined prediction
# -----------------------------

def test_channels_reproduce_exact_rates(silica_particle, params):
    separation = 1e-7
    rates = enabled_rates(silica_particle, params)
    for channel in collapse_channels(silica_particle, separation, params):
        assert channel.rate(separation) == pytest.approx(rates[channel.name](separation), rel=1e-9)


def test_disabled_models_leave_visibility_untouched(silica_particle):
    params = CollapseParams(csl_enabled=False, dp_enabled=False, k_enabled=False)
    result = collapse_visibility(params, silica_particle, SeparationPath.constant(1e-7, 100.0))
    assert result.factor == 1.0
    assert result.per_channel == {}
    assert collapse_channels(silica_particle, 1e-7, params) == []


def test_collapse_visibility_integrates_rates(silica_particle):
    params = CollapseParams(csl_enabled=False, dp_enabled=False, k_enabled=True)
    path = SeparationPath.protocol(1.0, 100.0, 1e-9)
    result = collapse_visibility(params, silica_particle, path)
    expected = k_rate(silica_particle, 1e-9)[1] * 100.0
    assert result.per_channel["k"] == pytest.approx(expected, rel=1e-12)
    assert result.factor == pytest.approx(math.exp(-expected), rel=1e-12)


def test_params_validation():
    with pytest.raises(ScenarioValidationError, match="collapse.csl_rc"):
        CollapseParams(csl_rc=0.0)
    with pytest.raises(ScenarioValidationError, match="collapse.dp_cutoff"):
        CollapseParams(dp_cutoff=-1.0)
