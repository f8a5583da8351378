# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Collapse-model coherence-decay rates as functions of branch separation:
continuous spontaneous localization (CSL), Diosi-Penrose (DP) and
Karolyhazy (K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import CONSTANTS, Particle
from .decoherence import ChannelName, DecayResult, LocalizationChannel, SeparationPath, path_exponent
from .exceptions import ConvergenceError, ScenarioValidationError
from .utils import logger, one_minus_sinc

HBAR = CONSTANTS.hbar
G = CONSTANTS.G
M0 = CONSTANTS.amu
# e^(-u^2) is below 1e-43 beyond this dimensionless wavenumber
U_MAX = 10.0


@dataclass(frozen=True)
class CollapseParams:
    """
    csl_lambda: CSL collapse rate, 1/s; csl_rc: CSL correlation length, m.
    dp_cutoff: DP smearing length, m; None uses the sphere radius.
    """

    csl_lambda: float = 1e-16
    csl_rc: float = 1e-7
    csl_enabled: bool = True
    dp_enabled: bool = True
    dp_cutoff: float | None = None
    k_enabled: bool = True

    def __post_init__(self):
        if not (isinstance(self.csl_lambda, (int, float)) and self.csl_lambda >= 0.0):
            raise ScenarioValidationError(f"must be non-negative, got {self.csl_lambda!r}", "collapse.csl_lambda")
        if not (isinstance(self.csl_rc, (int, float)) and self.csl_rc > 0.0):
            raise ScenarioValidationError(f"must be positive, got {self.csl_rc!r}", "collapse.csl_rc")
        if self.dp_cutoff is not None and not self.dp_cutoff > 0.0:
            raise ScenarioValidationError(f"must be positive when given, got {self.dp_cutoff!r}", "collapse.dp_cutoff")


def _check_separation(dx: float) -> None:
    if not (isinstance(dx, (int, float)) and dx >= 0.0):
        raise ScenarioValidationError(f"separation must be non-negative, got {dx!r}", "dx")


def _quad(func, lo, hi, what, reference=0.0, **kwargs):
    value, error = integrate.quad(func, lo, hi, limit=400, epsabs=0.0, epsrel=1e-10, full_output=1, **kwargs)[:2]
    if not math.isfinite(value) or abs(error) > 1e-6 * max(abs(value), reference, 1e-300):
        raise ConvergenceError(f"{what}: quadrature did not converge (estimate {value:.6g}, error {error:.3g})")
    return value


# -----------------------------
# CSL
# -----------------------------

def sphere_form_factor(x):
    """
    Normalized Fourier transform of a uniform ball, 3 (sin x - x cos x) / x^3.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-2
    xs = x[small]
    out[small] = 1.0 - xs**2 / 10.0 + xs**4 / 280.0
    xl = x[~small]
    out[~small] = 3.0 * (np.sin(xl) - xl * np.cos(xl)) / xl**3
    return out if out.ndim else float(out)


def _csl_weight(particle: Particle, rc: float):
    ratio = particle.radius / rc
    return lambda u: u**2 * sphere_form_factor(u * ratio) ** 2 * math.exp(-(u**2))


def csl_plateau(particle: Particle, params: CollapseParams) -> float:
    """Large-separation CSL rate lambda (m/m0)^2 (4/sqrt(pi)) * integral u^2 f^2 e^(-u^2)"""
    if params.csl_lambda == 0.0:
        return 0.0
    amplification = params.csl_lambda * (particle.mass / M0) ** 2 * 4.0 / math.sqrt(math.pi)
    return amplification * _quad(_csl_weight(particle, params.csl_rc), 0.0, U_MAX, "csl plateau")


def csl_rate(particle: Particle, dx: float, params: CollapseParams) -> float:
    """
    CSL decay rate for a separation dx:
    lambda / m0^2 (4 pi rc^2)^(3/2) / (2 pi)^3 * integral d^3k |rho(k)|^2 e^(-k^2 rc^2) (1 - cos(k . dx)),
    reduced to a radial integral in u = k rc:
    lambda (m/m0)^2 (4/sqrt(pi)) * integral u^2 f(u R/rc)^2 e^(-u^2) (1 - sinc(u dx/rc)) du.

    Args:
        particle: Particle (mass and radius)
        dx: branch separation, m
        params: CollapseParams

    Returns:
        float: rate, 1/s
    """
    _check_separation(dx)
    if params.csl_lambda == 0.0 or dx == 0.0:
        return 0.0
    a = dx / params.csl_rc
    weight = _csl_weight(particle, params.csl_rc)
    amplification = params.csl_lambda * (particle.mass / M0) ** 2 * 4.0 / math.sqrt(math.pi)
    if a <= 2.0:
        value = _quad(lambda u: weight(u) * one_minus_sinc(u * a), 0.0, U_MAX, "csl rate")
    else:
        # oscillatory part through the sine-weighted rule
        plain = _quad(weight, 0.0, U_MAX, "csl rate")
        sinc_part = _quad(lambda u: weight(u) / (u * a) if u > 0.0 else 0.0, 0.0, U_MAX, "csl rate", reference=plain, weight="sin", wvar=a)
        value = plain - sinc_part
    return amplification * max(value, 0.0)


def csl_localization(particle: Particle, params: CollapseParams) -> float:
    """Small-separation coefficient: rate ~ Lambda dx^2 for dx << rc"""
    if params.csl_lambda == 0.0:
        return 0.0
    amplification = params.csl_lambda * (particle.mass / M0) ** 2 * 4.0 / math.sqrt(math.pi)
    weight = _csl_weight(particle, params.csl_rc)
    return amplification * _quad(lambda u: weight(u) * u**2 / 6.0, 0.0, U_MAX, "csl onset") / params.csl_rc**2


# -----------------------------
# Diosi-Penrose
# -----------------------------

def _sphere_potential(r, mass: float, radius: float):
    """Gravitational potential of a uniform ball at distance r from its centre"""
    if r < radius:
        return -G * mass * (3.0 * radius**2 - r**2) / (2.0 * radius**3)
    return -G * mass / r


def mutual_energy(mass: float, radius: float, d: float) -> float:
    """
    Magnitude of the gravitational interaction energy of two uniform balls
    whose centres are d apart. Closed form G m^2 / d once they no longer
    overlap; otherwise the shell integral.
    """
    if d >= 2.0 * radius:
        return G * mass**2 / d
    if d == 0.0:
        return 6.0 * G * mass**2 / (5.0 * radius)
    return overlap_energy(mass, radius, d)


def overlap_energy(mass: float, radius: float, d: float) -> float:
    """
    Interaction energy magnitude by integrating the first ball's potential
    over spherical shells, each weighted by the solid angle the second ball
    covers. Valid for any d > 0.
    """
    density = mass / (4.0 / 3.0 * math.pi * radius**3)

    def shell(r):
        cos_cap = np.clip((r * r + d * d - radius * radius) / (2.0 * r * d), -1.0, 1.0) if r > 0.0 else -1.0
        return _sphere_potential(r, mass, radius) * 2.0 * math.pi * r * r * (1.0 - cos_cap)

    lo, hi = max(0.0, d - radius), d + radius
    points = [p for p in (radius, radius - d) if lo < p < hi]
    return -density * _quad(shell, lo, hi, "dp overlap", points=points or None)


def dp_energy(particle: Particle, dx: float, params: CollapseParams) -> float:
    """Self-energy difference Delta U(dx) = E(0) - E(dx), J"""
    _check_separation(dx)
    radius = params.dp_cutoff if params.dp_cutoff is not None else particle.radius
    mass = particle.mass
    if dx == 0.0:
        return 0.0
    return mutual_energy(mass, radius, 0.0) - mutual_energy(mass, radius, dx)


def dp_rate(particle: Particle, dx: float, params: CollapseParams) -> float:
    """Gamma_DP = Delta U / hbar"""
    return max(dp_energy(particle, dx, params), 0.0) / HBAR


def dp_plateau(particle: Particle, params: CollapseParams) -> float:
    radius = params.dp_cutoff if params.dp_cutoff is not None else particle.radius
    return 6.0 * G * particle.mass**2 / (5.0 * radius * HBAR)


# -----------------------------
# Karolyhazy
# -----------------------------

def coherence_cell(particle: Particle) -> float:
    """a_c = (hbar^2 / G)^(1/3) R^(2/3) / m, with unit prefactor"""
    return (HBAR**2 / G) ** (1.0 / 3.0) * particle.radius ** (2.0 / 3.0) / particle.mass


def k_rate(particle: Particle, dx: float):
    """
    Returns:
        tuple: (a_c in m, rate in 1/s) with rate = hbar/(m a_c^2) min(1, (dx/a_c)^2)
    """
    _check_separation(dx)
    a_c = coherence_cell(particle)
    plateau = HBAR / (particle.mass * a_c**2)
    return a_c, plateau * min(1.0, (dx / a_c) ** 2)


# -----------------------------
# Combined Prediction
# -----------------------------

def enabled_rates(particle: Particle, params: CollapseParams) -> dict:
    """Rate function per enabled model"""
    rates = {}
    if params.csl_enabled:
        rates[ChannelName.CSL] = lambda dx: csl_rate(particle, dx, params)
    if params.dp_enabled:
        rates[ChannelName.DP] = lambda dx: dp_rate(particle, dx, params)
    if params.k_enabled:
        rates[ChannelName.K] = lambda dx: k_rate(particle, dx)[1]
    return rates


def collapse_channels(particle: Particle, separation: float, params: CollapseParams) -> list:
    """
    Enabled collapse models in LocalizationChannel form. Lambda is the
    effective coefficient rate(separation)/separation^2 and gamma_sat the
    large-separation plateau, so Lambda s^2 reproduces the exact rate at s.
    """
    _check_separation(separation)
    channels = []
    if params.csl_enabled:
        if separation > 0.0:
            Lambda = csl_rate(particle, separation, params) / separation**2
        else:
            Lambda = csl_localization(particle, params)
        channels.append(LocalizationChannel(ChannelName.CSL, Lambda, csl_plateau(particle, params)))
    if params.dp_enabled:
        radius = params.dp_cutoff if params.dp_cutoff is not None else particle.radius
        if separation > 0.0:
            Lambda = dp_rate(particle, separation, params) / separation**2
        else:
            Lambda = G * particle.mass**2 / (2.0 * radius**3 * HBAR)
        channels.append(LocalizationChannel(ChannelName.DP, Lambda, dp_plateau(particle, params)))
    if params.k_enabled:
        a_c, _ = k_rate(particle, 0.0)
        plateau = HBAR / (particle.mass * a_c**2)
        channels.append(LocalizationChannel(ChannelName.K, plateau / a_c**2, plateau))
    return channels


def collapse_visibility(params: CollapseParams, particle: Particle, path: SeparationPath, duration: float | None = None) -> DecayResult:
    """
    exp(-integral of the summed enabled-model rates along the separation path).

    Returns:
        DecayResult: factor, exponent and per-model exponents
    """
    duration = path.duration if duration is None else duration
    if not duration >= 0.0:
        raise ScenarioValidationError(f"must be non-negative, got {duration!r}", "duration")
    per_channel = {
        name.value: path_exponent(path, rate, duration) for name, rate in enabled_rates(particle, params).items()
    }
    exponent = sum(per_channel.values())
    logger("collapse").debug(f"collapse_visibility: exponent {exponent:.6g} over {duration:g} s")
    return DecayResult(math.exp(-exponent), exponent, per_channel, [])
