# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Standard decoherence: blackbody scattering, absorption and emission in the
long-wavelength limit, gas collisions as run-killing events, the internal
temperature power balance and the visibility-decay integrator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .core import CONSTANTS, Environment, Particle, Trap, thermal_wavelength
from .exceptions import ConvergenceError, ScenarioValidationError
from .utils import logger

HBAR = CONSTANTS.hbar
C = CONSTANTS.c
K_B = CONSTANTS.k_B


class ChannelName(str, enum.Enum):
    BB_SCATTER = "bb-scatter"
    BB_ABSORB = "bb-absorb"
    BB_EMIT = "bb-emit"
    GAS = "gas"
    CSL = "csl"
    DP = "dp"
    K = "k"


STANDARD_CHANNELS = (ChannelName.BB_SCATTER, ChannelName.BB_ABSORB, ChannelName.BB_EMIT, ChannelName.GAS)
BLACKBODY_CHANNELS = (ChannelName.BB_SCATTER, ChannelName.BB_ABSORB, ChannelName.BB_EMIT)


@dataclass(frozen=True)
class LocalizationChannel:
    """
    Lambda: localization parameter, 1/(m^2 s); gamma_sat: saturation event
    rate, 1/s. Event-counting channels contribute gamma_sat whatever the
    separation (any event localizes). temperature is the radiation
    temperature of blackbody channels, used for the validity check.
    """

    name: ChannelName
    Lambda: float
    gamma_sat: float = math.inf
    event_counting: bool = False
    temperature: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "name", ChannelName(self.name))
        if not self.Lambda >= 0.0:
            raise ScenarioValidationError(f"must be non-negative, got {self.Lambda!r}", f"channel.{self.name.value}.Lambda")
        if not self.gamma_sat >= 0.0:
            raise ScenarioValidationError(
                f"must be non-negative, got {self.gamma_sat!r}", f"channel.{self.name.value}.gamma_sat"
            )

    def rate(self, separation: float) -> float:
        """Coherence-decay rate at a given branch separation"""
        if self.event_counting:
            return self.gamma_sat
        return min(self.Lambda * separation**2, self.gamma_sat)


@dataclass(frozen=True)
class DecoherenceSettings:
    """
    channels: standard channels switched on.
    bulk_absorption: intensity absorption coefficient of the particle
    material at the trap wavelength, 1/m. When set, the internal
    temperature is solved from the power balance instead of taken as given.
    """

    channels: tuple = STANDARD_CHANNELS
    bulk_absorption: float | None = None

    def __post_init__(self):
        try:
            channels = tuple(ChannelName(c) for c in self.channels)
        except ValueError as exc:
            raise ScenarioValidationError(str(exc), "decoherence.channels")
        bad = [c.value for c in channels if c not in STANDARD_CHANNELS]
        if bad:
            raise ScenarioValidationError(f"not a standard channel: {', '.join(bad)}", "decoherence.channels")
        object.__setattr__(self, "channels", channels)
        if self.bulk_absorption is not None and not self.bulk_absorption >= 0.0:
            raise ScenarioValidationError("must be non-negative", "decoherence.bulk_absorption")


# -----------------------------
# Blackbody Channels
# -----------------------------

@lru_cache(maxsize=None)
def bose_integral(power: int) -> float:
    """
    Integral of y^power / (e^y - 1) over (0, inf), by adaptive quadrature.
    Equals Gamma(power + 1) zeta(power + 1).
    """
    value, _ = integrate.quad(lambda y: y**power / np.expm1(y) if y > 0.0 else 0.0, 0.0, np.inf, limit=200)
    return value


def clausius_mossotti(eps: complex) -> complex:
    eps = complex(eps)
    return (eps - 1.0) / (eps + 2.0)


def thermal_wavenumber(temperature: float) -> float:
    """k_B T / (hbar c), 1/m"""
    return K_B * temperature / (HBAR * C)


def _check_temperature(temperature: float, field_name: str) -> None:
    if not (isinstance(temperature, (int, float)) and math.isfinite(temperature) and temperature >= 0.0):
        raise ScenarioValidationError(f"must be non-negative, got {temperature!r}", field_name)


def bb_scatter(particle: Particle, temperature: float) -> LocalizationChannel:
    """
    Blackbody scattering localization
    Lambda = 8! zeta(9) (8 c R^6 / 9 pi) (k_B T / hbar c)^9 Re[alpha]^2.

    gamma_sat is the total photon scattering rate
    c (8 / 3 pi) R^6 |alpha|^2 x^7 * integral y^6 / (e^y - 1).
    """
    _check_temperature(temperature, "environment.temperature")
    if temperature == 0.0:
        return LocalizationChannel(ChannelName.BB_SCATTER, 0.0, 0.0, temperature=0.0)
    alpha = clausius_mossotti(particle.eps_bb)
    x = thermal_wavenumber(temperature)
    R = particle.radius
    Lambda = math.factorial(8) * float(special.zeta(9)) * (8.0 * C * R**6 / (9.0 * math.pi)) * x**9 * alpha.real**2
    gamma = C * 8.0 / (3.0 * math.pi) * R**6 * abs(alpha) ** 2 * x**7 * bose_integral(6)
    return LocalizationChannel(ChannelName.BB_SCATTER, Lambda, gamma, temperature=temperature)


def _absorption_channel(name: ChannelName, particle: Particle, temperature: float) -> LocalizationChannel:
    if temperature == 0.0:
        return LocalizationChannel(name, 0.0, 0.0, temperature=0.0)
    im_alpha = clausius_mossotti(particle.eps_bb).imag
    x = thermal_wavenumber(temperature)
    R = particle.radius
    Lambda = 16.0 * math.pi**5 * C * R**3 / 189.0 * x**6 * im_alpha
    # event rate: c * 4 pi R^3 Im(alpha) / pi^2 * x^4 * integral y^3 / (e^y - 1)
    gamma = C * 4.0 * R**3 * im_alpha / math.pi * x**4 * bose_integral(3)
    return LocalizationChannel(name, max(Lambda, 0.0), max(gamma, 0.0), temperature=temperature)


def bb_absorb(particle: Particle, temperature: float) -> LocalizationChannel:
    """Lambda = (16 pi^5 c R^3 / 189) (k_B T / hbar c)^6 Im[alpha]"""
    _check_temperature(temperature, "environment.temperature")
    return _absorption_channel(ChannelName.BB_ABSORB, particle, temperature)


def bb_emit(particle: Particle, internal_temperature: float | None = None) -> LocalizationChannel:
    """
    Thermal emission at the internal temperature; same form as absorption.
    """
    temperature = particle.internal_temperature if internal_temperature is None else internal_temperature
    _check_temperature(temperature, "particle.internal_temperature")
    return _absorption_channel(ChannelName.BB_EMIT, particle, temperature)


# -----------------------------
# Gas Collisions
# -----------------------------

def gas_collision_rate(particle: Particle, env: Environment) -> float:
    """n * v_mean * pi R^2 with n = p / (k_B T), v_mean = sqrt(8 k_B T / (pi m_gas))"""
    if env.pressure == 0.0:
        return 0.0
    density = env.pressure / (K_B * env.temperature)
    mean_speed = math.sqrt(8.0 * K_B * env.temperature / (math.pi * env.gas_mass))
    return density * mean_speed * math.pi * particle.radius**2


def gas_collisions(particle: Particle, env: Environment, run_time: float):
    """
    Returns:
        tuple: (rate 1/s, expected number of collisions during run_time)
    """
    if not run_time >= 0.0:
        raise ScenarioValidationError(f"must be non-negative, got {run_time!r}", "run_time")
    rate = gas_collision_rate(particle, env)
    return rate, rate * run_time


def gas_channel(particle: Particle, env: Environment) -> LocalizationChannel:
    return LocalizationChannel(ChannelName.GAS, 0.0, gas_collision_rate(particle, env), event_counting=True)


# -----------------------------
# Internal Temperature
# -----------------------------

def trap_absorption_cross_section(particle: Particle, trap: Trap, bulk_absorption: float) -> float:
    """
    Dipole absorption cross-section at the trap wavelength, with the material
    loss taken from the bulk intensity absorption coefficient a:
    Im eps = n_r a lambda / (2 pi), n_r = Re sqrt(eps_trap).
    """
    n_r = complex(np.sqrt(particle.eps_trap)).real
    eps = complex(particle.eps_trap.real, n_r * bulk_absorption * trap.wavelength / (2.0 * math.pi))
    k = 2.0 * math.pi / trap.wavelength
    return 4.0 * math.pi * k * particle.radius**3 * clausius_mossotti(eps).imag


def emitted_power(particle: Particle, temperature: float) -> float:
    """
    Thermal power radiated by the sphere,
    integral of sigma_abs(w) hbar w^3 / (pi^2 c^2) / (e^(hbar w / k_B T) - 1) dw,
    with sigma_abs(w) = 4 pi (w / c) R^3 Im[alpha_bb].
    """
    if temperature <= 0.0:
        return 0.0
    im_alpha = clausius_mossotti(particle.eps_bb).imag
    scale = 4.0 * particle.radius**3 * im_alpha * HBAR / (math.pi * C**3)
    return scale * (K_B * temperature / HBAR) ** 5 * bose_integral(4)


def internal_temperature_equilibrium(particle: Particle, trap: Trap, bulk_absorption: float, env: Environment) -> float:
    """
    Solve P_abs = P_em(T_i) - P_em(T_env) for T_i by bracket expansion and
    bisection.

    Args:
        particle: Particle
        trap: Trap (wavelength and intracavity intensity)
        bulk_absorption: intensity absorption coefficient, 1/m
        env: Environment (its temperature is the radiation bath)

    Returns:
        float: equilibrium internal temperature, K
    """
    if not bulk_absorption >= 0.0:
        raise ScenarioValidationError("must be non-negative", "decoherence.bulk_absorption")
    p_abs = trap.intensity * trap_absorption_cross_section(particle, trap, bulk_absorption)
    t_env = env.temperature
    if p_abs <= 0.0:
        return t_env
    if clausius_mossotti(particle.eps_bb).imag <= 0.0:
        raise ConvergenceError("particle cannot radiate (Im eps_bb = 0); no equilibrium", bracket=(t_env, math.inf))

    background = emitted_power(particle, t_env)

    def balance(t):
        return emitted_power(particle, t) - background - p_abs

    lo, hi = t_env, 2.0 * t_env
    for _ in range(60):
        if balance(hi) > 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("internal temperature bracket expansion exhausted", bracket=(lo, hi))

    t_i = optimize.bisect(balance, lo, hi, xtol=1e-14 * hi, rtol=1e-15, maxiter=400)
    residual = abs(balance(t_i))
    if residual >= 1e-6 * p_abs:
        raise ConvergenceError(f"power balance residual {residual:.3g} W too large", bracket=(lo, hi))
    logger("decoherence").debug(f"internal_temperature_equilibrium: P_abs={p_abs:.3g} W -> T_i={t_i:.6g} K")
    return t_i


def resolve_internal_temperature(scenario) -> float:
    settings = scenario.decoherence
    if settings.bulk_absorption is None:
        return scenario.particle.internal_temperature
    return internal_temperature_equilibrium(
        scenario.particle, scenario.trap, settings.bulk_absorption, scenario.environment
    )


def standard_channels(scenario, channels=None, internal_temperature=None) -> list:
    """
    Enabled standard channels of a scenario, in canonical order.
    """
    enabled = scenario.decoherence.channels if channels is None else tuple(ChannelName(c) for c in channels)
    if internal_temperature is None and ChannelName.BB_EMIT in enabled:
        internal_temperature = resolve_internal_temperature(scenario)
    particle, env = scenario.particle, scenario.environment
    built = {
        ChannelName.BB_SCATTER: lambda: bb_scatter(particle, env.temperature),
        ChannelName.BB_ABSORB: lambda: bb_absorb(particle, env.temperature),
        ChannelName.BB_EMIT: lambda: bb_emit(particle, internal_temperature),
        ChannelName.GAS: lambda: gas_channel(particle, env),
    }
    return [built[name]() for name in STANDARD_CHANNELS if name in enabled]


# -----------------------------
# Separation Path & Visibility Decay
# -----------------------------

@dataclass(frozen=True)
class PathSegment:
    """Branch separation varying linearly from dx_start to dx_end over [t_start, t_end]"""

    t_start: float
    t_end: float
    dx_start: float
    dx_end: float

    def __post_init__(self):
        if not self.t_end >= self.t_start:
            raise ScenarioValidationError("segment must not end before it starts", "separation_path")
        if not (self.dx_start >= 0.0 and self.dx_end >= 0.0):
            raise ScenarioValidationError("separation must be non-negative", "separation_path")

    def at(self, t: float) -> float:
        if self.t_end == self.t_start:
            return self.dx_start
        fraction = (t - self.t_start) / (self.t_end - self.t_start)
        return self.dx_start + fraction * (self.dx_end - self.dx_start)


@dataclass(frozen=True)
class SeparationPath:
    segments: tuple

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ScenarioValidationError("path needs at least one segment", "separation_path")
        if segments[0].t_start != 0.0:
            raise ScenarioValidationError("path must start at t = 0", "separation_path")
        for before, after in zip(segments, segments[1:]):
            if not math.isclose(before.t_end, after.t_start, rel_tol=1e-12, abs_tol=1e-15):
                raise ScenarioValidationError(
                    f"undefined separation between t = {before.t_end:g} s and t = {after.t_start:g} s",
                    "separation_path",
                )
        object.__setattr__(self, "segments", segments)

    @property
    def duration(self) -> float:
        return self.segments[-1].t_end

    @property
    def max_separation(self) -> float:
        return max(max(s.dx_start, s.dx_end) for s in self.segments)

    @classmethod
    def constant(cls, separation: float, duration: float) -> SeparationPath:
        return cls((PathSegment(0.0, duration, separation, separation),))

    @classmethod
    def protocol(cls, t1: float, t2: float, separation: float) -> SeparationPath:
        """Single branch during t1, slit separation during t2"""
        return cls((PathSegment(0.0, t1, 0.0, 0.0), PathSegment(t1, t1 + t2, separation, separation)))


@dataclass
class DecayResult:
    factor: float
    exponent: float
    per_channel: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def path_exponent(path: SeparationPath, rate, duration: float) -> float:
    """
    Integral of rate(dx(t)) over [0, duration] by adaptive quadrature, one
    segment at a time.
    """
    total = 0.0
    for segment in path.segments:
        start, end = segment.t_start, min(segment.t_end, duration)
        if end <= start:
            continue
        if segment.dx_start == segment.dx_end:
            total += rate(segment.dx_start) * (end - start)
            continue
        value, _ = integrate.quad(lambda t: rate(segment.at(t)), start, end, limit=200)
        total += value
    return total


def visibility_decay(path: SeparationPath, channels, duration: float | None = None) -> DecayResult:
    """
    exp(-integral of sum over channels of min(Lambda dx(t)^2, gamma_sat) dt).

    Args:
        path: SeparationPath defined on [0, duration]
        channels: LocalizationChannel sequence
        duration: integration time, s; defaults to the path duration

    Returns:
        DecayResult: factor in [0, 1], total exponent, per-channel exponents
        and long-wavelength validity warnings
    """
    duration = path.duration if duration is None else duration
    if not duration >= 0.0:
        raise ScenarioValidationError(f"must be non-negative, got {duration!r}", "duration")
    if duration > path.duration * (1.0 + 1e-12):
        raise ScenarioValidationError(
            f"path defined up to {path.duration:g} s, integration requested to {duration:g} s", "separation_path"
        )

    per_channel = {}
    warnings = []
    for channel in channels:
        per_channel[channel.name.value] = per_channel.get(channel.name.value, 0.0) + path_exponent(
            path, channel.rate, duration
        )
        if channel.temperature and channel.Lambda > 0.0:
            limit = thermal_wavelength(channel.temperature) / 10.0
            if path.max_separation > limit:
                message = (
                    f"{channel.name.value}: separation {path.max_separation:.3g} m exceeds thermal wavelength/10 "
                    f"({limit:.3g} m); long-wavelength limit questionable"
                )
                logger("decoherence").warning(message)
                warnings.append(message)

    exponent = sum(per_channel.values())
    return DecayResult(math.exp(-exponent), exponent, per_channel, warnings)


# -----------------------------
# Budget
# -----------------------------

@dataclass
class DecoherenceBudget:
    """
    Per-channel localization parameters and decay exponents over the two
    protocol windows (t1: single branch, t2: separated branches).
    """

    channels: list
    separation: float
    windows: dict
    exponents: dict
    totals: dict
    internal_temperature: float
    gas: dict = field(default_factory=dict)

    def rows(self):
        for channel in self.channels:
            name = channel.name.value
            yield name, channel.Lambda, channel.gamma_sat, self.exponents[name]["t1"], self.exponents[name]["t2"]


def decoherence_budget(scenario, separation: float | None = None) -> DecoherenceBudget:
    """
    Budget of all enabled standard and collapse channels for a scenario.

    Args:
        scenario: Scenario
        separation: branch separation during t2, m; defaults to protocol.delta_x

    Returns:
        DecoherenceBudget
    """
    from .collapse import collapse_channels

    protocol = scenario.protocol
    separation = protocol.delta_x if separation is None else separation
    internal_temperature = resolve_internal_temperature(scenario)
    channels = standard_channels(scenario, internal_temperature=internal_temperature)
    channels += collapse_channels(scenario.particle, separation, scenario.collapse)

    exponents = {}
    for channel in channels:
        exponents[channel.name.value] = {
            "t1": channel.rate(0.0) * protocol.t1,
            "t2": channel.rate(separation) * protocol.t2,
        }
    totals = {
        window: sum(row[window] for row in exponents.values()) for window in ("t1", "t2")
    }
    rate, events = gas_collisions(scenario.particle, scenario.environment, protocol.t1 + protocol.t2)
    return DecoherenceBudget(
        channels=channels,
        separation=separation,
        windows={"t1": protocol.t1, "t2": protocol.t2},
        exponents=exponents,
        totals=totals,
        internal_temperature=internal_temperature,
        gas={"rate": rate, "expected_events": events, "survival": math.exp(-events)},
    )
