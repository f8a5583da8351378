# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Slit preparation: turns the expanded single-branch wavepacket into a
two-branch (cat-like) state.

x2      post-selected squared-position measurement, modelled as a projective
        double-Gaussian kernel
scatter weak focused beam; scattered runs are localized at the beam,
        unscattered runs carry a notched coherent wavepacket
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CONSTANTS, PreparationMethod
from .exceptions import ScenarioValidationError
from .utils import logger
from .wavepacket import (
    BranchEnsemble,
    GaussianBranch,
    PureComponent,
    branch_from_quadratic,
    normalize_branches,
    overlap,
)

HBAR = CONSTANTS.hbar
# longest beam wavelength that still localizes the particle within the slit
MAX_SCATTER_WAVELENGTH = 4e-8
DEGENERATE_OVERLAP = 1e-3
RAYLEIGH_LIMIT = 0.1
LOCALIZED_WIDTHS = ("waist", "wavelength")


@dataclass(frozen=True)
class X2Params:
    """position: post-selected |x| (slit half-separation), m; sigma_m: measurement resolution, m"""

    position: float
    sigma_m: float

    def __post_init__(self):
        if not (isinstance(self.position, (int, float)) and math.isfinite(self.position) and self.position >= 0.0):
            raise ScenarioValidationError(f"must be non-negative, got {self.position!r}", "protocol.x2.position")
        if not (isinstance(self.sigma_m, (int, float)) and math.isfinite(self.sigma_m) and self.sigma_m > 0.0):
            raise ScenarioValidationError(f"must be positive, got {self.sigma_m!r}", "protocol.x2.sigma_m")


@dataclass(frozen=True)
class ScatterSlitParams:
    waist: float
    wavelength: float
    power: float
    duration: float
    eps_scatter: complex | None = None
    cross_section: float | None = None
    localized_width: str = "waist"

    def __post_init__(self):
        prefix = "protocol.scatter"
        for name in ("waist", "wavelength", "power", "duration"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ScenarioValidationError(f"must be a finite number, got {value!r}", f"{prefix}.{name}")
        if self.waist <= 0.0:
            raise ScenarioValidationError("must be positive", f"{prefix}.waist")
        if not 0.0 < self.wavelength <= MAX_SCATTER_WAVELENGTH:
            raise ScenarioValidationError(
                f"must be in (0, {MAX_SCATTER_WAVELENGTH:g}] m to localize the particle, got {self.wavelength:g}",
                f"{prefix}.wavelength",
            )
        if self.power < 0.0:
            raise ScenarioValidationError("must be non-negative", f"{prefix}.power")
        if self.duration < 0.0:
            raise ScenarioValidationError("must be non-negative", f"{prefix}.duration")
        if self.cross_section is not None and not self.cross_section >= 0.0:
            raise ScenarioValidationError("must be non-negative", f"{prefix}.cross_section")
        if self.localized_width not in LOCALIZED_WIDTHS:
            raise ScenarioValidationError(
                f"must be one of {', '.join(LOCALIZED_WIDTHS)}, got {self.localized_width!r}",
                f"{prefix}.localized_width",
            )
        if self.eps_scatter is not None:
            object.__setattr__(self, "eps_scatter", complex(self.eps_scatter))


@dataclass
class PreparationResult:
    ensemble: BranchEnsemble
    success_weight: float | None = None
    scatter_probability: float | None = None
    warnings: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def _single_branch(state) -> GaussianBranch:
    if isinstance(state, GaussianBranch):
        return state
    if isinstance(state, BranchEnsemble):
        if len(state.components) == 1 and len(state.components[0].branches) == 1:
            return state.components[0].branches[0]
    raise ScenarioValidationError("slit preparation needs a single-branch pure state", "prepare.state")


def _warn(warnings: list, message: str) -> None:
    logger("prepare").warning(message)
    warnings.append(message)


# -----------------------------
# x^2 Measurement
# -----------------------------

def prepare_x2(state, params: X2Params) -> PreparationResult:
    """
    Multiply the input wavefunction by the double-Gaussian measurement kernel
    exp(-(x-X)^2/(4 sigma_M^2)) + exp(-(x+X)^2/(4 sigma_M^2)) and renormalize.

    Args:
        state: single-branch pure state (BranchEnsemble or GaussianBranch)
        params: X2Params

    Returns:
        PreparationResult: two-branch pure state (one branch when X = 0),
        the post-selection success weight and degenerate-slit warnings
    """
    branch = _single_branch(state)
    a, b, c = branch.quadratic()
    kernel_a = 1.0 / (4.0 * params.sigma_m**2)
    centres = (-params.position, params.position) if params.position > 0.0 else (0.0,)
    scale = 2.0 if params.position == 0.0 else 1.0

    raw = []
    for centre in centres:
        kernel_b = 2.0 * kernel_a * centre
        kernel_c = -kernel_a * centre**2 + math.log(scale)
        raw.append(branch_from_quadratic(a + kernel_a, b + kernel_b, c + kernel_c))

    total = 0j
    for first, cf in raw:
        for second, cs in raw:
            total += np.conj(cf) * cs * overlap(first, second)
    success_weight = float(total.real)
    if not success_weight > 0.0:
        raise ScenarioValidationError("measurement kernel does not overlap the state", "protocol.x2.position")

    norm = math.sqrt(success_weight)
    prepared = tuple(GaussianBranch(s.x0, s.p0, s.sigma_sq, cf / norm) for s, cf in raw)
    prepared = normalize_branches(prepared)

    warnings = []
    if len(prepared) == 2:
        left, right = raw[0][0], raw[1][0]
        shape_overlap = abs(overlap(left, right))
        if shape_overlap > DEGENERATE_OVERLAP:
            _warn(warnings, f"degenerate slit: branch overlap {shape_overlap:.3g} exceeds {DEGENERATE_OVERLAP:g}")
    else:
        _warn(warnings, "degenerate slit: X = 0 collapses both kernels into one branch")
    if params.position < 2.0 * params.sigma_m:
        message = f"slit half-separation {params.position:.3g} m is below twice the resolution {params.sigma_m:.3g} m"
        if message not in warnings:
            _warn(warnings, message)

    component = PureComponent(1.0, prepared)
    logger("prepare").info(
        f"prepare_x2: X={params.position:.3g} m, branch width {prepared[0].sigma:.3g} m, success {success_weight:.3g}"
    )
    return PreparationResult(
        ensemble=BranchEnsemble((component,)),
        success_weight=success_weight,
        warnings=warnings,
        metadata={"branch_width": prepared[0].sigma, "separation": component.separation},
    )


def branch_width(sigma_in: float, sigma_m: float) -> float:
    """Product-of-Gaussians width sigma1 sigma_M / sqrt(sigma1^2 + sigma_M^2)"""
    return sigma_in * sigma_m / math.sqrt(sigma_in**2 + sigma_m**2)


# -----------------------------
# Scatter Slit
# -----------------------------

def polarizability_factor(eps: complex) -> complex:
    """Clausius-Mossotti factor (eps - 1)/(eps + 2)"""
    eps = complex(eps)
    return (eps - 1.0) / (eps + 2.0)


def rayleigh_cross_section(radius: float, wavelength: float, eps: complex) -> float:
    """Dipole scattering cross-section (8 pi / 3) k^4 R^6 |(eps-1)/(eps+2)|^2"""
    k = 2.0 * math.pi / wavelength
    return 8.0 * math.pi / 3.0 * k**4 * radius**6 * abs(polarizability_factor(eps)) ** 2


def peak_probability(params: ScatterSlitParams, particle) -> tuple:
    """
    Scatter probability at the beam centre: photon flux x cross-section /
    (pi w^2 / 2) x duration.

    Returns:
        tuple: (p_peak, cross_section used)
    """
    if params.cross_section is not None:
        cross_section = float(params.cross_section)
    else:
        eps = params.eps_scatter if params.eps_scatter is not None else particle.eps_trap
        cross_section = rayleigh_cross_section(particle.radius, params.wavelength, eps)
    photon_energy = 2.0 * math.pi * HBAR * CONSTANTS.c / params.wavelength
    flux = params.power / photon_energy
    beam_area = math.pi * params.waist**2 / 2.0
    return flux * cross_section / beam_area * params.duration, cross_section


def scatter_profile(x, p_peak: float, waist: float):
    x = np.asarray(x, dtype=float)
    return p_peak * np.exp(-2.0 * x**2 / waist**2)


def scatter_probability(branch: GaussianBranch, p_peak: float, waist: float) -> float:
    """Closed form of the integral of p(x) |psi(x)|^2 for a Gaussian branch"""
    spread = waist**2 + 4.0 * branch.variance
    return float(p_peak * waist / math.sqrt(spread) * math.exp(-2.0 * branch.x0**2 / spread))


def _local_phase(branch: GaussianBranch, x: float):
    """Phase and wavenumber of the branch at x"""
    phase = float(np.angle(branch.evaluate(np.array([x]))[0]))
    k = branch.p0 / HBAR - (1.0 / branch.sigma_sq).imag * (x - branch.x0) / 2.0
    return phase, k


def _lobe(branch: GaussianBranch, mean: float, variance: float, weight: float) -> GaussianBranch:
    chirp = (1.0 / branch.sigma_sq).imag
    phase, k = _local_phase(branch, mean)
    sigma_sq = 1.0 / complex(1.0 / variance, chirp)
    return GaussianBranch(mean, HBAR * k, sigma_sq, math.sqrt(weight) * np.exp(1j * phase))


def _density_grid(branch: GaussianBranch, waist: float, span: float = 8.0, max_points: int = 2**22):
    half = abs(branch.x0) + span * branch.sigma
    n = 2**10
    while n < max_points and 2.0 * half / n > waist / 20.0:
        n *= 2
    dx = 2.0 * half / n
    return -half + dx * np.arange(n), dx


def prepare_scatter_slit(state, params: ScatterSlitParams, particle) -> PreparationResult:
    """
    Split the state into a localized component (beam scattered, weight p_s)
    and a notched coherent component (beam missed, weight 1 - p_s).

    The notched wavefunction psi * sqrt(1 - p(x)) is kept on a grid when the
    grid can resolve it; the branch path uses two Gaussian lobes fitted to
    the moments of its left and right halves.

    Args:
        state: single-branch pure state
        params: ScatterSlitParams
        particle: Particle (radius and permittivity for the cross-section)

    Returns:
        PreparationResult: mixture, scatter probability p_s, warnings
    """
    branch = _single_branch(state)
    warnings = []
    p_peak, cross_section = peak_probability(params, particle)
    if p_peak > 1.0:
        raise ScenarioValidationError(
            f"peak scatter probability {p_peak:.3g} exceeds 1; lower power or duration", "protocol.scatter.power"
        )
    ratio = particle.radius / params.wavelength
    if params.cross_section is None and ratio > RAYLEIGH_LIMIT:
        _warn(warnings, f"Rayleigh condition violated: R/lambda_s = {ratio:.3g} > {RAYLEIGH_LIMIT:g}")
    if params.waist >= branch.sigma:
        _warn(warnings, f"beam waist {params.waist:.3g} m is not smaller than the wavepacket width {branch.sigma:.3g} m")

    metadata = {"p_peak": p_peak, "cross_section": cross_section}
    if p_peak == 0.0:
        return PreparationResult(
            ensemble=BranchEnsemble((PureComponent(1.0, (branch,)),)),
            scatter_probability=0.0,
            warnings=warnings,
            metadata=metadata,
        )

    p_s = scatter_probability(branch, p_peak, params.waist)

    x, dx = _density_grid(branch, params.waist)
    psi = branch.evaluate(x) * np.sqrt(1.0 - scatter_profile(x, p_peak, params.waist))
    density = np.abs(psi) ** 2
    total = density.sum() * dx

    lobes = []
    for mask in (x < 0.0, x >= 0.0):
        weight = density[mask].sum() * dx / total
        if weight < 1e-12:
            continue
        mean = float(np.sum(x[mask] * density[mask]) / density[mask].sum())
        variance = float(np.sum((x[mask] - mean) ** 2 * density[mask]) / density[mask].sum())
        lobes.append(_lobe(branch, mean, variance, weight))
    lobes = normalize_branches(tuple(lobes))

    grid = _notched_grid(branch, psi, x, dx)

    components = [PureComponent(1.0 - p_s, lobes, grid)]
    if p_s > 0.0:
        width = params.waist / 2.0 if params.localized_width == "waist" else params.wavelength / 2.0
        _, k = _local_phase(branch, 0.0)
        localized = GaussianBranch(0.0, HBAR * k, complex(width**2, 0.0), 1.0)
        components.append(PureComponent(p_s, (localized,)))

    coherent = components[0]
    metadata.update(
        {
            "lobe_centres": [lobe.x0 for lobe in lobes],
            "lobe_widths": [lobe.sigma for lobe in lobes],
            "separation": coherent.separation,
            "grid_represented": grid is not None,
        }
    )
    logger("prepare").info(
        f"prepare_scatter_slit: p_peak={p_peak:.3g}, p_s={p_s:.3g}, lobe separation {coherent.separation:.3g} m"
    )
    return PreparationResult(
        ensemble=BranchEnsemble(tuple(components)),
        scatter_probability=p_s,
        warnings=warnings,
        metadata=metadata,
    )


def _notched_grid(branch: GaussianBranch, psi, x, dx, max_points: int = 2**20):
    """GridState of the notched wavefunction, or None when its phase cannot be resolved"""
    from .gridprop import MIN_POINTS, GridState, required_kmax

    if psi.size < MIN_POINTS or math.pi / dx < required_kmax([branch]):
        logger("prepare").debug("prepare_scatter_slit: notched state not grid-representable, using lobe fit")
        return None
    if psi.size > max_points:
        return None
    normalized = psi / math.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    return GridState(float(x[0]), float(x[0] + dx * x.size), normalized)


def prepare_slit(state, protocol, particle) -> PreparationResult:
    """Dispatch on the protocol's preparation method"""
    if protocol.method is PreparationMethod.X2_MEASUREMENT:
        return prepare_x2(state, protocol.x2)
    return prepare_scatter_slit(state, protocol.scatter, particle)
