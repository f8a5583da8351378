# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Closed-form Gaussian branch algebra.

A branch is psi(x) = amp * N * exp(-(x - x0)^2 / (4 s) + i p0 (x - x0) / hbar)
with complex width parameter s = sigma_sq and N normalizing the Gaussian.
Free evolution maps s -> s + i hbar t / (2 m); Re(s) is conserved and the
position variance is 1 / Re(1 / s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from .core import CONSTANTS
from .exceptions import GridError, ScenarioValidationError
from .utils import logger

if TYPE_CHECKING:
    from .gridprop import GridState

HBAR = CONSTANTS.hbar


@dataclass(frozen=True)
class GaussianBranch:
    x0: float
    p0: float
    sigma_sq: complex
    amp: complex = 1.0 + 0.0j

    def __post_init__(self):
        s = complex(self.sigma_sq)
        if s == 0 or not (1.0 / s).real > 0.0:
            raise ScenarioValidationError(f"width parameter must have Re(1/s) > 0, got {s}", "branch.sigma_sq")
        if abs(self.amp) > 1.0 + 1e-9:
            raise ScenarioValidationError(f"|amp| must not exceed 1, got {abs(self.amp):.12g}", "branch.amp")
        object.__setattr__(self, "sigma_sq", s)
        object.__setattr__(self, "amp", complex(self.amp))

    @property
    def variance(self) -> float:
        return 1.0 / (1.0 / self.sigma_sq).real

    @property
    def sigma(self) -> float:
        """Position standard deviation"""
        return math.sqrt(self.variance)

    @property
    def log_norm(self) -> float:
        return -0.25 * math.log(2.0 * math.pi * self.variance)

    def quadratic(self):
        """
        Coefficients (A, B, C) with psi(x) = exp(-A x^2 + B x + C).
        """
        a = 1.0 / (4.0 * self.sigma_sq)
        k0 = self.p0 / HBAR
        c = np.log(self.amp) + self.log_norm if self.amp != 0 else complex(-np.inf, 0.0)
        return a, 2.0 * a * self.x0 + 1j * k0, -a * self.x0**2 - 1j * k0 * self.x0 + c

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if self.amp == 0:
            return np.zeros_like(x, dtype=complex)
        u = x - self.x0
        exponent = -(u**2) / (4.0 * self.sigma_sq) + 1j * self.p0 * u / HBAR
        return self.amp * math.exp(self.log_norm) * np.exp(exponent)


def branch_from_quadratic(a: complex, b: complex, c: complex):
    """
    Inverse of GaussianBranch.quadratic: re-express exp(-A x^2 + B x + C)
    as coefficient * (unit-amplitude branch).

    Returns:
        tuple: (GaussianBranch with amp=1, complex coefficient)
    """
    a, b, c = complex(a), complex(b), complex(c)
    sigma_sq = 1.0 / (4.0 * a)
    x0 = b.real / (2.0 * a.real)
    k0 = b.imag - 2.0 * x0 * a.imag
    shape = GaussianBranch(x0=x0, p0=k0 * HBAR, sigma_sq=sigma_sq, amp=1.0)
    log_coefficient = c + a * x0**2 + 1j * k0 * x0 - shape.log_norm
    return shape, complex(np.exp(log_coefficient))


def gaussian_integral(a: complex, b: complex, c: complex) -> complex:
    """Closed form of the integral of exp(-A x^2 + B x + C) over the real line"""
    return complex(np.sqrt(np.pi / a) * np.exp(b * b / (4.0 * a) + c))


def overlap(first: GaussianBranch, second: GaussianBranch) -> complex:
    """
    <first|second> in closed form.
    """
    if first.amp == 0 or second.amp == 0:
        return 0j
    a1, b1, c1 = first.quadratic()
    a2, b2, c2 = second.quadratic()
    return gaussian_integral(np.conj(a1) + a2, np.conj(b1) + b2, np.conj(c1) + c2)


def branches_norm(branches) -> float:
    """Squared norm of a coherent superposition of branches"""
    total = 0j
    for first in branches:
        for second in branches:
            total += overlap(first, second)
    return float(total.real)


def normalize_branches(branches) -> tuple:
    """
    Rescale amplitudes so the superposition has unit norm; relative
    amplitudes and phases are kept.
    """
    norm = branches_norm(branches)
    if not norm > 0.0:
        raise ScenarioValidationError("superposition has zero norm", "branches")
    scale = 1.0 / math.sqrt(norm)
    return tuple(replace(b, amp=b.amp * scale) for b in branches)


def evaluate_branches(branches, x):
    x = np.asarray(x, dtype=float)
    psi = np.zeros_like(x, dtype=complex)
    for branch in branches:
        psi += branch.evaluate(x)
    return psi


@dataclass(frozen=True)
class PureComponent:
    """
    A pure state with its classical weight. grid, when present, is the exact
    sampled wavefunction; branches are then its closed-form approximation.
    """

    weight: float
    branches: tuple
    grid: GridState | None = None

    @property
    def norm(self) -> float:
        return branches_norm(self.branches)

    @property
    def separation(self) -> float:
        """Largest distance between coherent branch centres"""
        if len(self.branches) < 2:
            return 0.0
        centres = [b.x0 for b in self.branches]
        return max(centres) - min(centres)


@dataclass(frozen=True)
class BranchEnsemble:
    """Classical mixture of pure components"""

    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ScenarioValidationError("ensemble needs at least one component", "ensemble.components")
        weights = [c.weight for c in self.components]
        if any(w < 0.0 for w in weights):
            raise ScenarioValidationError("weights must be non-negative", "ensemble.weights")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ScenarioValidationError(f"weights must sum to 1, got {sum(weights):.15g}", "ensemble.weights")
        for index, component in enumerate(self.components):
            if abs(component.norm - 1.0) > 1e-9:
                raise ScenarioValidationError(
                    f"pure component {index} is not normalized (norm {component.norm:.12g})", "ensemble.components"
                )

    @property
    def coherent_component(self) -> PureComponent | None:
        """Heaviest component holding more than one branch, if any"""
        candidates = [c for c in self.components if len(c.branches) > 1]
        if not candidates:
            return None
        return max(candidates, key=lambda c: c.weight)


def pure_state(branches) -> BranchEnsemble:
    return BranchEnsemble((PureComponent(1.0, tuple(branches)),))


# -----------------------------
# Ground State & Free Evolution
# -----------------------------

def _require_positive(value, name):
    if not (isinstance(value, (int, float)) and value > 0.0):
        raise ScenarioValidationError(f"must be positive, got {value!r}", name)


def ground_state(mass: float, omega: float) -> GaussianBranch:
    """
    Trap ground state: centred, at rest, sigma0^2 = hbar / (2 m omega).
    """
    _require_positive(mass, "mass")
    _require_positive(omega, "omega")
    return GaussianBranch(x0=0.0, p0=0.0, sigma_sq=complex(HBAR / (2.0 * mass * omega), 0.0), amp=1.0)


def evolve_branch(branch: GaussianBranch, mass: float, t: float) -> GaussianBranch:
    """Exact free-particle evolution of one branch"""
    if t == 0:
        return branch
    s = branch.sigma_sq
    s_t = s + 1j * HBAR * t / (2.0 * mass)
    moved = GaussianBranch(x0=branch.x0 + branch.p0 * t / mass, p0=branch.p0, sigma_sq=s_t, amp=0.0)
    spread = 1.0 / np.sqrt(1.0 + 1j * HBAR * t / (2.0 * mass * s))
    phase = np.angle(spread) + branch.p0**2 * t / (2.0 * mass * HBAR)
    # the modulus is fixed by normalization; only the phase is carried
    amp = branch.amp * np.exp(1j * phase)
    return replace(moved, amp=complex(amp))


def free_evolve(state: BranchEnsemble, t: float, mass: float) -> BranchEnsemble:
    """
    Evolve every component of a mixture freely for time t.

    Args:
        state: ensemble to evolve
        t: evolution time, s (non-negative)
        mass: particle mass, kg

    Returns:
        BranchEnsemble: evolved ensemble; grid-carrying components are
        propagated spectrally next to their branch fit
    """
    if not (isinstance(t, (int, float)) and t >= 0.0):
        raise ScenarioValidationError(f"evolution time must be non-negative, got {t!r}", "t")
    _require_positive(mass, "mass")
    if t == 0:
        return state

    components = []
    for component in state.components:
        branches = tuple(evolve_branch(b, mass, t) for b in component.branches)
        grid = component.grid
        if grid is not None:
            from .gridprop import propagate

            try:
                grid = propagate(grid, mass, t, autopad=True)
            except GridError as exc:
                logger("wavepacket").warning(f"free_evolve: dropping grid representation ({exc}); using branch fit")
                grid = None
        components.append(PureComponent(component.weight, branches, grid))
    return BranchEnsemble(tuple(components))


def expansion_velocity(mass: float, omega: float) -> float:
    """
    Asymptotic width growth of the released ground state, sqrt(hbar omega / (2 m)).
    """
    _require_positive(mass, "mass")
    _require_positive(omega, "omega")
    return math.sqrt(HBAR * omega / (2.0 * mass))


# -----------------------------
# Free-Fall Planning
# -----------------------------

def width_at(branch: GaussianBranch, mass: float, t: float) -> float:
    return evolve_branch(branch, mass, t).sigma


def time_to_width(sigma0: float, mass: float, target: float) -> float:
    """
    Time for a minimum-uncertainty packet of width sigma0 to reach width target.
    Returns 0 when the packet is already that wide.
    """
    _require_positive(sigma0, "sigma0")
    _require_positive(mass, "mass")
    if target <= sigma0:
        return 0.0
    return 2.0 * mass * sigma0**2 / HBAR * math.sqrt((target / sigma0) ** 2 - 1.0)


def overlap_time(sigma_b: float, mass: float, delta_x: float) -> float:
    """Expansion time after which each slit branch has spread over the separation"""
    return time_to_width(sigma_b, mass, delta_x)
