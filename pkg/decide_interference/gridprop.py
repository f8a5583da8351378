# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Grid oracle for free evolution.
Samples states on a uniform periodic grid and propagates them exactly in
momentum space (forward FFT, quadratic dispersion phase, inverse FFT).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CONSTANTS
from .exceptions import GridError, ScenarioValidationError
from .utils import logger, render_csv

HBAR = CONSTANTS.hbar
MIN_POINTS = 2**8
MAX_POINTS = 2**22
# amplitudes below this fraction of the peak count as outside the support
LEAK_THRESHOLD = 1e-8
SUPPORT_THRESHOLD = 1e-10


@dataclass(frozen=True, eq=False)
class GridState:
    x_min: float
    x_max: float
    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        n = psi.size
        if n < MIN_POINTS or n & (n - 1):
            raise ScenarioValidationError(f"grid size must be a power of two >= {MIN_POINTS}, got {n}", "grid.n")
        if not self.x_max > self.x_min:
            raise ScenarioValidationError("x_max must exceed x_min", "grid.x_max")
        object.__setattr__(self, "psi", psi)
        if abs(self.norm - 1.0) > 1e-6:
            raise ScenarioValidationError(f"grid state not normalized (norm {self.norm:.9g})", "grid.psi")

    @property
    def n(self) -> int:
        return self.psi.size

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)

    def moments(self):
        """Mean and variance of the position density"""
        weight = self.density * self.dx
        total = weight.sum()
        mean = float(np.sum(self.x * weight) / total)
        variance = float(np.sum((self.x - mean) ** 2 * weight) / total)
        return mean, variance

    def momentum_density(self) -> np.ndarray:
        psi_k = np.fft.fft(self.psi)
        return np.abs(psi_k) ** 2 / np.sum(np.abs(psi_k) ** 2)

    def to_csv(self) -> str:
        return render_csv(["x", "density"], zip(self.x, self.density))


def wavenumbers(n: int, dx: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, d=dx)


# -----------------------------
# Sampling
# -----------------------------

def required_half_width(branches, centre: float = 0.0) -> float:
    """Half-width around centre that keeps every branch's tail below the leak threshold"""
    reach = 2.0 * math.sqrt(math.log(1.0 / LEAK_THRESHOLD))
    return max(abs(b.x0 - centre) + reach * b.sigma for b in branches)


def required_kmax(branches) -> float:
    """Largest wavenumber with non-negligible amplitude in a branch superposition"""
    reach = math.sqrt(math.log(1.0 / SUPPORT_THRESHOLD))
    return max(abs(b.p0 / HBAR) + reach / math.sqrt(b.sigma_sq.real) for b in branches)


def default_grid(branches, mass: float = None, t: float = 0.0, n: int = 2**14, span: float = 8.0):
    """
    Grid spec (x_min, x_max, n) spanning span x the predicted final envelope
    around every branch, refined until the initial momentum content is resolved.
    """
    from .wavepacket import evolve_branch

    final = [evolve_branch(b, mass, t) for b in branches] if mass and t else list(branches)
    lo = min(min(b.x0 - span * b.sigma for b in final), min(b.x0 - span * b.sigma for b in branches))
    hi = max(max(b.x0 + span * b.sigma for b in final), max(b.x0 + span * b.sigma for b in branches))
    half = 0.5 * (hi - lo)
    centre = 0.5 * (hi + lo)
    kmax = required_kmax(branches)
    while n < MAX_POINTS and math.pi / (2.0 * half / n) < kmax:
        n *= 2
    return centre - half, centre + half, n


def sample(branches, x_min: float, x_max: float, n: int = 2**14) -> GridState:
    """
    Evaluate a coherent branch superposition on a uniform grid and normalize it.

    Args:
        branches: GaussianBranch sequence forming one pure state
        x_min, x_max: grid extent, m
        n: number of samples (power of two)

    Returns:
        GridState: the sampled, normalized state
    """
    branches = tuple(branches)
    dx = (x_max - x_min) / n
    x = x_min + dx * np.arange(n)

    from .wavepacket import evaluate_branches

    psi = evaluate_branches(branches, x)
    peak = np.max(np.abs(psi))
    if not peak > 0.0:
        raise GridError("state vanishes on the grid", required_width=2.0 * required_half_width(branches))
    edge = max(np.max(np.abs(psi[:4])), np.max(np.abs(psi[-4:])))
    if edge >= LEAK_THRESHOLD * peak:
        centre = 0.5 * (x_min + x_max)
        raise GridError(
            f"boundary amplitude {edge / peak:.2e} of peak exceeds {LEAK_THRESHOLD:g}",
            required_width=2.0 * required_half_width(branches, centre),
        )
    kmax = required_kmax(branches)
    if math.pi / dx < kmax:
        raise GridError(
            f"grid step {dx:.3e} m too coarse: need pi/dx >= {kmax:.3e} 1/m (n >= {int(math.ceil((x_max - x_min) * kmax / math.pi))})"
        )
    psi = psi / math.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    return GridState(x_min, x_max, psi)


def pad(state: GridState, n: int) -> GridState:
    """
    Zero-pad symmetrically to n points, keeping the grid step.
    """
    if n < state.n or n & (n - 1):
        raise ScenarioValidationError(f"padded size must be a power of two >= {state.n}", "grid.n")
    if n == state.n:
        return state
    extra = n - state.n
    left = extra // 2
    psi = np.concatenate([np.zeros(left, complex), state.psi, np.zeros(extra - left, complex)])
    x_min = state.x_min - left * state.dx
    return GridState(x_min, x_min + n * state.dx, psi)


# -----------------------------
# Propagation
# -----------------------------

def predicted_support(psi: np.ndarray, x_min: float, dx: float, mass: float, t: float):
    """
    Interval the state occupies after time t, from its current position and
    momentum support.
    """
    amplitude = np.abs(psi)
    inside = np.nonzero(amplitude > SUPPORT_THRESHOLD * amplitude.max())[0]
    lo = x_min + inside[0] * dx
    hi = x_min + inside[-1] * dx

    psi_k = np.abs(np.fft.fft(psi))
    k = wavenumbers(psi.size, dx)
    moving = k[psi_k > SUPPORT_THRESHOLD * psi_k.max()]
    v_min = HBAR * moving.min() / mass
    v_max = HBAR * moving.max() / mass
    return lo + min(0.0, v_min * t), hi + max(0.0, v_max * t)


def propagate_array(psi: np.ndarray, dx: float, mass: float, t: float) -> np.ndarray:
    """Spectral free propagation of a sampled array (no support checks)"""
    if t == 0:
        return np.array(psi, dtype=complex)
    k = wavenumbers(psi.size, dx)
    return np.fft.ifft(np.fft.fft(psi) * np.exp(-1j * HBAR * k**2 * t / (2.0 * mass)))


def refine_array(psi: np.ndarray, factor: int) -> np.ndarray:
    """
    Trigonometric interpolation onto a grid `factor` times finer by
    zero-padding the spectrum. Exact for band-limited amplitudes; the
    original samples sit at every factor-th point.
    """
    if not (isinstance(factor, int) and factor >= 1):
        raise ScenarioValidationError(f"refinement factor must be a positive integer, got {factor!r}", "grid.n")
    if factor == 1:
        return np.array(psi, dtype=complex)
    n = psi.size
    spectrum = np.fft.fft(psi)
    half = n // 2
    padded = np.zeros(n * factor, dtype=complex)
    padded[:half] = spectrum[:half]
    padded[n * factor - (n - half) :] = spectrum[half:]
    return np.fft.ifft(padded) * factor


def ensure_support(state: GridState, mass: float, t: float, autopad: bool = False) -> GridState:
    """
    Check that the state stays on the grid over time t; zero-pad it when
    autopad is set, otherwise reject the predicted wrap-around.
    """
    lo, hi = predicted_support(state.psi, state.x_min, state.dx, mass, t)
    if lo >= state.x_min and hi <= state.x_max:
        return state
    centre = 0.5 * (state.x_min + state.x_max)
    # symmetric padding must cover the farther side
    needed = 2.2 * max(centre - lo, hi - centre)
    if not autopad:
        raise GridError("propagated support exceeds the grid (wrap-around)", required_width=needed)
    n = state.n
    while n * state.dx < needed:
        n *= 2
    if n > MAX_POINTS:
        raise GridError(f"padding would exceed {MAX_POINTS} points", required_width=needed)
    logger("gridprop").debug(f"ensure_support: padding grid {state.n} -> {n} points")
    return pad(state, n)


def propagate(state: GridState, mass: float, t: float, autopad: bool = False) -> GridState:
    """
    Exact free propagation by time t.

    Args:
        state: sampled state
        mass: particle mass, kg
        t: time, s (non-negative)
        autopad: zero-pad the grid instead of rejecting a predicted wrap-around

    Returns:
        GridState: propagated state on the same (or padded) grid
    """
    if not t >= 0.0:
        raise ScenarioValidationError(f"propagation time must be non-negative, got {t!r}", "t")
    if t == 0:
        return state
    state = ensure_support(state, mass, t, autopad)
    return GridState(state.x_min, state.x_max, propagate_array(state.psi, state.dx, mass, t))
