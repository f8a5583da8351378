# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Detection: evolves the prepared state through t2, builds the detected
position density (coherence factors on the cross terms, readout blur) and
extracts fringe spacing and visibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize

from .core import CONSTANTS
from .exceptions import GridError, ScenarioValidationError, VisibilityFitError
from .gridprop import MAX_POINTS, SUPPORT_THRESHOLD, ensure_support, propagate_array, refine_array
from .utils import logger, render_csv
from .wavepacket import BranchEnsemble, evolve_branch

HBAR = CONSTANTS.hbar
MIN_SAMPLES_PER_FRINGE = 4
TARGET_SAMPLES_PER_FRINGE = 16
RESIDUAL_LIMIT = 0.05
ENVELOPE_DEGREE = 4
# narrowest pattern window, in envelope widths, kept when MAX_POINTS cannot
# resolve the fringes over the full span
MIN_PATTERN_SPAN = 3.0


@dataclass(frozen=True)
class DetectionSettings:
    """
    readout_blur: Gaussian position-readout width, m; None means 1/10 of the
    ideal fringe spacing. grid_points: minimum pattern samples; span: pattern
    half-width in final envelope widths. shots > 0 switches on Monte Carlo
    detection with `repeats` repetitions.
    """

    readout_blur: float | None = None
    grid_points: int = 2**14
    span: float = 8.0
    shots: int = 0
    repeats: int = 16
    seed: int | None = None

    def __post_init__(self):
        if self.readout_blur is not None and not self.readout_blur >= 0.0:
            raise ScenarioValidationError("must be non-negative", "detection.readout_blur")
        n = self.grid_points
        if not (isinstance(n, int) and n >= 2**8 and not n & (n - 1)):
            raise ScenarioValidationError(f"must be a power of two >= 256, got {n!r}", "detection.grid_points")
        if not self.span > 0.0:
            raise ScenarioValidationError("must be positive", "detection.span")
        if not (isinstance(self.shots, int) and self.shots >= 0):
            raise ScenarioValidationError("must be a non-negative integer", "detection.shots")
        if not (isinstance(self.repeats, int) and self.repeats >= 1):
            raise ScenarioValidationError("must be a positive integer", "detection.repeats")


@dataclass
class VisibilityFit:
    visibility: float
    phase: float
    residual: float
    frequency_scale: float = 1.0


@dataclass
class InterferencePattern:
    x: np.ndarray
    density: np.ndarray
    fringe_spacing: float
    visibility: float
    metadata: dict = field(default_factory=dict)

    @property
    def samples(self):
        return list(zip(self.x.tolist(), self.density.tolist()))

    def to_csv(self) -> str:
        return render_csv(["x", "density"], zip(self.x, self.density))


def fringe_spacing(mass: float, t2: float, dx: float) -> float:
    """
    Far-field double-slit fringe period 2 pi hbar t2 / (m dx).
    """
    for name, value in (("mass", mass), ("t2", t2), ("dx", dx)):
        if not (isinstance(value, (int, float)) and value > 0.0):
            raise ScenarioValidationError(f"must be positive, got {value!r}", name)
    return 2.0 * math.pi * HBAR * t2 / (mass * dx)


# -----------------------------
# Visibility Extraction
# -----------------------------

def extract_visibility(x, density, spacing: float, check_residual: bool = True) -> VisibilityFit:
    """
    Fit env(x) (1 + V cos(2 pi x / d + phi)) over the region where the
    fringe-averaged envelope exceeds half its maximum; env is the
    exponential of a quartic.

    Args:
        x: uniformly spaced sample positions, m
        density: detected density at x
        spacing: fringe spacing hint d, m
        check_residual: reject fits whose rms residual exceeds 5% of the peak

    Returns:
        VisibilityFit: V clamped to [0, 1], fringe phase and residual
    """
    x = np.asarray(x, dtype=float)
    density = np.asarray(density, dtype=float)
    step = x[1] - x[0]
    per_fringe = spacing / step
    if per_fringe < MIN_SAMPLES_PER_FRINGE:
        raise VisibilityFitError(f"only {per_fringe:.2f} samples per fringe, need {MIN_SAMPLES_PER_FRINGE}")

    envelope = ndimage.gaussian_filter1d(density, per_fringe, mode="nearest")
    peak_index = int(np.argmax(envelope))
    region = envelope > 0.5 * envelope[peak_index]
    if region.sum() < 2 * MIN_SAMPLES_PER_FRINGE:
        raise VisibilityFitError("envelope too narrow to contain fringes")

    xr, yr, er = x[region], density[region], envelope[region]
    centre = x[peak_index]
    width = max(abs(xr[0] - centre), abs(xr[-1] - centre))
    u = (xr - centre) / width
    k = 2.0 * math.pi / spacing
    phase_arg = k * (xr - centre)
    peak = float(density.max())

    # initial envelope from the smoothed density, then linear fringe amplitudes
    poly0 = np.polynomial.polynomial.polyfit(u, np.log(er), ENVELOPE_DEGREE)
    ratio = yr / er - 1.0
    basis = np.column_stack([np.cos(phase_arg), np.sin(phase_arg)])
    (a, b), *_ = np.linalg.lstsq(basis, ratio, rcond=None)
    v0 = float(min(math.hypot(a, b), 1.0))
    phi0 = float(math.atan2(-b, a))

    def model(params):
        env = np.exp(np.polynomial.polynomial.polyval(u, params[: ENVELOPE_DEGREE + 1]))
        visibility, phi, scale = params[ENVELOPE_DEGREE + 1 :]
        return env * (1.0 + visibility * np.cos(scale * phase_arg + phi))

    def residuals(params):
        return (model(params) - yr) / peak

    start = np.concatenate([poly0, [v0, phi0, 1.0]])
    lower = np.full(start.size, -np.inf)
    lower[ENVELOPE_DEGREE + 1] = 0.0
    try:
        result = optimize.least_squares(residuals, start, bounds=(lower, np.inf), x_scale="jac", xtol=1e-12, ftol=1e-12)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise VisibilityFitError(f"visibility fit failed: {exc}")
    residual = float(np.sqrt(np.mean(result.fun**2)))
    if not result.success:
        raise VisibilityFitError(f"visibility fit did not converge: {result.message}", residual=residual)
    if check_residual and residual > RESIDUAL_LIMIT:
        raise VisibilityFitError("visibility fit residual too large", residual=residual)

    visibility, phi, scale = result.x[ENVELOPE_DEGREE + 1 :]
    return VisibilityFit(
        visibility=float(min(max(visibility, 0.0), 1.0)),
        phase=float(math.remainder(phi, 2.0 * math.pi)),
        residual=residual,
        frequency_scale=float(scale),
    )


# -----------------------------
# Detection
# -----------------------------

def _pattern_axis(branches, span: float, spacing: float, min_points: int, warnings: list):
    def extent(width):
        lo = min(b.x0 - width * b.sigma for b in branches)
        hi = max(b.x0 + width * b.sigma for b in branches)
        return lo, hi

    lo, hi = extent(span)
    needed = (hi - lo) * TARGET_SAMPLES_PER_FRINGE / spacing
    if needed > MAX_POINTS and span > MIN_PATTERN_SPAN:
        reduced = max(MIN_PATTERN_SPAN, span * MAX_POINTS / needed)
        message = f"pattern span reduced from {span:g} to {reduced:.3g} envelope widths to resolve the fringes"
        logger("interference").warning(f"detect: {message}")
        warnings.append(message)
        lo, hi = extent(reduced)
    centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    n = min(min_points, MAX_POINTS)
    while n < MAX_POINTS and 2.0 * half / n > spacing / TARGET_SAMPLES_PER_FRINGE:
        n *= 2
    step = 2.0 * half / n
    return centre + (np.arange(n) - (n - 1) / 2.0) * step


def _branch_density(branches, x, coherence: float):
    psis = [b.evaluate(x) for b in branches]
    density = sum(np.abs(psi) ** 2 for psi in psis)
    for i in range(len(psis)):
        for j in range(i + 1, len(psis)):
            density = density + 2.0 * coherence * np.real(np.conj(psis[i]) * psis[j])
    return density


def _grid_density(component, mass: float, t2: float, coherence: float, spacing: float):
    """
    Propagate the two halves of a grid-represented component separately.
    When the grid step leaves fewer than TARGET_SAMPLES_PER_FRINGE samples
    per fringe, both amplitudes are cropped to their support and refined
    spectrally before the density is formed.

    Returns:
        tuple: (x, density, refinement factor)
    """
    grid = ensure_support(component.grid, mass, t2, autopad=True)
    split = 0.5 * (component.branches[0].x0 + component.branches[-1].x0) if len(component.branches) > 1 else 0.0
    x = grid.x
    left = propagate_array(np.where(x < split, grid.psi, 0.0), grid.dx, mass, t2)
    right = propagate_array(np.where(x >= split, grid.psi, 0.0), grid.dx, mass, t2)

    factor = 1
    while spacing * factor / grid.dx < TARGET_SAMPLES_PER_FRINGE:
        factor *= 2
    if factor > 1:
        amplitude = np.abs(left) ** 2 + np.abs(right) ** 2
        inside = np.nonzero(amplitude > SUPPORT_THRESHOLD**2 * amplitude.max())[0]
        lo, hi = int(inside[0]), int(inside[-1]) + 1
        size = (hi - lo) * factor
        if size > MAX_POINTS:
            raise GridError(f"refining the propagated grid by {factor} would need {size} points (limit {MAX_POINTS})")
        logger("interference").debug(f"detect: refining propagated grid by {factor} over {hi - lo} points")
        left = refine_array(left[lo:hi], factor)
        right = refine_array(right[lo:hi], factor)
        x = x[lo] + (grid.dx / factor) * np.arange(size)

    density = np.abs(left) ** 2 + np.abs(right) ** 2 + 2.0 * coherence * np.real(np.conj(left) * right)
    return x, density, factor


def detect(
    state: BranchEnsemble,
    t2: float,
    mass: float,
    decay_quantum: float = 1.0,
    decay_collapse: float = 1.0,
    readout_blur: float | None = None,
    settings: DetectionSettings | None = None,
    phase_jitter: float = 0.0,
) -> InterferencePattern:
    """
    Evolve every component by t2 and synthesize the detected density.

    Cross terms between coherent branches carry the factor
    decay_quantum * decay_collapse * exp(-phase_jitter^2 / 2); single-branch
    components add incoherently. The density is blurred by a Gaussian of
    width readout_blur, normalized, and its visibility extracted.

    Args:
        state: prepared BranchEnsemble (time t1)
        t2: free-fall time, s
        mass: particle mass, kg
        decay_quantum: standard-decoherence visibility factor in [0, 1]
        decay_collapse: collapse-model visibility factor in [0, 1]
        readout_blur: m; None uses settings.readout_blur, then 1/10 fringe spacing
        settings: DetectionSettings
        phase_jitter: rms random phase between the interfering parts, rad

    Returns:
        InterferencePattern
    """
    settings = settings or DetectionSettings()
    for name, value in (("decay_quantum", decay_quantum), ("decay_collapse", decay_collapse)):
        if not 0.0 <= value <= 1.0:
            raise ScenarioValidationError(f"must be in [0, 1], got {value!r}", name)
    if not t2 > 0.0:
        raise ScenarioValidationError(f"must be positive, got {t2!r}", "t2")

    coherent = state.coherent_component
    if coherent is None:
        raise VisibilityFitError("no coherent branch pair in the state; pattern has no fringes")
    spacing = fringe_spacing(mass, t2, coherent.separation)
    blur = readout_blur if readout_blur is not None else settings.readout_blur
    blur = spacing / 10.0 if blur is None else blur
    if not blur >= 0.0:
        raise ScenarioValidationError("must be non-negative", "detection.readout_blur")
    coherence = decay_quantum * decay_collapse * math.exp(-(phase_jitter**2) / 2.0)

    warnings = []
    evolved = [tuple(evolve_branch(b, mass, t2) for b in c.branches) for c in state.components]
    x, grid_component, refinement = None, None, 1
    for component in state.components:
        if component.grid is not None:
            try:
                x, grid_density, refinement = _grid_density(component, mass, t2, coherence, spacing)
                grid_component = component
            except GridError as exc:
                message = f"grid propagation unavailable ({exc}); using branch fit"
                logger("interference").warning(f"detect: {message}")
                warnings.append(message)
            break
    if x is None:
        branches = [b for evolved_branches in evolved for b in evolved_branches]
        x = _pattern_axis(branches, settings.span, spacing, settings.grid_points, warnings)
    step = x[1] - x[0]
    if spacing < MIN_SAMPLES_PER_FRINGE * step:
        raise VisibilityFitError(
            f"fringe spacing {spacing:.3g} m below {MIN_SAMPLES_PER_FRINGE} grid steps ({step:.3g} m); fringes unresolvable"
        )

    density = np.zeros_like(x)
    for component, branches in zip(state.components, evolved):
        if component is grid_component:
            density += component.weight * grid_density
        else:
            density += component.weight * _branch_density(branches, x, coherence)
    density = np.clip(density, 0.0, None)

    if blur > 0.0:
        density = ndimage.gaussian_filter1d(density, blur / step, mode="constant")
    if spacing < 2.0 * blur:
        message = f"blur-dominated: fringe spacing {spacing:.3g} m below twice the readout blur {blur:.3g} m"
        logger("interference").warning(f"detect: {message}")
        warnings.append(message)
    density = density / (density.sum() * step)

    metadata = {
        "decay_quantum": decay_quantum,
        "decay_collapse": decay_collapse,
        "phase_jitter_factor": math.exp(-(phase_jitter**2) / 2.0),
        "coherence_factor": coherence,
        "readout_blur": blur,
        "grid_points": int(x.size),
        "grid_step": step,
        "grid_propagated": grid_component is not None,
        "refinement": refinement,
        "separation": coherent.separation,
        "warnings": warnings,
    }

    if settings.shots > 0:
        stats = monte_carlo_visibility(x, density, spacing, settings.shots, settings.repeats, settings.seed)
        metadata["monte_carlo"] = stats
        visibility = stats["mean"]
    else:
        fit = extract_visibility(x, density, spacing)
        metadata["fit_residual"] = fit.residual
        metadata["fringe_phase"] = fit.phase
        visibility = fit.visibility

    logger("interference").info(f"detect: spacing {spacing:.4g} m, visibility {visibility:.6f}")
    return InterferencePattern(x=x, density=density, fringe_spacing=spacing, visibility=visibility, metadata=metadata)


# -----------------------------
# Monte Carlo Detection
# -----------------------------

def monte_carlo_visibility(x, density, spacing: float, shots: int, repeats: int, seed: int | None = None) -> dict:
    """
    Draw detection events from the density, histogram them with 16 bins per
    fringe and re-extract the visibility; repeated `repeats` times.

    Returns:
        dict: mean, std, per-repeat values, shots, repeats, seed
    """
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    step = x[1] - x[0]
    probabilities = density * step
    probabilities = probabilities / probabilities.sum()
    bin_width = spacing / TARGET_SAMPLES_PER_FRINGE
    edges = np.arange(x[0] - step / 2.0, x[-1] + step / 2.0 + bin_width, bin_width)
    centres = 0.5 * (edges[1:] + edges[:-1])

    values = []
    for _ in range(repeats):
        indices = rng.choice(x.size, size=shots, p=probabilities)
        positions = x[indices] + rng.uniform(-step / 2.0, step / 2.0, size=shots)
        counts, _ = np.histogram(positions, bins=edges)
        fit = extract_visibility(centres, counts / (shots * bin_width), spacing, check_residual=False)
        values.append(fit.visibility)

    values = np.asarray(values)
    return {
        "mean": float(values.mean()),
        "std": float(values.std(ddof=1)) if repeats > 1 else 0.0,
        "values": values.tolist(),
        "shots": shots,
        "repeats": repeats,
        "seed": seed,
    }
