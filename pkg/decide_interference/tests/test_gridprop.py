import math

import numpy as np
import pytest

from decide_interference.exceptions import GridError, ScenarioValidationError
from decide_interference.gridprop import (
    MIN_POINTS,
    GridState,
    default_grid,
    pad,
    propagate,
    refine_array,
    required_half_width,
    required_kmax,
    sample,
)
from decide_interference.wavepacket import (
    GaussianBranch,
    branches_norm,
    evaluate_branches,
    evolve_branch,
)

HBAR = 1.0545718176461565e-34
MASS = 1e-17
SIGMA0 = 1e-9


def random_state(rng):
    count = int(rng.integers(1, 5))
    branches = []
    for _ in range(count):
        sigma = SIGMA0 * rng.uniform(0.7, 1.5)
        branches.append(
            GaussianBranch(
                x0=rng.uniform(-5.0, 5.0) * SIGMA0,
                p0=rng.uniform(-0.5, 0.5) * 1.0545718e-34 / SIGMA0,
                sigma_sq=complex(sigma**2, rng.uniform(-0.2, 0.2) * sigma**2),
                amp=0.5 * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi)),
            )
        )
    return tuple(branches)


def oracle_grid(branches, t):
    evolved = [evolve_branch(b, MASS, t) for b in branches]
    half = 3.0 * max(required_half_width(branches), required_half_width(evolved))
    kmax = max(required_kmax(branches), required_kmax(evolved))
    n = MIN_POINTS
    while math.pi / (2.0 * half / n) < 2.0 * kmax:
        n *= 2
    return -half, half, n


def test_spectral_propagation_matches_closed_form():
    rng = np.random.default_rng(20240611)
    t = 1.0
    for _ in range(50):
        branches = random_state(rng)
        if branches_norm(branches) < 1e-3:
            continue
        x_min, x_max, n = oracle_grid(branches, t)
        state = sample(branches, x_min, x_max, n)
        moved = propagate(state, MASS, t)
        closed = evaluate_branches([evolve_branch(b, MASS, t) for b in branches], moved.x)
        closed = closed / math.sqrt(branches_norm(branches))
        distance = math.sqrt(np.sum(np.abs(moved.psi - closed) ** 2) * moved.dx)
        assert distance < 1e-8



def l2_distance(first, second):
    return math.sqrt(np.sum(np.abs(first.psi - second.psi) ** 2) * first.dx)


def two_branch_state(t):
    branches = (
        GaussianBranch(-4.0 * SIGMA0, 0.3 * HBAR / SIGMA0, complex(SIGMA0**2, 0.0), amp=0.7),
        GaussianBranch(3.0 * SIGMA0, -0.2 * HBAR / SIGMA0, complex((1.2 * SIGMA0) ** 2, 0.0), amp=0.7j),
    )
    x_min, x_max, n = oracle_grid(branches, t)
    return branches, sample(branches, x_min, x_max, n)


def test_half_steps_compose_to_full_step():
    t = 2.0
    _, state = two_branch_state(t)
    direct = propagate(state, MASS, t)
    halves = propagate(propagate(state, MASS, 0.5 * t), MASS, 0.5 * t)
    assert halves.n == direct.n
    assert l2_distance(halves, direct) < 1e-10


def test_observables_converge_in_grid_size():
    t = 1.0
    branches, coarse = two_branch_state(t)
    fine = sample(branches, coarse.x_min, coarse.x_max, 2 * coarse.n)
    mean_coarse, var_coarse = propagate(coarse, MASS, t).moments()
    mean_fine, var_fine = propagate(fine, MASS, t).moments()
    assert abs(mean_fine - mean_coarse) < 1e-6 * math.sqrt(var_fine)
    assert var_coarse == pytest.approx(var_fine, rel=1e-6)


def test_boosted_packet_is_shifted_rest_packet():
    t = 1.0
    rest = GaussianBranch(0.0, 0.0, complex(SIGMA0**2, 0.0))
    trial = GaussianBranch(0.0, 0.5 * HBAR / SIGMA0, complex(SIGMA0**2, 0.0))
    x_min, x_max, n = oracle_grid([rest, trial], t)
    dx = (x_max - x_min) / n
    # velocity chosen so the drift over t is a whole number of grid steps
    steps = round(trial.p0 / MASS * t / dx)
    p0 = MASS * steps * dx / t
    boosted = GaussianBranch(0.0, p0, complex(SIGMA0**2, 0.0))

    moving = propagate(sample([boosted], x_min, x_max, n), MASS, t)
    still = propagate(sample([rest], x_min, x_max, n), MASS, t)
    expected = np.roll(still.psi, steps) * np.exp(1j * p0 * moving.x / HBAR)
    fidelity = abs(np.sum(np.conj(expected) * moving.psi) * dx)
    assert fidelity == pytest.approx(1.0, abs=1e-9)
    assert np.max(np.abs(moving.density - np.roll(still.density, steps))) < 1e-9 * still.density.max()


def test_mirror_symmetric_state_stays_symmetric():
    t = 1.5
    branches = (
        GaussianBranch(-5.0 * SIGMA0, 0.4 * HBAR / SIGMA0, complex(SIGMA0**2, 0.1 * SIGMA0**2), amp=0.7),
        GaussianBranch(5.0 * SIGMA0, -0.4 * HBAR / SIGMA0, complex(SIGMA0**2, 0.1 * SIGMA0**2), amp=0.7),
    )
    x_min, x_max, n = oracle_grid(branches, t)
    moved = propagate(sample(branches, x_min, x_max, n), MASS, t)
    # grid point j mirrors onto point n - j
    mirrored = np.roll(moved.psi[::-1], 1)
    assert np.max(np.abs(moved.psi - mirrored)) < 1e-9 * np.max(np.abs(moved.psi))


def test_refinement_interpolates_band_limited_state():
    branch = GaussianBranch(2e-9, 0.3 * HBAR / SIGMA0, complex(SIGMA0**2, 0.0))
    coarse = sample([branch], -2e-8, 2e-8, 2**10)
    fine = sample([branch], -2e-8, 2e-8, 2**12)
    refined = refine_array(coarse.psi, 4)
    assert refined.size == fine.n
    assert np.max(np.abs(refined[::4] - coarse.psi)) < 1e-10 * np.max(np.abs(coarse.psi))
    assert np.max(np.abs(refined - fine.psi)) < 1e-8 * np.max(np.abs(fine.psi))
    with pytest.raises(ScenarioValidationError):
        refine_array(coarse.psi, 0)

def test_sampled_state_is_normalized():
    branch = GaussianBranch(0.0, 0.0, complex(SIGMA0**2, 0.0))
    state = sample([branch], -2e-8, 2e-8, 2**12)
    assert state.norm == pytest.approx(1.0, abs=1e-12)
    mean, variance = state.moments()
    assert mean == pytest.approx(0.0, abs=1e-15)
    assert variance == pytest.approx(SIGMA0**2, rel=1e-9)


def test_boundary_leak_reports_required_width():
    branch = GaussianBranch(0.0, 0.0, complex(SIGMA0**2, 0.0))
    with pytest.raises(GridError) as info:
        sample([branch], -3e-9, 3e-9, 2**10)
    assert info.value.required_width > 6e-9


def test_coarse_grid_is_rejected():
    fast = GaussianBranch(0.0, 50.0 * 1.0545718e-34 / SIGMA0, complex(SIGMA0**2, 0.0))
    with pytest.raises(GridError, match="too coarse"):
        sample([fast], -2e-8, 2e-8, 2**8)


def test_wrap_around_rejected_without_padding():
    branch = GaussianBranch(0.0, 0.0, complex(SIGMA0**2, 0.0))
    state = sample([branch], -2e-8, 2e-8, 2**10)
    with pytest.raises(GridError, match="wrap-around"):
        propagate(state, MASS, 10.0)
    padded = propagate(state, MASS, 10.0, autopad=True)
    assert padded.n > state.n
    assert padded.dx == pytest.approx(state.dx)
    assert padded.norm == pytest.approx(1.0, abs=1e-9)


def test_pad_keeps_step_and_norm():
    branch = GaussianBranch(1e-9, 0.0, complex(SIGMA0**2, 0.0))
    state = sample([branch], -2e-8, 2e-8, 2**10)
    wider = pad(state, 2**12)
    assert wider.n == 2**12
    assert wider.dx == pytest.approx(state.dx)
    assert wider.norm == pytest.approx(state.norm)
    assert wider.moments()[0] == pytest.approx(state.moments()[0], abs=1e-15)
    with pytest.raises(ScenarioValidationError):
        pad(state, 3000)


def test_propagate_time_checks():
    branch = GaussianBranch(0.0, 0.0, complex(SIGMA0**2, 0.0))
    state = sample([branch], -2e-8, 2e-8, 2**10)
    assert propagate(state, MASS, 0.0) is state
    with pytest.raises(ScenarioValidationError):
        propagate(state, MASS, -1.0)


def test_grid_state_validation():
    with pytest.raises(ScenarioValidationError, match="power of two"):
        GridState(0.0, 1.0, np.ones(300, complex))
    with pytest.raises(ScenarioValidationError, match="not normalized"):
        GridState(0.0, 1.0, 2.0 * np.ones(256, complex))


def test_default_grid_covers_final_envelope():
    branch = GaussianBranch(0.0, 0.0, complex(SIGMA0**2, 0.0))
    x_min, x_max, n = default_grid([branch], MASS, 1.0)
    final = evolve_branch(branch, MASS, 1.0)
    assert x_max - x_min >= 16.0 * final.sigma
    assert n >= 2**14 and not n & (n - 1)


def test_momentum_density_sums_to_one():
    branch = GaussianBranch(0.0, 0.0, complex(SIGMA0**2, 0.0))
    state = sample([branch], -2e-8, 2e-8, 2**10)
    assert state.momentum_density().sum() == pytest.approx(1.0)


def test_csv_export_has_header_and_lf():
    branch = GaussianBranch(0.0, 0.0, complex(SIGMA0**2, 0.0))
    state = sample([branch], -2e-8, 2e-8, 2**8)
    text = state.to_csv()
    lines = text.split("\n")
    assert lines[0] == "x,density"
    assert len(lines) == 2**8 + 2 and lines[-1] == ""
    assert "\r" not in text
