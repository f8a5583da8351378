import copy

import pytest

from decide_interference.config.defaults import BASELINE_SCENARIO
from decide_interference.core import Particle
from decide_interference.interference import DetectionSettings
from decide_interference.scenario import load_scenario


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks")


@pytest.fixture
def baseline_document():
    return copy.deepcopy(BASELINE_SCENARIO)


@pytest.fixture
def baseline_scenario(baseline_document):
    scenario, _, _ = load_scenario(baseline_document)
    return scenario


@pytest.fixture
def silica_particle():
    return Particle(radius=1e-7, density=2300.0, eps_trap=2.1, eps_bb=complex(2.1, 0.57), internal_temperature=10.0)


@pytest.fixture
def small_document():
    """
    Light particle and short free fall: the detected pattern fits on a
    2^15-point grid, so full runs take well under a second.
    """
    return {
        "particle": {"radius": "20 nm", "internal_temperature": "10 K"},
        "environment": {"temperature": "10 K", "pressure": 0},
        "trap": {"omega": "63000 rad/s"},
        "protocol": {
            "t1": "10 s",
            "t2": "20 s",
            "delta_x": "100 nm",
            "x2": {"sigma_m": "0.1 nm"},
        },
        "collapse": {"csl_enabled": False, "dp_enabled": False, "k_enabled": False},
        "detection": {"readout_blur": 0},
        "decoherence": {"channels": []},
    }


@pytest.fixture
def small_scenario(small_document):
    scenario, _, _ = load_scenario(small_document)
    return scenario


@pytest.fixture
def sharp_detection():
    return DetectionSettings(readout_blur=0.0, grid_points=2**14)
