from ..core import CONSTANTS

app_name = "decide_interference"
app_title = "DECIDE Interference Simulator"
app_publisher = "decide_interference contributors"
app_description = "Matter-wave double-slit simulation of an optically trapped nanosphere with decoherence and collapse-model predictions"
app_license = "MIT"

# Values the scenario loader fills in when a key is absent.
# Every applied entry is echoed under metadata.defaults in the output.
DEFAULTS = {
    # fused silica
    "particle.density": 2300.0,
    "particle.eps_trap": complex(2.1, 0.0),
    "particle.eps_bb": complex(2.1, 0.57),
    # "environment" means thermal equilibrium with the surroundings
    "particle.internal_temperature": "environment",
    "environment.pressure": 0.0,
    "environment.gas_mass": 2.0 * CONSTANTS.amu,
    "trap.wavelength": 1.064e-6,
    "trap.intensity": 1e9,
    "protocol.method": "x2",
    "protocol.phase_jitter": 0.0,
    "protocol.separation_model": "slit",
    # half the slit separation
    "protocol.x2.position": "delta_x/2",
    "protocol.scatter.eps_scatter": None,
    "protocol.scatter.cross_section": None,
    "protocol.scatter.localized_width": "waist",
    # GRW values
    "collapse.csl_lambda": 1e-16,
    "collapse.csl_rc": 1e-7,
    "collapse.csl_enabled": True,
    "collapse.dp_enabled": True,
    "collapse.dp_cutoff": None,
    "collapse.k_enabled": True,
    # None means 1/10 of the ideal fringe spacing
    "detection.readout_blur": None,
    "detection.grid_points": 2**14,
    "detection.span": 8.0,
    "detection.shots": 0,
    "detection.repeats": 16,
    "decoherence.channels": ["bb-scatter", "bb-absorb", "bb-emit", "gas"],
    "decoherence.bulk_absorption": None,
    "visibility_threshold": None,
}

# Requirement axes: default search brackets (SI)
AXIS_BRACKETS = {
    "env-temp": (1.0, 100.0),
    "internal-temp": (1.0, 100.0),
    "pressure": (1e-17, 1e-9),
    "csl-lambda": (1e-22, 1e-6),
}

THRUSTER = {
    "force_noise": 1e-6,
    "spacecraft_mass": 700.0,
    "quoted_bound": 1.6e-9,
    "discrepancy_flag": 0.05,
}

# R = 100 nm fused silica, 100 nm slit, t1 = 1 s, t2 = 100 s.
# sigma_m keeps the drifting branches overlapped at detection.
BASELINE_SCENARIO = {
    "particle": {
        "radius": "100 nm",
        "density": "2300 kg/m3",
        "eps_trap": "2.1",
        "eps_bb": "2.1+0.57i",
        "internal_temperature": "10 K",
    },
    "environment": {
        "temperature": "10 K",
        "pressure": "1e-13 Pa",
        "gas_mass": "2 amu",
    },
    "trap": {
        "omega": "63000 rad/s",
        "wavelength": "1064 nm",
        "intensity": "1e9 W/m2",
    },
    "protocol": {
        "t1": "1 s",
        "t2": "100 s",
        "delta_x": "100 nm",
        "method": "x2",
        "x2": {"sigma_m": "2 pm"},
    },
    "collapse": {
        "csl_enabled": False,
        "dp_enabled": True,
        "k_enabled": True,
    },
}
