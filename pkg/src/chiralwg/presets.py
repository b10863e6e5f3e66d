"""Reference parameter sets and ready-made run configurations."""
from __future__ import annotations

import copy

from .lattice import LatticeSpec

MHz = 1e6

PSTD = LatticeSpec(p=10, V=37.5 * MHz, t1=120 * MHz, t2=150 * MHz, tQ=62.5 * MHz, VQ=-37.5 * MHz)
CQ1 = LatticeSpec(p=4, V=37.5 * MHz, t1=110 * MHz, t2=150 * MHz, tQ=75 * MHz, VQ=0.0)
CQ2 = LatticeSpec(p=4, V=15 * MHz, t1=60 * MHz, t2=48 * MHz, tQ=30 * MHz, VQ=0.0)

CQ_F0 = 7e9
CQ_L0 = 1e-9

_CIRCUIT = {
    "f0_Hz": CQ_F0,
    "L0_H": CQ_L0,
    "probe": "high_impedance",
    "verify": True,
    "step_Hz": 1e4,
}

PRESETS = {
    # Y-coupler spectrum with the qubit tuned to -V, plus a VQ sweep window
    "fig1c": {
        "lattice": PSTD.to_config(),
        "sweep": {"kind": "vq", "start": -2 * PSTD.V, "stop": 2 * PSTD.V, "points": 81},
    },
    # equal ports on both chain ends, broadening swept at the edge-state pole
    "fig2": {
        "lattice": PSTD.to_config(),
        "ports": [{"site": 1, "gamma_Hz": 12.5 * MHz}, {"site": 43, "gamma_Hz": 12.5 * MHz}],
        "omega_Hz": -PSTD.V,
        "sweep": {"kind": "gamma", "start": 12.5 * MHz, "stop": 125e9, "points": 30, "scale": "log"},
    },
    "spice1": {"lattice": CQ1.to_config(), "circuit": dict(_CIRCUIT)},
    "spice2": {"lattice": CQ2.to_config(), "circuit": dict(_CIRCUIT)},
    # qubit resonator shares the fabrication spread in both disorder presets
    # circuit-derived ports (20 fF, 50 Ohm) on the PSTD chain
    "disorder-ports": {
        "lattice": PSTD.to_config(),
        "disorder": {
            "sigma_rel": 0.01, "n_samples": 10000, "distribution": "gaussian", "seed": 2024,
            "vary_qubit": True,
            "circuit_ports": {"f0_Hz": CQ_F0, "L0_H": CQ_L0, "c_F": 20e-15, "R_ohm": 50.0,
                              "convention": "angular_half_kappa"},
        },
    },
    "disorder-portless": {
        "lattice": PSTD.to_config(),
        "disorder": {"sigma_rel": 0.01, "n_samples": 10000, "distribution": "gaussian", "seed": 2024,
                     "vary_qubit": True},
    },
}


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise KeyError(name)
    return copy.deepcopy(PRESETS[name])
