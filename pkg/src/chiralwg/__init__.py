"""Qubit-controlled directional edge states in port-coupled Rice-Mele waveguides."""
from .lattice import (
    EffectiveHamiltonian,
    LatticeSpec,
    PortSet,
    SiteGraph,
    attach_ports,
    build_four_site,
    build_ssh_chain,
    build_three_level,
    build_y_coupler,
)

__version__ = "0.1.0"
