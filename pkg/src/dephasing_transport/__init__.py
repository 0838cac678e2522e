"""Dephasing-assisted excitation transport through dissipative quantum networks."""

__version__ = "0.1.0"

from .network import (
    NetworkSpec,
    SpecError,
    build_hamiltonian,
    build_liouvillian,
    initial_state,
)
from .presets import fmo_preset, linear_chain
from .propagate import (
    IntegrationError,
    NonConvergentError,
    Trajectory,
    evolve,
    p_sink_at,
    p_sink_infinite,
)

__all__ = [
    "NetworkSpec",
    "SpecError",
    "build_hamiltonian",
    "build_liouvillian",
    "initial_state",
    "fmo_preset",
    "linear_chain",
    "Trajectory",
    "IntegrationError",
    "NonConvergentError",
    "evolve",
    "p_sink_at",
    "p_sink_infinite",
]
