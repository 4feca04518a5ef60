"""Painleve equations in Calogero form: elliptic kernel, dynamics, Lax pairs,
the quantum correspondence and wave transport, with certification suites."""

from .config import RunConfig, default_config, load_config, parse_config
from .dynamics import CalogeroState, Trajectory, hamiltonian, integrate, potential
from .errors import PCLError
from .params import PainleveKind, make_params

__all__ = [
    "CalogeroState",
    "PCLError",
    "PainleveKind",
    "RunConfig",
    "Trajectory",
    "default_config",
    "hamiltonian",
    "integrate",
    "load_config",
    "make_params",
    "parse_config",
    "potential",
]
