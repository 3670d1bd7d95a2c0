"""Self-consistent sum-of-squares lower bounds for fermionic Hamiltonians."""

from .driver import SolveResult, SolverConfig, solve
from .errors import SosError
from .models import ModelSpec, gaussian_model, singlet_hopping_model, two_orbital_singlet
from .operators import SpinfulHamiltonian, SpinlessTerm, TauTensor, direct_sum, hermitize, rotate

__all__ = [
    "ModelSpec",
    "SolveResult",
    "SolverConfig",
    "SosError",
    "SpinfulHamiltonian",
    "SpinlessTerm",
    "TauTensor",
    "direct_sum",
    "gaussian_model",
    "hermitize",
    "rotate",
    "singlet_hopping_model",
    "solve",
    "two_orbital_singlet",
]
