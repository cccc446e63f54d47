"""State-vector simulation of selective-resonance gates in circuit QED.

Frequencies and couplings enter in GHz (linear), times in ns; Hamiltonians
are assembled in rad/ns with hbar = 1.
"""
from .errors import (ConfigError, DomainError, InputError, NumericalError,
                     ProtocolConstraintError, SrqedError)
from .hamiltonian import CouplingSpec, SystemSpec, build_hamiltonian
from .hilbert import ModeKind, ModeSpec, Operator, StateVector, basis_index, basis_label, basis_state

__all__ = [
    "ConfigError", "DomainError", "InputError", "NumericalError", "ProtocolConstraintError",
    "SrqedError", "CouplingSpec", "SystemSpec", "build_hamiltonian", "ModeKind", "ModeSpec",
    "Operator", "StateVector", "basis_index", "basis_label", "basis_state",
]
__version__ = "0.1.0"
