"""Hamiltonian assembly and closed-form dispersive-shift predictors.

Inputs are linear frequencies in GHz; assembled matrices are angular, in
rad/ns (hbar = 1), so ``exp(-1j * H * t)`` takes ``t`` in nanoseconds.

Each qubit transition ``i <-> i+1`` couples to a resonator through
``2*pi*g_i * (a + a^dag)(|i+1><i| + |i><i+1|)``. With ``rwa=True`` only the
excitation-conserving part ``2*pi*g_i * (a |i+1><i| + a^dag |i><i+1|)`` is
kept.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DomainError, InputError
from .hilbert import ModeKind, ModeSpec, Operator, kron_factors

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CouplingSpec:
    """Capacitive coupling between one qubit and one resonator."""

    qubit_index: int
    resonator_index: int
    g_per_transition: tuple[float, ...]
    rwa: bool = False

    def __post_init__(self):
        object.__setattr__(self, "g_per_transition", tuple(float(g) for g in self.g_per_transition))
        for g in self.g_per_transition:
            if not math.isfinite(g) or g < 0:
                raise InputError(f"couplings must be finite and >= 0, got {g}")


@dataclass(frozen=True)
class SystemSpec:
    """Ordered modes plus qubit-resonator couplings.

    Qubits never couple to each other directly; the only interactions are
    the listed qubit-resonator terms.
    """

    modes: tuple[ModeSpec, ...]
    couplings: tuple[CouplingSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if not self.modes:
            raise InputError("a system needs at least one mode")
        seen = set()
        n = len(self.modes)
        for c in self.couplings:
            if not (0 <= c.qubit_index < n and 0 <= c.resonator_index < n):
                raise InputError(f"coupling indices out of range: {c}")
            q, r = self.modes[c.qubit_index], self.modes[c.resonator_index]
            if q.kind is not ModeKind.QUBIT or r.kind is not ModeKind.RESONATOR:
                raise InputError(
                    f"coupling must join a qubit to a resonator, got modes "
                    f"{c.qubit_index} ({q.kind.value}) and {c.resonator_index} ({r.kind.value})"
                )
            if len(c.g_per_transition) != q.dim - 1:
                raise InputError(
                    f"qubit {c.qubit_index} has {q.dim - 1} transitions but coupling lists "
                    f"{len(c.g_per_transition)} strengths"
                )
            key = (c.qubit_index, c.resonator_index)
            if key in seen:
                raise InputError(f"duplicate coupling for qubit/resonator pair {key}")
            seen.add(key)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.modes)

    @property
    def qubit_indices(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.modes) if m.kind is ModeKind.QUBIT)

    @property
    def resonator_indices(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.modes) if m.kind is ModeKind.RESONATOR)

    def coupling(self, qubit_index: int, resonator_index: int) -> CouplingSpec | None:
        for c in self.couplings:
            if c.qubit_index == qubit_index and c.resonator_index == resonator_index:
                return c
        return None

    def index_of(self, name: str) -> int:
        for i, m in enumerate(self.modes):
            if m.name == name:
                return i
        raise InputError(f"no mode named {name!r}")

    def with_cutoff(self, cutoff: int) -> "SystemSpec":
        """Copy with every resonator truncated to Fock states ``0..cutoff``."""
        modes = tuple(
            replace(m, dim=cutoff + 1) if m.is_resonator else m for m in self.modes
        )
        return SystemSpec(modes, self.couplings)

    def with_qubit_freqs(self, qubit_index: int, freqs: Sequence[float]) -> "SystemSpec":
        mode = self.modes[qubit_index]
        if mode.kind is not ModeKind.QUBIT:
            raise InputError(f"mode {qubit_index} is not a qubit")
        modes = list(self.modes)
        modes[qubit_index] = replace(mode, level_freqs=tuple(freqs))
        return SystemSpec(tuple(modes), self.couplings)

    def with_coupling(self, qubit_index: int, resonator_index: int,
                      g_per_transition: Sequence[float], rwa: bool | None = None) -> "SystemSpec":
        """Copy with the given pair's coupling replaced (or added)."""
        old = self.coupling(qubit_index, resonator_index)
        if rwa is None:
            rwa = old.rwa if old is not None else False
        new = CouplingSpec(qubit_index, resonator_index, tuple(g_per_transition), rwa)
        kept = [c for c in self.couplings if c is not old]
        return SystemSpec(self.modes, tuple(kept) + (new,))


def build_hamiltonian(spec: SystemSpec) -> Operator:
    """Full Hamiltonian of ``spec`` in rad/ns, tagged Hermitian."""
    if not isinstance(spec, SystemSpec):
        raise InputError(f"expected a SystemSpec, got {type(spec).__name__}")
    dims = spec.dims
    side = math.prod(dims)
    # every term is real in this basis
    diag = np.zeros(side)
    for k, mode in enumerate(spec.modes):
        energies = TWO_PI * mode.level_energies()
        diag += np.diag(kron_factors({k: np.diag(energies)}, dims))
    h = np.diag(diag)

    for c in spec.couplings:
        d_q = spec.modes[c.qubit_index].dim
        d_r = spec.modes[c.resonator_index].dim
        a = np.diag(np.sqrt(np.arange(1, d_r, dtype=float)), k=1)
        for i, g in enumerate(c.g_per_transition):
            if g == 0.0:
                continue
            up = np.zeros((d_q, d_q))
            up[i + 1, i] = 1.0
            if c.rwa:
                term = kron_factors({c.resonator_index: a, c.qubit_index: up}, dims)
                term = term + term.T
            else:
                term = kron_factors(
                    {c.resonator_index: a + a.T, c.qubit_index: up + up.T}, dims
                )
            h += TWO_PI * g * term
    return Operator(dims, h, hermitian=True)


def excitation_number(spec: SystemSpec) -> Operator:
    """Total excitation count: photons plus qubit level indices."""
    dims = spec.dims
    diag = np.zeros(math.prod(dims))
    for k, mode in enumerate(spec.modes):
        diag += np.diag(kron_factors({k: np.diag(np.arange(mode.dim, dtype=float))}, dims))
    return Operator(dims, np.diag(diag), hermitian=True)


def _detuning(nu_r: float, nu_q: float) -> float:
    delta = nu_r - nu_q
    if delta == 0:
        raise DomainError("qubit and resonator are degenerate; the dispersive frame is undefined")
    return delta


def dispersive_qubit_frequency(nu_q: float, nu_r: float, g: float, n: int) -> float:
    """Photon-number-dependent qubit frequency ``nu_q + (g**2/delta)(2n + 1)``.

    ``delta = nu_r - nu_q``. All arguments and the result are in GHz.
    """
    if n < 0:
        raise InputError(f"photon number must be >= 0, got {n}")
    return nu_q + g * g / _detuning(nu_r, nu_q) * (2 * n + 1)


def dispersive_resonator_frequency(nu_r: float, nu_q: float, g: float, qubit_state: int) -> float:
    """Qubit-state-dependent resonator frequency ``nu_r + s * g**2/delta``.

    ``delta = nu_r - nu_q`` and ``s`` is the sigma_z eigenvalue: +1 for
    ``|1>``, -1 for ``|0>``.

    Note the sign: exact diagonalization puts the ``|0>``-conditioned
    resonator line at ``nu_r - g**2/|delta|`` whenever the qubit sits above
    the resonator (``delta < 0``), i.e. on the opposite side from this
    expression. Use :func:`srqed.gates.find_resonance` when the actual
    resonance location matters.
    """
    return qsd_shifted_frequency(nu_r, [g * g / _detuning(nu_r, nu_q)], [qubit_state])


def qsd_shifted_frequency(nu_r: float, chi: Sequence[float], states: Sequence[int]) -> float:
    """Resonator frequency shifted by several qubits: ``nu_r + sum(s_i * chi_i)``.

    ``chi`` is supplied by the caller in GHz; ``states`` are 0 or 1.
    """
    if len(chi) != len(states):
        raise InputError(f"chi has {len(chi)} entries but states has {len(states)}")
    total = nu_r
    for x, s in zip(chi, states):
        if s not in (0, 1):
            raise InputError(f"qubit states must be 0 or 1, got {s}")
        total += (1 if s == 1 else -1) * x
    return total
