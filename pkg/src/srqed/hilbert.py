"""Tensor-product bases and elementary operators.

Basis convention: row-major mixed radix with mode 0 most significant, i.e.
the same ordering ``numpy.kron`` produces when factors are listed in mode
order. Every matrix in the package uses this ordering.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-10


class ModeKind(str, enum.Enum):
    RESONATOR = "resonator"
    QUBIT = "qubit"


@dataclass(frozen=True)
class ModeSpec:
    """One subsystem of the circuit.

    For a resonator ``dim`` is the Fock cutoff plus one and ``level_freqs``
    holds the single fundamental frequency. For a qubit ``dim`` is the number
    of levels and ``level_freqs`` the ``dim - 1`` transition frequencies
    between neighbouring levels. All frequencies are linear, in GHz.
    """

    kind: ModeKind
    dim: int
    level_freqs: tuple[float, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        object.__setattr__(self, "level_freqs", tuple(float(f) for f in self.level_freqs))
        if int(self.dim) != self.dim or self.dim < 2:
            raise InputError(f"mode dim must be an integer >= 2, got {self.dim}")
        expected = 1 if self.kind is ModeKind.RESONATOR else self.dim - 1
        if len(self.level_freqs) != expected:
            raise InputError(
                f"{self.kind.value} of dim {self.dim} needs {expected} frequencies, "
                f"got {len(self.level_freqs)}"
            )
        for f in self.level_freqs:
            if not math.isfinite(f) or f <= 0:
                raise InputError(f"frequencies must be finite and positive, got {f}")

    @classmethod
    def resonator(cls, freq_ghz: float, cutoff: int = 3, name: str = "") -> "ModeSpec":
        """Resonator keeping Fock states ``0..cutoff``."""
        return cls(ModeKind.RESONATOR, cutoff + 1, (freq_ghz,), name)

    @classmethod
    def qubit(cls, transition_freqs_ghz: Sequence[float], name: str = "") -> "ModeSpec":
        """Qubit with ``len(transition_freqs_ghz) + 1`` levels."""
        freqs = tuple(transition_freqs_ghz)
        return cls(ModeKind.QUBIT, len(freqs) + 1, freqs, name)

    @property
    def is_resonator(self) -> bool:
        return self.kind is ModeKind.RESONATOR

    def level_energies(self) -> np.ndarray:
        """Level energies in GHz (linear), ground level anchored at zero."""
        if self.is_resonator:
            return self.level_freqs[0] * np.arange(self.dim, dtype=float)
        return np.concatenate([[0.0], np.cumsum(self.level_freqs)])


def _as_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise InputError(f"invalid dims {dims}")
    return dims


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense square matrix tagged with the per-mode dimensions of its basis."""

    dims: tuple[int, ...]
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        dims = _as_dims(self.dims)
        object.__setattr__(self, "dims", dims)
        mat = _frozen(self.matrix)
        side = math.prod(dims)
        if mat.shape != (side, side):
            raise InputError(f"matrix shape {mat.shape} does not match dims {dims}")
        if self.hermitian and hermiticity_error(mat) >= HERMITIAN_TOL:
            raise InputError("matrix tagged Hermitian is not Hermitian")
        object.__setattr__(self, "matrix", mat)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.dims, self.matrix.conj().T, self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise InputError(f"dims mismatch {self.dims} vs {other.dims}")
            return Operator(self.dims, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            if other.dims != self.dims:
                raise InputError(f"dims mismatch {self.dims} vs {other.dims}")
            return StateVector(self.dims, self.matrix @ other.amplitudes, normalize=True)
        return NotImplemented

    def __add__(self, other: "Operator") -> "Operator":
        if other.dims != self.dims:
            raise InputError(f"dims mismatch {self.dims} vs {other.dims}")
        return Operator(self.dims, self.matrix + other.matrix, self.hermitian and other.hermitian)


def hermiticity_error(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector over the tensor-product basis.

    Pass ``normalize=True`` to rescale arbitrary (non-zero) amplitudes;
    otherwise the norm must already be 1 within ``NORM_TOL``.
    """

    dims: tuple[int, ...]
    amplitudes: np.ndarray
    normalize: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        dims = _as_dims(self.dims)
        object.__setattr__(self, "dims", dims)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != math.prod(dims):
            raise InputError(f"{amps.shape[0]} amplitudes do not match dims {dims}")
        norm = float(np.linalg.norm(amps))
        if self.normalize:
            if norm == 0 or not math.isfinite(norm):
                raise InputError("cannot normalize a zero or non-finite vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise InputError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        if other.dims != self.dims:
            raise InputError(f"dims mismatch {self.dims} vs {other.dims}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probability(self, label: Sequence[int]) -> float:
        return float(abs(self.amplitudes[basis_index(label, self.dims)]) ** 2)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def basis_index(label: Sequence[int], dims: Sequence[int]) -> int:
    """Flat index of the product state ``label`` (mode 0 most significant)."""
    dims = _as_dims(dims)
    label = tuple(label)
    if len(label) != len(dims):
        raise InputError(f"label {label} has {len(label)} entries, dims has {len(dims)}")
    index = 0
    for occ, d in zip(label, dims):
        if int(occ) != occ or not 0 <= occ < d:
            raise InputError(f"occupation {occ} out of range for mode of dim {d}")
        index = index * d + int(occ)
    return index


def basis_label(index: int, dims: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`basis_index`."""
    dims = _as_dims(dims)
    if int(index) != index or not 0 <= index < math.prod(dims):
        raise InputError(f"index {index} out of range for dims {dims}")
    index = int(index)
    out = []
    for d in reversed(dims):
        index, occ = divmod(index, d)
        out.append(occ)
    return tuple(reversed(out))


def basis_state(label: Sequence[int], dims: Sequence[int]) -> StateVector:
    dims = _as_dims(dims)
    amps = np.zeros(math.prod(dims), dtype=complex)
    amps[basis_index(label, dims)] = 1.0
    return StateVector(dims, amps)


def superposition(labels: Sequence[Sequence[int]], dims: Sequence[int],
                  coeffs: Sequence[complex] | None = None) -> StateVector:
    """Normalized sum of product states, equal weights unless ``coeffs`` given."""
    dims = _as_dims(dims)
    if coeffs is None:
        coeffs = [1.0] * len(labels)
    if len(coeffs) != len(labels):
        raise InputError("labels and coeffs differ in length")
    amps = np.zeros(math.prod(dims), dtype=complex)
    for lab, c in zip(labels, coeffs):
        amps[basis_index(lab, dims)] += c
    return StateVector(dims, amps, normalize=True)


def annihilation_op(cutoff_dim: int) -> Operator:
    """Truncated bosonic lowering operator on ``cutoff_dim`` Fock states."""
    if int(cutoff_dim) != cutoff_dim or cutoff_dim < 2:
        raise InputError(f"cutoff_dim must be an integer >= 2, got {cutoff_dim}")
    mat = np.diag(np.sqrt(np.arange(1, cutoff_dim, dtype=float)), k=1)
    return Operator((cutoff_dim,), mat)


def transition_op(dim: int, i: int, j: int) -> Operator:
    """The level-transition operator ``|i><j|``."""
    if int(dim) != dim or dim < 1:
        raise InputError(f"invalid dim {dim}")
    if not (0 <= i < dim and 0 <= j < dim):
        raise InputError(f"levels ({i}, {j}) out of range for dim {dim}")
    mat = np.zeros((dim, dim))
    mat[i, j] = 1.0
    return Operator((dim,), mat)


def identity_op(dims: Sequence[int]) -> Operator:
    dims = _as_dims(dims)
    return Operator(dims, np.eye(math.prod(dims)), hermitian=True)


def kron_factors(local: Mapping[int, np.ndarray], dims: Sequence[int]) -> np.ndarray:
    """Raw Kronecker product with ``local[k]`` on mode ``k`` and identities elsewhere.

    Builds a product of operators on distinct modes without any full-space
    matrix multiplication, which keeps Hamiltonian assembly cheap.
    """
    dims = _as_dims(dims)
    factors = []
    for k, d in enumerate(dims):
        m = local.get(k)
        if m is None:
            factors.append(np.eye(d))
            continue
        m = np.asarray(m)
        if m.shape != (d, d):
            raise InputError(f"operator of shape {m.shape} does not fit mode {k} of dim {d}")
        factors.append(m)
    bad = set(local) - set(range(len(dims)))
    if bad:
        raise InputError(f"mode indices {sorted(bad)} out of range")
    return reduce(np.kron, factors)


def embed(op: Operator, mode_index: int, dims: Sequence[int]) -> Operator:
    """Lift a single-mode operator into the full product space."""
    dims = _as_dims(dims)
    if not 0 <= mode_index < len(dims):
        raise InputError(f"mode_index {mode_index} out of range for {len(dims)} modes")
    if op.dims != (dims[mode_index],):
        raise InputError(f"operator dims {op.dims} do not match mode dim {dims[mode_index]}")
    return Operator(dims, kron_factors({mode_index: op.matrix}, dims), op.hermitian)


CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class Convergence:
    cutoff: int
    value: float
    reference_cutoff: int
    reference_value: float

    @property
    def delta(self) -> float:
        return abs(self.reference_value - self.value)

    def converged(self, tol: float = CONVERGENCE_TOL) -> bool:
        return self.delta < tol


def check_convergence(observable, cutoff: int = 3, step: int = 2) -> Convergence:
    """Evaluate ``observable(cutoff)`` and ``observable(cutoff + step)``.

    ``observable`` maps a resonator Fock cutoff to a real number. The
    truncation is considered adequate when the two values differ by less
    than :data:`CONVERGENCE_TOL` (see :meth:`Convergence.converged`).
    """
    if int(cutoff) != cutoff or cutoff < 1 or int(step) != step or step < 1:
        raise InputError(f"cutoff and step must be positive integers, got {cutoff}, {step}")
    return Convergence(cutoff, float(observable(cutoff)), cutoff + step, float(observable(cutoff + step)))
