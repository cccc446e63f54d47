"""Exact closed-system time evolution.

Every Hamiltonian handled here is time independent, so a single Hermitian
eigendecomposition ``H = V diag(w) V^dag`` gives the state at any time as
``V (exp(-1j*w*t) * (V^dag psi0))``. :class:`Eigensystem` holds that
factorization and is shared read-only by all the routines below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InputError, NumericalError
from .hilbert import HERMITIAN_TOL, Operator, StateVector, hermiticity_error

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# state samples per chunk when materialising full trajectories
_CHUNK = 256
TIE_TOL = 1e-12


class Eigensystem:
    """Eigendecomposition of a Hermitian operator, computed once."""

    def __init__(self, H: Operator):
        if not isinstance(H, Operator):
            raise InputError(f"expected an Operator, got {type(H).__name__}")
        mat = H.matrix
        if not H.hermitian and hermiticity_error(mat) >= HERMITIAN_TOL:
            raise InputError("propagation requires a Hermitian operator")
        if not np.any(mat.imag):
            w, v = np.linalg.eigh(mat.real)
        else:
            w, v = np.linalg.eigh(mat)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
            raise NumericalError("eigendecomposition produced non-finite values")
        w.setflags(write=False)
        v.setflags(write=False)
        self.dims = H.dims
        self.energies = w
        self.vectors = v

    def coefficients(self, psi: StateVector) -> np.ndarray:
        """Components of ``psi`` in the eigenbasis."""
        self._check(psi)
        return self.vectors.conj().T @ psi.amplitudes

    def amplitudes(self, target: StateVector, psi0: StateVector, times) -> np.ndarray:
        """``<target| exp(-iHt) |psi0>`` for every ``t`` in ``times``."""
        weights = np.conj(self.coefficients(target)) * self.coefficients(psi0)
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return np.exp(-1j * np.outer(times, self.energies)) @ weights

    def probabilities(self, target: StateVector, psi0: StateVector, times) -> np.ndarray:
        return np.abs(self.amplitudes(target, psi0, times)) ** 2

    def states(self, psi0: StateVector, times) -> np.ndarray:
        """Full state vectors, one row per time."""
        c0 = self.coefficients(psi0)
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty((times.size, c0.size), dtype=complex)
        for s in range(0, times.size, _CHUNK):
            phases = np.exp(-1j * np.outer(times[s:s + _CHUNK], self.energies))
            out[s:s + _CHUNK] = (phases * c0) @ self.vectors.T
        return out

    def evolve_state(self, psi0: StateVector, t: float) -> StateVector:
        amps = self.states(psi0, [t])[0]
        return StateVector(self.dims, amps, normalize=True)

    def propagator_matrix(self, t: float) -> np.ndarray:
        return (self.vectors * np.exp(-1j * self.energies * t)) @ self.vectors.conj().T

    def _check(self, psi: StateVector):
        if psi.dims != self.dims:
            raise InputError(f"state dims {psi.dims} do not match operator dims {self.dims}")


def _eig(H: Operator | Eigensystem) -> Eigensystem:
    return H if isinstance(H, Eigensystem) else Eigensystem(H)


def propagator(H: Operator | Eigensystem, t: float) -> Operator:
    """``exp(-1j*H*t)`` with ``H`` in rad/ns and ``t`` in ns."""
    eig = _eig(H)
    return Operator(eig.dims, eig.propagator_matrix(float(t)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    probabilities: dict[str, np.ndarray]
    final_state: StateVector
    norms: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.probabilities[name]


def _named_targets(targets) -> dict[str, StateVector]:
    if isinstance(targets, Mapping):
        return dict(targets)
    return {f"target_{k}": t for k, t in enumerate(targets)}


def evolve(H: Operator | Eigensystem, psi0: StateVector, times: Sequence[float],
           targets: Sequence[StateVector] | Mapping[str, StateVector]) -> Trajectory:
    """Overlap probabilities ``|<target|psi(t)>|^2`` sampled at ``times``.

    ``targets`` may be a sequence (named ``target_0``, ``target_1``, ...) or
    a mapping of column names to states.
    """
    eig = _eig(H)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InputError("times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) < 0):
        raise InputError("times must be sorted ascending")
    named = _named_targets(targets)
    for t in named.values():
        eig._check(t)
    states = eig.states(psi0, times)
    norms = np.linalg.norm(states, axis=1)
    if not np.all(np.isfinite(norms)):
        raise NumericalError("evolution produced non-finite amplitudes")
    probs = {
        name: np.clip(np.abs(states @ tgt.amplitudes.conj()) ** 2, 0.0, 1.0)
        for name, tgt in named.items()
    }
    final = StateVector(eig.dims, states[-1], normalize=True)
    return Trajectory(times, probs, final, norms)


def transition_probability(H: Operator | Eigensystem, psi0: StateVector,
                           target: StateVector, t: float) -> float:
    p = _eig(H).probabilities(target, psi0, [t])[0]
    return float(min(max(p, 0.0), 1.0))


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-4) -> tuple[float, float]:
    """Maximize ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    Assumes ``f`` is unimodal on the bracket. The endpoints are not
    evaluated.
    """
    if hi < lo:
        lo, hi = hi, lo
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def maev(H: Operator | Eigensystem, psi0: StateVector, target: StateVector,
         t_max: float, dt: float = 0.01, tol: float = 1e-4) -> tuple[float, float]:
    """Maximal transition probability over ``(0, t_max]`` and where it occurs.

    The grid ``dt, 2dt, ..., t_max`` is searched first (earliest time wins a
    tie); the best grid point is then refined by golden-section search over
    ``+-dt`` to ``tol`` ns. The refined point only replaces the grid point
    when it is strictly better.
    """
    if not dt > 0:
        raise InputError(f"dt must be positive, got {dt}")
    if not t_max >= dt:
        raise InputError(f"t_max ({t_max}) must be >= dt ({dt})")
    eig = _eig(H)
    weights = np.conj(eig.coefficients(target)) * eig.coefficients(psi0)
    energies = eig.energies

    def prob(times):
        amps = np.exp(-1j * np.outer(np.atleast_1d(times), energies)) @ weights
        return np.abs(amps) ** 2

    n = int(math.floor(t_max / dt + 1e-9))
    grid = dt * np.arange(1, n + 1)
    p = np.concatenate([prob(grid[s:s + 4096]) for s in range(0, grid.size, 4096)])
    if not np.all(np.isfinite(p)):
        raise NumericalError("transition probability is not finite")
    # values equal up to rounding count as a tie
    k = int(np.flatnonzero(p >= p.max() - TIE_TOL)[0])
    best_p, best_t = float(p[k]), float(grid[k])

    lo, hi = max(best_t - dt, 0.0), min(best_t + dt, t_max)
    t_ref, p_ref = golden_section_max(lambda t: float(prob(t)[0]), lo, hi, tol)
    if p_ref > best_p + TIE_TOL:
        best_p, best_t = p_ref, t_ref
    return min(best_p, 1.0), best_t


def rabi_frequency(delta: float, g: float, n: int) -> float:
    """Rabi frequency ``sqrt(delta**2 + 4 g**2 (n+1))`` in GHz."""
    if n < 0:
        raise InputError(f"photon number must be >= 0, got {n}")
    return math.sqrt(delta * delta + 4.0 * g * g * (n + 1))


def count_returns(times: np.ndarray, population: np.ndarray, threshold: float,
                  rearm: float | None = None) -> list[float]:
    """Times at which ``population`` comes back to ``>= threshold``.

    A return is only counted once the population has left: it must first
    drop below ``rearm`` (default: ``threshold``). Within each
    above-threshold episode the time of the largest sample is reported.
    The sample at ``times[0]`` is never a return.
    """
    rearm = threshold if rearm is None else rearm
    population = np.asarray(population)
    out = []
    armed = False
    best = None
    for k in range(1, len(population)):
        p = population[k]
        if best is not None:
            if p >= threshold:
                if p > population[best]:
                    best = k
                continue
            out.append(float(times[best]))
            best = None
        if p < rearm:
            armed = True
        elif armed and p >= threshold:
            best = k
            armed = False
    if best is not None:
        out.append(float(times[best]))
    return out


def first_return_time(H: Operator | Eigensystem, psi0: StateVector, t_max: float,
                      dt: float = 1e-3, threshold: float = 0.999) -> float:
    """Period estimate: first time the survival probability of ``psi0`` returns.

    The population ``|<psi0|psi(t)>|^2`` is sampled every ``dt``; the first
    episode in which it is back above ``threshold`` (after dropping below
    it) is located and its peak refined by golden-section search.
    """
    eig = _eig(H)
    times = np.arange(0.0, t_max + dt / 2, dt)
    pop = eig.probabilities(psi0, psi0, times)
    returns = count_returns(times, pop, threshold)
    if not returns:
        raise NumericalError(f"population did not return above {threshold} within {t_max} ns")
    t0 = returns[0]
    t, _ = golden_section_max(
        lambda t: float(eig.probabilities(psi0, psi0, [t])[0]), t0 - dt, t0 + dt, tol=1e-9
    )
    return t


def expectation(op: Operator, psi: StateVector) -> complex:
    if op.dims != psi.dims:
        raise InputError(f"dims mismatch {op.dims} vs {psi.dims}")
    return complex(np.vdot(psi.amplitudes, op.matrix @ psi.amplitudes))
