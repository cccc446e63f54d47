"""Selective-resonance gate protocols and their fidelity reports.

A protocol is a list of stages, each a fixed system evolved for a fixed
duration. Phase gates (c-phase, cc-phase) use one stage whose duration
satisfies ``2*pi*g*t = pi`` for the target qubit: the resonant exchange
with the resonator completes one full cycle and returns the flipped branch
with a minus sign. The Fredkin gate uses two stages with the target qubits
retuned in between.

All fidelities are computed in the laboratory frame: no free-evolution or
single-qubit phase is removed. ``refine=True`` searches the duration window
``[0.9, 1.1] * nominal`` for the best overlap; with it the default c-phase
and cc-phase systems reach their operating points near 10.27 ns and 14.82 ns.
"""
from __future__ import annotations

import cmath
import csv
import enum
import io
import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .dynamics import Eigensystem, golden_section_max, maev
from .errors import InputError, ProtocolConstraintError
from .hamiltonian import CouplingSpec, SystemSpec, build_hamiltonian
from .hilbert import ModeSpec, StateVector, basis_index, superposition

REFINE_WINDOW = (0.9, 1.1)
REFINE_STEP_NS = 0.002
REFINE_TOL_NS = 1e-5
RESONANCE_TOL_GHZ = 1e-4


class GateKind(str, enum.Enum):
    CPHASE = "cphase"
    CCPHASE = "ccphase"
    FREDKIN = "fredkin"


@dataclass(frozen=True)
class Stage:
    duration_ns: float
    spec: SystemSpec


@dataclass(frozen=True)
class GateProtocol:
    """A gate schedule.

    ``qubits`` lists the computational qubits (mode indices) in the order
    used for basis-input labels. ``flip`` is the computational input whose
    sign a phase gate inverts; it is ``None`` for the Fredkin gate.
    """

    kind: GateKind
    spec: SystemSpec
    stages: tuple[Stage, ...]
    qubits: tuple[int, ...]
    flip: tuple[int, ...] | None = None
    nominal_ns: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise InputError("a protocol needs at least one stage")
        for st in self.stages:
            if not st.duration_ns > 0:
                raise InputError(f"stage durations must be positive, got {st.duration_ns}")
            if st.spec.dims != self.spec.dims:
                raise InputError("all stages must share the mode layout of the protocol")
        if self.flip is not None and len(self.flip) != len(self.qubits):
            raise InputError("flip label must have one entry per computational qubit")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.spec.dims

    @property
    def duration_ns(self) -> float:
        return sum(st.duration_ns for st in self.stages)

    def with_duration(self, duration_ns: float) -> "GateProtocol":
        if len(self.stages) != 1:
            raise InputError("only single-stage protocols can be retimed")
        return replace(self, stages=(Stage(duration_ns, self.stages[0].spec),))

    def computational_inputs(self) -> list[tuple[int, ...]]:
        return list(itertools.product((0, 1), repeat=len(self.qubits)))

    def full_label(self, bits: Sequence[int]) -> tuple[int, ...]:
        """Embed computational bits; every other mode sits in its ground state."""
        label = [0] * len(self.dims)
        for q, b in zip(self.qubits, bits):
            label[q] = b
        return tuple(label)

    def ideal_output(self, bits: Sequence[int]) -> tuple[tuple[int, ...], int]:
        """Truth-table image of ``bits`` and its sign."""
        bits = tuple(bits)
        if self.kind is GateKind.FREDKIN:
            c, x, y = bits
            return ((c, y, x) if c == 1 else bits), 1
        return bits, (-1 if bits == self.flip else 1)


@dataclass
class FidelityReport:
    kind: GateKind
    total_fidelity: float
    duration_ns: float
    leakage: float
    per_input_overlaps: dict[tuple[int, ...], complex]
    stage_durations_ns: tuple[float, ...] = ()
    refined: bool = False
    cutoff: int | None = None
    cutoff_delta: float | None = None

    def summary_line(self) -> str:
        return f"{self.kind.value} {self.total_fidelity:.6f} {self.duration_ns:.6f} {self.leakage:.6f}"

    def to_text(self) -> str:
        lines = [
            f"kind: {self.kind.value}",
            f"total_fidelity: {self.total_fidelity:.9g}",
            f"duration_ns: {self.duration_ns:.9g}",
            f"stage_durations_ns: {' '.join(f'{d:.9g}' for d in self.stage_durations_ns)}",
            f"leakage: {self.leakage:.9g}",
            f"refined: {str(self.refined).lower()}",
        ]
        if self.cutoff is not None:
            lines.append(f"cutoff: {self.cutoff}")
        if self.cutoff_delta is not None:
            lines.append(f"cutoff_delta: {self.cutoff_delta:.3g}")
        for label, amp in self.per_input_overlaps.items():
            lines.append(
                f"overlap_{_label_str(label)}: {amp.real:.9g} {amp.imag:+.9g}j "
                f"(p={abs(amp) ** 2:.9g}, arg={cmath.phase(amp):.6f})"
            )
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["input", "overlap_re", "overlap_im", "probability"])
        for label, amp in self.per_input_overlaps.items():
            w.writerow([_label_str(label), f"{amp.real:.9g}", f"{amp.imag:.9g}", f"{abs(amp) ** 2:.9g}"])
        return buf.getvalue()


def _label_str(label: Sequence[int]) -> str:
    return "".join(str(b) for b in label)


# ---------------------------------------------------------------------------
# protocol builders


@dataclass(frozen=True)
class CPhaseParams:
    """Control qubit, target qubit and one resonator.

    Each qubit uses one coupling for all of its transitions, as in the
    default parameter sets.
    """

    resonator_ghz: float = 6.0
    control_freqs_ghz: tuple[float, ...] = (5.0, 6.2)
    control_g_ghz: float = 0.2
    target_freqs_ghz: tuple[float, ...] = (6.035, 7.335)
    target_g_ghz: float = 0.0488
    cutoff: int = 3
    duration_ns: float | None = None
    flip: tuple[int, int] = (0, 1)


# Two-level ("perfect") qubits with the two-level sweep's resonator/control values; the
# target coupling keeps the 22 ns / 10.2 ns time ratio of the charge-qubit
# gate, and the target frequency is its ROT0 resonance (see find_resonance).
PERFECT_CPHASE = CPhaseParams(
    control_freqs_ghz=(7.0,),
    target_freqs_ghz=(5.95851,),
    target_g_ghz=0.0488 * 10.2 / 22.0,
)


@dataclass(frozen=True)
class CCPhaseParams:
    resonator_ghz: float = 6.0
    control_freqs_ghz: tuple[tuple[float, ...], ...] = ((5.0, 6.3), (5.0, 6.3))
    control_g_ghz: tuple[float, ...] = (0.2, 0.2)
    target_freqs_ghz: tuple[float, ...] = (6.068, 7.3)
    target_g_ghz: float = 0.035
    cutoff: int = 3
    duration_ns: float | None = None
    flip: tuple[int, int, int] = (0, 0, 1)


def nominal_duration(g_ghz: float, cycles: float = 0.5) -> float:
    """Time for ``2*pi*g*t = 2*pi*cycles``; the default is the ``g t = pi`` condition."""
    if not g_ghz > 0:
        raise InputError(f"coupling must be positive to set a duration, got {g_ghz}")
    return cycles / g_ghz


def _single_resonator_system(resonator_ghz, qubits, cutoff) -> SystemSpec:
    modes = [ModeSpec.qubit(freqs, name=f"q{k + 1}") for k, (freqs, _) in enumerate(qubits)]
    modes.append(ModeSpec.resonator(resonator_ghz, cutoff, name="a"))
    r = len(qubits)
    couplings = [
        CouplingSpec(k, r, (g,) * (len(freqs)))
        for k, (freqs, g) in enumerate(qubits)
    ]
    return SystemSpec(tuple(modes), tuple(couplings))


def phase_protocol(kind: GateKind | str, spec: SystemSpec, duration_ns: float | None = None,
                   flip: Sequence[int] | None = None) -> GateProtocol:
    """Phase-gate protocol on an arbitrary single-stage system.

    Computational qubits are all qubit modes, in mode order; the last one is
    the target. Without ``duration_ns`` the target's 0-1 coupling sets the
    nominal duration.
    """
    kind = GateKind(kind)
    if kind is GateKind.FREDKIN:
        raise InputError("use build_fredkin_protocol for the Fredkin gate")
    qubits = spec.qubit_indices
    expected = 2 if kind is GateKind.CPHASE else 3
    if len(qubits) != expected:
        raise InputError(f"{kind.value} needs {expected} qubits, system has {len(qubits)}")
    if flip is None:
        flip = (0,) * (expected - 1) + (1,)
    nominal = None
    g = max(
        (c.g_per_transition[0] for c in spec.couplings if c.qubit_index == qubits[-1]),
        default=0.0,
    )
    if g > 0:
        nominal = nominal_duration(g)
    if duration_ns is None:
        if nominal is None:
            raise InputError("target qubit is uncoupled; an explicit duration is required")
        duration_ns = nominal
    return GateProtocol(kind, spec, (Stage(float(duration_ns), spec),), qubits, tuple(flip), nominal)


def build_cphase_protocol(params: CPhaseParams | None = None, variant: str = "charge") -> GateProtocol:
    """c-phase on a control qubit and a selectively resonant target.

    ``variant="charge"`` uses three-level charge qubits (:class:`CPhaseParams` defaults);
    ``variant="perfect"`` uses two-level qubits (:data:`PERFECT_CPHASE`).
    """
    if params is None:
        if variant == "charge":
            params = CPhaseParams()
        elif variant == "perfect":
            params = PERFECT_CPHASE
        else:
            raise InputError(f"unknown variant {variant!r}")
    spec = _single_resonator_system(
        params.resonator_ghz,
        [(params.control_freqs_ghz, params.control_g_ghz),
         (params.target_freqs_ghz, params.target_g_ghz)],
        params.cutoff,
    )
    return phase_protocol(GateKind.CPHASE, spec, params.duration_ns, params.flip)


def build_ccphase_protocol(params: CCPhaseParams | None = None) -> GateProtocol:
    """cc-phase: two dispersive controls and one target on a shared resonator."""
    params = params or CCPhaseParams()
    qubits = list(zip(params.control_freqs_ghz, params.control_g_ghz))
    qubits.append((params.target_freqs_ghz, params.target_g_ghz))
    spec = _single_resonator_system(params.resonator_ghz, qubits, params.cutoff)
    return phase_protocol(GateKind.CCPHASE, spec, params.duration_ns, params.flip)


@dataclass(frozen=True)
class FredkinParams:
    """Three qubits, two resonators.

    q1 (control) couples to both resonators. In stage 1 q2 is tuned to its
    q1=|1> resonance with R_a and q3 to its q1=|1> resonance with R_b; in
    stage 2 the roles are exchanged. Targets are retuned rigidly: their
    1-2 transition stays ``anharmonicity_ghz`` above the 0-1 transition.

    Stage 1 needs ``g_q2_a == g_q3_b`` (``2*pi*g*t = 1.5*pi``), stage 2 needs
    ``g_q3_a == g_q2_b`` (``2*pi*g*t = 0.5*pi``). The default couplings make
    the unwanted q1=|0> exchanges complete whole periods: two in stage 1
    and one in stage 2.
    """

    resonator_a_ghz: float = 6.0
    resonator_b_ghz: float = 7.0
    control_freqs_ghz: tuple[float, ...] = (4.5, 10.5)
    control_g_a_ghz: float = 0.2
    control_g_b_ghz: float = 0.25
    anharmonicity_ghz: float | None = 1.3
    g_q2_a_ghz: float = 0.031
    g_q3_b_ghz: float = 0.031
    g_q3_a_ghz: float = 0.0158
    g_q2_b_ghz: float = 0.0158
    # (q2, q3) 0-1 frequencies; defaults from tune_fredkin_frequencies()
    stage1_freqs_ghz: tuple[float, float] = (5.96784, 6.96368)
    stage2_freqs_ghz: tuple[float, float] = (6.96217, 5.96777)
    cutoff: int = 3
    coupling_tol_ghz: float = 1e-9

    def target_ladder(self, nu01: float) -> tuple[float, ...]:
        if self.anharmonicity_ghz is None:
            return (nu01,)
        return (nu01, nu01 + self.anharmonicity_ghz)


def _fredkin_spec(p: FredkinParams, nu2: float, nu3: float) -> SystemSpec:
    modes = (
        ModeSpec.qubit(p.control_freqs_ghz, name="q1"),
        ModeSpec.qubit(p.target_ladder(nu2), name="q2"),
        ModeSpec.qubit(p.target_ladder(nu3), name="q3"),
        ModeSpec.resonator(p.resonator_a_ghz, p.cutoff, name="a"),
        ModeSpec.resonator(p.resonator_b_ghz, p.cutoff, name="b"),
    )
    n1 = len(p.control_freqs_ghz)
    nt = 1 if p.anharmonicity_ghz is None else 2
    couplings = (
        CouplingSpec(0, 3, (p.control_g_a_ghz,) * n1),
        CouplingSpec(0, 4, (p.control_g_b_ghz,) * n1),
        CouplingSpec(1, 3, (p.g_q2_a_ghz,) * nt),
        CouplingSpec(1, 4, (p.g_q2_b_ghz,) * nt),
        CouplingSpec(2, 3, (p.g_q3_a_ghz,) * nt),
        CouplingSpec(2, 4, (p.g_q3_b_ghz,) * nt),
    )
    return SystemSpec(modes, couplings)


def fredkin_stage_durations(p: FredkinParams) -> tuple[float, float]:
    """Stage durations from the ``1.5*pi`` and ``0.5*pi`` conditions."""
    if not math.isclose(p.g_q2_a_ghz, p.g_q3_b_ghz, rel_tol=0, abs_tol=p.coupling_tol_ghz):
        raise ProtocolConstraintError(
            f"stage 1 needs g(q2,a) == g(q3,b), got {p.g_q2_a_ghz} and {p.g_q3_b_ghz}"
        )
    if not math.isclose(p.g_q3_a_ghz, p.g_q2_b_ghz, rel_tol=0, abs_tol=p.coupling_tol_ghz):
        raise ProtocolConstraintError(
            f"stage 2 needs g(q3,a) == g(q2,b), got {p.g_q3_a_ghz} and {p.g_q2_b_ghz}"
        )
    if not (p.g_q2_a_ghz > 0 and p.g_q3_a_ghz > 0):
        raise ProtocolConstraintError("stage couplings must be positive")
    return nominal_duration(p.g_q2_a_ghz, 0.75), nominal_duration(p.g_q3_a_ghz, 0.25)


def build_fredkin_protocol(params: FredkinParams | None = None) -> GateProtocol:
    p = params or FredkinParams()
    t1, t2 = fredkin_stage_durations(p)
    s1 = _fredkin_spec(p, *p.stage1_freqs_ghz)
    s2 = _fredkin_spec(p, *p.stage2_freqs_ghz)
    return GateProtocol(GateKind.FREDKIN, s1, (Stage(t1, s1), Stage(t2, s2)), (0, 1, 2), None, t1 + t2)


# ---------------------------------------------------------------------------
# execution


def _propagate(stages: Sequence[tuple[Eigensystem, float]], columns: np.ndarray) -> np.ndarray:
    for eig, t in stages:
        v = eig.vectors
        columns = v @ (np.exp(-1j * eig.energies * t)[:, None] * (v.conj().T @ columns))
    return columns


def _stage_eigs(p: GateProtocol) -> list[tuple[Eigensystem, float]]:
    cache: dict[int, Eigensystem] = {}
    out = []
    for st in p.stages:
        key = id(st.spec)
        if key not in cache:
            cache[key] = Eigensystem(build_hamiltonian(st.spec))
        out.append((cache[key], st.duration_ns))
    return out


def run_protocol(p: GateProtocol, psi0: StateVector) -> tuple[StateVector, dict]:
    """Apply every stage in order.

    Returns the final state and a fragment of the report: the total
    duration and the leakage out of the computational, resonator-vacuum
    subspace.
    """
    if psi0.dims != p.dims:
        raise InputError(f"state dims {psi0.dims} do not match protocol dims {p.dims}")
    out = _propagate(_stage_eigs(p), psi0.amplitudes[:, None])[:, 0]
    final = StateVector(p.dims, out, normalize=True)
    return final, {"duration_ns": p.duration_ns, "leakage": leakage(p, final)}


def gate_fidelity(final: StateVector, ideal: StateVector) -> float:
    """Pure-state overlap ``|<ideal|final>|^2``."""
    if final.dims != ideal.dims:
        raise InputError(f"dims mismatch {final.dims} vs {ideal.dims}")
    return float(min(abs(ideal.overlap(final)) ** 2, 1.0))


def leakage(p: GateProtocol, state: StateVector) -> float:
    idx = [basis_index(p.full_label(b), p.dims) for b in p.computational_inputs()]
    inside = float(np.sum(np.abs(state.amplitudes[idx]) ** 2))
    return float(min(max(1.0 - inside, 0.0), 1.0))


def initial_state(p: GateProtocol) -> StateVector:
    """Equal superposition of all computational inputs, resonators empty."""
    return superposition([p.full_label(b) for b in p.computational_inputs()], p.dims)


def ideal_state(p: GateProtocol) -> StateVector:
    """Image of :func:`initial_state` under the ideal gate."""
    labels, signs = [], []
    for b in p.computational_inputs():
        out, s = p.ideal_output(b)
        labels.append(p.full_label(out))
        signs.append(s)
    return superposition(labels, p.dims, signs)


def _phase_fidelity_curve(eig: Eigensystem, psi0: StateVector, ideal: StateVector) -> Callable:
    weights = np.conj(eig.coefficients(ideal)) * eig.coefficients(psi0)

    def fidelity(times):
        amps = np.exp(-1j * np.outer(np.atleast_1d(times), eig.energies)) @ weights
        return np.abs(amps) ** 2

    return fidelity


def refine_duration(p: GateProtocol, window: tuple[float, float] = REFINE_WINDOW,
                    step_ns: float = REFINE_STEP_NS, tol_ns: float = REFINE_TOL_NS) -> GateProtocol:
    """Retime a phase gate to the best lab-frame fidelity near its nominal duration."""
    if p.kind is GateKind.FREDKIN or len(p.stages) != 1:
        raise InputError("duration refinement applies to single-stage phase gates only")
    nominal = p.nominal_ns or p.duration_ns
    eig = Eigensystem(build_hamiltonian(p.stages[0].spec))
    fid = _phase_fidelity_curve(eig, initial_state(p), ideal_state(p))
    lo, hi = window[0] * nominal, window[1] * nominal
    grid = np.arange(lo, hi + step_ns / 2, step_ns)
    values = fid(grid)
    k = int(np.argmax(values))
    t_best, f_best = float(grid[k]), float(values[k])
    t_ref, f_ref = golden_section_max(
        lambda t: float(fid(t)[0]), max(lo, t_best - step_ns), min(hi, t_best + step_ns), tol_ns
    )
    if f_ref > f_best:
        t_best = t_ref
    return p.with_duration(t_best)


def gate_report(p: GateProtocol, refine: bool = False,
                check_cutoff: bool = False, cutoff_step: int = 2) -> FidelityReport:
    """Run ``p`` on every computational input and on their superposition.

    For phase gates ``total_fidelity`` is the overlap of the evolved equal
    superposition with its ideal image. The Fredkin gate has no reference
    target phases, so its total is the mean truth-table probability over
    the eight basis inputs.
    """
    if refine and p.kind is not GateKind.FREDKIN:
        p = refine_duration(p)
    eigs = _stage_eigs(p)
    inputs = p.computational_inputs()
    dims = p.dims
    cols = np.zeros((math.prod(dims), len(inputs) + 1), dtype=complex)
    for j, b in enumerate(inputs):
        cols[basis_index(p.full_label(b), dims), j] = 1.0
    psi0 = initial_state(p)
    cols[:, -1] = psi0.amplitudes
    out = _propagate(eigs, cols)

    overlaps = {}
    probs = []
    for j, b in enumerate(inputs):
        target, _ = p.ideal_output(b)
        amp = complex(out[basis_index(p.full_label(target), dims), j])
        overlaps[b] = amp
        probs.append(abs(amp) ** 2)
    final = StateVector(dims, out[:, -1], normalize=True)
    if p.kind is GateKind.FREDKIN:
        total = float(np.mean(probs))
    else:
        total = gate_fidelity(final, ideal_state(p))

    cutoff = _cutoff_of(p.spec)
    delta = None
    if check_cutoff and cutoff is not None:
        bigger = _with_cutoff(p, cutoff + cutoff_step)
        delta = abs(gate_report(bigger).total_fidelity - total)
    return FidelityReport(
        kind=p.kind,
        total_fidelity=float(min(max(total, 0.0), 1.0)),
        duration_ns=p.duration_ns,
        leakage=leakage(p, final),
        per_input_overlaps=overlaps,
        stage_durations_ns=tuple(st.duration_ns for st in p.stages),
        refined=refine and p.kind is not GateKind.FREDKIN,
        cutoff=cutoff,
        cutoff_delta=delta,
    )


def _cutoff_of(spec: SystemSpec) -> int | None:
    dims = [spec.modes[r].dim for r in spec.resonator_indices]
    return max(dims) - 1 if dims else None


def _with_cutoff(p: GateProtocol, cutoff: int) -> GateProtocol:
    stages = tuple(Stage(st.duration_ns, st.spec.with_cutoff(cutoff)) for st in p.stages)
    return replace(p, spec=p.spec.with_cutoff(cutoff), stages=stages)


# ---------------------------------------------------------------------------
# resonance search


def _oscillation_resonator(spec: SystemSpec, initial: Sequence[int], target: Sequence[int]) -> int:
    changed = [r for r in spec.resonator_indices if initial[r] != target[r]]
    if len(changed) != 1:
        raise InputError("cannot infer which resonator the oscillation exchanges a photon with")
    return changed[0]


def find_resonance(spec: SystemSpec, target_qubit: int, scan: tuple[float, float, float],
                   osc: tuple[Sequence[int], Sequence[int]], t_max: float | None = None,
                   dt: float = 0.01, shift_ladder: bool = False) -> float:
    """The target qubit's 0-1 frequency that maximizes the MAEV of ``osc``.

    ``scan`` is ``(lo, hi, step)`` in GHz. After the grid scan the best
    point is refined by golden-section search to 0.1 MHz. Higher
    transitions of the target stay fixed unless ``shift_ladder`` is set, in
    which case the whole ladder moves rigidly with the 0-1 frequency.
    Without ``t_max`` the window is 1.25 resonant periods of the coupling
    that drives ``osc``.
    """
    lo, hi, step = (float(x) for x in scan)
    if not (step > 0 and hi > lo):
        raise InputError(f"empty scan {scan}")
    initial, target = tuple(osc[0]), tuple(osc[1])
    dims = spec.dims
    psi0 = StateVector(dims, _unit(initial, dims))
    tgt = StateVector(dims, _unit(target, dims))
    mode = spec.modes[target_qubit]
    if t_max is None:
        r = _oscillation_resonator(spec, initial, target)
        c = spec.coupling(target_qubit, r)
        if c is None or c.g_per_transition[0] <= 0:
            raise InputError(f"qubit {target_qubit} is not coupled to resonator {r}")
        t_max = 1.25 * nominal_duration(c.g_per_transition[0])

    def score(nu: float) -> float:
        freqs = list(mode.level_freqs)
        offset = nu - freqs[0]
        freqs = [f + offset for f in freqs] if shift_ladder else [nu] + freqs[1:]
        H = build_hamiltonian(spec.with_qubit_freqs(target_qubit, freqs))
        return maev(H, psi0, tgt, t_max, dt)[0]

    n = int(math.floor((hi - lo) / step + 1e-9))
    grid = lo + step * np.arange(n + 1)
    values = [score(nu) for nu in grid]
    k = int(np.argmax(values))
    nu_best, best = float(grid[k]), values[k]
    nu_ref, v_ref = golden_section_max(
        score, max(lo, nu_best - step), min(hi, nu_best + step), RESONANCE_TOL_GHZ
    )
    return nu_ref if v_ref > best else nu_best


def _unit(label, dims) -> np.ndarray:
    v = np.zeros(math.prod(dims), dtype=complex)
    v[basis_index(label, dims)] = 1.0
    return v


def tune_fredkin_frequencies(p: FredkinParams, span_ghz: float = 0.1, step_ghz: float = 0.005,
                             passes: int = 2) -> FredkinParams:
    """Locate the four q1=|1> selective resonances for the two stages.

    Each frequency is searched with the other target parked at its current
    stage value; ``passes`` sweeps of this settle the mutual pulls.
    """
    s1, s2 = list(p.stage1_freqs_ghz), list(p.stage2_freqs_ghz)

    def label(q2, q3, na, nb):
        return (1, q2, q3, na, nb)

    def scan(center):
        return (center - span_ghz, center + span_ghz, step_ghz)

    for _ in range(passes):
        spec = _fredkin_spec(p, *s1)
        s1[0] = find_resonance(spec, 1, scan(s1[0]), (label(1, 0, 0, 0), label(0, 0, 1, 0)),
                               shift_ladder=True)
        spec = _fredkin_spec(p, *s1)
        s1[1] = find_resonance(spec, 2, scan(s1[1]), (label(0, 1, 0, 0), label(0, 0, 0, 1)),
                               shift_ladder=True)
        spec = _fredkin_spec(p, *s2)
        s2[1] = find_resonance(spec, 2, scan(s2[1]), (label(0, 1, 0, 0), label(0, 0, 1, 0)),
                               shift_ladder=True)
        spec = _fredkin_spec(p, *s2)
        s2[0] = find_resonance(spec, 1, scan(s2[0]), (label(1, 0, 0, 0), label(0, 0, 0, 1)),
                               shift_ladder=True)
    return replace(p, stage1_freqs_ghz=tuple(s1), stage2_freqs_ghz=tuple(s2))
