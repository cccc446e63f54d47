"""MAEV maps over (coupling, frequency) grids of a swept qubit.

For every cell the swept qubit's coupling and 0-1 frequency are replaced,
the Hamiltonian is rebuilt, and the maximal transition probability of two
oscillations (ROT0 and ROT1) is recorded. Cells are independent; rows (one
coupling value each) are the unit of parallel work and of checkpointing.
"""
from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import maev
from .errors import InputError, NumericalError
from .hamiltonian import CouplingSpec, SystemSpec, build_hamiltonian
from .hilbert import ModeSpec, basis_state

log = logging.getLogger(__name__)

CSV_HEADER = "g2_ghz,freq_ghz,rot0_maev,rot0_t_ns,rot1_maev,rot1_t_ns"

ROT0 = ((0, 1, 0), (0, 0, 1))
ROT1 = ((1, 1, 0), (1, 0, 1))


def fig3_system(cutoff: int = 3, resonator_ghz: float = 6.0, q1_ghz: float = 7.0,
                g1_ghz: float = 0.2, q2_ghz: float = 6.0, g2_ghz: float = 0.05) -> SystemSpec:
    """Two two-level qubits on one resonator (modes q1, q2, a)."""
    modes = (
        ModeSpec.qubit([q1_ghz], name="q1"),
        ModeSpec.qubit([q2_ghz], name="q2"),
        ModeSpec.resonator(resonator_ghz, cutoff, name="a"),
    )
    return SystemSpec(modes, (CouplingSpec(0, 2, (g1_ghz,)), CouplingSpec(1, 2, (g2_ghz,))))


@dataclass(frozen=True)
class SweepGrid:
    """Grid definition.

    ``t_max_ns`` fixes the MAEV window for every cell; when ``None`` each
    cell uses ``t_max_factor`` resonant periods ``1/(2 g)`` of its own
    coupling (cells with ``g = 0`` borrow the smallest positive coupling of
    the grid).
    """

    g_values: tuple[float, ...]
    freq_values: tuple[float, ...]
    base_spec: SystemSpec
    rot0_target: tuple[tuple[int, ...], tuple[int, ...]] = ROT0
    rot1_target: tuple[tuple[int, ...], tuple[int, ...]] = ROT1
    qubit_index: int = 1
    resonator_index: int = 2
    dt_ns: float = 0.01
    t_max_ns: float | None = None
    t_max_factor: float = 1.25

    def __post_init__(self):
        g = tuple(float(x) for x in self.g_values)
        f = tuple(float(x) for x in self.freq_values)
        object.__setattr__(self, "g_values", g)
        object.__setattr__(self, "freq_values", f)
        for name, vals in (("g_values", g), ("freq_values", f)):
            if not vals:
                raise InputError(f"{name} must be non-empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise InputError(f"{name} must be strictly increasing")
        if any(x < 0 for x in g) or any(x <= 0 for x in f):
            raise InputError("couplings must be >= 0 and frequencies > 0")
        if not self.dt_ns > 0:
            raise InputError("dt_ns must be positive")
        spec = self.base_spec
        mode = spec.modes[self.qubit_index]
        if mode.is_resonator or not spec.modes[self.resonator_index].is_resonator:
            raise InputError("qubit_index/resonator_index do not name a qubit and a resonator")
        for lab in (*self.rot0_target, *self.rot1_target):
            if len(lab) != len(spec.modes):
                raise InputError(f"label {lab} does not match {len(spec.modes)} modes")

    @classmethod
    def fig3_default(cls, n_g: int = 40, n_freq: int = 60, **kw) -> "SweepGrid":
        return cls(
            tuple(np.linspace(0.01, 0.20, n_g)),
            tuple(np.linspace(5.90, 6.15, n_freq)),
            kw.pop("base_spec", fig3_system()),
            **kw,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.g_values), len(self.freq_values)

    def window(self, g: float) -> float:
        if self.t_max_ns is not None:
            return self.t_max_ns
        if g <= 0:
            positive = [x for x in self.g_values if x > 0]
            g = min(positive) if positive else 0.01
        return self.t_max_factor / (2.0 * g)

    def cell_spec(self, g: float, freq: float) -> SystemSpec:
        spec = self.base_spec
        mode = spec.modes[self.qubit_index]
        freqs = (freq,) + mode.level_freqs[1:]
        spec = spec.with_qubit_freqs(self.qubit_index, freqs)
        return spec.with_coupling(self.qubit_index, self.resonator_index, (g,) * (mode.dim - 1))


@dataclass(frozen=True, eq=False)
class MaevMap:
    """``values[i, j]`` = (rot0_maev, rot0_t, rot1_maev, rot1_t) for g_i, freq_j."""

    grid: SweepGrid
    values: np.ndarray

    def rot0(self) -> np.ndarray:
        return self.values[:, :, 0]

    def rot1(self) -> np.ndarray:
        return self.values[:, :, 2]


def evaluate_cell(grid: SweepGrid, g: float, freq: float) -> tuple[float, float, float, float]:
    spec = grid.cell_spec(g, freq)
    H = build_hamiltonian(spec)
    dims = spec.dims
    t_max = grid.window(g)
    out = []
    for initial, target in (grid.rot0_target, grid.rot1_target):
        p, t = maev(H, basis_state(initial, dims), basis_state(target, dims), t_max, grid.dt_ns)
        out.extend((p, t))
    return tuple(out)


def _row(args) -> tuple[int, list[tuple[float, float, float, float]]]:
    grid, i = args
    g = grid.g_values[i]
    cells = []
    for j, f in enumerate(grid.freq_values):
        try:
            cells.append(evaluate_cell(grid, g, f))
        except Exception as exc:
            raise NumericalError(f"cell (g={g!r}, freq={f!r}) [{i}, {j}] failed: {exc}") from exc
    return i, cells


def format_row(g: float, freq: float, cell: Sequence[float]) -> str:
    return ",".join(f"{x:.9g}" for x in (g, freq, *cell))


def _row_lines(grid: SweepGrid, i: int, cells) -> list[str]:
    g = grid.g_values[i]
    return [format_row(g, f, c) for f, c in zip(grid.freq_values, cells)]


def run_sweep(grid: SweepGrid, workers: int = 1, checkpoint: str | os.PathLike | None = None) -> MaevMap:
    """Evaluate every cell of ``grid``.

    With ``checkpoint`` (the intended CSV path) finished rows are recorded
    in ``<checkpoint>.ckpt`` (row indices, one per line) and their CSV lines
    in ``<checkpoint>.partial``; a rerun skips those rows. Output does not
    depend on ``workers``.
    """
    if int(workers) != workers or workers < 1:
        raise InputError(f"workers must be a positive integer, got {workers}")
    n_g, n_f = grid.shape
    values = np.full((n_g, n_f, 4), np.nan)

    ckpt = partial = None
    done: set[int] = set()
    if checkpoint is not None:
        ckpt, partial = _checkpoint_paths(checkpoint)
        done = _load_checkpoint(grid, ckpt, partial, values)
        if done:
            log.info("resuming sweep: %d of %d rows already done", len(done), n_g)

    todo = [i for i in range(n_g) if i not in done]

    def record(i, cells):
        values[i] = np.asarray(cells)
        if ckpt is not None:
            with open(partial, "a", newline="\n") as fh:
                fh.write("".join(f"{i}:{line}\n" for line in _row_lines(grid, i, cells)))
                fh.flush()
                os.fsync(fh.fileno())
            with open(ckpt, "a", newline="\n") as fh:
                fh.write(f"{i}\n")
                fh.flush()
                os.fsync(fh.fileno())

    if workers == 1 or len(todo) <= 1:
        for i in todo:
            record(*_row((grid, i)))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, cells in pool.map(_row, [(grid, i) for i in todo]):
                record(i, cells)
    return MaevMap(grid, values)


def _checkpoint_paths(path) -> tuple[Path, Path]:
    path = Path(path)
    return path.with_name(path.name + ".ckpt"), path.with_name(path.name + ".partial")


def _load_checkpoint(grid: SweepGrid, ckpt: Path, partial: Path, values: np.ndarray) -> set[int]:
    if not ckpt.exists() or not partial.exists():
        return set()
    done = {int(s) for s in ckpt.read_text().split()}
    rows: dict[int, list[list[float]]] = {}
    for line in partial.read_text().splitlines():
        idx, _, rest = line.partition(":")
        rows.setdefault(int(idx), []).append([float(x) for x in rest.split(",")])
    complete = set()
    for i in done:
        # a row may appear more than once if a run died between the two writes
        cells = rows.get(i, [])[-grid.shape[1]:]
        if 0 <= i < grid.shape[0] and len(cells) == grid.shape[1]:
            values[i] = np.asarray(cells)[:, 2:]
            complete.add(i)
    return complete


def clear_checkpoint(path) -> None:
    for p in _checkpoint_paths(path):
        p.unlink(missing_ok=True)


def write_csv(result: MaevMap, path) -> None:
    """Write the map, g-major, with 9 significant digits and LF endings."""
    if np.isnan(result.values).any():
        raise InputError("map is incomplete")
    grid = result.grid
    lines = [CSV_HEADER]
    for i in range(grid.shape[0]):
        lines.extend(_row_lines(grid, i, result.values[i]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> np.ndarray:
    """Rows of the CSV as a float array with the header's six columns."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != CSV_HEADER:
            raise InputError(f"unexpected header {header}")
        return np.array([[float(x) for x in row] for row in reader], dtype=float)


def peak_along_freq(result: MaevMap, row: int, which: str = "rot0") -> tuple[float, float]:
    """Grid frequency and value of the largest MAEV in one coupling row."""
    vals = result.rot0()[row] if which == "rot0" else result.rot1()[row]
    j = int(np.argmax(vals))
    return result.grid.freq_values[j], float(vals[j])


def nearest_row(result: MaevMap, g: float) -> int:
    gs = np.asarray(result.grid.g_values)
    return int(np.argmin(np.abs(gs - g)))
