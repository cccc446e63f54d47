import numpy as np
import pytest

from oracles import dressed_resonator_frequency
from srqed import sweep as sw
from srqed.errors import InputError, NumericalError
from srqed.sweep import (CSV_HEADER, SweepGrid, clear_checkpoint, fig3_system, nearest_row,
                         peak_along_freq, read_csv, run_sweep, write_csv)

ROT0_RESONANCE = 5.958384  # from find_resonance on the same system


def small_grid(n_g=2, n_f=3, **kw):
    return SweepGrid(tuple(np.linspace(0.04, 0.06, n_g)), tuple(np.linspace(5.95, 6.05, n_f)),
                     fig3_system(), **kw)


def test_single_cell_selective_resonance():
    grid = SweepGrid((0.0488,), (ROT0_RESONANCE,), fig3_system())
    m = run_sweep(grid)
    assert m.values.shape == (1, 1, 4)
    assert m.rot0()[0, 0] > 0.95
    assert m.rot1()[0, 0] < 0.7


def test_zero_coupling_cells_are_dark():
    grid = SweepGrid((0.0, 0.05), (5.96, 6.0), fig3_system())
    m = run_sweep(grid)
    assert np.all(m.rot0()[0] < 1e-12) and np.all(m.rot1()[0] < 1e-12)


def test_rot0_peak_matches_dressed_state_resonance():
    freqs = tuple(np.linspace(5.90, 6.15, 60))
    grid = SweepGrid((0.0488,), freqs, fig3_system())
    f_peak, value = peak_along_freq(run_sweep(grid), 0)
    expected = dressed_resonator_frequency(6.0, 7.0, 0.2, 0)
    step = freqs[1] - freqs[0]
    assert abs(f_peak - expected) <= step
    assert value > 0.95


def test_rot1_peak_matches_excited_control_resonance():
    freqs = tuple(np.linspace(5.90, 6.15, 60))
    grid = SweepGrid((0.0488,), freqs, fig3_system())
    f_peak, _ = peak_along_freq(run_sweep(grid), 0, "rot1")
    assert abs(f_peak - dressed_resonator_frequency(6.0, 7.0, 0.2, 1)) <= freqs[1] - freqs[0]


def test_selective_resonance_contrast():
    freqs = tuple(np.linspace(5.90, 6.15, 60))
    m = run_sweep(SweepGrid((0.0488,), freqs, fig3_system()))
    j = int(np.argmax(m.rot0()[0]))
    assert m.rot0()[0, j] - m.rot1()[0, j] > 0.3


def test_values_in_unit_interval():
    m = run_sweep(small_grid(3, 4))
    assert np.all((m.rot0() >= 0) & (m.rot0() <= 1))
    assert np.all((m.rot1() >= 0) & (m.rot1() <= 1))


def test_halving_dt_never_lowers_maev():
    coarse = run_sweep(small_grid(2, 4, dt_ns=0.02))
    fine = run_sweep(small_grid(2, 4, dt_ns=0.01))
    for k in (0, 2):
        assert np.all(fine.values[..., k] >= coarse.values[..., k] - 1e-3)


@pytest.mark.parametrize("kwargs", [
    dict(g_values=(), freq_values=(6.0,)),
    dict(g_values=(0.05, 0.04), freq_values=(6.0,)),
    dict(g_values=(0.05,), freq_values=(6.0, 6.0)),
    dict(g_values=(-0.01,), freq_values=(6.0,)),
    dict(g_values=(0.05,), freq_values=(6.0,), dt_ns=0.0),
    dict(g_values=(0.05,), freq_values=(6.0,), qubit_index=2),
])
def test_invalid_grid(kwargs):
    with pytest.raises(InputError):
        SweepGrid(base_spec=fig3_system(), **kwargs)


def test_invalid_workers():
    with pytest.raises(InputError):
        run_sweep(small_grid(), workers=0)


def test_cell_failure_reports_coordinates(monkeypatch):
    def boom(grid, g, freq):
        if freq > 6.0:
            raise FloatingPointError("overflow")
        return (0.0, 0.0, 0.0, 0.0)

    monkeypatch.setattr(sw, "evaluate_cell", boom)
    with pytest.raises(NumericalError, match=r"freq=6\.05.*\[0, 2\]"):
        run_sweep(small_grid())


def test_csv_shapes(tmp_path):
    p1 = tmp_path / "one.csv"
    write_csv(run_sweep(SweepGrid((0.05,), (6.0,), fig3_system())), p1)
    assert p1.read_bytes().count(b"\n") == 2
    p2 = tmp_path / "two.csv"
    write_csv(run_sweep(small_grid(2, 3)), p2)
    lines = p2.read_text().splitlines()
    assert len(lines) == 7 and lines[0] == CSV_HEADER
    g_col = [ln.split(",")[0] for ln in lines[1:]]
    assert g_col[:3] == [g_col[0]] * 3 and g_col[3:] == [g_col[3]] * 3 and g_col[0] != g_col[3]
    assert b"\r" not in p2.read_bytes()


def test_csv_roundtrip_to_last_digit(tmp_path):
    path = tmp_path / "m.csv"
    write_csv(run_sweep(small_grid(2, 3)), path)
    rows = read_csv(path)
    text = path.read_text().splitlines()[1:]
    assert [",".join(f"{x:.9g}" for x in r) for r in rows] == text


def test_write_rejects_incomplete(tmp_path):
    m = run_sweep(small_grid())
    m.values[0, 0, 0] = np.nan
    with pytest.raises(InputError):
        write_csv(m, tmp_path / "x.csv")


def test_output_independent_of_workers(tmp_path):
    grid = small_grid(4, 3)
    outs = []
    for w in (1, 2, 4):
        path = tmp_path / f"w{w}.csv"
        write_csv(run_sweep(grid, workers=w), path)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_checkpoint_resume_is_byte_identical(tmp_path, monkeypatch):
    grid = small_grid(3, 3)
    ref = tmp_path / "ref.csv"
    write_csv(run_sweep(grid), ref)

    out = tmp_path / "out.csv"
    calls = []
    real_row = sw._row

    def dying_row(args):
        if args[1] == 2:
            raise KeyboardInterrupt
        calls.append(args[1])
        return real_row(args)

    monkeypatch.setattr(sw, "_row", dying_row)
    with pytest.raises(KeyboardInterrupt):
        run_sweep(grid, checkpoint=out)
    ckpt = tmp_path / "out.csv.ckpt"
    assert ckpt.read_text().split() == ["0", "1"]

    monkeypatch.setattr(sw, "_row", lambda args: calls.append(args[1]) or real_row(args))
    calls.clear()
    write_csv(run_sweep(grid, checkpoint=out), out)
    assert calls == [2]
    assert out.read_bytes() == ref.read_bytes()
    clear_checkpoint(out)
    assert not ckpt.exists()


def test_nearest_row():
    m = run_sweep(SweepGrid((0.01, 0.05, 0.1), (6.0,), fig3_system()))
    assert nearest_row(m, 0.0488) == 1
