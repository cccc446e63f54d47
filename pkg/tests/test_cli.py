import json

import pytest

from conftest import CONFIGS
from srqed import config as cfgmod
from srqed.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_PROTOCOL, main
from srqed.errors import ConfigError

BUNDLED = sorted(p.name for p in CONFIGS.glob("*.cfg"))


def write_cfg(tmp_path, data, name="s.cfg"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2))
    return path


def load(name):
    return json.loads((CONFIGS / name).read_text())


# --- schema -------------------------------------------------------------------

@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_configs_validate(name):
    cfgmod.load_config(CONFIGS / name)


def test_unknown_key_rejected_with_location(tmp_path):
    data = load("fig4a.cfg")
    data["trajectory"]["colour"] = "red"
    with pytest.raises(ConfigError, match=r"s\.cfg:\d+: trajectory: .*'colour'"):
        cfgmod.load_config(write_cfg(tmp_path, data))


def test_error_line_points_at_field(tmp_path):
    data = load("fig4a.cfg")
    data["system"]["modes"][1]["freq_ghz"] = [6.035, -7.0]
    path = write_cfg(tmp_path, data)
    with pytest.raises(ConfigError) as exc:
        cfgmod.load_config(path)
    line = int(str(exc.value).split(":")[1])
    assert "-7.0" in path.read_text().splitlines()[line - 1]
    assert "system.modes[1].freq_ghz[1]" in str(exc.value)


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text('{\n  "system": {\n    "modes": [,]\n  }\n}\n')
    with pytest.raises(ConfigError, match=r"bad\.cfg:3:"):
        cfgmod.load_config(path)


def test_missing_file():
    with pytest.raises(ConfigError):
        cfgmod.load_config(CONFIGS / "nope.cfg")


def test_cutoff_control_overrides_system(tmp_path):
    data = load("cphase.cfg")
    data["controls"] = {"cutoff": 5}
    spec = cfgmod.build_system(cfgmod.load_config(write_cfg(tmp_path, data)))
    assert spec.dims == (3, 3, 6)


def test_schema_is_published():
    s = cfgmod.schema()
    assert s["additionalProperties"] is False
    assert set(s["properties"]) >= {"system", "trajectory", "sweep", "gate", "find_resonance", "controls"}


# --- simulate -----------------------------------------------------------------

def test_simulate_fig4a(tmp_path):
    out = tmp_path / "a.csv"
    assert main(["simulate", "--config", str(CONFIGS / "fig4a.cfg"), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "t_ns,rot0,rot1"
    rows = [list(map(float, ln.split(","))) for ln in lines[1:]]
    rot0 = max(r[1] for r in rows)
    rot1 = max(r[2] for r in rows)
    assert rot0 > 0.95 and rot1 < 0.2


def test_simulate_fig4b_has_four_columns(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["simulate", "--config", str(CONFIGS / "fig4b.cfg"), "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == "t_ns,rot00,rot01,rot10,rot11"


def test_simulate_empty_times(tmp_path, capsys):
    data = load("fig4a.cfg")
    data["trajectory"]["t_ns"] = []
    path = write_cfg(tmp_path, data)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG
    assert "trajectory.t_ns" in capsys.readouterr().err


def test_simulate_bad_label(tmp_path):
    data = load("fig4a.cfg")
    data["trajectory"]["columns"][0]["target"] = [0, 0, 4]
    path = write_cfg(tmp_path, data)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from srqed import cli
    from srqed.errors import NumericalError

    def broken(*a, **k):
        raise NumericalError("eigendecomposition produced non-finite values")

    monkeypatch.setattr(cli, "Eigensystem", broken)
    out = tmp_path / "x.csv"
    assert main(["simulate", "--config", str(CONFIGS / "fig4a.cfg"), "--out", str(out)]) == EXIT_NUMERICAL


def test_missing_section(tmp_path):
    data = load("cphase.cfg")
    path = write_cfg(tmp_path, data)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG


def test_usage_error_is_config_error():
    assert main(["simulate"]) == EXIT_CONFIG


# --- sweep --------------------------------------------------------------------

def small_sweep(tmp_path, workers=None):
    data = load("fig3.cfg")
    data["sweep"]["g_ghz"] = {"start": 0.03, "stop": 0.06, "num": 3}
    data["sweep"]["freq_ghz"] = {"start": 5.95, "stop": 6.05, "num": 4}
    if workers is not None:
        data["controls"]["workers"] = workers
    return write_cfg(tmp_path, data, "sweep.cfg")


def test_sweep_worker_sources_agree(tmp_path, monkeypatch):
    cfg = small_sweep(tmp_path)
    outs = []
    for k, args in enumerate([["--workers", "1"], ["--workers", "3"], []]):
        out = tmp_path / f"o{k}.csv"
        monkeypatch.setenv("SRQED_WORKERS", "2")
        assert main(["sweep", "--config", str(cfg), "--out", str(out), *args]) == EXIT_OK
        outs.append(out.read_bytes())
        assert not (tmp_path / f"o{k}.csv.ckpt").exists()
    assert outs[0] == outs[1] == outs[2]
    assert outs[0].count(b"\n") == 13


def test_sweep_bad_env_workers(tmp_path, monkeypatch):
    monkeypatch.setenv("SRQED_WORKERS", "many")
    assert main(["sweep", "--config", str(small_sweep(tmp_path)), "--out", str(tmp_path / "o.csv")]) == EXIT_CONFIG


def test_sweep_resumes_from_checkpoint(tmp_path):
    cfg = small_sweep(tmp_path)
    ref = tmp_path / "ref.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(ref)]) == EXIT_OK
    out = tmp_path / "out.csv"
    # leave behind the sidecars of a run that finished row 0 only
    lines = ref.read_text().splitlines()[1:5]
    (tmp_path / "out.csv.partial").write_text("".join(f"0:{ln}\n" for ln in lines))
    (tmp_path / "out.csv.ckpt").write_text("0\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == ref.read_bytes()


# --- gate ---------------------------------------------------------------------

def test_gate_cphase_writes_report(tmp_path, capsys):
    out = tmp_path / "cphase.txt"
    assert main(["gate", "--config", str(CONFIGS / "cphase.cfg"), "--out", str(out)]) == EXIT_OK
    kind, fid, dur, leak = capsys.readouterr().out.split()
    assert kind == "cphase"
    assert float(fid) == pytest.approx(0.92, abs=0.03)
    assert 10.0 <= float(dur) <= 10.6
    assert 0 <= float(leak) <= 1
    assert "total_fidelity: " in out.read_text()
    assert (tmp_path / "cphase.csv").read_text().startswith("input,overlap_re,overlap_im,probability\n")


def test_gate_refine_flag(tmp_path, capsys):
    data = load("cphase.cfg")
    data["gate"]["refine"] = False
    path = write_cfg(tmp_path, data)
    main(["gate", "--config", str(path)])
    plain = capsys.readouterr().out.split()
    main(["gate", "--config", str(path), "--refine"])
    refined = capsys.readouterr().out.split()
    assert float(plain[2]) == pytest.approx(1 / (2 * 0.0488))
    assert float(refined[1]) > float(plain[1])


def test_gate_zero_coupling(tmp_path, capsys):
    data = {
        "system": {
            "modes": [{"name": "q1", "kind": "qubit", "freq_ghz": [5.0]},
                      {"name": "q2", "kind": "qubit", "freq_ghz": [6.0]},
                      {"name": "a", "kind": "resonator", "freq_ghz": 6.0}],
            "couplings": [{"qubit": "q1", "resonator": "a", "g_ghz": 0.0},
                          {"qubit": "q2", "resonator": "a", "g_ghz": 0.0}],
        },
        "gate": {"kind": "cphase", "duration_ns": 10.0},
    }
    assert main(["gate", "--config", str(write_cfg(tmp_path, data))]) == EXIT_OK
    _, fid, dur, leak = capsys.readouterr().out.split()
    assert float(leak) == 0.0
    assert float(dur) == 10.0
    assert 0.0 <= float(fid) <= 1.0


def test_gate_fredkin_constraint_exit(tmp_path):
    data = load("fredkin.cfg")
    data["gate"]["fredkin"]["q3_b_g_ghz"] = 0.03
    assert main(["gate", "--config", str(write_cfg(tmp_path, data))]) == EXIT_PROTOCOL


def test_gate_fredkin_rejects_duration(tmp_path):
    data = load("fredkin.cfg")
    data["gate"]["duration_ns"] = 20.0
    assert main(["gate", "--config", str(write_cfg(tmp_path, data))]) == EXIT_CONFIG


# --- find-resonance -----------------------------------------------------------

def test_find_resonance_prints_six_decimals(capsys):
    assert main(["find-resonance", "--config", str(CONFIGS / "fig4a_resonance.cfg")]) == EXIT_OK
    text = capsys.readouterr().out.strip()
    assert len(text.split(".")[1]) == 6
    assert float(text) == pytest.approx(6.035, abs=1e-3)


def test_find_resonance_inverted_bounds(tmp_path):
    data = load("fig4a_resonance.cfg")
    data["find_resonance"]["scan_freq_ghz"] = {"lo": 6.1, "hi": 5.9, "step": 0.01}
    assert main(["find-resonance", "--config", str(write_cfg(tmp_path, data))]) == EXIT_CONFIG


# --- every bundled file runs --------------------------------------------------

def _command_for(data):
    for section, cmd in (("trajectory", "simulate"), ("sweep", "sweep"), ("gate", "gate"),
                         ("find_resonance", "find-resonance")):
        if section in data:
            return cmd
    raise AssertionError("no command section")


@pytest.mark.parametrize("name", [n for n in BUNDLED if n != "fig3.cfg"])
def test_bundled_configs_run(name, tmp_path):
    cmd = _command_for(load(name))
    args = [cmd, "--config", str(CONFIGS / name)]
    if cmd in ("simulate", "sweep", "gate"):
        args += ["--out", str(tmp_path / "out.csv")]
    assert main(args) == EXIT_OK
