"""Scenario files: a JSON document validated against a bundled schema.

Every quantity carries its unit in the key name (``freq_ghz``, ``g_ghz``,
``t_ns``, ``dt_ns``). Unknown keys are rejected. Problems are reported as
:class:`~srqed.errors.ConfigError` with the file, line and field path.

Layout (see ``data/scenario.schema.json`` for the full grammar)::

    {
      "system": {"modes": [...], "couplings": [...], "cutoff": 3},
      "trajectory" | "sweep" | "gate" | "find_resonance": {...},
      "controls": {"dt_ns": 0.01, "t_max_ns": 20, "cutoff": 3, "workers": 1, "refine": false}
    }
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import jsonschema
import numpy as np

from .errors import ConfigError, InputError
from .gates import (FredkinParams, GateKind, GateProtocol, build_fredkin_protocol,
                    phase_protocol)
from .hamiltonian import CouplingSpec, SystemSpec
from .hilbert import ModeSpec
from .sweep import SweepGrid

_WS = re.compile(r"\s*")


def schema() -> dict:
    """The published scenario schema."""
    text = resources.files("srqed").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


def _field(path: Sequence[Any]) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _line_of(text: str, path: Sequence[Any]) -> int | None:
    """1-based line where the value at ``path`` starts, or ``None``."""
    dec = json.JSONDecoder()
    try:
        i = _WS.match(text, 0).end()
        for key in path:
            opener = text[i]
            i = _WS.match(text, i + 1).end()
            if opener == "{":
                while text[i] != "}":
                    k, i = dec.raw_decode(text, i)
                    i = _WS.match(text, i).end() + 1  # the colon
                    i = _WS.match(text, i).end()
                    if k == key:
                        break
                    _, i = dec.raw_decode(text, i)
                    i = _WS.match(text, i).end()
                    if text[i] == ",":
                        i = _WS.match(text, i + 1).end()
                else:
                    return None
            elif opener == "[" and isinstance(key, int):
                for _ in range(key):
                    _, i = dec.raw_decode(text, i)
                    i = _WS.match(text, i).end()
                    if text[i] != ",":
                        return None
                    i = _WS.match(text, i + 1).end()
            else:
                return None
        return text.count("\n", 0, i) + 1
    except (ValueError, IndexError):
        return None


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario document."""

    data: dict
    source: str = "<config>"
    text: str = field(default="", repr=False)

    def error(self, path: Sequence[Any], message: str) -> ConfigError:
        line = _line_of(self.text, path) if self.text else None
        where = f"{self.source}:{line}" if line else self.source
        return ConfigError(f"{where}: {_field(path)}: {message}")

    def section(self, name: str) -> dict:
        if name not in self.data:
            raise self.error([], f"missing required section '{name}'")
        return self.data[name]

    @property
    def controls(self) -> dict:
        return self.data.get("controls", {})


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    cfg = ScenarioConfig(data, source, text)
    validator = jsonschema.Draft202012Validator(schema())
    best = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if best is not None:
        raise cfg.error(list(best.absolute_path), best.message)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from exc
    return parse_config(text, str(path))


# ---------------------------------------------------------------------------
# section builders


def _values(v) -> tuple[float, ...]:
    if isinstance(v, dict):
        return tuple(float(x) for x in np.linspace(v["start"], v["stop"], v["num"]))
    return tuple(float(x) for x in v)


def build_system(cfg: ScenarioConfig) -> SystemSpec:
    sec = cfg.section("system")
    cutoff = cfg.controls.get("cutoff", sec.get("cutoff", 3))
    modes = []
    names: dict[str, int] = {}
    for k, m in enumerate(sec["modes"]):
        path = ["system", "modes", k]
        if m["name"] in names:
            raise cfg.error(path + ["name"], f"duplicate mode name {m['name']!r}")
        names[m["name"]] = k
        f = m["freq_ghz"]
        try:
            if m["kind"] == "resonator":
                if isinstance(f, list):
                    raise InputError("a resonator takes a single frequency")
                modes.append(ModeSpec.resonator(f, cutoff, name=m["name"]))
            else:
                modes.append(ModeSpec.qubit(f if isinstance(f, list) else [f], name=m["name"]))
        except InputError as exc:
            raise cfg.error(path + ["freq_ghz"], str(exc)) from exc

    couplings = []
    for k, c in enumerate(sec.get("couplings", [])):
        path = ["system", "couplings", k]
        for role in ("qubit", "resonator"):
            if c[role] not in names:
                raise cfg.error(path + [role], f"no mode named {c[role]!r}")
        q, r = names[c["qubit"]], names[c["resonator"]]
        n_trans = modes[q].dim - 1
        g = c["g_ghz"]
        g = tuple(g) if isinstance(g, list) else (g,) * n_trans
        try:
            couplings.append(CouplingSpec(q, r, g, c.get("rwa", False)))
        except InputError as exc:
            raise cfg.error(path, str(exc)) from exc
    try:
        return SystemSpec(tuple(modes), tuple(couplings))
    except InputError as exc:
        raise cfg.error(["system", "couplings"], str(exc)) from exc


def _mode_index(cfg: ScenarioConfig, spec: SystemSpec, path: list, name: str) -> int:
    try:
        return spec.index_of(name)
    except InputError as exc:
        raise cfg.error(path, str(exc)) from exc


def _label(cfg: ScenarioConfig, spec: SystemSpec, path: list, label) -> tuple[int, ...]:
    dims = spec.dims
    if len(label) != len(dims):
        raise cfg.error(path, f"label has {len(label)} entries but the system has {len(dims)} modes")
    for k, (occ, d) in enumerate(zip(label, dims)):
        if occ >= d:
            raise cfg.error(path + [k], f"occupation {occ} exceeds mode dimension {d}")
    return tuple(label)


@dataclass(frozen=True)
class TrajectoryJob:
    spec: SystemSpec
    times: np.ndarray
    columns: tuple[tuple[str, tuple[int, ...], tuple[int, ...]], ...]


def build_trajectory(cfg: ScenarioConfig) -> TrajectoryJob:
    spec = build_system(cfg)
    sec = cfg.section("trajectory")
    times = np.asarray(_values(sec["t_ns"]))
    if times.size == 0:
        raise cfg.error(["trajectory", "t_ns"], "times list is empty")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise cfg.error(["trajectory", "t_ns"], "times must be >= 0 and ascending")
    cols = []
    seen = set()
    for k, c in enumerate(sec["columns"]):
        path = ["trajectory", "columns", k]
        if c["name"] in seen:
            raise cfg.error(path + ["name"], f"duplicate column name {c['name']!r}")
        seen.add(c["name"])
        cols.append((c["name"], _label(cfg, spec, path + ["initial"], c["initial"]),
                     _label(cfg, spec, path + ["target"], c["target"])))
    return TrajectoryJob(spec, times, tuple(cols))


def build_sweep(cfg: ScenarioConfig) -> SweepGrid:
    spec = build_system(cfg)
    sec = cfg.section("sweep")
    q = _mode_index(cfg, spec, ["sweep", "qubit"], sec["qubit"])
    r = _mode_index(cfg, spec, ["sweep", "resonator"], sec["resonator"])
    osc = {}
    for name in ("rot0", "rot1"):
        o = sec[name]
        osc[name] = (_label(cfg, spec, ["sweep", name, "initial"], o["initial"]),
                     _label(cfg, spec, ["sweep", name, "target"], o["target"]))
    ctl = cfg.controls
    kw = {"dt_ns": ctl["dt_ns"]} if "dt_ns" in ctl else {}
    if "t_max_factor" in sec:
        kw["t_max_factor"] = sec["t_max_factor"]
    try:
        return SweepGrid(_values(sec["g_ghz"]), _values(sec["freq_ghz"]), spec,
                         osc["rot0"], osc["rot1"], q, r, t_max_ns=ctl.get("t_max_ns"), **kw)
    except InputError as exc:
        raise cfg.error(["sweep"], str(exc)) from exc


def _fredkin_params(cfg: ScenarioConfig, sec: dict) -> FredkinParams:
    keys = {
        "resonator_a_freq_ghz": "resonator_a_ghz",
        "resonator_b_freq_ghz": "resonator_b_ghz",
        "control_freq_ghz": "control_freqs_ghz",
        "control_a_g_ghz": "control_g_a_ghz",
        "control_b_g_ghz": "control_g_b_ghz",
        "anharmonicity_ghz": "anharmonicity_ghz",
        "q2_a_g_ghz": "g_q2_a_ghz",
        "q3_b_g_ghz": "g_q3_b_ghz",
        "q3_a_g_ghz": "g_q3_a_ghz",
        "q2_b_g_ghz": "g_q2_b_ghz",
        "stage1_freq_ghz": "stage1_freqs_ghz",
        "stage2_freq_ghz": "stage2_freqs_ghz",
        "coupling_tol_ghz": "coupling_tol_ghz",
    }
    over = {keys[k]: (tuple(v) if isinstance(v, list) else v) for k, v in sec.items()}
    if "cutoff" in cfg.controls:
        over["cutoff"] = cfg.controls["cutoff"]
    return replace(FredkinParams(), **over)


def build_gate(cfg: ScenarioConfig) -> tuple[GateProtocol, bool, bool]:
    """Protocol plus the ``refine`` and ``check_cutoff`` flags.

    Phase gates run on the ``system`` section (the last qubit is the
    target); the Fredkin gate uses its own two-resonator parameter block.
    May raise :class:`~srqed.errors.ProtocolConstraintError`.
    """
    sec = cfg.section("gate")
    kind = GateKind(sec["kind"])
    refine = bool(sec.get("refine", False) or cfg.controls.get("refine", False))
    check = bool(sec.get("check_cutoff", False))
    if kind is GateKind.FREDKIN:
        for key in ("duration_ns", "flip"):
            if key in sec:
                raise cfg.error(["gate", key], "not applicable to the Fredkin gate")
        try:
            p = build_fredkin_protocol(_fredkin_params(cfg, sec.get("fredkin", {})))
        except InputError as exc:
            raise cfg.error(["gate", "fredkin"], str(exc)) from exc
        return p, refine, check
    if "fredkin" in sec:
        raise cfg.error(["gate", "fredkin"], f"not applicable to {kind.value}")
    spec = build_system(cfg)
    try:
        p = phase_protocol(kind, spec, sec.get("duration_ns"), sec.get("flip"))
    except InputError as exc:
        raise cfg.error(["gate"], str(exc)) from exc
    return p, refine, check


@dataclass(frozen=True)
class ResonanceJob:
    spec: SystemSpec
    qubit: int
    scan: tuple[float, float, float]
    osc: tuple[tuple[int, ...], tuple[int, ...]]
    t_max_ns: float | None
    dt_ns: float
    shift_ladder: bool


def build_find_resonance(cfg: ScenarioConfig) -> ResonanceJob:
    spec = build_system(cfg)
    sec = cfg.section("find_resonance")
    base = ["find_resonance"]
    q = _mode_index(cfg, spec, base + ["qubit"], sec["qubit"])
    if spec.modes[q].is_resonator:
        raise cfg.error(base + ["qubit"], f"mode {sec['qubit']!r} is not a qubit")
    s = sec["scan_freq_ghz"]
    if not s["step"] > 0:
        raise cfg.error(base + ["scan_freq_ghz", "step"], "step must be positive")
    if not s["hi"] > s["lo"]:
        raise cfg.error(base + ["scan_freq_ghz"], f"empty scan: hi ({s['hi']}) must exceed lo ({s['lo']})")
    if not s["lo"] > 0:
        raise cfg.error(base + ["scan_freq_ghz", "lo"], "frequencies must be positive")
    osc = (_label(cfg, spec, base + ["initial"], sec["initial"]),
           _label(cfg, spec, base + ["target"], sec["target"]))
    ctl = cfg.controls
    return ResonanceJob(spec, q, (s["lo"], s["hi"], s["step"]), osc, ctl.get("t_max_ns"),
                        ctl.get("dt_ns", 0.01), sec.get("shift_ladder", False))
