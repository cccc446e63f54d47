"""Command-line entry point.

Subcommands ``simulate``, ``sweep``, ``gate`` and ``find-resonance`` each
read one scenario file (``--config``). Exit codes: 0 success, 2
configuration error, 3 numerical error, 4 protocol-constraint error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .dynamics import Eigensystem
from .errors import ConfigError, InputError, NumericalError, ProtocolConstraintError
from .gates import find_resonance, gate_report
from .hamiltonian import build_hamiltonian
from .hilbert import basis_state
from .sweep import clear_checkpoint, run_sweep, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PROTOCOL = 4

WORKERS_ENV = "SRQED_WORKERS"

log = logging.getLogger("srqed")


def _workers(flag: int | None, cfg: cfgmod.ScenarioConfig) -> int:
    """``--workers`` beats the config's ``controls.workers``, which beats ``SRQED_WORKERS``."""
    if flag is not None:
        n = flag
    elif "workers" in cfg.controls:
        n = cfg.controls["workers"]
    else:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"worker count must be >= 1, got {n}")
    return n


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_simulate(cfg: cfgmod.ScenarioConfig, out_path: Path) -> int:
    job = cfgmod.build_trajectory(cfg)
    eig = Eigensystem(build_hamiltonian(job.spec))
    dims = job.spec.dims
    cols = []
    for name, initial, target in job.columns:
        p = eig.probabilities(basis_state(target, dims), basis_state(initial, dims), job.times)
        if not np.all(np.isfinite(p)):
            raise NumericalError(f"column {name}: non-finite probabilities")
        cols.append(np.clip(p, 0.0, 1.0))
    lines = ["t_ns," + ",".join(name for name, _, _ in job.columns)]
    for k, t in enumerate(job.times):
        lines.append(",".join(f"{x:.9g}" for x in (t, *(c[k] for c in cols))))
    _write(out_path, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(cfg: cfgmod.ScenarioConfig, out_path: Path, workers: int) -> int:
    grid = cfgmod.build_sweep(cfg)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    result = run_sweep(grid, workers=workers, checkpoint=out_path)
    write_csv(result, out_path)
    clear_checkpoint(out_path)
    return EXIT_OK


def _gate_paths(out_path: Path) -> tuple[Path, Path]:
    if out_path.suffix == ".csv":
        return out_path.with_suffix(".txt"), out_path
    return out_path, out_path.with_suffix(".csv")


def cmd_gate(cfg: cfgmod.ScenarioConfig, out_path: Path | None, refine: bool = False) -> int:
    protocol, cfg_refine, check = cfgmod.build_gate(cfg)
    report = gate_report(protocol, refine=refine or cfg_refine, check_cutoff=check)
    print(report.summary_line())
    if out_path is not None:
        text_path, csv_path = _gate_paths(out_path)
        _write(text_path, report.to_text())
        _write(csv_path, report.to_csv())
    return EXIT_OK


def cmd_find_resonance(cfg: cfgmod.ScenarioConfig) -> int:
    job = cfgmod.build_find_resonance(cfg)
    nu = find_resonance(job.spec, job.qubit, job.scan, job.osc, t_max=job.t_max_ns,
                        dt=job.dt_ns, shift_ladder=job.shift_ladder)
    print(f"{nu:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srqed", description="Selective-resonance circuit-QED simulator."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help, out_required):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=True, type=Path, help="scenario file (JSON)")
        if out_required is not None:
            p.add_argument("--out", required=out_required, type=Path, help="output file")
        return p

    add("simulate", "transition-probability trajectories to CSV", True)
    p = add("sweep", "MAEV map over (coupling, frequency) to CSV", True)
    p.add_argument("--workers", type=int, default=None,
                   help=f"parallel processes (default: config, then ${WORKERS_ENV}, then 1)")
    p = add("gate", "run a gate protocol and report its fidelity", False)
    p.add_argument("--refine", action="store_true",
                   help="retime phase gates to the best fidelity within 10%% of nominal")
    add("find-resonance", "locate the 0-1 frequency that maximizes an oscillation", None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load_config(args.config)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out, _workers(args.workers, cfg))
        if args.command == "gate":
            return cmd_gate(cfg, args.out, args.refine)
        return cmd_find_resonance(cfg)
    except ProtocolConstraintError as exc:
        print(f"error: protocol constraint: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
