"""Command-line front end: ``epsuppress <command> --config <path> [--out <dir>] [--seed <int>]``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    RateReport, _fmt, excitation_rate, penalty_sweep, rate_bounds, rate_terms,
    size_scaling_sweep, write_reports,
)
from .codes import detects
from .config import ExperimentConfig, load_config
from .dynamics import finite_difference_rate, propagate
from .errors import ConfigError, NumericalError, PhysicsContractError
from .generators import build_dsame, build_lindblad, rate_from_generator
from .kernels import BACKEND
from .operators import PauliString, operator_norm, spectral_decompose

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_NUMERICAL = 4

DETECTION_COLUMNS = ("error", "norm_PAP", "detected")
COMPARE_COLUMNS = ("eta_p", "n", "R_closed", "R_lindblad", "R_dsame", "difference")


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([x if isinstance(x, str) else _fmt(x) for x in r])


def _report(cfg: ExperimentConfig, eta: float, oracle: bool, dsame: bool) -> RateReport:
    if cfg.encoded:
        return cfg.model().report(eta, oracle=oracle, dsame=dsame,
                                  pv_tol=float(cfg.run.get("pv_tol", 1e-8)))
    h = cfg.hamiltonian()
    rho0 = cfg.state(h)
    terms = rate_terms(rho0, h, cfg.interactions, cfg.bath)
    gmax, bpoly, bexp = rate_bounds(rho0, h, cfg.interactions, cfg.bath, terms)
    rep = RateReport(0.0, cfg.n, cfg.bath.beta, float("nan"), terms.rate, gmax, bpoly, bexp)
    p0 = terms.decomp.ground.projector
    if oracle:
        rep.R_oracle = finite_difference_rate(build_lindblad(h, cfg.interactions, cfg.bath), rho0,
                                              projector=p0)
    if dsame:
        gen = build_dsame(h, cfg.interactions, cfg.bath, pv_tol=float(cfg.run.get("pv_tol", 1e-8)))
        rep.R_dsame = rate_from_generator(gen, rho0, p0)
    return rep


def _etas(cfg: ExperimentConfig) -> list[float]:
    return cfg.eta_grid() if "eta_grid" in cfg.run else [cfg.eta_p]


# ------------------------------------------------------------ commands


def cmd_check_code(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], int]:
    if not cfg.encoded:
        raise ConfigError("check-code needs system.code or system.code_def")
    labels = cfg.run.get("errors")
    if labels is None:
        ops = list(zip(cfg.interactions.labels, cfg.interactions.operators))
    else:
        ops = []
        for lab in labels:
            try:
                p = PauliString.parse(str(lab))
            except ValueError as exc:
                raise ConfigError(f"run.errors: {exc}") from None
            if p.n_qubits != cfg.n:
                raise ConfigError(f"run.errors entry {lab!r} does not act on {cfg.n} qubits")
            ops.append((str(p), p.matrix()))
    proj = cfg.code.projector
    rows, failures = [], 0
    for label, a in ops:
        ok = detects(cfg.code, a)
        failures += not ok
        rows.append((label, operator_norm(proj @ a @ proj), "detected" if ok else "FAILED"))
    path = out / "detection.csv"
    _write_rows(path, DETECTION_COLUMNS, rows)
    print(f"{len(rows) - failures} detected, {failures} failures")
    return [path], (EXIT_PHYSICS if failures else EXIT_OK)


def cmd_rate(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], int]:
    oracle = bool(cfg.run.get("oracle", True))
    dsame = bool(cfg.run.get("dsame", False))
    rows = [_report(cfg, eta, oracle, dsame) for eta in _etas(cfg)]
    path = out / "rate.csv"
    write_reports(path, rows)
    for r in rows:
        print(f"eta_p={r.eta_p:g}  R_closed={r.R_closed:.10g}  R_oracle={r.R_oracle:.10g}")
    return [path], EXIT_OK


def cmd_compare_dsame(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], int]:
    pv_tol = float(cfg.run.get("pv_tol", 1e-8))
    rows = []
    for eta in _etas(cfg):
        h = cfg.hamiltonian(eta)
        system = cfg.system(eta)
        rho0 = cfg.state(h)
        p0 = spectral_decompose(h).ground.projector
        r_closed = excitation_rate(rho0, system, cfg.interactions, cfg.bath)
        r_lind = rate_from_generator(build_lindblad(h, cfg.interactions, cfg.bath), rho0, p0)
        r_ds = rate_from_generator(build_dsame(h, cfg.interactions, cfg.bath, pv_tol=pv_tol), rho0, p0)
        rows.append((eta, cfg.n, r_closed, r_lind, r_ds, r_ds - r_lind))
        print(f"eta_p={eta:g}  R_lindblad={r_lind:.12g}  R_dsame={r_ds:.12g}  diff={r_ds - r_lind:.3g}")
    path = out / "compare_dsame.csv"
    _write_rows(path, COMPARE_COLUMNS, rows)
    return [path], EXIT_OK


def cmd_sweep_penalty(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], int]:
    sweep = penalty_sweep(cfg.model(), cfg.eta_grid(), oracle=bool(cfg.run.get("oracle", False)),
                          dsame=bool(cfg.run.get("dsame", False)))
    path = out / "sweep_penalty.csv"
    sweep.write_csv(path)
    print(f"slope d ln|R| / d eta_p = {sweep.slope:.6g}")
    return [path], EXIT_OK


def cmd_sweep_size(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], int]:
    ms = cfg.run.get("m_values", [1, 2, 3])
    if not ms or any(not isinstance(m, int) or m < 1 for m in ms):
        raise ConfigError("run.m_values must be positive integers")
    target = cfg.run.get("r_target")
    sweep = size_scaling_sweep(cfg.model(), ms, None if target is None else float(target),
                               reference_eta=float(cfg.run.get("reference_eta", 4.0)),
                               eta_max=float(cfg.run.get("eta_max", 40.0)))
    path = out / "sweep_size.csv"
    sweep.write_csv(path)
    for r in sweep.rows:
        print(f"m={r.m}  eta*={r.eta_star:.8g}  shift={r.shift:.6g}  ln(m)/(beta g)={r.log_m_over_beta_g:.6g}")
    return [path], EXIT_OK


def cmd_propagate(cfg: ExperimentConfig, out: Path) -> tuple[list[Path], int]:
    kind = cfg.run.get("generator", "lindblad")
    try:
        t_end, dt = float(cfg.run["t_end"]), float(cfg.run["dt"])
    except KeyError as exc:
        raise ConfigError(f"propagate needs run.{exc.args[0]}") from None
    if t_end <= 0 or dt <= 0:
        raise ConfigError("run.t_end and run.dt must be positive")
    h = cfg.hamiltonian()
    if kind == "lindblad":
        gen = build_lindblad(h, cfg.interactions, cfg.bath,
                             include_lamb_shift=bool(cfg.run.get("lamb_shift", False)))
    elif kind == "dsame":
        gen = build_dsame(h, cfg.interactions, cfg.bath, pv_tol=float(cfg.run.get("pv_tol", 1e-8)))
    else:
        raise ConfigError(f"run.generator must be 'lindblad' or 'dsame', got {kind!r}")
    traj = propagate(gen, cfg.state(h), t_end, dt, validate=bool(cfg.run.get("validate", True)))
    path = out / "trajectory.csv"
    traj.write_csv(path)
    print(f"{len(traj.times)} samples, final ground population {traj.ground_population[-1]:.10g}, "
          f"step-halving error {traj.error_estimate:.3g}")
    return [path], EXIT_OK


COMMANDS = {
    "check-code": cmd_check_code,
    "rate": cmd_rate,
    "compare-dsame": cmd_compare_dsame,
    "sweep-penalty": cmd_sweep_penalty,
    "sweep-size": cmd_sweep_size,
    "propagate": cmd_propagate,
}


# ------------------------------------------------------------ manifest


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolved(cfg: ExperimentConfig) -> dict:
    b = cfg.bath
    return {
        "config": cfg.raw,
        "resolved": {
            "n": cfg.n,
            "code": None if cfg.code is None else cfg.code.name,
            "eta_p": cfg.eta_p,
            "initial_state": cfg.initial_state,
            "bath": {"beta": b.beta, "mu": b.mu, "k": b.k, "omega_c": b.omega_c,
                     "coupling": None if b.coupling is None else
                     [[[z.real, z.imag] for z in row] for row in b.coupling]},
            "interactions": list(cfg.interactions.labels),
            "seed": cfg.seed,
        },
    }


def write_manifest(out: Path, command: str, config_path: str, cfg: ExperimentConfig,
                   outputs: list[Path], status: str, code: int, started: float, message: str = ""):
    manifest = {
        "tool": "epsuppress",
        "version": __version__,
        "backend": BACKEND,
        "command": command,
        "config_path": str(config_path),
        **_resolved(cfg),
        "started_utc": _dt.datetime.fromtimestamp(started, _dt.timezone.utc).isoformat(),
        "wall_clock_s": time.time() - started,
        "status": status,
        "exit_code": code,
        "message": message,
        "outputs": [{"path": p.name, "sha256": _sha256(p)} for p in outputs],
    }
    path = out / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epsuppress",
                                description="Excitation-rate suppression by energy penalties")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="TOML experiment file")
    p.add_argument("--out", default=None, help="output directory (default: run.out or ./results)")
    p.add_argument("--seed", type=int, default=None, help="overrides run.seed")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    started = time.time()
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        out = Path(args.out or cfg.run.get("out", "results"))
        out.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outputs: list[Path] = []
    try:
        outputs, code = COMMANDS[args.command](cfg, out)
        status, message = ("ok" if code == EXIT_OK else "physics-contract-violation"), ""
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsContractError as exc:
        code, status, message = EXIT_PHYSICS, "physics-contract-violation", str(exc)
    except NumericalError as exc:
        code, status, message = EXIT_NUMERICAL, "numerical-failure", str(exc)
    if message:
        print(f"{status}: {message}", file=sys.stderr)
    write_manifest(out, args.command, args.config, cfg, outputs, status, code, started, message)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
