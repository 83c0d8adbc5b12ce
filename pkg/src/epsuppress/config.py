"""Experiment configuration: TOML file -> validated model objects."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import RateModel, ground_state
from .bath import OhmicBath
from .codes import StabilizerCode, encode_logical, get_code
from .errors import CodeError, ConfigError
from .generators import InteractionSet
from .operators import PauliString, pauli_sum, spectral_decompose

SECTIONS = ("system", "bath", "interactions", "run")


@dataclass
class ExperimentConfig:
    raw: dict
    code: StabilizerCode | None
    logical_terms: list
    hamiltonian_terms: list
    eta_p: float
    initial_state: str
    bath: OhmicBath
    interactions: InteractionSet
    run: dict
    n: int
    seed: int

    @property
    def encoded(self) -> bool:
        return self.code is not None

    def system(self, eta_p: float | None = None):
        eta = self.eta_p if eta_p is None else eta_p
        if self.encoded:
            return encode_logical(self.logical_terms, self.code, eta)
        return pauli_sum(self.hamiltonian_terms, self.n)

    def hamiltonian(self, eta_p: float | None = None) -> np.ndarray:
        s = self.system(eta_p)
        return s.hamiltonian if self.encoded else s

    def state(self, h: np.ndarray) -> np.ndarray:
        """Initial density matrix on the ground level of ``h``."""
        if self.initial_state == "ground":
            return ground_state(h)
        p0 = spectral_decompose(h).ground.projector
        if self.initial_state == "ground_pure":
            psi = ground_state(h, pure=True)
        else:  # random_ground
            rng = np.random.default_rng(self.seed)
            v = rng.normal(size=h.shape[0]) + 1j * rng.normal(size=h.shape[0])
            psi = p0 @ v
            psi /= np.linalg.norm(psi)
        return np.outer(psi, psi.conj())

    def model(self) -> RateModel:
        if not self.encoded:
            raise ConfigError("this command needs an encoded system (set system.code)")
        return RateModel(self.system(), self.interactions, self.bath, initial_state=self.state)

    def eta_grid(self) -> list[float]:
        grid = self.run.get("eta_grid")
        if grid is None:
            raise ConfigError("run.eta_grid is required for this command")
        if isinstance(grid, dict):
            try:
                vals = np.linspace(float(grid["start"]), float(grid["stop"]), int(grid["num"]))
            except KeyError as exc:
                raise ConfigError(f"run.eta_grid table needs start/stop/num, missing {exc}") from None
        else:
            vals = np.asarray(grid, dtype=float)
        if np.any(vals < 0):
            raise ConfigError("eta_p values must be non-negative")
        return [float(v) for v in vals]


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _terms(items, what) -> list:
    out = []
    for item in items or []:
        _require(isinstance(item, (list, tuple)) and len(item) == 2,
                 f"{what} entries must be [pauli, coefficient] pairs, got {item!r}")
        label, coeff = item
        try:
            out.append((PauliString.parse(str(label)), float(coeff)))
        except ValueError as exc:
            raise ConfigError(f"{what}: {exc}") from None
    return out


def _parse_code(system: dict) -> StabilizerCode | None:
    inline = system.get("code_def")
    name = system.get("code")
    try:
        if inline is not None:
            return StabilizerCode(
                tuple(inline.get("generators", [])),
                dict(inline.get("logicals", {})),
                n_physical=inline.get("n_physical"),
                name=str(inline.get("name", name or "inline")),
            )
        if name in (None, "", "none"):
            return None
        return get_code(str(name))
    except (CodeError, ValueError) as exc:
        raise ConfigError(f"system code: {exc}") from None


def parse_config(data: dict[str, Any]) -> ExperimentConfig:
    unknown = set(data) - set(SECTIONS)
    _require(not unknown, f"unknown config sections {sorted(unknown)}")
    system = dict(data.get("system", {}))
    bath_cfg = dict(data.get("bath", {}))
    inter_cfg = dict(data.get("interactions", {}))
    run = dict(data.get("run", {}))

    code = _parse_code(system)
    logical_terms = _terms(system.get("logical_terms"), "system.logical_terms")
    hamiltonian_terms = _terms(system.get("hamiltonian"), "system.hamiltonian")
    if code is not None:
        _require(not hamiltonian_terms, "give either system.code or system.hamiltonian, not both")
        n = code.n_physical
        for p, _ in logical_terms:
            for q, letter in enumerate(p.letters):
                if letter == "I":
                    continue
                try:
                    code.logical(q, letter)
                except CodeError as exc:
                    raise ConfigError(str(exc)) from None
    else:
        _require(hamiltonian_terms, "system needs either code + logical_terms or hamiltonian")
        sizes = {p.n_qubits for p, _ in hamiltonian_terms}
        _require(len(sizes) == 1, "system.hamiltonian terms act on different qubit counts")
        n = sizes.pop()

    eta_p = float(system.get("eta_p", 0.0))
    _require(eta_p >= 0, "system.eta_p must be >= 0")
    initial_state = str(system.get("initial_state", "ground"))
    _require(initial_state in ("ground", "ground_pure", "random_ground"),
             f"unknown system.initial_state {initial_state!r}")

    beta = float(bath_cfg.get("beta", 1.0))
    omega_c = float(bath_cfg.get("omega_c", 10.0))
    mu = float(bath_cfg.get("mu", 1.0))
    k = bath_cfg.get("k", 1)
    _require(beta > 0, "bath.beta must be > 0")
    _require(omega_c > 0, "bath.omega_c must be > 0")
    _require(mu >= 0, "bath.mu must be >= 0")
    _require(isinstance(k, int) and k >= 1, "bath.k must be an integer >= 1")
    coupling = bath_cfg.get("coupling")
    try:
        bath = OhmicBath(beta, mu, k, omega_c,
                         None if coupling is None else np.asarray(coupling, dtype=complex))
    except ValueError as exc:
        raise ConfigError(f"bath: {exc}") from None

    try:
        if inter_cfg.get("all_weight_one"):
            interactions = InteractionSet.all_weight_one(n)
        else:
            paulis = [PauliString.parse(p) for p in inter_cfg.get("paulis", [])]
            for p in paulis:
                _require(p.n_qubits == n, f"interaction {p} does not act on {n} qubits")
            interactions = InteractionSet.from_paulis(paulis, inter_cfg.get("k_locality"))
    except ValueError as exc:
        raise ConfigError(f"interactions: {exc}") from None
    if coupling is not None:
        _require(len(coupling) == len(interactions),
                 f"bath.coupling is {len(coupling)}x{len(coupling)} but there are "
                 f"{len(interactions)} interaction terms")

    seed = run.get("seed", 0)
    _require(isinstance(seed, int), "run.seed must be an integer")
    return ExperimentConfig(data, code, logical_terms, hamiltonian_terms, eta_p, initial_state,
                            bath, interactions, run, n, seed)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    return parse_config(data)
