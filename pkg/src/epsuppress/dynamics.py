"""Fixed-step RK4 propagation, finite-difference rate oracles, projector derivative."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import GroundStateError, IntegratorError
from .generators import Liouvillian
from .operators import operator_norm, spectral_decompose

Generator = Union[Liouvillian, Callable[[float], Liouvillian]]

TRACE_DRIFT_MAX = 1e-6
STEP_HALVING_TOL = 1e-8


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    ground_population: np.ndarray
    purity: np.ndarray
    trace_error: np.ndarray
    error_estimate: float = float("nan")
    meta: dict = field(default_factory=dict)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "ground_population", "purity", "trace_error"])
            for row in zip(self.times, self.ground_population, self.purity, self.trace_error):
                w.writerow([f"{x:.17g}" for x in row])


def ground_projector(h: np.ndarray, grouping_tol: float | None = None) -> np.ndarray:
    return spectral_decompose(h, grouping_tol).ground.projector


def _as_callable(gen: Generator):
    if isinstance(gen, Liouvillian):
        if gen.dim <= 32:
            gen.matrix()
        return lambda t: gen, False
    cache: dict[float, Liouvillian] = {}

    def at(t):
        if t not in cache:
            if len(cache) > 8:
                cache.clear()
            cache[t] = gen(t)
        return cache[t]

    return at, True


def _rk4(gen_at, rho0, t0, dt, steps, record_every=1):
    d = rho0.shape[0]
    rho = np.array(rho0, dtype=complex)
    out = [rho.copy()]
    t = t0
    for i in range(steps):
        k1 = gen_at(t).apply(rho)
        k2 = gen_at(t + dt / 2).apply(rho + dt / 2 * k1)
        k3 = gen_at(t + dt / 2).apply(rho + dt / 2 * k2)
        k4 = gen_at(t + dt).apply(rho + dt * k3)
        rho = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * dt
        if (i + 1) % record_every == 0:
            out.append(rho.copy())
    return out


def propagate(
    gen: Generator,
    rho0: np.ndarray,
    t_end: float,
    dt: float,
    projector: np.ndarray | Callable[[float], np.ndarray] | None = None,
    t0: float = 0.0,
    validate: bool = True,
) -> Trajectory:
    """Classical RK4 with fixed step; optional step-halving accuracy check.

    ``gen`` is a Liouvillian or a callable ``t -> Liouvillian`` (rebuilt from
    the instantaneous spectrum). The ground population uses ``projector``,
    by default the ground eigenprojector of the generator's Hamiltonian at
    each recorded time. With ``validate`` the run is repeated at ``dt/2`` and
    rejected if the Richardson error estimate exceeds ``1e-8`` per unit time.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    rho0 = np.asarray(rho0, dtype=complex)
    gen_at, moving = _as_callable(gen)
    if rho0.shape != (gen_at(t0).dim,) * 2:
        raise ValueError(f"state shape {rho0.shape} does not match generator dimension")
    steps = max(1, int(round(t_end / dt)))
    dt = t_end / steps
    states = _rk4(gen_at, rho0, t0, dt, steps)
    times = t0 + dt * np.arange(steps + 1)

    err = float("nan")
    if validate:
        fine = _rk4(gen_at, rho0, t0, dt / 2, 2 * steps, record_every=2)
        diff = max(np.linalg.norm(a - b) for a, b in zip(states, fine))
        err = diff / 15.0
        if err > STEP_HALVING_TOL * t_end:
            raise IntegratorError(
                f"step-halving error estimate {err:.3g} exceeds {STEP_HALVING_TOL:g} per unit "
                f"time over t_end={t_end:g}; reduce dt={dt:g}"
            )

    if projector is None:
        if moving:
            proj_at = lambda t: ground_projector(gen_at(t).hamiltonian)
        else:
            p0 = ground_projector(gen_at(t0).hamiltonian)
            proj_at = lambda t: p0
    elif callable(projector):
        proj_at = projector
    else:
        proj_at = lambda t: projector

    trace = np.array([np.trace(r).real for r in states])
    trace_err = np.abs(trace - 1.0)
    if trace_err.max() > TRACE_DRIFT_MAX:
        raise IntegratorError(f"trace drifted by {trace_err.max():.3g}")
    pops = np.array([np.trace(proj_at(t) @ r).real for t, r in zip(times, states)])
    purity = np.array([np.vdot(r, r).real for r in states])
    return Trajectory(times, states, pops, purity, trace_err, err)


def _check_ground(rho0, p0):
    if np.abs(p0 @ rho0 @ p0 - rho0).max() > 1e-10:
        raise GroundStateError("initial state is not supported on the ground subspace")


def _richardson(f0, f_half, f_full, h):
    return 2 * (f_half - f0) / (h / 2) - (f_full - f0) / h


def default_step(gen: Liouvillian) -> float:
    return 1e-3 / max(gen.norm_bound(), 1.0)


def finite_difference_rate(
    gen: Generator,
    rho0: np.ndarray,
    h: float | None = None,
    projector: np.ndarray | Callable[[float], np.ndarray] | None = None,
    t0: float = 0.0,
    substeps: int = 4,
) -> float:
    """Right derivative of ``Tr[P0 rho(t)]`` at ``t0`` from propagation.

    One-sided differences at ``h`` and ``h/2`` combined by Richardson
    extrapolation, error ``O(h^2)``. ``projector`` may be time dependent.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    gen_at, moving = _as_callable(gen)
    g0 = gen_at(t0)
    if projector is None:
        projector = (lambda t: ground_projector(gen_at(t).hamiltonian)) if moving else ground_projector(g0.hamiltonian)
    proj_at = projector if callable(projector) else (lambda t: projector)
    _check_ground(rho0, proj_at(t0))
    if h is None:
        h = default_step(g0)
    traj = propagate(gen_at if moving else g0, rho0, h, h / (2 * substeps),
                     projector=proj_at, t0=t0, validate=False)
    pops = traj.ground_population
    return float(_richardson(pops[0], pops[substeps], pops[-1], h))


def finite_difference_purity_rate(
    gen: Liouvillian, rho0: np.ndarray, h: float | None = None, substeps: int = 4
) -> float:
    """Right derivative of ``Tr[rho(t)^2]`` at 0."""
    if h is None:
        h = default_step(gen)
    traj = propagate(gen, rho0, h, h / (2 * substeps), validate=False)
    p = traj.purity
    return float(_richardson(p[0], p[substeps], p[-1], h))


def projector_derivative_check(
    schedule: Callable[[float], np.ndarray],
    t0: float,
    h: float,
    grouping_tol: float | None = None,
) -> float:
    """``|| P0(t0) [P0(t0+h) - P0(t0-h)]/(2h) P0(t0) ||`` in operator norm.

    Vanishes analytically (``P0 dP0 P0 = 0``); the central difference leaves
    an ``O(h^2)`` residue.
    """
    levels = [spectral_decompose(schedule(t), grouping_tol).ground for t in (t0 - h, t0, t0 + h)]
    ranks = {lv.multiplicity for lv in levels}
    if len(ranks) != 1:
        raise GroundStateError(
            f"ground level changes rank within [{t0 - h:g}, {t0 + h:g}]: {sorted(ranks)}"
        )
    minus, mid, plus = (lv.projector for lv in levels)
    return operator_norm(mid @ ((plus - minus) / (2 * h)) @ mid)
