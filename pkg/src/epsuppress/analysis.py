"""Initial excitation rate out of the ground subspace, its bounds and sweeps.

For a state supported on the ground level ``P0`` of ``H`` the dissipator
yields

    R = -sum_ab sum_{l != 0} gamma_ab(e0 - el) Tr[rho0 A_a^dag P_l A_b]

and, after diagonalizing the coupling matrix ``gamma = U diag(g_k) U^dag``
with ``F_k = sum_b conj(U_bk) A_b``,

    R = -sum_k sum_{l != 0} g_k(e0 - el) Tr[rho0 F_k^dag P_l F_k].

Under a code that detects every ``A_a`` and a ground level inside the
codespace, the levels ``l`` inside the codespace drop out exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .bath import OhmicBath, coupling_eigensystem
from .codes import EncodedSystem
from .errors import DetectionError, GroundStateError, PhysicsContractError
from .generators import InteractionSet, build_dsame, build_lindblad, rate_from_generator
from .operators import SpectralDecomposition, operator_norm, spectral_decompose

GROUND_TOL = 1e-10
DETECTION_TOL = 1e-10

CSV_COLUMNS = (
    "eta_p", "n", "R_closed", "R_oracle", "R_dsame",
    "gamma_max", "bound_poly", "bound_exp", "slope_fit",
)


@dataclass
class RateReport:
    eta_p: float
    n: int
    beta: float
    g: float
    R_closed: float
    gamma_max: float = float("nan")
    bound_poly: float = float("nan")
    bound_exp: float = float("nan")
    R_oracle: float = float("nan")
    R_dsame: float = float("nan")
    slope_fit: float = float("nan")

    def row(self) -> list[float]:
        d = asdict(self)
        return [d[c] for c in CSV_COLUMNS]


@dataclass
class RateTerms:
    """Everything the closed-form rate and its bounds are built from."""

    decomp: SpectralDecomposition
    channel_rates: np.ndarray  # coupling eigenvalues, one per F_k
    f_ops: list  # F_k
    overlaps: np.ndarray  # [k, l] = Tr[rho0 F_k^dag P_l F_k]
    excluded: np.ndarray  # bool per level: ground, or inside the codespace
    in_code: np.ndarray | None  # bool per level, None when unencoded
    ground_in_code: bool
    bath: OhmicBath

    @property
    def gaps(self) -> np.ndarray:
        e = self.decomp.energies
        return e - e[0]

    def summands(self) -> np.ndarray:
        """``-g_k(e0 - el) Tr[rho0 F_k^dag P_l F_k]``, zero on excluded levels."""
        down = self.bath.gamma(-self.gaps)
        s = -self.channel_rates[:, None] * down[None, :] * self.overlaps
        s[:, self.excluded] = 0.0
        return s

    @property
    def rate(self) -> float:
        return float(self.summands().sum())

    @property
    def total_weight(self) -> float:
        """``sum_k Tr[rho0 F_k^dag F_k]``."""
        return float(self.overlaps.sum())


def _hamiltonian(system):
    if isinstance(system, EncodedSystem):
        return system.hamiltonian
    return np.asarray(system, dtype=complex)


def _check_state(rho0, p0):
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != p0.shape:
        raise ValueError(f"state shape {rho0.shape} does not match system dimension {p0.shape}")
    if np.abs(rho0 - rho0.conj().T).max() > 1e-10:
        raise GroundStateError("initial state is not Hermitian")
    if abs(np.trace(rho0).real - 1.0) > 1e-10:
        raise GroundStateError("initial state does not have unit trace")
    if np.linalg.eigvalsh(rho0).min() < -1e-10:
        raise GroundStateError("initial state is not positive semi-definite")
    if np.abs(p0 @ rho0 @ p0 - rho0).max() > GROUND_TOL:
        raise GroundStateError("initial state is not supported on the ground subspace")
    return rho0


def rate_terms(
    rho0: np.ndarray,
    system: EncodedSystem | np.ndarray,
    interactions: InteractionSet,
    bath: OhmicBath,
    grouping_tol: float | None = None,
    check_detection: bool = True,
) -> RateTerms:
    h = _hamiltonian(system)
    decomp = spectral_decompose(h, grouping_tol)
    projs = decomp.projectors
    rho0 = _check_state(rho0, projs[0])
    n_levels = len(projs)
    excluded = np.zeros(n_levels, dtype=bool)
    excluded[0] = True

    in_code = None
    ground_in_code = False
    if isinstance(system, EncodedSystem):
        pc = system.projector
        in_code = np.array([np.abs(pc @ p - p).max() <= 1e-9 for p in projs])
        ground_in_code = bool(in_code[0])
        if ground_in_code:
            code_levels = [l for l in range(1, n_levels) if in_code[l]]
            if check_detection and code_levels:
                p0 = projs[0]
                worst = 0.0
                for a in interactions.operators:
                    left = p0 @ a
                    for l in code_levels:
                        worst = max(worst, operator_norm(left @ projs[l]))
                if worst > DETECTION_TOL:
                    leaked = _leaked_rate(rho0, decomp, interactions, bath, code_levels)
                    raise DetectionError(
                        f"code does not detect the couplings: max ||P0 A P_l|| = {worst:.3g} "
                        f"for codespace levels; their unsuppressed contribution to R is {leaked:.6g}",
                        unsuppressed=leaked,
                    )
            excluded |= in_code

    if len(interactions):
        u, channel = coupling_eigensystem(bath, len(interactions))
        a_ops = interactions.operators
        f_ops = [sum(np.conj(u[b, k]) * a_ops[b] for b in range(len(a_ops))) for k in range(len(a_ops))]
    else:
        channel = np.zeros(0)
        f_ops = []
    overlaps = np.zeros((len(f_ops), n_levels))
    for k, f in enumerate(f_ops):
        fr = f @ rho0
        for l, p in enumerate(projs):
            # Tr[rho0 F^dag P F] = Tr[P F rho0 F^dag]
            overlaps[k, l] = np.real(np.vdot(f, p @ fr))
    return RateTerms(decomp, np.asarray(channel, dtype=float), f_ops, overlaps, excluded,
                     in_code, ground_in_code, bath)


def _leaked_rate(rho0, decomp, interactions, bath, levels):
    c = bath.coupling_matrix(len(interactions))
    e = decomp.energies
    total = 0.0
    for l in levels:
        p = decomp.projectors[l]
        g = bath.gamma(e[0] - e[l])
        for a, aa in enumerate(interactions.operators):
            for b, ab in enumerate(interactions.operators):
                total -= np.real(c[a, b] * g * np.trace(rho0 @ aa.conj().T @ p @ ab))
    return float(total)


def excitation_rate(
    rho0: np.ndarray,
    system: EncodedSystem | np.ndarray,
    interactions: InteractionSet,
    bath: OhmicBath,
    form: str = "diagonal",
    grouping_tol: float | None = None,
) -> float:
    """Closed-form initial excitation rate ``R = d/dt Tr[P0 rho]`` at ``t = 0``.

    ``form="diagonal"`` uses the channel operators ``F_k``; ``form="matrix"``
    evaluates the double sum over the coupling matrix directly. For an
    :class:`EncodedSystem` whose ground level lies in the codespace, the
    vanishing of every codespace term is verified before it is dropped
    (:class:`DetectionError` otherwise).
    """
    terms = rate_terms(rho0, system, interactions, bath, grouping_tol)
    if form == "diagonal":
        return terms.rate
    if form != "matrix":
        raise ValueError(f"unknown form {form!r}")
    rho0 = np.asarray(rho0, dtype=complex)
    c = bath.coupling_matrix(len(interactions)) if len(interactions) else np.zeros((0, 0))
    e = terms.decomp.energies
    total = 0.0
    for l, p in enumerate(terms.decomp.projectors):
        if terms.excluded[l]:
            continue
        g = bath.gamma(e[0] - e[l])
        for a, aa in enumerate(interactions.operators):
            left = rho0 @ aa.conj().T @ p
            for b, ab in enumerate(interactions.operators):
                if c[a, b] != 0:
                    total -= np.real(c[a, b] * g * np.trace(left @ ab))
    return float(total)


def pure_state_rate_check(
    psi0: np.ndarray,
    system: EncodedSystem | np.ndarray,
    interactions: InteractionSet,
    bath: OhmicBath,
    include_lamb_shift: bool = False,
    rtol: float = 1e-10,
) -> tuple[float, float]:
    """``R`` (closed form) and ``R' = <psi0| L(rho0) |psi0>`` (generator).

    In encoded mode the two must agree to ``rtol``; otherwise they are only
    returned.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.ndim != 1:
        raise ValueError("pure_state_rate_check needs a state vector; R' is undefined for mixed states")
    psi0 = psi0 / np.linalg.norm(psi0)
    rho0 = np.outer(psi0, psi0.conj())
    h = _hamiltonian(system)
    terms = rate_terms(rho0, system, interactions, bath)
    r = terms.rate
    gen = build_lindblad(h, interactions, bath, include_lamb_shift=include_lamb_shift)
    r_prime = rate_from_generator(gen, rho0, rho0)
    if isinstance(system, EncodedSystem):
        if not terms.ground_in_code:
            raise PhysicsContractError("encoded ground level is not inside the codespace")
        if abs(r - r_prime) > rtol * max(abs(r), abs(r_prime), 1e-300):
            raise PhysicsContractError(f"R = {r!r} and R' = {r_prime!r} differ beyond {rtol:g}")
    return r, r_prime


def rate_bounds(
    rho0: np.ndarray,
    system: EncodedSystem | np.ndarray,
    interactions: InteractionSet,
    bath: OhmicBath,
    terms: RateTerms | None = None,
) -> tuple[float, float, float]:
    """``(gamma_max, bound_poly, bound_exp)``.

    ``gamma_max`` maximizes the channel rate at ``e0 - el`` over non-excluded
    levels; ``bound_poly = gamma_max * sum_k Tr[rho0 F_k^dag F_k]``;
    ``bound_exp`` replaces ``gamma_max`` by
    ``exp(-beta g eta_p) max gamma_k(el - e0)``. For a bare Hamiltonian the
    factor ``exp(-beta g eta_p)`` is 1.
    """
    if terms is None:
        terms = rate_terms(rho0, system, interactions, bath)
    live = ~terms.excluded
    weight = terms.total_weight
    if not live.any() or terms.channel_rates.size == 0:
        return 0.0, 0.0, 0.0
    gaps = terms.gaps[live]
    top = terms.channel_rates.max()
    gamma_max = float(top * bath.gamma(-gaps).max())
    gamma_up = float(top * bath.gamma(gaps).max())
    suppression = 1.0
    if isinstance(system, EncodedSystem):
        suppression = math.exp(-bath.beta * system.gap * system.eta_p)
    return gamma_max, gamma_max * weight, suppression * gamma_up * weight


def ground_state(h: np.ndarray, pure: bool = False, grouping_tol: float | None = None) -> np.ndarray:
    """Maximally mixed state on the ground level, or one ground vector if ``pure``."""
    p0 = spectral_decompose(h, grouping_tol).ground.projector
    if not pure:
        return p0 / np.trace(p0).real
    evals, evecs = np.linalg.eigh(p0)
    return evecs[:, -1]


# ---------------------------------------------------------------- sweeps


@dataclass
class RateModel:
    """An encoded block: logical Hamiltonian, penalty, couplings, bath and initial state."""

    system: EncodedSystem
    interactions: InteractionSet
    bath: OhmicBath
    initial_state: Callable[[np.ndarray], np.ndarray] = field(default=ground_state)

    def at(self, eta_p: float) -> EncodedSystem:
        return self.system.with_eta(eta_p)

    def state(self, eta_p: float) -> np.ndarray:
        rho = self.initial_state(self.at(eta_p).hamiltonian)
        if rho.ndim == 1:
            rho = np.outer(rho, rho.conj())
        return rho

    def rate(self, eta_p: float) -> float:
        return excitation_rate(self.state(eta_p), self.at(eta_p), self.interactions, self.bath)

    def report(self, eta_p: float, oracle: bool = False, dsame: bool = False,
               pv_tol: float = 1e-8) -> RateReport:
        sys_ = self.at(eta_p)
        rho0 = self.state(eta_p)
        terms = rate_terms(rho0, sys_, self.interactions, self.bath)
        gmax, bpoly, bexp = rate_bounds(rho0, sys_, self.interactions, self.bath, terms)
        rep = RateReport(eta_p, sys_.n, self.bath.beta, sys_.gap, terms.rate, gmax, bpoly, bexp)
        h = sys_.hamiltonian
        p0 = terms.decomp.ground.projector
        if oracle:
            from .dynamics import finite_difference_rate

            gen = build_lindblad(h, self.interactions, self.bath)
            rep.R_oracle = finite_difference_rate(gen, rho0, projector=p0)
        if dsame:
            gen = build_dsame(h, self.interactions, self.bath, pv_tol=pv_tol)
            rep.R_dsame = rate_from_generator(gen, rho0, p0)
        return rep


@dataclass
class PenaltySweep:
    rows: list[RateReport]
    slope: float

    def write_csv(self, path):
        write_reports(path, self.rows)


def log_slope(etas: Sequence[float], rates: Sequence[float]) -> float:
    """Least-squares slope of ``ln|R|`` against ``eta_p`` over the top half of the grid."""
    etas = np.asarray(etas, dtype=float)
    rates = np.abs(np.asarray(rates, dtype=float))
    order = np.argsort(etas)
    etas, rates = etas[order], rates[order]
    top = slice(len(etas) // 2, None)
    if np.any(rates[top] <= 0):
        raise PhysicsContractError("cannot fit a log-slope through zero rates")
    return float(np.polyfit(etas[top], np.log(rates[top]), 1)[0])


def penalty_sweep(model: RateModel, etas: Sequence[float], oracle: bool = False,
                  dsame: bool = False) -> PenaltySweep:
    """One :class:`RateReport` per ``eta_p``; slope of ``ln|R|`` over the top half."""
    etas = [float(x) for x in etas]
    if len(etas) < 4:
        raise ValueError("penalty sweep needs at least 4 grid points")
    rows = [model.report(eta, oracle=oracle, dsame=dsame) for eta in etas]
    slope = log_slope(etas, [r.R_closed for r in rows])
    for r in rows:
        r.slope_fit = slope
    return PenaltySweep(rows, slope)


def write_reports(path, rows: Sequence[RateReport]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(x) for x in r.row()])


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


SIZE_COLUMNS = ("m", "n", "eta_star", "R_at_eta_star", "R_target", "shift", "log_m_over_beta_g",
                "slope_fit")


@dataclass
class SizeRow:
    m: int
    n: int
    eta_star: float
    R_at_eta_star: float
    R_target: float
    shift: float
    log_m_over_beta_g: float
    slope_fit: float = float("nan")


@dataclass
class SizeSweep:
    rows: list[SizeRow]
    slope: float  # d eta_star / d ln n

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SIZE_COLUMNS)
            for r in self.rows:
                w.writerow([_fmt(getattr(r, c)) for c in SIZE_COLUMNS])


def block_rate(model: RateModel, m: int, eta_p: float) -> float:
    """Rate of ``m`` independent copies of the block.

    Couplings act within one block and the initial state is a product of
    block ground states, so the rate is additive: ``R_m = m R_1``.
    """
    return m * model.rate(eta_p)


def tensor_power_model(model: RateModel, m: int) -> tuple[np.ndarray, InteractionSet, np.ndarray]:
    """Explicit ``m``-block Hamiltonian, couplings and product ground state (small ``m`` only)."""
    sys_ = model.system
    nb = sys_.n
    d = 1 << nb
    h_block = sys_.hamiltonian
    h = np.zeros((d**m, d**m), dtype=complex)
    inter = None
    for j in range(m):
        left, right = np.eye(d**j), np.eye(d ** (m - j - 1))
        h += np.kron(np.kron(left, h_block), right)
        emb = model.interactions.embed(nb * j, nb * (m - j - 1))
        inter = emb if inter is None else inter + emb
    rho_b = model.state(sys_.eta_p)
    rho = rho_b
    for _ in range(m - 1):
        rho = np.kron(rho, rho_b)
    return h, inter, rho


def minimal_penalty(model: RateModel, m: int, target: float, eta_max: float = 40.0,
                    step: float = 0.25, xtol: float = 1e-10) -> float:
    """Smallest ``eta_p`` on a scan + bisection with ``|R_m(eta_p)| <= target``."""
    f = lambda eta: abs(block_rate(model, m, eta))
    if f(0.0) <= target:
        return 0.0
    prev = 0.0
    eta = step
    while eta <= eta_max + 1e-12:
        if f(eta) <= target:
            g = lambda x: math.log(f(x)) - math.log(target)
            return float(brentq(g, prev, eta, xtol=xtol))
        prev, eta = eta, eta + step
    raise PhysicsContractError(f"|R| <= {target:g} not reachable for eta_p <= {eta_max:g}")


def size_scaling_sweep(model: RateModel, ms: Sequence[int] = (1, 2, 3),
                       target: float | None = None, reference_eta: float = 4.0,
                       eta_max: float = 40.0) -> SizeSweep:
    """Minimal penalty keeping ``|R|`` at a target as the number of blocks grows.

    The default target is ``|R|`` of one block at ``reference_eta``.
    """
    if target is None:
        target = abs(block_rate(model, 1, reference_eta))
    beta_g = model.bath.beta * model.system.gap
    nb = model.system.n
    rows = []
    base = None
    for m in ms:
        eta = minimal_penalty(model, m, target, eta_max)
        if base is None:
            base = eta
        rows.append(SizeRow(m, m * nb, eta, block_rate(model, m, eta), target,
                            eta - base, math.log(m / ms[0]) / beta_g))
    ns = np.array([r.n for r in rows], dtype=float)
    slope = float(np.polyfit(np.log(ns), [r.eta_star for r in rows], 1)[0]) if len(rows) > 1 else float("nan")
    for r in rows:
        r.slope_fit = slope
    return SizeSweep(rows, slope)
