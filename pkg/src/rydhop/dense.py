"""Density-matrix propagation of pulse sequences under the Lindblad equation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .propagators import (
    BlockPropagator,
    HilbertSegment,
    effective_hamiltonian,
    liouvillian,
)
from .protocol import FrameOp, Pulse, PulseSequence
from .register import (
    AtomKind,
    DecayRates,
    Register,
    embed_operator,
    excitation_count,
    jump_operators,
    total_hamiltonian,
)


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PropagationSettings:
    """Integration controls.

    ``method`` is ``"blocks"`` (exact exponentiation of invariant blocks),
    ``"rk4"`` (fixed-step classical Runge-Kutta) or ``"expm"`` (exponential
    of the full vectorised generator; reference path for small registers).
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_substeps: int = 200_000
    method: str = "blocks"
    step_scale: float = 0.05

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_substeps < 1:
            raise ValueError("tolerances and max_substeps must be positive")
        if self.method not in ("blocks", "rk4", "expm"):
            raise ValueError(f"unknown method {self.method!r}")


EXPM_MAX_DIM = 36

SIGMA_X_QUBIT = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)


@dataclass
class LindbladModel:
    """Register plus decay rates; caches per-pulse generators and propagators."""

    register: Register
    rates: DecayRates = field(default_factory=DecayRates)

    def __post_init__(self):
        self._jumps = jump_operators(self.register, self.rates)
        self._cache: dict = {}

    @property
    def dim(self) -> int:
        return self.register.dim

    @property
    def jump_ops(self) -> list[sp.csr_matrix]:
        return [op for _, op in self._jumps]

    @property
    def jump_labels(self) -> list[str]:
        return [name for name, _ in self._jumps]

    @property
    def active_jumps(self) -> list[sp.csr_matrix]:
        out = []
        for op in self.jump_ops:
            op = op.copy()
            op.eliminate_zeros()
            if op.nnz:
                out.append(op)
        return out

    def hamiltonian(self, pulse: Pulse | None) -> sp.csr_matrix:
        return total_hamiltonian(pulse, self.register)

    def u_max(self) -> float:
        return max(self.register.couplings.entries.values(), default=0.0)

    def frame_operator(self, op: FrameOp) -> sp.csr_matrix:
        if self.register.atoms[op.atom].kind is not AtomKind.QUBIT:
            raise PropagationError("sigma_x frame needs a qubit atom")
        key = ("X", op.atom, op.op)
        if key not in self._cache:
            self._cache[key] = embed_operator(SIGMA_X_QUBIT, op.atom, self.register)
        return self._cache[key]

    def _key(self, pulse: Pulse):
        return (pulse.atom, pulse.transition, pulse.area, pulse.rabi)

    def liouvillian(self, pulse: Pulse | None) -> sp.csr_matrix:
        gen = liouvillian(self.hamiltonian(pulse), self.active_jumps)
        gen.eliminate_zeros()
        return gen

    def segment_propagator(self, pulse: Pulse) -> BlockPropagator:
        key = ("L",) + self._key(pulse)
        if key not in self._cache:
            self._cache[key] = BlockPropagator(self.liouvillian(pulse), pulse.duration)
        return self._cache[key]

    def full_propagator(self, pulse: Pulse) -> np.ndarray:
        """Dense exponential of the whole vectorised generator (reference path)."""
        key = ("E",) + self._key(pulse)
        if key not in self._cache:
            self._cache[key] = la.expm(self.liouvillian(pulse).toarray() * pulse.duration)
        return self._cache[key]

    def hilbert_segment(self, pulse: Pulse, effective: bool = True) -> HilbertSegment:
        key = ("H", effective) + self._key(pulse)
        if key not in self._cache:
            h = self.hamiltonian(pulse)
            if effective:
                h = effective_hamiltonian(h, self.active_jumps)
            h.eliminate_zeros()
            self._cache[key] = HilbertSegment(h)
        return self._cache[key]


def _rk4_segment(gen: sp.csr_matrix, x: np.ndarray, t: float, h_max: float, max_substeps: int) -> np.ndarray:
    n = max(1, math.ceil(t / h_max))
    if n > max_substeps:
        raise PropagationError(f"segment needs {n} substeps, more than max_substeps={max_substeps}")
    h = t / n
    for _ in range(n):
        k1 = gen @ x
        k2 = gen @ (x + 0.5 * h * k1)
        k3 = gen @ (x + 0.5 * h * k2)
        k4 = gen @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def _apply_frame(model: LindbladModel, op: FrameOp, ops: np.ndarray) -> np.ndarray:
    x = model.frame_operator(op).toarray()
    return x @ ops @ x.conj().T


def propagate_operators(
    seq: PulseSequence,
    model: LindbladModel,
    ops: np.ndarray,
    settings: PropagationSettings | None = None,
) -> np.ndarray:
    """Push a stack of operators (n, dim, dim) through the sequence's Lindblad map.

    The generator is linear, so non-Hermitian inputs (matrix units, Pauli
    strings) are propagated exactly like density matrices.
    """
    settings = settings or PropagationSettings()
    ops = np.asarray(ops, dtype=complex)
    single = ops.ndim == 2
    if single:
        ops = ops[None]
    dim = model.dim
    if ops.shape[1:] != (dim, dim):
        raise PropagationError(f"operator shape {ops.shape[1:]} does not match register dim {dim}")
    if settings.method == "expm" and dim > EXPM_MAX_DIM:
        raise PropagationError(f"expm reference path is limited to dim <= {EXPM_MAX_DIM}")

    n = ops.shape[0]
    for step in seq.steps:
        if isinstance(step, FrameOp):
            ops = _apply_frame(model, step, ops)
            continue
        x = ops.reshape(n, dim * dim).T
        if settings.method == "blocks":
            x = model.segment_propagator(step).apply(x)
        elif settings.method == "expm":
            x = model.full_propagator(step) @ x
        else:
            gen = model.liouvillian(step)
            scale = max(step.rabi, model.u_max(), 1.0)
            x = _rk4_segment(gen, x, step.duration, settings.step_scale / scale, settings.max_substeps)
        ops = np.ascontiguousarray(x.T).reshape(n, dim, dim)
    return ops[0] if single else ops


def propagate_operator(seq, model, a, settings=None) -> np.ndarray:
    return propagate_operators(seq, model, np.asarray(a)[None], settings)[0]


def propagate_density(
    seq: PulseSequence,
    model: LindbladModel,
    rho0: np.ndarray,
    settings: PropagationSettings | None = None,
) -> np.ndarray:
    settings = settings or PropagationSettings()
    rho0 = np.asarray(rho0, dtype=complex)
    tr0 = np.trace(rho0).real
    if abs(tr0 - 1) > 1e-9:
        raise PropagationError(f"initial state has trace {tr0}")
    rho = propagate_operator(seq, model, rho0, settings)
    drift = abs(np.trace(rho).real - tr0)
    if drift > settings.rel_tol * abs(tr0) + settings.abs_tol:
        raise PropagationError(f"trace drifted by {drift:.3e}; tighten the integrator settings")
    return rho


def is_physical(rho: np.ndarray, tol: float = 1e-9) -> bool:
    herm = np.max(np.abs(rho - rho.conj().T)) < tol
    trace = abs(np.trace(rho).real - 1) < tol
    return bool(herm and trace and np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() > -tol)


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def basis_state(reg: Register, levels) -> np.ndarray:
    psi = np.zeros(reg.dim, dtype=complex)
    psi[reg.basis_index(levels)] = 1.0
    return psi


# --- two-level oracle -----------------------------------------------------------


def two_level_generator(gamma: float, rabi: float = 1.0) -> np.ndarray:
    """4x4 Lindblad generator of a resonantly driven two-level atom decaying e -> g."""
    h = 0.5 * rabi * np.array([[0, 1], [1, 0]], dtype=complex)
    lop = np.sqrt(gamma) * np.array([[0, 1], [0, 0]], dtype=complex)
    return liouvillian(sp.csr_matrix(h), [sp.csr_matrix(lop)]).toarray()


def pi_pulse_survival(gamma_over_omega: float, direction: str = "exciting") -> float:
    """Probability of ending in the pi-pulse target state of a decaying two-level atom."""
    if not 0 <= gamma_over_omega <= 0.1:
        raise ValueError("gamma/Omega must lie in [0, 0.1]")
    start, target = {"exciting": (0, 1), "deexciting": (1, 0)}[direction]
    rho0 = np.zeros((2, 2), dtype=complex)
    rho0[start, start] = 1
    rho = (la.expm(two_level_generator(gamma_over_omega) * math.pi) @ rho0.reshape(-1)).reshape(2, 2)
    return float(rho[target, target].real)


def effective_pi_time(gamma_over_omega: float, direction: str = "exciting") -> float:
    """Omega * t_eff / pi from -ln(p) = gamma * t_eff."""
    p = pi_pulse_survival(gamma_over_omega, direction)
    return -math.log(p) / (math.pi * gamma_over_omega)


# --- diagnostics ----------------------------------------------------------------


def max_double_excitation(
    seq: PulseSequence,
    model: LindbladModel,
    psi0: np.ndarray,
    sample_count: int = 16,
) -> float:
    """Largest population of states with two or more Rydberg excitations.

    Closed-system diagnostic: decay is ignored and the pure state is sampled
    at ``sample_count`` evenly spaced times inside every pulse.
    """
    many = excitation_count(model.register) >= 2
    psi = np.asarray(psi0, dtype=complex)
    worst = float(np.sum(np.abs(psi[many]) ** 2))
    for step in seq.steps:
        if isinstance(step, FrameOp):
            psi = model.frame_operator(step) @ psi
            continue
        seg = model.hilbert_segment(step, effective=False)
        for s in np.linspace(0, step.duration, sample_count + 1)[1:]:
            phi = seg.evolve(psi, s)
            worst = max(worst, float(np.sum(np.abs(phi[many]) ** 2)))
        psi = seg.evolve(psi, step.duration)
    return worst


def unitary_on_states(seq: PulseSequence, model: LindbladModel, states: np.ndarray) -> np.ndarray:
    """Closed-system evolution of column states (dim, k)."""
    out = np.asarray(states, dtype=complex).copy()
    for step in seq.steps:
        if isinstance(step, FrameOp):
            out = model.frame_operator(step) @ out
        else:
            seg = model.hilbert_segment(step, effective=False)
            out = np.stack([seg.evolve(out[:, j], step.duration) for j in range(out.shape[1])], axis=1)
    return out

