"""Process, average and classical fidelities on the two-qubit coding subspace."""

from __future__ import annotations

import itertools
import json
from collections.abc import Callable
from dataclasses import asdict, dataclass

import numpy as np

PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

COMPUTATIONAL = "computational"
FOURIER = "fourier"
PROBE_BASES = f"{COMPUTATIONAL}+{FOURIER}"


class FidelityError(ValueError):
    pass


def pauli_basis(n_qubits: int = 2) -> np.ndarray:
    """Pauli strings, normalised so that Tr(A_i^dag A_j) = d delta_ij."""
    out = []
    for combo in itertools.product(PAULIS, repeat=n_qubits):
        m = np.array([[1.0 + 0j]])
        for p in combo:
            m = np.kron(m, p)
        out.append(m)
    return np.array(out)


def check_operator_basis(basis: np.ndarray, tol: float = 1e-10) -> None:
    d = basis.shape[-1]
    gram = np.einsum("iab,jab->ij", basis.conj(), basis)
    if basis.shape[0] != d * d or np.max(np.abs(gram - d * np.eye(d * d))) > tol:
        raise FidelityError("operator basis must satisfy Tr(A_i^dag A_j) = d delta_ij")


class SubspaceChannel:
    """Linear map on d x d operators, stored as its action on matrix units.

    ``responses[n, m]`` is the restricted output for input |n><m|; any
    population leaking out of the subspace is simply absent from it.
    """

    def __init__(self, responses: np.ndarray):
        responses = np.asarray(responses, dtype=complex)
        d = responses.shape[0]
        if responses.shape != (d, d, d, d):
            raise FidelityError(f"responses must have shape (d, d, d, d), got {responses.shape}")
        self.responses = responses
        self.d = d

    def __call__(self, a: np.ndarray) -> np.ndarray:
        return np.einsum("nm,nmij->ij", a, self.responses)

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> SubspaceChannel:
        d = u.shape[0]
        return cls(np.einsum("in,jm->nmij", u, u.conj()).reshape(d, d, d, d))

    @classmethod
    def from_process(cls, process: Callable, d: int = 4) -> SubspaceChannel:
        eye = np.eye(d)
        out = np.empty((d, d, d, d), dtype=complex)
        for n in range(d):
            for m in range(d):
                out[n, m] = process(np.outer(eye[n], eye[m]))
        return cls(out)

    def leakage(self) -> float:
        """Mean trace lost from the subspace over the basis states."""
        traces = np.einsum("nnii->n", self.responses).real
        return float(1 - traces.mean())


def restrict(process: Callable, isometry: np.ndarray) -> Callable:
    """Wrap a full-space process so it acts on, and returns, subspace operators."""
    iso = np.asarray(isometry, dtype=complex)

    def sub(a):
        out = process(iso @ a @ iso.conj().T)
        return iso.conj().T @ out @ iso

    return sub


def process_fidelity(
    process: Callable,
    ideal: np.ndarray,
    basis: np.ndarray | None = None,
    isometry: np.ndarray | None = None,
) -> float:
    """(1/d^3) sum_j Tr(U A_j^dag U^dag E(A_j)).

    ``process`` maps d x d operators to d x d outputs; pass ``isometry``
    (D x d) when it works on the full space, and outputs are projected back.
    """
    ideal = np.asarray(ideal, dtype=complex)
    d = ideal.shape[0]
    if isometry is not None:
        if isometry.shape[1] != d:
            raise FidelityError("isometry columns must match the ideal's dimension")
        process = restrict(process, isometry)
    basis = pauli_basis(int(round(np.log2(d)))) if basis is None else np.asarray(basis)
    check_operator_basis(basis)
    total = 0j
    for a in basis:
        out = process(a)
        if out.shape != (d, d):
            raise FidelityError(f"process output has shape {out.shape}, expected {(d, d)}")
        total += np.trace(ideal @ a.conj().T @ ideal.conj().T @ out)
    return float(total.real / d**3)


def average_fidelity(f_pro: float, d: int = 4) -> float:
    if d < 2:
        raise FidelityError("dimension must be >= 2")
    return (d * f_pro + 1) / (d + 1)


def computational_basis(d: int = 4) -> np.ndarray:
    """Rows are basis states."""
    return np.eye(d, dtype=complex)


def complementary_basis(basis: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Discrete-Fourier partner of an orthonormal basis (rows in, rows out)."""
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[0]
    gram = basis.conj() @ basis.T
    if np.max(np.abs(gram - np.eye(d))) > tol:
        raise FidelityError("input basis is not orthonormal")
    k = np.arange(1, d + 1)
    kernel = np.exp(-2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)
    return kernel @ basis


def classical_fidelity(process: Callable, ideal: np.ndarray, basis: np.ndarray, isometry=None) -> float:
    """(1/d) sum_i <i|U^dag E(|i><i|) U|i> over the rows of ``basis``."""
    if isometry is not None:
        process = restrict(process, isometry)
    ideal = np.asarray(ideal, dtype=complex)
    vals = []
    for psi in np.asarray(basis, dtype=complex):
        out = process(np.outer(psi, psi.conj()))
        phi = ideal @ psi
        vals.append((phi.conj() @ out @ phi).real)
    return float(np.mean(vals))


def hofmann_bounds(f_psi: float, f_phi: float) -> tuple[float, float]:
    return f_psi + f_phi - 1, min(f_psi, f_phi)


@dataclass
class FidelityReport:
    f_psi: float
    f_phi: float
    lower: float
    upper: float
    f_pro: float | None = None
    stderr_psi: float | None = None
    stderr_phi: float | None = None
    stderr_lower: float | None = None
    stderr_upper: float | None = None
    leakage: float | None = None
    probe_bases: str = PROBE_BASES

    def __post_init__(self):
        if self.lower > self.upper:
            raise FidelityError("lower bound exceeds upper bound")

    @property
    def f_avg(self) -> float | None:
        return None if self.f_pro is None else average_fidelity(self.f_pro)

    def sandwiched(self, eps: float = 1e-9) -> bool:
        return self.f_pro is None or self.lower - eps <= self.f_pro <= self.upper + eps

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def report_from_channel(channel: SubspaceChannel, ideal: np.ndarray) -> FidelityReport:
    psi = computational_basis(channel.d)
    phi = complementary_basis(psi)
    f_psi = classical_fidelity(channel, ideal, psi)
    f_phi = classical_fidelity(channel, ideal, phi)
    lower, upper = hofmann_bounds(f_psi, f_phi)
    return FidelityReport(
        f_psi=f_psi,
        f_phi=f_phi,
        lower=lower,
        upper=upper,
        f_pro=process_fidelity(channel, ideal),
        leakage=channel.leakage(),
    )
