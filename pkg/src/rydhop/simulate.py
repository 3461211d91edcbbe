"""Gate-level simulations: compile, propagate the coding-subspace matrix units, score."""

from __future__ import annotations

import itertools

import numpy as np

from .dense import LindbladModel, PropagationSettings, propagate_operators
from .fidelity import CNOT, FidelityReport, SubspaceChannel, report_from_channel
from .protocol import (
    GateSpec,
    PulseSequence,
    compile_gate,
    compile_nn_sequence,
    ideal_unitary,
    register_for,
)
from .register import DecayRates, Register

BASELINE_SCORINGS = ("register", "ends")


def coding_isometry(reg: Register, indices=None) -> np.ndarray:
    idx = reg.coding_indices() if indices is None else np.asarray(indices)
    iso = np.zeros((reg.dim, len(idx)), dtype=complex)
    iso[idx, np.arange(len(idx))] = 1
    return iso


def simulate_channel(
    seq: PulseSequence,
    model: LindbladModel,
    settings: PropagationSettings | None = None,
    indices=None,
) -> SubspaceChannel:
    """Dense propagation of the matrix units |n><m| of a coding subspace.

    ``indices`` lists the basis states spanning the subspace (default:
    control/target qubits with every other atom in level 0).  Outputs are
    projected back onto the same subspace, so atoms left excited or shelved
    count as errors.
    """
    idx = model.register.coding_indices() if indices is None else np.asarray(indices)
    d = len(idx)
    units = np.zeros((d * d, model.dim, model.dim), dtype=complex)
    for n in range(d):
        for m in range(d):
            units[d * n + m, idx[n], idx[m]] = 1
    out = propagate_operators(seq, model, units, settings)
    sub = out[:, idx[:, None], idx[None, :]]
    return SubspaceChannel(sub.reshape(d, d, d, d))


def gate_model(spec: GateSpec, rates=None, u=200.0, next_nearest=None) -> tuple[PulseSequence, LindbladModel]:
    seq = compile_gate(spec)
    return seq, LindbladModel(register_for(seq, u, next_nearest), rates or DecayRates())


def simulate_gate(
    spec: GateSpec,
    rates: DecayRates | None = None,
    u: float = 200.0,
    next_nearest: float | None = None,
    settings: PropagationSettings | None = None,
) -> FidelityReport:
    seq, model = gate_model(spec, rates, u, next_nearest)
    return report_from_channel(simulate_channel(seq, model, settings), ideal_unitary(spec))


def chain_register_states(n_qubits: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=n_qubits))


def long_range_cnot(n_qubits: int) -> np.ndarray:
    """CNOT(q_0 -> q_last) tensored with identity on the qubits in between."""
    states = chain_register_states(n_qubits)
    pos = {s: k for k, s in enumerate(states)}
    u = np.zeros((len(states), len(states)), dtype=complex)
    for k, s in enumerate(states):
        t = list(s)
        t[-1] ^= t[0]
        u[pos[tuple(t)], k] = 1
    return u


def simulate_nn_baseline(
    k: int,
    rates: DecayRates | None = None,
    u: float = 200.0,
    next_nearest: float | None = None,
    settings: PropagationSettings | None = None,
    scoring: str = "register",
) -> FidelityReport:
    """Nearest-neighbour CNOT chain on k+2 qubit atoms.

    ``scoring="register"`` scores the whole (k+2)-qubit register against
    CNOT(q_0 -> q_{k+1}) x I, so errors on the intermediate qubits count.
    ``scoring="ends"`` scores only (q_0, q_{k+1}) with the intermediates
    prepared in, and required to return to, |0>.
    """
    seq = compile_nn_sequence(k)
    model = LindbladModel(register_for(seq, u, next_nearest), rates or DecayRates())
    reg = model.register
    if scoring == "ends":
        return report_from_channel(simulate_channel(seq, model, settings), CNOT)
    if scoring != "register":
        raise ValueError(f"scoring must be one of {BASELINE_SCORINGS}")
    idx = [reg.basis_index(s) for s in chain_register_states(reg.n_atoms)]
    channel = simulate_channel(seq, model, settings, idx)
    return report_from_channel(channel, long_range_cnot(reg.n_atoms))
