import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings
from hypothesis import strategies as st

from rydhop.protocol import Pulse
from rydhop.register import (
    AtomKind,
    CouplingMap,
    DecayRates,
    RegisterError,
    Topology,
    Transition,
    build_register,
    drive_hamiltonian,
    embed_operator,
    excitation_count,
    interaction_hamiltonian,
    jump_operators,
    local_drive,
    total_hamiltonian,
)


def test_level_structure():
    assert AtomKind.QUBIT.dim == 3 and AtomKind.QUBIT.rydberg_level == 2
    assert AtomKind.ANCILLA.dim == 2 and AtomKind.ANCILLA.rydberg_level == 1


def test_no_ancilla_register():
    reg = build_register(0)
    assert reg.dim == 9
    assert reg.couplings.entries == {(0, 1): 200.0}


def test_two_ancilla_adjacency():
    reg = build_register(2)
    assert reg.dim == 36
    assert [a.label for a in reg.atoms] == ["C", "A1", "A2", "T"]
    assert set(reg.couplings.entries) == {(0, 1), (1, 2), (2, 3)}


def test_qubit_chain():
    reg = build_register(topology=Topology.QUBIT_CHAIN, chain_length=3)
    assert reg.dim == 27
    assert set(reg.couplings.entries) == {(0, 1), (1, 2)}


@pytest.mark.parametrize("n", range(10))
def test_dimension_formula(n):
    assert build_register(n).dim == 9 * 2**n


def test_basis_index_leftmost_most_significant():
    reg = build_register(1)
    assert reg.basis_index([0, 0, 1]) == 1
    assert reg.basis_index([0, 1, 0]) == 3
    assert reg.basis_index([1, 0, 0]) == 6
    for k in range(reg.dim):
        assert reg.basis_index(reg.digits[k]) == k


def test_coding_indices_keep_ancillas_ground():
    reg = build_register(2)
    idx = reg.coding_indices()
    digits = reg.digits[idx]
    assert np.all(digits[:, 1:3] == 0)
    assert [tuple(d[[0, 3]]) for d in digits] == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_invalid_registers():
    with pytest.raises(RegisterError):
        build_register(-1)
    with pytest.raises(RegisterError):
        build_register(topology="chain", chain_length=1)
    with pytest.raises(RegisterError):
        CouplingMap({(0, 0): 1.0})
    with pytest.raises(RegisterError):
        build_register(1, couplings={("C", "X"): 1.0})
    with pytest.raises(RegisterError):
        build_register(1).basis_index([0, 2, 0])


def test_identity_embedding():
    reg = build_register(2)
    for k, d in enumerate(reg.local_dims):
        assert abs(embed_operator(np.eye(d), k, reg) - np.eye(reg.dim)).max() == 0


def test_ancilla_projector_trace():
    reg = build_register(1)
    proj = embed_operator(np.diag([0, 1]), 1, reg)
    assert proj.diagonal().sum().real == 9


def test_embedding_disjoint_commute_and_multiplicative():
    rng = np.random.default_rng(0)
    reg = build_register(1)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(2, 2))
    c = rng.normal(size=(3, 3))
    ea, eb = embed_operator(a, 0, reg), embed_operator(b, 1, reg)
    assert abs(ea @ eb - eb @ ea).max() < 1e-12
    assert abs(embed_operator(a @ c, 0, reg) - ea @ embed_operator(c, 0, reg)).max() < 1e-12


def test_interaction_hamiltonian_no_ancilla():
    h = interaction_hamiltonian(build_register(0)).toarray()
    assert np.count_nonzero(h) == 1
    reg = build_register(0)
    k = reg.basis_index([2, 2])
    assert h[k, k] == 200.0


def test_empty_coupling_is_zero():
    reg = build_register(2, couplings={})
    assert interaction_hamiltonian(reg).nnz == 0


def test_next_nearest_terms():
    reg = build_register(2, next_nearest=200 / 8)
    assert len(reg.couplings) == 5
    assert reg.couplings.shift(0, 2) == 25.0 and reg.couplings.shift(1, 3) == 25.0


def test_interaction_commutes_with_non_addressed_projectors():
    reg = build_register(2)
    hint = interaction_hamiltonian(reg)
    for k, d in enumerate(reg.local_dims):
        for lev in range(d):
            p = np.zeros((d, d))
            p[lev, lev] = 1
            ep = embed_operator(p, k, reg)
            assert abs(hint @ ep - ep @ hint).max() == 0


def _evolve(h, psi, t):
    return la.expm(-1j * h.toarray() * t) @ psi


def test_single_ancilla_pi_and_two_pi_pulses():
    # isolated two-level atom: one ancilla, no couplings, only A1 driven
    reg = build_register(1, couplings={})
    g = np.zeros(reg.dim, dtype=complex)
    g[reg.basis_index([0, 0, 0])] = 1
    e_idx = reg.basis_index([0, 1, 0])
    h = drive_hamiltonian(Pulse(1, Transition.GE), reg)
    out = _evolve(h, g, np.pi)
    assert abs(out[e_idx] - (-1j)) < 1e-12
    out = _evolve(h, g, 2 * np.pi)
    assert abs(out[reg.basis_index([0, 0, 0])] + 1) < 1e-12


def test_zero_rabi_drive_vanishes():
    for kind, tr in ((AtomKind.QUBIT, Transition.Q1R), (AtomKind.ANCILLA, Transition.GE)):
        assert not np.any(local_drive(kind, tr, 0.0))


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(0, 3),
    atom=st.integers(0, 4),
    transition=st.sampled_from(list(Transition)),
    u=st.floats(0, 500),
)
def test_hamiltonians_are_hermitian(n, atom, transition, u):
    reg = build_register(n, u=u)
    atom = atom % reg.n_atoms
    kind = reg.atoms[atom].kind
    if (kind is AtomKind.ANCILLA) != (transition is Transition.GE):
        return
    h = total_hamiltonian(Pulse(atom, transition), reg)
    scale = max(abs(h).max(), 1.0)
    assert abs(h - h.conj().T).max() < 1e-12 * scale


def test_excitation_count():
    reg = build_register(1)
    counts = excitation_count(reg)
    assert counts[reg.basis_index([2, 1, 2])] == 3
    assert counts[reg.basis_index([1, 0, 1])] == 0


def test_decay_splittings():
    r = DecayRates.from_splitting(1e-3, "qubit")
    assert (r.gamma0, r.gamma1, r.gammaA) == (5e-4, 5e-4, 0.0)
    r = DecayRates.from_splitting(1e-3, "ancilla")
    assert (r.gamma_q, r.gammaA) == (0.0, 1e-3)
    r = DecayRates.from_splitting(1e-3, "equal")
    assert (r.gamma0, r.gamma1, r.gammaA) == (5e-4, 5e-4, 1e-3)
    with pytest.raises(ValueError):
        DecayRates(-1.0, 0.0, 0.0)


def test_jump_operators_move_rydberg_population_down():
    reg = build_register(1)
    rates = DecayRates(0.1, 0.2, 0.3)
    jumps = dict(jump_operators(reg, rates))
    assert len(jumps) == 5
    for name, op in jumps.items():
        op = op.toarray()
        rows, cols = np.nonzero(op)
        for r, c in zip(rows, cols):
            assert excitation_count(reg)[c] == excitation_count(reg)[r] + 1


def test_jump_rates_square_roots():
    reg = build_register(0)
    ops = [op for _, op in jump_operators(reg, DecayRates(0.04, 0.09, 0.0))]
    vals = sorted({round(v, 12) for op in ops for v in np.abs(op.data)})
    assert vals == [0.2, 0.3]
