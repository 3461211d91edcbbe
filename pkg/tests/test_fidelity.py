import json

import numpy as np
import pytest
import scipy.linalg as la

from rydhop.fidelity import (
    CNOT,
    PROBE_BASES,
    FidelityError,
    FidelityReport,
    SubspaceChannel,
    average_fidelity,
    check_operator_basis,
    classical_fidelity,
    complementary_basis,
    computational_basis,
    hofmann_bounds,
    pauli_basis,
    process_fidelity,
    report_from_channel,
)
from rydhop.protocol import GateSpec, ideal_unitary
from rydhop.simulate import simulate_gate

CZ = np.diag([1, -1, -1, -1]).astype(complex)


def _haar_unitary(d, rng):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _depolarize(a):
    return np.trace(a) * np.eye(4) / 4


def _noisy_channel(rng):
    # unitary error plus partial depolarization; a genuine CPTP map
    v = _haar_unitary(4, rng)
    w = la.expm(0.2j * (v + v.conj().T))
    p = 0.1
    return lambda a: (1 - p) * (w @ CZ) @ a @ (w @ CZ).conj().T + p * _depolarize(a)


def test_pauli_basis_normalisation():
    basis = pauli_basis(2)
    assert basis.shape == (16, 4, 4)
    check_operator_basis(basis)
    with pytest.raises(FidelityError):
        check_operator_basis(basis[:15])


def test_ideal_process_has_unit_fidelity():
    assert process_fidelity(lambda a: CNOT @ a @ CNOT.conj().T, CNOT) == pytest.approx(1, abs=1e-12)


def test_depolarizing_process():
    assert process_fidelity(_depolarize, CZ) == pytest.approx(1 / 16, abs=1e-14)
    assert average_fidelity(1 / 16) == pytest.approx(0.25)
    rng = np.random.default_rng(0)
    basis = _haar_unitary(4, rng).T
    assert classical_fidelity(_depolarize, CZ, basis) == pytest.approx(0.25)


def test_average_fidelity_values():
    assert average_fidelity(1.0) == 1.0
    assert average_fidelity(0.0) == pytest.approx(0.2)
    with pytest.raises(FidelityError):
        average_fidelity(0.5, d=1)


def test_complementary_basis():
    psi = computational_basis(4)
    phi = complementary_basis(psi)
    assert np.allclose(phi[-1], np.full(4, 0.5))
    assert np.max(np.abs(phi.conj() @ phi.T - np.eye(4))) < 1e-12
    assert np.allclose(np.abs(phi.conj() @ psi.T) ** 2, 0.25)
    with pytest.raises(FidelityError):
        complementary_basis(2 * psi)


def test_diagonal_gate_classical_fidelity_is_phase_blind():
    wrong = np.diag([1, 1, 1, -1]).astype(complex)
    proc = lambda a: wrong @ a @ wrong.conj().T
    assert classical_fidelity(proc, CZ, computational_basis()) == pytest.approx(1)
    assert classical_fidelity(proc, CZ, complementary_basis(computational_basis())) < 1


def test_hofmann_bounds_arithmetic():
    assert hofmann_bounds(1, 1) == (1, 1)
    lo, hi = hofmann_bounds(0.99, 0.98)
    assert lo == pytest.approx(0.97) and hi == 0.98


def test_global_phase_invariance():
    rng = np.random.default_rng(1)
    proc = _noisy_channel(rng)
    ref = process_fidelity(proc, CZ)
    for theta in rng.uniform(0, 2 * np.pi, size=5):
        assert process_fidelity(proc, np.exp(1j * theta) * CZ) == pytest.approx(ref, abs=1e-12)


def test_basis_independence():
    rng = np.random.default_rng(2)
    proc = _noisy_channel(rng)
    paulis = pauli_basis(2)
    mix = _haar_unitary(16, rng)
    remixed = np.einsum("ij,jab->iab", mix, paulis)
    check_operator_basis(remixed)
    assert process_fidelity(proc, CZ, remixed) == pytest.approx(process_fidelity(proc, CZ), abs=1e-9)


def test_average_fidelity_matches_haar_sampling():
    rng = np.random.default_rng(3)
    proc = _noisy_channel(rng)
    samples = []
    for _ in range(200):
        psi = _haar_unitary(4, rng)[:, 0]
        phi = CZ @ psi
        samples.append((phi.conj() @ proc(np.outer(psi, psi.conj())) @ phi).real)
    mean, se = np.mean(samples), np.std(samples, ddof=1) / np.sqrt(len(samples))
    assert abs(mean - average_fidelity(process_fidelity(proc, CZ))) < 3 * se


def test_channel_round_trip_and_sandwich():
    rng = np.random.default_rng(4)
    proc = _noisy_channel(rng)
    ch = SubspaceChannel.from_process(proc)
    assert process_fidelity(ch, CZ) == pytest.approx(process_fidelity(proc, CZ), abs=1e-12)
    rep = report_from_channel(ch, CZ)
    assert rep.sandwiched()
    assert rep.leakage == pytest.approx(0, abs=1e-12)
    assert SubspaceChannel.from_unitary(CZ).leakage() == pytest.approx(0, abs=1e-14)


def test_isometry_restriction_penalises_leakage():
    iso = np.zeros((6, 4), dtype=complex)
    iso[:4] = np.eye(4)

    def leaky(a):
        # half of |11> escapes to the fifth level
        out = a.copy()
        out[3, :] *= np.sqrt(0.5)
        out[:, 3] *= np.sqrt(0.5)
        out[4, 4] += 0.5 * a[3, 3]
        return out

    f = process_fidelity(leaky, np.eye(4), isometry=iso)
    assert f < 1 - 1e-3
    with pytest.raises(FidelityError):
        process_fidelity(leaky, np.eye(4), isometry=iso[:, :3])


def test_report_json_and_validation():
    rep = FidelityReport(f_psi=0.99, f_phi=0.98, lower=0.97, upper=0.98, f_pro=0.975)
    data = json.loads(rep.to_json())
    assert data["probe_bases"] == PROBE_BASES
    assert rep.f_avg == pytest.approx(average_fidelity(0.975))
    with pytest.raises(FidelityError):
        FidelityReport(f_psi=1, f_phi=1, lower=0.9, upper=0.8)
    with pytest.raises(FidelityError):
        SubspaceChannel(np.zeros((4, 4, 4)))


def test_blockade_cz_gate_is_near_perfect():
    rep = simulate_gate(GateSpec("cz", 0))
    assert 1 - rep.f_pro < 1e-4
    assert rep.sandwiched()


def test_ideal_unitary_shapes():
    assert ideal_unitary("cz").shape == (4, 4)
