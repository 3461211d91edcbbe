import math

import numpy as np
import pytest

from rydhop.dense import (
    LindbladModel,
    PropagationError,
    PropagationSettings,
    basis_state,
    effective_pi_time,
    is_physical,
    max_double_excitation,
    pi_pulse_survival,
    propagate_density,
    propagate_operator,
    propagate_operators,
    pure_density,
)
from rydhop.protocol import (
    GateSpec,
    PulseSequence,
    compile_gate,
    ideal_unitary,
    register_for,
)
from rydhop.register import DecayRates, build_register


def _model(kind="cz", n=1, rates=None, u=200.0):
    seq = compile_gate(GateSpec.default(kind, n))
    return seq, LindbladModel(register_for(seq, u), rates or DecayRates())


def _random_density(dim, rng, rank=3):
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def _coding_density(model, rng):
    idx = model.register.coding_indices()
    sub = _random_density(4, rng)
    rho = np.zeros((model.dim, model.dim), dtype=complex)
    rho[np.ix_(idx, idx)] = sub
    return rho


def test_empty_sequence_is_identity():
    _, model = _model()
    rho = _random_density(model.dim, np.random.default_rng(1))
    out = propagate_density(PulseSequence(()), model, rho)
    assert np.array_equal(out, rho)


def test_closed_system_preserves_purity():
    seq, model = _model("cnot", 2)
    psi = basis_state(model.register, [1, 0, 0, 1])
    rho = propagate_density(seq, model, pure_density(psi))
    assert abs(np.trace(rho @ rho).real - 1) < 1e-8


def test_operator_and_density_paths_agree():
    seq, model = _model("cz", 1, DecayRates.from_splitting(1e-3, "equal"))
    rho = _coding_density(model, np.random.default_rng(2))
    assert np.max(np.abs(propagate_operator(seq, model, rho) - propagate_density(seq, model, rho))) < 1e-14


def test_identity_is_fixed_by_closed_evolution():
    seq, model = _model("cz", 2)
    out = propagate_operator(seq, model, np.eye(model.dim))
    assert np.max(np.abs(out - np.eye(model.dim))) < 1e-10


def test_coherence_block_follows_ideal_conjugation():
    spec = GateSpec.default("cz", 1)
    seq, model = _model("cz", 1)
    idx = model.register.coding_indices()
    a = np.zeros((model.dim, model.dim), dtype=complex)
    a[idx[1], idx[2]] = 1  # |01><10|
    out = propagate_operator(seq, model, a)[np.ix_(idx, idx)]
    u = ideal_unitary(spec)
    target = u @ np.eye(4)[:, [1]] @ np.eye(4)[[2], :] @ u.conj().T
    overlap = np.vdot(target, out).real
    assert overlap >= 1 - 1e-3


@pytest.mark.parametrize("kind,n", [("cz", 1), ("cnot", 2), ("cz", 3)])
def test_trace_hermiticity_and_contractivity(kind, n):
    seq, model = _model(kind, n, DecayRates.from_splitting(5e-3, "equal"))
    rho0 = _coding_density(model, np.random.default_rng(n))
    rho = propagate_density(seq, model, rho0)
    assert abs(np.trace(rho).real - 1) < 1e-8
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-9
    assert np.trace(rho @ rho).real <= np.trace(rho0 @ rho0).real + 1e-8
    assert is_physical(rho)


def test_linearity():
    rng = np.random.default_rng(3)
    seq, model = _model("cnot", 1, DecayRates(1e-3, 2e-3, 3e-3))
    a = rng.normal(size=(model.dim,) * 2) + 1j * rng.normal(size=(model.dim,) * 2)
    b = rng.normal(size=(model.dim,) * 2) + 1j * rng.normal(size=(model.dim,) * 2)
    alpha, beta = 0.3 - 1.2j, -2.0 + 0.5j
    lhs = propagate_operator(seq, model, alpha * a + beta * b)
    ea, eb = propagate_operators(seq, model, np.stack([a, b]))
    assert np.max(np.abs(lhs - (alpha * ea + beta * eb))) < 1e-8


@pytest.mark.parametrize("kind,n,u", [("cz", 1, 200.0), ("cnot", 2, 10.0), ("cz", 1, 37.0), ("cnot", 0, 3.0)])
def test_block_propagation_matches_full_exponential(kind, n, u):
    seq, model = _model(kind, n, DecayRates(2e-3, 1e-3, 4e-3), u)
    assert model.dim <= 36
    rho = _coding_density(model, np.random.default_rng(4))
    exact = propagate_density(seq, model, rho, PropagationSettings(method="expm"))
    assert np.max(np.abs(propagate_density(seq, model, rho) - exact)) < 1e-10


@pytest.mark.parametrize("kind,n,u", [("cz", 1, 20.0), ("cnot", 2, 5.0)])
def test_runge_kutta_matches_full_exponential(kind, n, u):
    seq, model = _model(kind, n, DecayRates(2e-3, 1e-3, 4e-3), u)
    rho = _coding_density(model, np.random.default_rng(5))
    exact = propagate_density(seq, model, rho, PropagationSettings(method="expm"))
    # fourth-order global error: a fivefold smaller step buys ~600x accuracy
    rk = propagate_density(seq, model, rho, PropagationSettings(method="rk4", step_scale=0.01))
    assert np.max(np.abs(rk - exact)) < 1e-7


def test_runge_kutta_substep_budget_is_enforced():
    seq, model = _model("cz", 1)
    rho = _coding_density(model, np.random.default_rng(6))
    with pytest.raises(PropagationError):
        propagate_density(seq, model, rho, PropagationSettings(method="rk4", max_substeps=10))


def test_expm_path_refuses_large_registers():
    seq, model = _model("cz", 3)
    with pytest.raises(PropagationError):
        propagate_operator(seq, model, np.eye(model.dim), PropagationSettings(method="expm"))


def test_bad_inputs():
    seq, model = _model()
    with pytest.raises(PropagationError):
        propagate_density(seq, model, 2 * np.eye(model.dim) / model.dim)
    with pytest.raises(PropagationError):
        propagate_operator(seq, model, np.eye(3))
    with pytest.raises(ValueError):
        PropagationSettings(method="euler")


def test_two_level_oracle():
    assert pi_pulse_survival(0.0) == pytest.approx(1.0, abs=1e-14)
    p = pi_pulse_survival(1e-3, "exciting")
    assert -math.log(p) / (math.pi * 1e-3) == pytest.approx(0.375, rel=0.01)
    for g in (1e-3, 1e-4, 1e-5):
        exc, dex = effective_pi_time(g, "exciting"), effective_pi_time(g, "deexciting")
        assert exc == pytest.approx(0.375, rel=0.01) and dex == pytest.approx(0.375, rel=0.01)
        assert exc / dex == pytest.approx(1, abs=0.02)
    with pytest.raises(ValueError):
        pi_pulse_survival(0.5)


def _worst_double(u):
    seq, model = _model("cz", 2, u=u)
    reg = model.register
    worst = 0.0
    for c in (0, 1):
        for t in (0, 1):
            worst = max(worst, max_double_excitation(seq, model, basis_state(reg, [c, 0, 0, t])))
    return worst


def test_double_excitation_is_small_and_scales_as_inverse_square():
    w200 = _worst_double(200.0)
    assert w200 < 1e-3
    assert w200 / _worst_double(400.0) == pytest.approx(4, rel=0.3)


def test_no_drive_no_double_excitation():
    reg = build_register(2)
    model = LindbladModel(reg)
    psi = basis_state(reg, [2, 0, 0, 0])
    assert max_double_excitation(PulseSequence(()), model, psi) == 0.0


def test_propagator_cache_reused():
    seq, model = _model("cz", 2)
    propagate_operator(seq, model, np.eye(model.dim))
    n_cached = len(model._cache)
    propagate_operator(seq, model, np.eye(model.dim))
    assert len(model._cache) == n_cached
