"""Compile a distant CZ, inspect its pulses and check it on the coding subspace."""

# %%
import numpy as np

from rydhop import GateSpec, compile_gate
from rydhop.dense import LindbladModel, unitary_on_states
from rydhop.protocol import ideal_unitary, register_for

spec = GateSpec.default("cz", 2)
seq = compile_gate(spec)
print(f"{spec.kind.value} with {spec.n_ancillas} ancillas: {seq.n_pulses} pulses, Omega*T = {seq.duration:.2f}")
for rec in seq.to_records():
    print(f"  {rec['step']:2d}  {rec['atom']:>2s}  {rec['transition']:>6s}  {rec['area_over_pi']:.0f} pi")

# %%
# Closed evolution of the four computational inputs at U/Omega = 200.
model = LindbladModel(register_for(seq, 200.0))
idx = model.register.coding_indices()
states = np.zeros((model.dim, 4), dtype=complex)
states[idx, np.arange(4)] = 1
u = unitary_on_states(seq, model, states)[idx]
np.set_printoptions(precision=3, suppress=True)
print(np.round(u, 3))
phase = np.trace(ideal_unitary(spec).conj().T @ u) / 4
print(f"overlap with the ideal CZ (up to a global phase): |Tr(U_ideal^dag U)|/4 = {abs(phase):.6f}")
