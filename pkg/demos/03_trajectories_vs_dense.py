"""Hofmann bounds from quantum trajectories next to the exact density-matrix values."""

# %%
from rydhop import GateSpec
from rydhop.fidelity import report_from_channel
from rydhop.mcwf import mc_report
from rydhop.protocol import ideal_unitary
from rydhop.register import DecayRates
from rydhop.simulate import gate_model, simulate_channel

spec = GateSpec.default("cnot", 3)
seq, model = gate_model(spec, DecayRates.from_splitting(128e-5, "equal"))
dense = report_from_channel(simulate_channel(seq, model), ideal_unitary(spec))
print(f"dense: F_pro = {dense.f_pro:.4f}, bounds [{dense.lower:.4f}, {dense.upper:.4f}]")

# %%
mc = mc_report(seq, model, ideal_unitary(spec), n_traj=500, seed_base=7)
print(f"MCWF : bounds [{mc.lower:.4f} +- {mc.stderr_lower:.4f}, {mc.upper:.4f} +- {mc.stderr_upper:.4f}]")
