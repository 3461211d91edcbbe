"""Simulate a small decay grid and fit the effective pi-pulse time."""

# %%
import math

from rydhop.analysis import fit_teff, predict_fidelity
from rydhop.experiments import RunConfig, run

cfg = RunConfig(
    gate="cz", gamma=1e-4, splitting="qubit",
    sweep={"n_A": [1, 2, 3], "gamma": [32e-5, 128e-5, 512e-5], "splitting": ["qubit", "ancilla", "equal"]},
)
records = run(cfg, workers=1)
print(f"{len(records)} dense records")

# %%
fit = fit_teff(records, "cz")
print(f"Omega t_eff / pi = {fit.value:.4f} +- {fit.half_width:.4f}, max residual {fit.details['max_abs_residual']:.1e}")

# %%
teff = fit.value * math.pi
print(" n_A  gamma_q   gamma_A   F_sim     F_model")
for r in records:
    f_model = predict_fidelity("cz", r.n_A, r.gamma_q, r.gammaA, r.u_over_omega, teff)
    print(f"  {r.n_A}   {r.gamma_q:.1e}  {r.gammaA:.1e}  {r.f_pro:.5f}  {f_model:.5f}")
