"""Distant CNOT against the nearest-neighbour CNOT chain at equal decay rates."""

# %%
from rydhop.experiments import NN_GATE, RunConfig, gain_rows, run

cfg = RunConfig(gamma=1e-4, splitting="equal",
                sweep={"gate": ["cnot", NN_GATE], "n_A": [2, 3], "gamma": [1e-4, 1e-3, 5e-3]})
rows = gain_rows(run(cfg, workers=1), teff=0.40 * 3.141592653589793)
print(" n_A  gamma    F_distant  F_chain   ratio    model")
for r in rows:
    print(f"  {r['n_A']}   {r['gamma']:.0e}  {r['f_pro']:.5f}   {r['f_pro_nn']:.5f}  {r['ratio']:.5f}  {r['predicted_ratio']:.5f}")
