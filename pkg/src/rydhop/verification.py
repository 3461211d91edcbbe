"""Acceptance checks: one function per criterion, sharing cached simulation sweeps.

Each check returns a :class:`CriterionResult` carrying the numbers it was
judged on.  :func:`run_verification` runs a selection and can write the
collected results as a JSON report.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analysis import SweepRecord, fit_alpha, fit_teff, gain_ratio, predict_fidelity
from .dense import LindbladModel, basis_state, effective_pi_time, max_double_excitation
from .experiments import NN_GATE, RunConfig, run_point
from .mcwf import mc_report
from .protocol import (
    GateSpec,
    Variant,
    apply_cnots_classical,
    compile_gate,
    compile_nn_sequence,
    expected_pulse_count,
    ideal_unitary,
    nn_cnot_circuit,
    register_for,
)
from .register import DecayRates
from .simulate import chain_register_states

GATE_NAMES = ("cz", "cnot")
TRUTH_ANCILLAS = range(5)
BLOCKADE_U = (25, 50, 100, 200)
BLOCKADE_EVEN_U = (50, 100, 150, 200)  # diagnostic grid on even integers
DISSIPATION_ANCILLAS = range(1, 5)
DISSIPATION_GAMMAS = (4e-5, 32e-5, 128e-5, 512e-5)
SPLITTINGS = ("qubit", "ancilla", "equal")
COMPARISON_ANCILLAS = (2, 3)
COMPARISON_GAMMAS = (1e-4, 5e-4, 1e-3, 5e-3)
MC_GAMMA = 128e-5
MC_ANCILLAS = 3
MC_TRAJECTORIES = 2000
MC_SEED = 20160414
OPERATING_U = 200.0

ALPHA_WINDOWS = {
    ("cz", "even"): (1.2, 2.2),
    ("cz", "odd"): (0.3, 0.7),
    ("cz", "zero"): (0.3, 0.7),
    ("cnot", "even"): (1.4, 2.6),
    ("cnot", "odd"): (0.05, 0.2),
    ("cnot", "zero"): (0.25, 0.55),
}
TEFF_WINDOWS = {"cz": (0.36, 0.44), "cnot": (0.35, 0.43)}


def parity_class(n_ancillas: int) -> str:
    if n_ancillas == 0:
        return "zero"
    return "even" if n_ancillas % 2 == 0 else "odd"


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    numbers: dict = field(default_factory=dict)
    elapsed_s: float = 0.0

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.passed else 'FAIL'}] {self.title}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


class Suite:
    """Lazily computed, memoised simulation data shared by the checks."""

    def __init__(self, workers: int = 1):
        self.workers = workers
        self._points: dict = {}

    def point(self, **kw) -> SweepRecord:
        key = tuple(sorted(kw.items()))
        if key not in self._points:
            rec, _ = run_point(RunConfig(**kw))
            self._points[key] = rec
        return self._points[key]

    def dense_records(self) -> list[SweepRecord]:
        return [r for r in self._points.values() if r.solver == "dense"]

    def closed(self, gate: str, n: int, u: float = OPERATING_U) -> SweepRecord:
        return self.point(gate=gate, n_A=n, u_over_omega=float(u))

    def dissipative(self, gate: str, n: int, gamma: float, splitting: str) -> SweepRecord:
        return self.point(gate=gate, n_A=n, gamma=gamma, splitting=splitting)

    def dissipation_grid(self, gate: str) -> list[SweepRecord]:
        return [
            self.dissipative(gate, n, g, s)
            for n, g, s in itertools.product(DISSIPATION_ANCILLAS, DISSIPATION_GAMMAS, SPLITTINGS)
        ]

    def blockade_alpha(self, gate: str) -> dict[int, float]:
        """alpha per chain length from the dissipation-free operating point."""
        return {n: (1 - self.closed(gate, n).f_pro) * OPERATING_U**2 for n in DISSIPATION_ANCILLAS}

    def teff_fit(self, gate: str):
        return fit_teff(self.dissipation_grid(gate), gate, alpha=self.blockade_alpha(gate))


# --- criteria ------------------------------------------------------------------


def check_truth_tables(suite: Suite) -> CriterionResult:
    errors = {}
    for gate, n in itertools.product(GATE_NAMES, TRUTH_ANCILLAS):
        errors[f"{gate}/n_A={n}"] = 1 - suite.closed(gate, n).f_pro
    worst = max(errors.values())
    return CriterionResult(1, "truth tables: 1 - F_pro < 2e-4 at U/Omega = 200", worst < 2e-4,
                           {"one_minus_f": errors, "worst": worst, "tolerance": 2e-4})


def check_blockade_scaling(suite: Suite) -> CriterionResult:
    fits = {}
    ok = True
    for gate, n in itertools.product(GATE_NAMES, TRUTH_ANCILLAS):
        recs = [suite.closed(gate, n, u) for u in BLOCKADE_U]
        fit = fit_alpha(recs)
        lo, hi = ALPHA_WINDOWS[(gate, parity_class(n))]
        slope = fit.details["loglog_slope"]
        passed = abs(slope + 2) <= 0.1 and lo <= fit.value <= hi
        even = fit_alpha([suite.closed(gate, n, u) for u in BLOCKADE_EVEN_U])
        fits[f"{gate}/n_A={n}"] = {
            "alpha": fit.value,
            "loglog_slope": slope,
            "alpha_window": [lo, hi],
            "passed": passed,
            "scaled_error_by_u": {u: (1 - r.f_pro) * u**2 for u, r in zip(BLOCKADE_U, recs)},
            "even_grid_alpha": even.value,
            "even_grid_slope": even.details["loglog_slope"],
        }
        ok &= passed
    return CriterionResult(2, "blockade scaling: slope -2 +- 0.1 and alpha windows over U/Omega in {25,50,100,200}",
                           ok, {"fits": fits, "u_grid": list(BLOCKADE_U), "diagnostic_even_grid": list(BLOCKADE_EVEN_U)})


def check_dissipation_law(suite: Suite) -> CriterionResult:
    numbers = {}
    ok = True
    for gate in GATE_NAMES:
        fit = suite.teff_fit(gate)
        lo, hi = TEFF_WINDOWS[gate]
        resid = fit.details["max_abs_residual"]
        passed = lo <= fit.value <= hi and resid < 2e-3
        numbers[gate] = {"omega_teff_over_pi": fit.value, "window": [lo, hi], "max_abs_residual": resid,
                         "residual_rms": fit.residual_rms, "n_records": fit.n_records, "passed": passed}
        ok &= passed
    return CriterionResult(3, "dissipation law: fitted Omega t_eff / pi in window, residuals < 2e-3", ok, numbers)


def check_two_level_oracle(suite: Suite | None = None) -> CriterionResult:
    gammas = (1e-3, 5e-4, 1e-4, 1e-5, 1e-6)
    rows = {}
    ok = True
    for g in gammas:
        exc = effective_pi_time(g, "exciting")
        dex = effective_pi_time(g, "deexciting")
        passed = abs(exc / 0.375 - 1) < 0.01 and abs(dex / 0.375 - 1) < 0.01 and abs(exc / dex - 1) < 0.02
        rows[g] = {"exciting": exc, "deexciting": dex, "passed": passed}
        ok &= passed
    return CriterionResult(4, "two-level oracle: -ln(p) Omega / (pi gamma) -> 0.375", ok, {"by_gamma": rows})


def check_ancilla_independence(suite: Suite) -> CriterionResult:
    spreads, decreasing = {}, {}
    ok = True
    for gate, g in itertools.product(GATE_NAMES, DISSIPATION_GAMMAS):
        fq = [suite.dissipative(gate, n, g, "qubit").f_pro for n in DISSIPATION_ANCILLAS]
        fa = [suite.dissipative(gate, n, g, "ancilla").f_pro for n in DISSIPATION_ANCILLAS]
        spread = max(fq) - min(fq)
        dec = all(b < a for a, b in zip(fa, fa[1:]))
        spreads[f"{gate}/gamma={g}"] = spread
        decreasing[f"{gate}/gamma={g}"] = {"f_pro": fa, "strictly_decreasing": dec}
        ok &= spread < 1e-3 and dec
    return CriterionResult(5, "ancilla independence: qubit-only spread < 1e-3; ancilla-only decreasing in n_A", ok,
                           {"qubit_only_spread": spreads, "ancilla_only": decreasing})


def check_hofmann_sandwich(suite: Suite) -> CriterionResult:
    # make sure the main sweeps exist, then judge every dense run seen so far
    for gate in GATE_NAMES:
        suite.dissipation_grid(gate)
        for n in TRUTH_ANCILLAS:
            suite.closed(gate, n)
    recs = suite.dense_records()
    violations, closer_upper = [], 0
    for r in recs:
        rep = r.extra["report"]
        lo, up, f = rep["lower"], rep["upper"], rep["f_pro"]
        if not (lo <= f + 1e-12 and f <= up + 1e-9):
            violations.append({"gate": r.gate, "n_A": r.n_A, "lower": lo, "f_pro": f, "upper": up})
        if f - lo >= up - f:
            closer_upper += 1
    frac = closer_upper / len(recs)
    ok = not violations and frac >= 0.9
    return CriterionResult(6, "Hofmann sandwich on every dense run; F_pro nearer the upper bound in >= 90%", ok,
                           {"n_runs": len(recs), "violations": violations, "fraction_closer_to_upper": frac})


def _mc_config(gate: str, n_traj: int, seed: int) -> RunConfig:
    return RunConfig(gate=gate, n_A=MC_ANCILLAS, gamma=MC_GAMMA, splitting="equal", solver="mcwf",
                     n_traj=n_traj, seed=seed)


def _row_without_time(rec: SweepRecord) -> str:
    row = rec.row()
    row["wall_time_s"] = ""
    return json.dumps(row, sort_keys=True)


def check_mc_consistency(suite: Suite, n_traj: int = MC_TRAJECTORIES, seed: int = MC_SEED) -> CriterionResult:
    numbers = {}
    ok = True
    for gate in GATE_NAMES:
        dense = suite.dissipative(gate, MC_ANCILLAS, MC_GAMMA, "equal").extra["report"]
        spec = GateSpec.default(gate, MC_ANCILLAS)
        seq = compile_gate(spec)
        model = LindbladModel(register_for(seq), DecayRates.from_splitting(MC_GAMMA, "equal"))
        t0 = time.perf_counter()
        mc = mc_report(seq, model, ideal_unitary(spec), n_traj, seed, workers=suite.workers)
        z_lo = (mc.lower - dense["lower"]) / mc.stderr_lower
        z_up = (mc.upper - dense["upper"]) / mc.stderr_upper
        passed = abs(z_lo) <= 3 and abs(z_up) <= 3
        numbers[gate] = {"mc_lower": mc.lower, "mc_upper": mc.upper, "stderr_lower": mc.stderr_lower,
                         "stderr_upper": mc.stderr_upper, "dense_lower": dense["lower"], "dense_upper": dense["upper"],
                         "z_lower": z_lo, "z_upper": z_up, "wall_time_s": time.perf_counter() - t0, "passed": passed}
        ok &= passed
    # determinism: a seeded subset rerun must reproduce the record exactly
    subset = max(2, n_traj // 20)
    first, _ = run_point(_mc_config("cz", subset, seed))
    second, _ = run_point(_mc_config("cz", subset, seed))
    identical = _row_without_time(first) == _row_without_time(second)
    numbers["rerun"] = {"n_traj": subset, "identical": identical}
    ok &= identical
    return CriterionResult(7, "MC consistency: bounds within 3 stderr of dense; seeded rerun identical", ok, numbers)


def check_baseline_circuit(suite: Suite | None = None, k_max: int = 5) -> CriterionResult:
    numbers = {}
    ok = True
    for k in range(1, k_max + 1):
        gates = nn_cnot_circuit(k)
        exact = True
        for bits in itertools.product((0, 1), repeat=k + 2):
            want = list(bits)
            want[-1] ^= bits[0]
            exact &= apply_cnots_classical(gates, bits) == tuple(want)
        n_pulses = compile_nn_sequence(k).n_pulses
        distant = expected_pulse_count(GateSpec("cnot", k + 1))
        passed = exact and len(gates) == 4 * k and n_pulses == 20 * k and distant == 4 * (k + 1) + 5
        numbers[k] = {"exact": exact, "n_gates": len(gates), "n_pulses": n_pulses, "distant_pulses": distant}
        ok &= passed
    ok &= numbers[1]["distant_pulses"] == 13 and numbers[1]["n_pulses"] == 20
    return CriterionResult(8, "baseline circuit composes to the long-range CNOT; 4k gates, 20k pulses", ok, numbers)


def check_nn_comparison(suite: Suite) -> CriterionResult:
    teff = suite.teff_fit("cnot").value * math.pi
    rows = {}
    ok = True
    for n, g in itertools.product(COMPARISON_ANCILLAS, COMPARISON_GAMMAS):
        ours = suite.dissipative("cnot", n, g, "equal").f_pro
        base = suite.point(gate=NN_GATE, n_A=n, gamma=g, splitting="equal").f_pro
        ratio = ours / base
        pred = gain_ratio(n, g, teff)
        rel = math.log(ratio) / math.log(pred) - 1
        passed = ours > base and abs(rel) <= 0.2
        rows[f"n_A={n}/gamma={g}"] = {"f_pro": ours, "f_pro_nn": base, "ln_ratio": math.log(ratio),
                                      "ln_ratio_predicted": math.log(pred), "relative_error": rel, "passed": passed}
        ok &= passed
    return CriterionResult(9, "distant CNOT beats the nearest-neighbour chain; ln(ratio) within 20% of the model",
                           ok, {"omega_teff_over_pi": teff / math.pi, "rows": rows})


def check_single_excitation(suite: Suite | None = None, max_ancillas: int = 5) -> CriterionResult:
    worst = {}
    specs = []
    for gate, n in itertools.product(GATE_NAMES, range(max_ancillas + 1)):
        specs.append(GateSpec(gate, n))
        if gate == "cz" and n % 2:
            specs.append(GateSpec(gate, n, Variant.SIGMA_X))
    for spec in specs:
        seq = compile_gate(spec)
        model = LindbladModel(register_for(seq, OPERATING_U))
        reg = model.register
        inputs = []
        for c, t in itertools.product((0, 1), repeat=2):
            levels = [0] * reg.n_atoms
            levels[reg.control], levels[reg.target] = c, t
            inputs.append(basis_state(reg, levels))
        worst[f"{spec.kind.value}/{spec.variant.value}/n_A={spec.n_ancillas}"] = max(
            max_double_excitation(seq, model, psi) for psi in inputs
        )
    for k in (1, 2):
        seq = compile_nn_sequence(k)
        model = LindbladModel(register_for(seq, OPERATING_U))
        worst[f"nn-cnot/k={k}"] = max(
            max_double_excitation(seq, model, basis_state(model.register, s)) for s in chain_register_states(k + 2)
        )
    top = max(worst.values())
    return CriterionResult(10, "single excitation: double-Rydberg population < 1e-3 along every protocol", top < 1e-3,
                           {"max_by_protocol": worst, "worst": top})


CRITERIA: dict[int, Callable[[Suite], CriterionResult]] = {
    1: check_truth_tables,
    2: check_blockade_scaling,
    3: check_dissipation_law,
    4: check_two_level_oracle,
    5: check_ancilla_independence,
    6: check_hofmann_sandwich,
    7: check_mc_consistency,
    8: check_baseline_circuit,
    9: check_nn_comparison,
    10: check_single_excitation,
}


@dataclass
class VerificationReport:
    results: list[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return _jsonable({"passed": self.passed, "criteria": [asdict(r) for r in self.results]})

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def run_verification(numbers=None, suite: Suite | None = None, report_path=None, echo=None) -> VerificationReport:
    suite = suite or Suite()
    results = []
    for k in sorted(numbers or CRITERIA):
        t0 = time.perf_counter()
        res = CRITERIA[k](suite)
        res.elapsed_s = time.perf_counter() - t0
        results.append(res)
        if echo:
            echo(res.line())
    report = VerificationReport(results)
    if report_path:
        report.write(report_path)
    return report


def predicted_grid(gate: str, teff: float, alpha=0.0) -> list[dict]:
    """Model predictions on the dissipation grid, for plotting next to the data."""
    out = []
    for n, g, s in itertools.product(DISSIPATION_ANCILLAS, DISSIPATION_GAMMAS, SPLITTINGS):
        r = DecayRates.from_splitting(g, s)
        out.append({"n_A": n, "gamma": g, "splitting": s,
                    "f_model": predict_fidelity(gate, n, r.gamma_q, r.gammaA, OPERATING_U, teff, alpha)})
    return out
