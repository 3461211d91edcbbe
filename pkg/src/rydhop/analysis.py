"""Scaling laws for the distant gates: blockade error, dissipation and the baseline gain.

Times are in units of 1/Omega; ``teff`` is Omega * t_eff (radians) and
``x = teff / pi`` is the dimensionless fit parameter.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.optimize import minimize_scalar

from .protocol import GateKind

# Effective pi-pulse durations the qubits spend excited, averaged over inputs:
# four control pulses with two in the Rydberg state, plus the target block.
QUBIT_PI_PULSES = {GateKind.CZ: 6, GateKind.CNOT: 7}
# Extra ancilla dwell of the CNOT: the last ancilla may sit through the
# three-pulse target block instead of a single 2pi pulse.
ANCILLA_EXTRA_DWELL = {GateKind.CZ: 0.0, GateKind.CNOT: math.pi}


class AnalysisError(ValueError):
    pass


@dataclass
class SweepRecord:
    """One simulated grid point; CSV column order is the field order."""

    gate: str
    variant: str
    n_A: int
    u_over_omega: float
    gamma0: float
    gamma1: float
    gammaA: float
    solver: str
    n_traj: int | None = None
    seed: int | None = None
    f_pro: float | None = None
    f_lower: float | None = None
    f_upper: float | None = None
    stderr_lower: float | None = None
    stderr_upper: float | None = None
    wall_time_s: float | None = None
    extra: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def gamma_q(self) -> float:
        return self.gamma0 + self.gamma1

    @property
    def is_closed(self) -> bool:
        return self.gamma0 == self.gamma1 == self.gammaA == 0

    def fidelity(self, use_bounds: bool = False) -> float:
        if self.f_pro is not None:
            return self.f_pro
        if use_bounds and self.f_lower is not None:
            return 0.5 * (self.f_lower + self.f_upper)
        raise AnalysisError("record has no exact process fidelity")

    def row(self) -> dict:
        out = asdict(self)
        out.pop("extra")
        return out


CSV_COLUMNS = [f.name for f in fields(SweepRecord) if f.name != "extra"]

_INT_COLS = {"n_A", "n_traj", "seed"}
_STR_COLS = {"gate", "variant", "solver"}


def write_records(path, records: Iterable[SweepRecord], append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if not append or fh.tell() == 0:
            writer.writeheader()
        for rec in records:
            writer.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in rec.row().items()})


def read_records(path) -> list[SweepRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for k, v in row.items():
                if v == "":
                    kw[k] = None
                elif k in _STR_COLS:
                    kw[k] = v
                elif k in _INT_COLS:
                    kw[k] = int(v)
                else:
                    kw[k] = float(v)
            out.append(SweepRecord(**kw))
    return out


@dataclass
class FitResult:
    name: str
    value: float
    half_width: float
    residual_rms: float
    n_records: int
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise AnalysisError(f"fit for {self.name} did not converge to a finite value")


# --- blockade error ---------------------------------------------------------------


def fit_alpha(records: Sequence[SweepRecord]) -> FitResult:
    """Fit 1 - F = alpha (U/Omega)^-2 through the origin; also report the log-log slope."""
    records = list(records)
    if not records:
        raise AnalysisError("no records")
    keys = {(r.gate, r.n_A) for r in records}
    if len(keys) != 1:
        raise AnalysisError(f"records mix gates/chain lengths: {sorted(keys)}")
    if any(not r.is_closed for r in records):
        raise AnalysisError("blockade fits need dissipation-free records")
    u = np.array([r.u_over_omega for r in records])
    if len(np.unique(u)) < 4:
        raise AnalysisError("need at least four distinct U/Omega values")
    err = np.array([1 - r.fidelity() for r in records])
    x = u**-2.0
    alpha = float(x @ err / (x @ x))
    resid = err - alpha * x
    dof = max(len(x) - 1, 1)
    sigma = math.sqrt(resid @ resid / dof / (x @ x))
    slope = float(np.polyfit(np.log(u), np.log(err), 1)[0])
    return FitResult(
        "alpha",
        alpha,
        1.96 * sigma,
        float(np.sqrt(np.mean(resid**2))),
        len(records),
        {"loglog_slope": slope, "gate": records[0].gate, "n_A": records[0].n_A},
    )


# --- dissipation ----------------------------------------------------------------


def qubit_time(gate, teff: float) -> float:
    """Omega t_q: mean time the two qubits spend in |r>."""
    gate = GateKind(gate)
    return (2 * math.pi + QUBIT_PI_PULSES[gate] * teff) / 2


def ancilla_time(gate, n_ancillas: int, teff: float) -> float:
    """Omega t_A(n_A): total time the ancillas spend in |e>."""
    gate = GateKind(gate)
    n = n_ancillas
    return (4 * math.pi * n + ANCILLA_EXTRA_DWELL[gate] + (4 * n - 2) * teff) / 2


def predict_fidelity(
    gate,
    n_ancillas: int,
    gamma_q: float,
    gamma_a: float,
    u_over_omega: float,
    teff: float,
    alpha: float = 0.0,
) -> float:
    """Blockade factor times exponential decay over the accumulated Rydberg dwell times."""
    if n_ancillas < 1:
        raise AnalysisError("the dwell-time model covers n_A >= 1 only (n_A = 0 has two control pulses)")
    blockade = 1 - alpha * u_over_omega**-2.0 if math.isfinite(u_over_omega) else 1.0
    return blockade * math.exp(-gamma_q * qubit_time(gate, teff) - gamma_a * ancilla_time(gate, n_ancillas, teff))


def _alpha_for(alpha, n_ancillas: int) -> float:
    if isinstance(alpha, Mapping):
        return alpha.get(n_ancillas, 0.0)
    return float(alpha)


def fit_teff(
    records: Sequence[SweepRecord],
    gate,
    alpha: float | Mapping[int, float] = 0.0,
    use_bounds: bool = False,
) -> FitResult:
    """Least-squares fit of Omega t_eff / pi over a dissipation grid.

    ``alpha`` is a constant or a per-n_A mapping for the blockade factor.
    Bound midpoints of Monte Carlo records are used only with ``use_bounds``.
    """
    gate = GateKind(gate)
    recs = [r for r in records if GateKind(r.gate) is gate]
    if not use_bounds:
        recs = [r for r in recs if r.f_pro is not None]
    if not recs:
        raise AnalysisError(f"no usable records for {gate.value}")
    if any(r.n_A < 1 for r in recs):
        raise AnalysisError("n_A = 0 records are outside the dwell-time model")
    gammas = {(r.gamma_q, r.gammaA) for r in recs}
    if len(gammas) < 2:
        raise AnalysisError("degenerate grid: a single decay setting cannot constrain t_eff")

    f_sim = np.array([r.fidelity(use_bounds) for r in recs])

    def model(x):
        return np.array(
            [
                predict_fidelity(gate, r.n_A, r.gamma_q, r.gammaA, r.u_over_omega, x * math.pi, _alpha_for(alpha, r.n_A))
                for r in recs
            ]
        )

    def cost(x):
        d = f_sim - model(x)
        return float(d @ d)

    res = minimize_scalar(cost, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10})
    x = float(res.x)
    if not res.success:
        grid = np.linspace(0, 1, 201)
        x0 = grid[np.argmin([cost(g) for g in grid])]
        res = minimize_scalar(cost, bounds=(max(0, x0 - 0.01), min(1, x0 + 0.01)), method="bounded")
        x = float(res.x)

    resid = f_sim - model(x)
    h = 1e-6
    jac = (model(x + h) - model(x - h)) / (2 * h)
    dof = max(len(recs) - 1, 1)
    sigma = math.sqrt((resid @ resid) / dof / (jac @ jac)) if jac @ jac > 0 else float("inf")
    return FitResult(
        "omega_teff_over_pi",
        x,
        1.96 * sigma,
        float(np.sqrt(np.mean(resid**2))),
        len(recs),
        {"max_abs_residual": float(np.max(np.abs(resid))), "gate": gate.value},
    )


def gain_ratio(n_ancillas: int, gamma_over_omega: float, teff: float) -> float:
    """Predicted F(distant protocol) / F(nearest-neighbour CNOT chain) for equal rates."""
    n = n_ancillas
    expo = (8 * n * (math.pi + 2 * teff) - 5 * (3 * math.pi + 5 * teff)) / 2
    return math.exp(expo * gamma_over_omega)
