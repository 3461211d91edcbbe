"""Configuration-driven runs and parameter sweeps producing :class:`SweepRecord` rows."""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import SweepRecord, gain_ratio, write_records
from .dense import LindbladModel
from .mcwf import default_workers, mc_report
from .protocol import (
    GateKind,
    GateSpec,
    Variant,
    compile_gate,
    ideal_unitary,
    register_for,
)
from .register import DecayRates
from .simulate import simulate_gate, simulate_nn_baseline

NN_GATE = "nn-cnot"
GATES = ("cz", "cnot", NN_GATE)
SOLVERS = ("dense", "mcwf")
SPLITTINGS = ("qubit", "ancilla", "equal")
DENSE_MAX_ANCILLAS = 5
DENSE_MAX_BASELINE_K = 2

DECAY_GRID = [4e-5, 32e-5, 128e-5, 512e-5]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """One simulation, or a grid of them when ``sweep`` lists values for fields.

    ``gamma``/``splitting`` are a shorthand that, when both set, override the
    explicit rates.  For ``gate="nn-cnot"`` the baseline uses ``n_A - 1``
    intermediate qubits, matching a distant gate with ``n_A`` ancillas.
    """

    gate: str = "cz"
    variant: str = "auto"
    n_A: int = 1
    u_over_omega: float = 200.0
    next_nearest: float | None = None
    gamma0: float = 0.0
    gamma1: float = 0.0
    gammaA: float = 0.0
    gamma: float | None = None
    splitting: str | None = None
    solver: str = "dense"
    n_traj: int | None = None
    seed: int | None = None
    output: str | None = None
    force_dense: bool = False
    baseline_scoring: str = "register"
    sweep: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.gate not in GATES:
            raise ConfigError(f"gate must be one of {GATES}")
        if self.variant not in ("auto", "direct", "sigmax"):
            raise ConfigError("variant must be auto, direct or sigmax")
        if self.n_A < 0:
            raise ConfigError("n_A must be >= 0")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}")
        if self.solver == "mcwf":
            if self.n_traj is None or self.n_traj < 2 or self.seed is None:
                raise ConfigError("mcwf needs n_traj >= 2 and a seed")
        elif self.n_traj is not None:
            raise ConfigError("dense solver takes no n_traj")
        if self.splitting is not None and self.splitting not in SPLITTINGS:
            raise ConfigError(f"splitting must be one of {SPLITTINGS}")
        if (self.gamma is None) != (self.splitting is None):
            raise ConfigError("gamma and splitting must be given together")
        if min(self.gamma0, self.gamma1, self.gammaA, self.gamma or 0.0) < 0:
            raise ConfigError("decay rates must be non-negative")
        if self.u_over_omega <= 0:
            raise ConfigError("u_over_omega must be positive")
        if self.gate == NN_GATE:
            if self.n_A < 2:
                raise ConfigError("the nearest-neighbour baseline needs n_A >= 2")
            if self.solver != "dense":
                raise ConfigError("the baseline is simulated with the dense solver only")
            if self.n_A - 1 > DENSE_MAX_BASELINE_K and not self.force_dense:
                raise ConfigError(f"dense baseline refused beyond n_A = {DENSE_MAX_BASELINE_K + 1}; set force_dense")
        elif self.solver == "dense" and self.n_A > DENSE_MAX_ANCILLAS and not self.force_dense:
            raise ConfigError(f"dense solver refused above n_A = {DENSE_MAX_ANCILLAS}; use mcwf or force_dense")
        self._check_sweep_keys()

    def _check_sweep_keys(self) -> None:
        names = {f.name for f in dataclasses.fields(self)}
        for key, values in self.sweep.items():
            if key in ("sweep", "output") or key not in names:
                raise ConfigError(f"cannot sweep over {key!r}")
            if not isinstance(values, (list, tuple)) or not values:
                raise ConfigError(f"sweep axis {key!r} must be a non-empty list")

    def rates(self) -> DecayRates:
        if self.splitting is not None:
            return DecayRates.from_splitting(self.gamma, self.splitting)
        return DecayRates(self.gamma0, self.gamma1, self.gammaA)

    def gate_spec(self) -> GateSpec:
        if self.variant == "auto":
            return GateSpec.default(self.gate, self.n_A)
        return GateSpec(GateKind(self.gate), self.n_A, Variant(self.variant))

    def expand(self) -> list[RunConfig]:
        """Cartesian product of the sweep axes, each point fully resolved."""
        self._check_sweep_keys()
        if not self.sweep:
            point = dataclasses.replace(self, sweep={})
            point.validate()
            return [point]
        keys = list(self.sweep)
        out = []
        for values in itertools.product(*(self.sweep[k] for k in keys)):
            point = dataclasses.replace(self, sweep={}, **dict(zip(keys, values)))
            point.validate()
            out.append(point)
        return out

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("sweep")
        r = self.rates()
        d.update(gamma0=r.gamma0, gamma1=r.gamma1, gammaA=r.gammaA)
        if self.gate != NN_GATE:
            d["variant"] = self.gate_spec().variant.value
        return d

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names - {"preset"}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        base = {}
        if "preset" in data:
            base = dataclasses.asdict(preset(data["preset"]))
        base.update({k: v for k, v in data.items() if k != "preset"})
        return cls(**base)

    @classmethod
    def load(cls, path) -> RunConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))


def run_point(cfg: RunConfig) -> tuple[SweepRecord, dict]:
    """Simulate one resolved grid point; returns the record and its report sidecar."""
    cfg.validate()
    rates = cfg.rates()
    nnn = cfg.next_nearest
    t0 = time.perf_counter()
    if cfg.gate == NN_GATE:
        rep = simulate_nn_baseline(cfg.n_A - 1, rates, cfg.u_over_omega, nnn, scoring=cfg.baseline_scoring)
        variant = f"nn-{cfg.baseline_scoring}"
    else:
        spec = cfg.gate_spec()
        variant = spec.variant.value
        if cfg.solver == "dense":
            rep = simulate_gate(spec, rates, cfg.u_over_omega, nnn)
        else:
            seq = compile_gate(spec)
            model = LindbladModel(register_for(seq, cfg.u_over_omega, nnn), rates)
            rep = mc_report(seq, model, ideal_unitary(spec), cfg.n_traj, cfg.seed, workers=1)
    wall = time.perf_counter() - t0
    rec = SweepRecord(
        gate=cfg.gate,
        variant=variant,
        n_A=cfg.n_A,
        u_over_omega=cfg.u_over_omega,
        gamma0=rates.gamma0,
        gamma1=rates.gamma1,
        gammaA=rates.gammaA,
        solver=cfg.solver,
        n_traj=cfg.n_traj,
        seed=cfg.seed,
        f_pro=rep.f_pro,
        f_lower=None if rep.f_pro is not None else rep.lower,
        f_upper=None if rep.f_pro is not None else rep.upper,
        stderr_lower=rep.stderr_lower,
        stderr_upper=rep.stderr_upper,
        wall_time_s=wall,
    )
    rec.extra = {"config": cfg.resolved(), "report": rep.to_dict()}
    return rec, rec.extra


def run(cfg: RunConfig, workers: int | None = None) -> list[SweepRecord]:
    """Run every grid point; rows are appended to ``cfg.output`` when set."""
    points = cfg.expand()
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_point, points))
    else:
        results = [run_point(p) for p in points]
    records = [rec for rec, _ in results]
    if cfg.output:
        out = Path(cfg.output)
        write_records(out, records, append=out.exists())
        with open(sidecar_path(out), "a") as fh:
            fh.writelines(json.dumps(rec.extra) + "\n" for rec in records)
    return records


def sidecar_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_suffix(".reports.jsonl")


PRESETS = {
    "fig-cz-dissipation": dict(
        gate="cz", gamma=DECAY_GRID[0], splitting="qubit",
        sweep={"n_A": list(range(6)), "gamma": DECAY_GRID, "splitting": list(SPLITTINGS)},
    ),
    "fig-cnot-dissipation": dict(
        gate="cnot", gamma=DECAY_GRID[0], splitting="qubit",
        sweep={"n_A": list(range(6)), "gamma": DECAY_GRID, "splitting": list(SPLITTINGS)},
    ),
    "fig-blockade-scan": dict(
        gate="cz",
        sweep={"gate": ["cz", "cnot"], "n_A": list(range(6)), "u_over_omega": [1, 2, 5, 10, 25, 50, 100, 200]},
    ),
    "fig-nn-compare": dict(
        gate="cnot", n_A=2, gamma=1e-4, splitting="equal",
        sweep={"gate": ["cnot", NN_GATE], "n_A": [2, 3], "gamma": [1e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2]},
    ),
    "fig-gain": dict(
        gate="cnot", n_A=2, gamma=1e-4, splitting="equal",
        sweep={"gate": ["cnot", NN_GATE], "n_A": [2, 3], "gamma": [1e-4, 2.5e-4, 5e-4, 1e-3, 2.5e-3, 5e-3, 1e-2]},
    ),
}


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    data = dict(PRESETS[name])
    data["sweep"] = dict(data["sweep"])
    return RunConfig(**data)


def gain_rows(records: list[SweepRecord], teff: float) -> list[dict]:
    """Pair distant-CNOT and baseline records at equal (n_A, rates) into gain rows."""
    ours = {}
    base = {}
    for r in records:
        key = (r.n_A, r.gamma0, r.gamma1, r.gammaA, r.u_over_omega)
        if r.gate == "cnot" and r.f_pro is not None:
            ours[key] = r.f_pro
        elif r.gate == NN_GATE and r.f_pro is not None:
            base[key] = r.f_pro
    rows = []
    for key in sorted(set(ours) & set(base)):
        n_a, _, _, gamma, u = key
        ratio = ours[key] / base[key]
        pred = gain_ratio(n_a, gamma, teff)
        rows.append(
            dict(
                n_A=n_a, gamma=gamma, u_over_omega=u, f_pro=ours[key], f_pro_nn=base[key], ratio=ratio,
                predicted_ratio=pred, log_ratio_rel_error=(math.log(ratio) / math.log(pred) - 1) if pred != 1 else None,
            )
        )
    return rows

