"""Command-line entry point.

Exit codes: 0 success, 1 configuration or input error, 2 verification failure.
The worker count for sweeps and trajectory ensembles is read from
``RYDHOP_WORKERS`` unless ``--workers`` is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from .analysis import AnalysisError, fit_alpha, fit_teff, read_records, write_records
from .experiments import NN_GATE, PRESETS, ConfigError, RunConfig, gain_rows, run
from .mcwf import default_workers
from .protocol import GateSpec, ProtocolError, compile_gate, compile_nn_sequence
from .register import RegisterError
from .verification import CRITERIA, Suite, run_verification

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2

# flag name -> RunConfig field, for overrides of top-level scalars
_OVERRIDES = {
    "gate": "gate",
    "variant": "variant",
    "n_A": "n_A",
    "u": "u_over_omega",
    "next_nearest": "next_nearest",
    "gamma0": "gamma0",
    "gamma1": "gamma1",
    "gammaA": "gammaA",
    "gamma": "gamma",
    "splitting": "splitting",
    "solver": "solver",
    "n_traj": "n_traj",
    "seed": "seed",
    "output": "output",
    "baseline_scoring": "baseline_scoring",
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named figure configuration")
    p.add_argument("--gate", choices=["cz", "cnot", NN_GATE])
    p.add_argument("--variant", choices=["auto", "direct", "sigmax"])
    p.add_argument("--n-A", dest="n_A", type=int, help="number of ancilla atoms")
    p.add_argument("--u", type=float, help="blockade shift U/Omega")
    p.add_argument("--next-nearest", type=float, help="next-nearest shift in units of Omega (off by default)")
    p.add_argument("--gamma0", type=float)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--gammaA", type=float)
    p.add_argument("--gamma", type=float, help="total rate, split according to --splitting")
    p.add_argument("--splitting", choices=["qubit", "ancilla", "equal"])
    p.add_argument("--solver", choices=["dense", "mcwf"])
    p.add_argument("--n-traj", dest="n_traj", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="CSV file; rows are appended")
    p.add_argument("--baseline-scoring", choices=["register", "ends"])
    p.add_argument("--force-dense", action="store_true", help="allow dense runs beyond the size limit")
    p.add_argument("--workers", type=int)


def build_config(args) -> RunConfig:
    data: dict = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    if args.preset:
        data["preset"] = args.preset
    cfg = RunConfig.from_dict(data)
    changes = {field: getattr(args, flag) for flag, field in _OVERRIDES.items() if getattr(args, flag) is not None}
    if args.force_dense:
        changes["force_dense"] = True
    return dataclasses.replace(cfg, **changes)


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, default=str))


def cmd_simulate(args) -> int:
    cfg = build_config(args)
    if cfg.sweep:
        raise ConfigError("simulate runs a single point; use the sweep subcommand for sweep axes")
    (rec,) = run(cfg, workers=1)
    _print_json({"record": rec.row(), **rec.extra})
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    workers = args.workers if args.workers is not None else default_workers()
    records = run(cfg, workers=workers)
    if not cfg.output:
        _write_stdout(records)
    else:
        print(f"wrote {len(records)} records to {cfg.output}", file=sys.stderr)
    return EXIT_OK


def _write_stdout(records) -> None:
    import csv

    from .analysis import CSV_COLUMNS

    writer = csv.DictWriter(sys.stdout, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for rec in records:
        writer.writerow({k: "" if v is None else v for k, v in rec.row().items()})


def cmd_fit(args) -> int:
    records = read_records(args.input)
    if args.parameter == "alpha":
        recs = [r for r in records if r.gate == args.gate and r.n_A == args.n_A and r.is_closed]
        res = fit_alpha(recs)
    else:
        recs = [r for r in records if r.gate == args.gate and not r.is_closed and r.n_A >= 1]
        res = fit_teff(recs, args.gate, alpha=args.alpha, use_bounds=args.use_bounds)
    _print_json(dataclasses.asdict(res))
    return EXIT_OK


def cmd_compare_nn(args) -> int:
    points = []
    for n in args.n_A:
        for g in args.gamma:
            for gate in ("cnot", NN_GATE):
                points.append(RunConfig(gate=gate, n_A=n, gamma=g, splitting="equal", u_over_omega=args.u,
                                        baseline_scoring=args.baseline_scoring, force_dense=args.force_dense))
    records = []
    workers = args.workers if args.workers is not None else default_workers()
    for cfg in points:
        records += run(cfg, workers=workers)
    if args.output:
        out = Path(args.output)
        write_records(out, records, append=out.exists())
    _print_json(gain_rows(records, args.teff_over_pi * math.pi))
    return EXIT_OK


def cmd_protocol_dump(args) -> int:
    if args.nn is not None:
        seq = compile_nn_sequence(args.nn)
    else:
        variant = args.variant
        spec = GateSpec.default(args.gate, args.n_A) if variant == "auto" else GateSpec(args.gate, args.n_A, variant)
        seq = compile_gate(spec)
    print(seq.to_json(indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    workers = args.workers if args.workers is not None else default_workers()
    report = run_verification(args.criteria, Suite(workers), args.report, echo=print)
    print(f"verification {'passed' if report.passed else 'FAILED'}; report written to {args.report}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydhop", description="Distant-qubit Rydberg gate simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one configuration and print its fidelity report")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a grid of configurations, appending CSV rows")
    _add_run_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit alpha or Omega t_eff / pi from a record CSV")
    p.add_argument("input")
    p.add_argument("--parameter", choices=["alpha", "teff"], default="teff")
    p.add_argument("--gate", choices=["cz", "cnot"], required=True)
    p.add_argument("--n-A", dest="n_A", type=int, help="chain length for alpha fits")
    p.add_argument("--alpha", type=float, default=0.0, help="blockade coefficient used in t_eff fits")
    p.add_argument("--use-bounds", action="store_true", help="use bound midpoints of Monte Carlo rows")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare-nn", help="distant CNOT against the nearest-neighbour CNOT chain")
    p.add_argument("--n-A", dest="n_A", type=int, nargs="+", default=[2, 3])
    p.add_argument("--gamma", type=float, nargs="+", default=[1e-4, 5e-4, 1e-3, 5e-3])
    p.add_argument("--u", type=float, default=200.0)
    p.add_argument("--teff-over-pi", type=float, default=0.40)
    p.add_argument("--baseline-scoring", choices=["register", "ends"], default="register")
    p.add_argument("--force-dense", action="store_true")
    p.add_argument("--output")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_compare_nn)

    p = sub.add_parser("protocol", help="pulse-sequence utilities")
    psub = p.add_subparsers(dest="action", required=True)
    d = psub.add_parser("dump", help="print a compiled sequence as JSON records")
    d.add_argument("--gate", choices=["cz", "cnot"], default="cz")
    d.add_argument("--n-A", dest="n_A", type=int, default=1)
    d.add_argument("--variant", choices=["auto", "direct", "sigmax"], default="auto")
    d.add_argument("--nn", type=int, help="dump the nearest-neighbour chain with this many intermediate qubits")
    d.set_defaults(func=cmd_protocol_dump)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--criteria", type=int, nargs="+", choices=sorted(CRITERIA))
    p.add_argument("--report", default="verification_report.json")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fit" and args.parameter == "alpha" and args.n_A is None:
            parser.error("alpha fits need --n-A")
    except SystemExit as exc:
        # argparse uses 2 for usage errors; keep 2 for verification failures
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ProtocolError, RegisterError, AnalysisError, FileNotFoundError, json.JSONDecodeError,
            TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
