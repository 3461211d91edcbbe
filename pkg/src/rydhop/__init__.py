"""Pulse-level simulation of distant-qubit CZ/CNOT gates mediated by Rydberg hopping along ancilla chains."""

from .analysis import (
    FitResult,
    SweepRecord,
    fit_alpha,
    fit_teff,
    gain_ratio,
    predict_fidelity,
)
from .dense import (
    LindbladModel,
    PropagationSettings,
    max_double_excitation,
    propagate_density,
    propagate_operators,
)
from .experiments import RunConfig, preset, run
from .fidelity import (
    FidelityReport,
    SubspaceChannel,
    average_fidelity,
    hofmann_bounds,
    process_fidelity,
)
from .mcwf import mc_report, run_trajectory
from .protocol import (
    GateKind,
    GateSpec,
    Pulse,
    PulseSequence,
    Variant,
    compile_gate,
    compile_nn_sequence,
    ideal_unitary,
    nn_cnot_circuit,
)
from .register import DecayRates, Register, Topology, Transition, build_register
from .simulate import simulate_channel, simulate_gate, simulate_nn_baseline

__version__ = "0.1.0"

__all__ = [
    "DecayRates",
    "FidelityReport",
    "FitResult",
    "GateKind",
    "GateSpec",
    "LindbladModel",
    "PropagationSettings",
    "Pulse",
    "PulseSequence",
    "Register",
    "RunConfig",
    "SubspaceChannel",
    "SweepRecord",
    "Topology",
    "Transition",
    "Variant",
    "average_fidelity",
    "build_register",
    "compile_gate",
    "compile_nn_sequence",
    "fit_alpha",
    "fit_teff",
    "gain_ratio",
    "hofmann_bounds",
    "ideal_unitary",
    "max_double_excitation",
    "mc_report",
    "nn_cnot_circuit",
    "predict_fidelity",
    "preset",
    "process_fidelity",
    "propagate_density",
    "propagate_operators",
    "run",
    "run_trajectory",
    "simulate_channel",
    "simulate_gate",
    "simulate_nn_baseline",
]
