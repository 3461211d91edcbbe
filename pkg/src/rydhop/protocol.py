"""Pulse-sequence compilation for distant-qubit gates and the nearest-neighbour baseline.

A distant gate is built from three parts: a forward hop of the Rydberg
excitation from the control along the ancilla chain, a conditional block on
the target, and the forward part replayed in reverse.  Which control
transition is driven depends on the gate and on the parity of the chain
length, so that the last ancilla ends up excited exactly when the control
holds |1>.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .fidelity import CNOT
from .register import Topology, Transition, build_register


class GateKind(enum.Enum):
    CZ = "cz"  # modified CZ, diag(1, -1, -1, -1)
    CNOT = "cnot"


class Variant(enum.Enum):
    DIRECT = "direct"
    SIGMA_X = "sigmax"


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class Pulse:
    """Square resonant pulse; ``area`` in radians, ``rabi`` in units of Omega."""

    atom: int
    transition: Transition
    area: float = math.pi
    rabi: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "transition", Transition(self.transition))
        if self.area <= 0 or self.rabi <= 0:
            raise ProtocolError("pulse area and Rabi frequency must be positive")

    @property
    def duration(self) -> float:
        return self.area / self.rabi


@dataclass(frozen=True)
class FrameOp:
    """Instantaneous sigma_x on the coding levels of a qubit atom."""

    atom: int
    op: str = "SigmaX"


Step = Union[Pulse, FrameOp]


@dataclass(frozen=True)
class GateSpec:
    kind: GateKind
    n_ancillas: int
    variant: Variant = Variant.DIRECT

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.n_ancillas < 0:
            raise ProtocolError("n_ancillas must be >= 0")
        if self.variant is Variant.SIGMA_X and self.n_ancillas % 2 == 0:
            raise ProtocolError("the sigma_x-wrapped variant needs an odd number of ancillas")

    @property
    def n_target(self) -> int:
        return 1 if self.kind is GateKind.CZ else 3

    @classmethod
    def default(cls, kind, n_ancillas: int) -> GateSpec:
        """Variant used in the dissipation scans: sigma_x-wrapped for odd-length CZ."""
        kind = GateKind(kind)
        variant = Variant.SIGMA_X if kind is GateKind.CZ and n_ancillas % 2 else Variant.DIRECT
        return cls(kind, n_ancillas, variant)


@dataclass(frozen=True)
class PulseSequence:
    steps: tuple[Step, ...]
    gate: GateSpec | None = None
    n_target: int = 0
    n_atoms: int = 0
    labels: tuple[str, ...] = field(default=(), compare=False)

    @property
    def pulses(self) -> list[Pulse]:
        return [s for s in self.steps if isinstance(s, Pulse)]

    @property
    def n_pulses(self) -> int:
        return len(self.pulses)

    @property
    def duration(self) -> float:
        return sum(p.duration for p in self.pulses)

    def to_records(self) -> list[dict]:
        out = []
        for k, s in enumerate(self.steps):
            label = self.labels[s.atom] if self.labels else str(s.atom)
            if isinstance(s, Pulse):
                out.append(
                    {
                        "step": k,
                        "atom": label,
                        "transition": s.transition.value,
                        "area_over_pi": s.area / math.pi,
                        "duration_omega_t": s.duration,
                    }
                )
            else:
                out.append(
                    {"step": k, "atom": label, "transition": s.op, "area_over_pi": 0.0, "duration_omega_t": 0.0}
                )
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_records(), **kw)


def control_transition(spec: GateSpec) -> Transition:
    if spec.variant is Variant.SIGMA_X:
        return Transition.Q1R
    even = spec.n_ancillas % 2 == 0
    if spec.kind is GateKind.CZ:
        return Transition.Q1R if even else Transition.Q0R
    return Transition.Q0R if even else Transition.Q1R


def conditional_block(target: int, kind: GateKind, rabi: float = 1.0) -> list[Pulse]:
    if kind is GateKind.CZ:
        return [Pulse(target, Transition.Q1R, 2 * math.pi, rabi)]
    return [
        Pulse(target, Transition.Q0R, math.pi, rabi),
        Pulse(target, Transition.Q1R, math.pi, rabi),
        Pulse(target, Transition.Q0R, math.pi, rabi),
    ]


def compile_gate(spec: GateSpec, rabi: float = 1.0) -> PulseSequence:
    """Pulse sequence of a distant CZ/CNOT on the register C, A_1..A_n, T."""
    n = spec.n_ancillas
    ctl, tgt = 0, n + 1
    ct = control_transition(spec)
    if n == 0:
        forward = [Pulse(ctl, ct, math.pi, rabi)]
    else:
        forward = [Pulse(ctl, ct, math.pi, rabi), Pulse(1, Transition.GE, math.pi, rabi), Pulse(ctl, ct, math.pi, rabi)]
        for i in range(1, n):
            forward += [Pulse(i + 1, Transition.GE, math.pi, rabi), Pulse(i, Transition.GE, math.pi, rabi)]
    steps: list[Step] = forward + conditional_block(tgt, spec.kind, rabi) + forward[::-1]
    if spec.variant is Variant.SIGMA_X:
        steps = [FrameOp(ctl)] + steps + [FrameOp(ctl)]
    labels = ("C",) + tuple(f"A{i}" for i in range(1, n + 1)) + ("T",)
    return PulseSequence(tuple(steps), spec, spec.n_target, n + 2, labels)


def expected_pulse_count(spec: GateSpec) -> int:
    if spec.n_ancillas == 0:
        return 2 + spec.n_target
    return 4 * spec.n_ancillas + 2 + spec.n_target


CZ_IDEAL = np.diag([1, -1, -1, -1]).astype(complex)


def ideal_unitary(spec: GateSpec | GateKind | str) -> np.ndarray:
    """Target 4x4 matrix in the |CT> basis; CNOT carries the protocol's global -1."""
    kind = spec.kind if isinstance(spec, GateSpec) else GateKind(spec)
    if kind is GateKind.CZ:
        return CZ_IDEAL.copy()
    return -CNOT


# --- nearest-neighbour baseline ------------------------------------------------


def nn_cnot_circuit(k: int) -> list[tuple[int, int]]:
    """4k nearest-neighbour CNOTs composing to CNOT(q_0 -> q_{k+1}).

    Two ascending/descending ladders: the first pair of ladders XORs the
    prefix parity q_0 ^ ... ^ q_j into q_{k+1}, the second removes
    q_1 ^ ... ^ q_k again, leaving every intermediate qubit untouched.
    """
    if k < 1:
        raise ProtocolError("need at least one intermediate qubit")
    up = [(i, i + 1) for i in range(k + 1)]
    down = [(i, i + 1) for i in range(k - 1, -1, -1)]
    up2 = [(i, i + 1) for i in range(1, k + 1)]
    down2 = [(i, i + 1) for i in range(k - 1, 0, -1)]
    return up + down + up2 + down2


def apply_cnots_classical(gates, bits) -> tuple[int, ...]:
    bits = list(bits)
    for c, t in gates:
        bits[t] ^= bits[c]
    return tuple(bits)


def nn_cnot_pulses(control: int, target: int, rabi: float = 1.0) -> list[Pulse]:
    """Blockade CNOT between adjacent qubit atoms (the zero-ancilla protocol)."""
    return (
        [Pulse(control, Transition.Q0R, math.pi, rabi)]
        + conditional_block(target, GateKind.CNOT, rabi)
        + [Pulse(control, Transition.Q0R, math.pi, rabi)]
    )


def compile_nn_sequence(k: int, rabi: float = 1.0) -> PulseSequence:
    """20k pulses on a chain of k+2 three-level qubit atoms."""
    steps: list[Step] = []
    for c, t in nn_cnot_circuit(k):
        steps += nn_cnot_pulses(c, t, rabi)
    labels = tuple(f"q{i}" for i in range(k + 2))
    return PulseSequence(tuple(steps), None, 3, k + 2, labels)


def register_for(seq: PulseSequence, u: float = 200.0, next_nearest: float | None = None):
    """Register matching a compiled sequence."""
    if seq.gate is not None:
        return build_register(seq.gate.n_ancillas, Topology.DISTANT_GATE, u=u, next_nearest=next_nearest)
    return build_register(topology=Topology.QUBIT_CHAIN, chain_length=seq.n_atoms, u=u, next_nearest=next_nearest)
