"""Atom registers, operator embedding and Hamiltonian/jump-operator builders.

Energies are dimensionless ratios to the Rabi frequency (hbar = Omega = 1).
Atoms are ordered C, A_1, ..., A_n, T for the distant-gate topology and
q_0, ..., q_{m-1} for a plain qubit chain; the leftmost atom is the most
significant digit of a basis-state index, which matches ``np.kron`` order.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

NNN_DEFAULT_FACTOR = 1.0 / 8.0
"""Default next-nearest shift relative to U (1/R^3 law at doubled spacing)."""


class AtomKind(enum.Enum):
    """Level structure of an atom; the value is the local dimension."""

    QUBIT = 3  # levels |0>, |1>, |r>
    ANCILLA = 2  # levels |g>, |e>

    @property
    def dim(self) -> int:
        return self.value

    @property
    def rydberg_level(self) -> int:
        return self.value - 1


# level indices
Q0, Q1, QR = 0, 1, 2
G, E = 0, 1


class Transition(enum.Enum):
    Q0R = "Q0R"
    Q1R = "Q1R"
    GE = "GE"


class Topology(enum.Enum):
    DISTANT_GATE = "distant"
    QUBIT_CHAIN = "chain"


class RegisterError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    label: str
    kind: AtomKind


@dataclass(frozen=True)
class CouplingMap:
    """Symmetric pairwise energy shifts of doubly excited states.

    Pairs are stored once with ``i < j``; :meth:`shift` is symmetric.
    """

    entries: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), u in dict(self.entries).items():
            if i == j:
                raise RegisterError(f"self-coupling on atom {i}")
            if u < 0:
                raise RegisterError(f"negative shift {u} on pair ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in clean and clean[key] != u:
                raise RegisterError(f"conflicting shifts for pair {key}")
            clean[key] = float(u)
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    def shift(self, i: int, j: int) -> float:
        return self.entries.get((min(i, j), max(i, j)), 0.0)

    def pairs(self) -> list[tuple[int, int, float]]:
        """All entries in both orientations, ``(i, j, U)`` and ``(j, i, U)``."""
        out = []
        for (i, j), u in self.entries.items():
            out.append((i, j, u))
            out.append((j, i, u))
        return out

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Register:
    atoms: tuple[Atom, ...]
    couplings: CouplingMap
    topology: Topology

    def __post_init__(self):
        n = len(self.atoms)
        for i, j in self.couplings.entries:
            if not (0 <= i < n and 0 <= j < n):
                raise RegisterError(f"coupling ({i}, {j}) names an absent atom")
        labels = [a.label for a in self.atoms]
        if len(set(labels)) != n:
            raise RegisterError("atom labels must be unique")
        if self.topology is Topology.DISTANT_GATE:
            kinds = [a.kind for a in self.atoms]
            if kinds.count(AtomKind.QUBIT) != 2 or labels[0] != "C" or labels[-1] != "T":
                raise RegisterError("distant-gate register needs qubits C ... T at the ends")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @cached_property
    def local_dims(self) -> tuple[int, ...]:
        return tuple(a.kind.dim for a in self.atoms)

    @cached_property
    def dim(self) -> int:
        return int(np.prod(self.local_dims))

    @property
    def n_ancillas(self) -> int:
        return sum(a.kind is AtomKind.ANCILLA for a in self.atoms)

    @property
    def control(self) -> int:
        return 0

    @property
    def target(self) -> int:
        return self.n_atoms - 1

    def index(self, label: str) -> int:
        for k, a in enumerate(self.atoms):
            if a.label == label:
                return k
        raise RegisterError(f"no atom labelled {label!r}")

    @cached_property
    def digits(self) -> np.ndarray:
        """Local level of every atom for every basis state, shape (dim, n_atoms)."""
        idx = np.arange(self.dim)
        out = np.empty((self.dim, self.n_atoms), dtype=np.int64)
        for k in range(self.n_atoms - 1, -1, -1):
            d = self.local_dims[k]
            out[:, k] = idx % d
            idx = idx // d
        return out

    @cached_property
    def rydberg_mask(self) -> np.ndarray:
        """Boolean (dim, n_atoms): atom k is in its Rydberg level."""
        ryd = np.array([a.kind.rydberg_level for a in self.atoms])
        return self.digits == ryd[None, :]

    def basis_index(self, levels: Iterable[int]) -> int:
        levels = list(levels)
        if len(levels) != self.n_atoms:
            raise RegisterError("one level per atom expected")
        k = 0
        for lev, d in zip(levels, self.local_dims):
            if not 0 <= lev < d:
                raise RegisterError(f"level {lev} out of range for local dim {d}")
            k = k * d + lev
        return k

    def coding_indices(self, control: int | None = None, target: int | None = None) -> np.ndarray:
        """Basis indices of |00>, |01>, |10>, |11> on (control, target), all other atoms in level 0."""
        c = self.control if control is None else control
        t = self.target if target is None else target
        out = []
        for bc in (0, 1):
            for bt in (0, 1):
                lev = [0] * self.n_atoms
                lev[c], lev[t] = bc, bt
                out.append(self.basis_index(lev))
        return np.array(out)


def _chain_couplings(n: int, u: float, next_nearest: float | None) -> dict:
    entries = {(i, i + 1): u for i in range(n - 1)}
    if next_nearest:
        entries.update({(i, i + 2): next_nearest for i in range(n - 2)})
    return entries


def build_register(
    n_ancillas: int = 0,
    topology: Topology | str = Topology.DISTANT_GATE,
    *,
    chain_length: int | None = None,
    u: float = 200.0,
    next_nearest: float | None = None,
    couplings: Mapping[tuple[str, str], float] | None = None,
) -> Register:
    """Build a register in canonical atom order.

    Parameters
    ----------
    n_ancillas : int
        Number of ancillas between C and T (distant-gate topology).
    topology : Topology or {"distant", "chain"}
    chain_length : int
        Number of qubit atoms for the chain topology (>= 2).
    u : float
        Nearest-neighbour blockade shift U/Omega.
    next_nearest : float, optional
        Shift between atoms two chain steps apart; off by default.
        ``NNN_DEFAULT_FACTOR * u`` is the usual choice.
    couplings : mapping, optional
        Explicit ``{(label_i, label_j): U}`` entries replacing the default
        chain adjacency.
    """
    topology = Topology(topology)
    if topology is Topology.DISTANT_GATE:
        if n_ancillas < 0:
            raise RegisterError("n_ancillas must be >= 0")
        atoms = (
            [Atom("C", AtomKind.QUBIT)]
            + [Atom(f"A{i}", AtomKind.ANCILLA) for i in range(1, n_ancillas + 1)]
            + [Atom("T", AtomKind.QUBIT)]
        )
    else:
        m = chain_length
        if m is None or m < 2:
            raise RegisterError("qubit chain needs chain_length >= 2")
        atoms = [Atom(f"q{i}", AtomKind.QUBIT) for i in range(m)]
    if u < 0:
        raise RegisterError("blockade shift must be non-negative")

    if couplings is None:
        entries = _chain_couplings(len(atoms), u, next_nearest)
    else:
        labels = {a.label: k for k, a in enumerate(atoms)}
        entries = {}
        for (li, lj), val in couplings.items():
            if li not in labels or lj not in labels:
                raise RegisterError(f"coupling ({li}, {lj}) names an absent atom")
            entries[(labels[li], labels[lj])] = val
    return Register(tuple(atoms), CouplingMap(entries), topology)


def embed_operator(local_op, atom: int, reg: Register) -> sp.csr_matrix:
    """Tensor ``local_op`` into the register at position ``atom``."""
    local_op = sp.csr_matrix(local_op, dtype=complex)
    d = reg.local_dims[atom]
    if local_op.shape != (d, d):
        raise RegisterError(f"local operator shape {local_op.shape} does not match local dim {d}")
    left = int(np.prod(reg.local_dims[:atom]))
    right = int(np.prod(reg.local_dims[atom + 1 :]))
    out = sp.kron(sp.identity(left, format="csr"), local_op, format="csr")
    return sp.kron(out, sp.identity(right, format="csr"), format="csr")


def rydberg_projector(atom: int, reg: Register) -> sp.csr_matrix:
    return sp.diags(reg.rydberg_mask[:, atom].astype(complex), format="csr")


def interaction_diagonal(reg: Register) -> np.ndarray:
    """Diagonal of the interaction Hamiltonian as a real vector."""
    mask = reg.rydberg_mask.astype(float)
    diag = np.zeros(reg.dim)
    for (i, j), u in reg.couplings.entries.items():
        diag += u * mask[:, i] * mask[:, j]
    return diag


def interaction_hamiltonian(reg: Register) -> sp.csr_matrix:
    """Sum of U_ij |R_i R_j><R_i R_j| over the coupling map."""
    return sp.diags(interaction_diagonal(reg).astype(complex), format="csr")


def excitation_count(reg: Register) -> np.ndarray:
    """Number of Rydberg-excited atoms in each basis state."""
    return reg.rydberg_mask.sum(axis=1)


def transition_levels(kind: AtomKind, transition) -> tuple[int, int]:
    """Lower and upper level of a laser transition, validated against the atom kind."""
    transition = Transition(transition)
    if kind is AtomKind.QUBIT and transition is Transition.Q0R:
        return Q0, QR
    if kind is AtomKind.QUBIT and transition is Transition.Q1R:
        return Q1, QR
    if kind is AtomKind.ANCILLA and transition is Transition.GE:
        return G, E
    raise RegisterError(f"transition {transition.value} is not valid on a {kind.name.lower()} atom")


def local_drive(kind: AtomKind, transition, rabi: float) -> np.ndarray:
    lo, hi = transition_levels(kind, transition)
    h = np.zeros((kind.dim, kind.dim), dtype=complex)
    h[lo, hi] = h[hi, lo] = rabi / 2
    return h


def drive_hamiltonian(pulse, reg: Register) -> sp.csr_matrix:
    """(Omega/2)(|k><R| + |R><k|) on the addressed atom."""
    kind = reg.atoms[pulse.atom].kind
    return embed_operator(local_drive(kind, pulse.transition, pulse.rabi), pulse.atom, reg)


def total_hamiltonian(pulse, reg: Register) -> sp.csr_matrix:
    h = interaction_hamiltonian(reg)
    if pulse is not None:
        h = h + drive_hamiltonian(pulse, reg)
    return h.tocsr()


@dataclass(frozen=True)
class DecayRates:
    """Rydberg decay rates in units of Omega."""

    gamma0: float = 0.0  # qubit |r> -> |0>
    gamma1: float = 0.0  # qubit |r> -> |1>
    gammaA: float = 0.0  # ancilla |e> -> |g>

    def __post_init__(self):
        if min(self.gamma0, self.gamma1, self.gammaA) < 0:
            raise RegisterError("decay rates must be non-negative")

    @property
    def gamma_q(self) -> float:
        return self.gamma0 + self.gamma1

    @property
    def is_closed(self) -> bool:
        return self.gamma0 == self.gamma1 == self.gammaA == 0

    @classmethod
    def from_splitting(cls, gamma: float, splitting: str) -> DecayRates:
        """Rates for the three splittings used in the dissipation scans.

        ``"qubit"``: gamma0 = gamma1 = gamma/2, no ancilla decay;
        ``"ancilla"``: gammaA = gamma only; ``"equal"``: both.
        """
        if splitting == "qubit":
            return cls(gamma / 2, gamma / 2, 0.0)
        if splitting == "ancilla":
            return cls(0.0, 0.0, gamma)
        if splitting == "equal":
            return cls(gamma / 2, gamma / 2, gamma)
        raise ValueError(f"unknown splitting {splitting!r}")


def jump_operators(reg: Register, rates: DecayRates) -> list[tuple[str, sp.csr_matrix]]:
    """Collapse operators, two per qubit atom and one per ancilla, in atom order."""
    ops = []
    for k, atom in enumerate(reg.atoms):
        if atom.kind is AtomKind.QUBIT:
            for lev, rate, name in ((Q0, rates.gamma0, "0"), (Q1, rates.gamma1, "1")):
                loc = np.zeros((3, 3), dtype=complex)
                loc[lev, QR] = np.sqrt(rate)
                ops.append((f"{atom.label}:r->{name}", embed_operator(loc, k, reg)))
        else:
            loc = np.zeros((2, 2), dtype=complex)
            loc[G, E] = np.sqrt(rates.gammaA)
            ops.append((f"{atom.label}:e->g", embed_operator(loc, k, reg)))
    return ops
