"""Exact constant-generator propagators built from invariant blocks.

During one square pulse the generator is constant and only one atom is
driven.  Both the Liouvillian and the effective Hamiltonian then split into
many small invariant blocks (the driven atom's levels times a fixed
configuration of the other atoms, chained by the decay of the undriven
atoms).  Each block is exponentiated densely, which is exact up to
matrix-function accuracy and cheap even for stiff blockade shifts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


def liouvillian(h: sp.spmatrix, jumps: list[sp.spmatrix]) -> sp.csr_matrix:
    """Lindblad generator acting on row-major ``rho.reshape(-1)``.

    Uses vec(A rho B) = (A kron B^T) vec(rho).
    """
    n = h.shape[0]
    eye = sp.identity(n, format="csr", dtype=complex)
    gen = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    if jumps:
        k = sum((lk.conj().T @ lk for lk in jumps), sp.csr_matrix((n, n), dtype=complex))
        gen = gen - 0.5 * (sp.kron(k, eye) + sp.kron(eye, k.T))
        for lk in jumps:
            gen = gen + sp.kron(lk, lk.conj())
    return sp.csr_matrix(gen)


def effective_hamiltonian(h: sp.spmatrix, jumps: list[sp.spmatrix]) -> sp.csr_matrix:
    out = sp.csr_matrix(h, dtype=complex)
    for lk in jumps:
        out = out - 0.5j * (lk.conj().T @ lk)
    return sp.csr_matrix(out)


@dataclass
class _Group:
    idx: np.ndarray  # (n_blocks, size) global indices
    mats: np.ndarray  # (n_blocks, size, size) block generators


def block_groups(gen: sp.spmatrix) -> list[_Group]:
    """Split a sparse generator into invariant diagonal blocks, grouped by size."""
    gen = sp.coo_matrix(gen)
    n = gen.shape[0]
    pattern = sp.coo_matrix((np.ones(gen.nnz), (gen.row, gen.col)), shape=gen.shape)
    _, labels = connected_components(pattern, directed=True, connection="weak")
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    starts = np.flatnonzero(np.r_[True, sorted_labels[1:] != sorted_labels[:-1]])
    sizes = np.diff(np.r_[starts, n])
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n) - np.repeat(starts, sizes)
    size_of_label = np.empty(labels.max() + 1, dtype=np.int64)
    size_of_label[sorted_labels[starts]] = sizes

    groups = []
    for size in np.unique(sizes):
        block_labels = sorted_labels[starts[sizes == size]]
        slot = np.full(labels.max() + 1, -1)
        slot[block_labels] = np.arange(len(block_labels))
        idx = np.empty((len(block_labels), size), dtype=np.int64)
        members = slot[labels] >= 0
        idx[slot[labels[members]], pos[members]] = np.flatnonzero(members)
        mats = np.zeros((len(block_labels), size, size), dtype=complex)
        sel = size_of_label[labels[gen.row]] == size
        r, c, v = gen.row[sel], gen.col[sel], gen.data[sel]
        np.add.at(mats, (slot[labels[r]], pos[r], pos[c]), v)
        groups.append(_Group(idx, mats))
    return groups


class BlockPropagator:
    """exp(G t) for a fixed sparse generator G and duration t, applied to column stacks."""

    def __init__(self, gen: sp.spmatrix, t: float):
        self.dim = gen.shape[0]
        self.t = t
        self._groups = []
        for g in block_groups(gen):
            self._groups.append((g.idx, la.expm(g.mats * t)))

    @property
    def n_blocks(self) -> int:
        return sum(idx.shape[0] for idx, _ in self._groups)

    @property
    def max_block(self) -> int:
        return max(idx.shape[1] for idx, _ in self._groups)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Apply to ``x`` of shape (dim,) or (dim, k)."""
        out = np.empty_like(x, dtype=complex)
        for idx, prop in self._groups:
            if x.ndim == 1:
                out[idx] = np.einsum("bij,bj->bi", prop, x[idx])
            else:
                out[idx] = np.einsum("bij,bjk->bik", prop, x[idx])
        return out


class HilbertSegment:
    """Pure-state evolution exp(-i H t) for a constant (possibly non-Hermitian) H.

    Blocks are diagonalised once so the state can be evaluated at any time
    inside the segment, which the jump-time search relies on.  Blocks whose
    eigenvectors are ill-conditioned fall back to direct exponentiation.
    """

    COND_LIMIT = 1e8

    def __init__(self, h: sp.spmatrix):
        self.dim = h.shape[0]
        self.hermitian = abs(h - h.conj().T).max() == 0 if h.nnz else True
        self._groups = []
        for g in block_groups(h):
            if self.hermitian:
                w, v = np.linalg.eigh(g.mats)
                vinv = np.conj(np.swapaxes(v, -1, -2))
                self._groups.append((g.idx, w, v, vinv, None))
                continue
            w, v = np.linalg.eig(g.mats)
            cond = np.linalg.cond(v)
            if np.all(np.isfinite(cond)) and cond.max() < self.COND_LIMIT:
                self._groups.append((g.idx, w, v, np.linalg.inv(v), None))
            else:
                self._groups.append((g.idx, None, None, None, g.mats))

    def evolve(self, psi: np.ndarray, t: float) -> np.ndarray:
        out = np.empty_like(psi, dtype=complex)
        for idx, w, v, vinv, mats in self._groups:
            x = psi[idx]
            if mats is None:
                coeff = np.einsum("bij,bj->bi", vinv, x) * np.exp(-1j * w * t)
                out[idx] = np.einsum("bij,bj->bi", v, coeff)
            else:
                out[idx] = np.einsum("bij,bj->bi", la.expm(-1j * t * mats), x)
        return out
