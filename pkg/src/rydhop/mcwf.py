"""Monte Carlo wave-function trajectories for registers too large for density matrices.

Each trajectory owns a Philox stream keyed by ``(seed_base, probe, index)``,
so results do not depend on execution order or on how trajectories are
distributed over workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dense import LindbladModel
from .fidelity import (
    FidelityReport,
    complementary_basis,
    computational_basis,
    hofmann_bounds,
)
from .protocol import FrameOp, PulseSequence

NORM_TOL = 1e-9
WORKERS_ENV = "RYDHOP_WORKERS"


class TrajectoryError(RuntimeError):
    pass


@dataclass
class TrajectoryResult:
    psi: np.ndarray
    jumps: list[tuple[float, int]] = field(default_factory=list)
    seed: tuple = ()


@dataclass
class EnsembleEstimate:
    mean: float
    stderr: float
    n_trajectories: int
    seed_base: int
    probe_means: list[float] = field(default_factory=list)


def trajectory_rng(seed) -> np.random.Generator:
    """Counter-based generator for an int seed or a key tuple ``(base, *path)``."""
    if isinstance(seed, (tuple, list)):
        ss = np.random.SeedSequence(entropy=int(seed[0]), spawn_key=tuple(int(s) for s in seed[1:]))
    else:
        ss = np.random.SeedSequence(entropy=int(seed))
    return np.random.Generator(np.random.Philox(ss))


def _norm2(psi: np.ndarray) -> float:
    return float(np.vdot(psi, psi).real)


def run_trajectory(seq: PulseSequence, model: LindbladModel, psi0: np.ndarray, seed) -> TrajectoryResult:
    """Waiting-time quantum-jump trajectory through a pulse sequence.

    The unnormalised state evolves under H_eff = H - (i/2) sum L^dag L; a jump
    fires when its squared norm falls to a uniform draw r.  The jump instant
    is located by bracketed root finding on the norm inside the segment.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    if abs(_norm2(psi) - 1) > 1e-9:
        raise TrajectoryError("initial state must be normalised")
    rng = trajectory_rng(seed)
    active = [(k, op) for k, op in enumerate(model.jump_ops) if op.nnz and abs(op).max() > 0]
    r = rng.random()
    jumps: list[tuple[float, int]] = []
    clock = 0.0
    for step in seq.steps:
        if isinstance(step, FrameOp):
            psi = model.frame_operator(step) @ psi
            continue
        seg = model.hilbert_segment(step, effective=True)
        start, remaining = 0.0, step.duration
        while True:
            end = seg.evolve(psi, remaining)
            if _norm2(end) > r or not active:
                psi = end
                break
            if _norm2(psi) < 1e-300:
                raise TrajectoryError("state norm underflow")
            base = psi

            def excess(s):
                return _norm2(seg.evolve(base, s)) - r

            try:
                s = brentq(excess, 0.0, remaining, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
            except (ValueError, RuntimeError) as exc:
                raise TrajectoryError(f"jump-time search failed: {exc}") from exc
            if abs(excess(s)) > NORM_TOL:
                raise TrajectoryError("jump-time search did not reach the norm tolerance")
            phi = seg.evolve(base, s)
            cand = [op @ phi for _, op in active]
            weights = np.array([_norm2(c) for c in cand])
            if weights.sum() <= 0:
                raise TrajectoryError("no jump channel has weight at the jump time")
            pick = int(np.searchsorted(np.cumsum(weights), rng.random() * weights.sum(), side="right"))
            pick = min(pick, len(cand) - 1)
            psi = cand[pick] / math.sqrt(weights[pick])
            jumps.append((clock + start + s, active[pick][0]))
            r = rng.random()
            start += s
            remaining -= s
        clock += step.duration
    psi = psi / math.sqrt(_norm2(psi))
    return TrajectoryResult(psi, jumps, tuple(seed) if isinstance(seed, (tuple, list)) else (seed,))


def _probe_samples(args) -> np.ndarray:
    seq, model, psi0, target, seed_base, probe, n_traj = args
    out = np.empty(n_traj)
    for j in range(n_traj):
        res = run_trajectory(seq, model, psi0, (seed_base, probe, j))
        out[j] = abs(np.vdot(target, res.psi)) ** 2
    return out


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def classical_fidelity_mc(
    seq: PulseSequence,
    model: LindbladModel,
    basis: np.ndarray,
    ideal: np.ndarray,
    n_traj: int,
    seed_base: int,
    probe_offset: int = 0,
    workers: int | None = None,
) -> EnsembleEstimate:
    """Trajectory estimate of (1/d) sum_i <i|U^dag E(|i><i|) U|i>.

    ``basis`` rows are coding-subspace states; every other atom starts in
    level 0.  The standard error is that of the stratified mean over probes
    with equal trajectory counts.
    """
    if n_traj < 2:
        raise TrajectoryError("need at least two trajectories per probe")
    basis = np.asarray(basis, dtype=complex)
    ideal = np.asarray(ideal, dtype=complex)
    idx = model.register.coding_indices()
    jobs = []
    for i, state in enumerate(basis):
        psi0 = np.zeros(model.dim, dtype=complex)
        psi0[idx] = state
        target = np.zeros(model.dim, dtype=complex)
        target[idx] = ideal @ state
        jobs.append((seq, model, psi0, target, seed_base, probe_offset + i, n_traj))
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(_probe_samples, jobs))
    else:
        samples = [_probe_samples(job) for job in jobs]
    means = [float(s.mean()) for s in samples]
    var = sum(float(s.var(ddof=1)) for s in samples) / n_traj
    d = len(samples)
    return EnsembleEstimate(float(np.mean(means)), math.sqrt(var) / d, n_traj * d, seed_base, means)


def mc_report(
    seq: PulseSequence,
    model: LindbladModel,
    ideal: np.ndarray,
    n_traj: int,
    seed_base: int,
    workers: int | None = None,
) -> FidelityReport:
    """Hofmann bounds from computational and Fourier probes, 2d pure-state ensembles."""
    psi = computational_basis(4)
    phi = complementary_basis(psi)
    e_psi = classical_fidelity_mc(seq, model, psi, ideal, n_traj, seed_base, 0, workers)
    e_phi = classical_fidelity_mc(seq, model, phi, ideal, n_traj, seed_base, 4, workers)
    lower, upper = hofmann_bounds(e_psi.mean, e_phi.mean)
    se_upper = e_psi.stderr if e_psi.mean <= e_phi.mean else e_phi.stderr
    return FidelityReport(
        f_psi=e_psi.mean,
        f_phi=e_phi.mean,
        lower=lower,
        upper=upper,
        stderr_psi=e_psi.stderr,
        stderr_phi=e_phi.stderr,
        stderr_lower=math.hypot(e_psi.stderr, e_phi.stderr),
        stderr_upper=se_upper,
    )
