"""Brute-force Monte-Carlo twirling, used to check the analytic twirl paths.

Channels ``g_i`` are drawn from the density, ``U_{g_i} rho U_{g_i}^dag`` is
formed explicitly for each draw, and the results are averaged. Because the
sample stream is counter based, the estimate does not depend on how the
index range is split across workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Tuple

import numpy as np

from . import matrix as mx
from .errors import DimMismatch
from .groups import Density, Rep, check_variants, rep_unitaries, sample_group

GRID_SLACK = 1e-3
BLOCK = 8192


@dataclass(frozen=True, eq=False)
class McEstimate:
    mean: np.ndarray
    n: int
    stderr_bound: float
    seed: int

    def to_json(self) -> dict:
        return {"mean": mx.matrix_to_json(self.mean), "n": self.n,
                "stderr_bound": self.stderr_bound, "seed": self.seed}


@dataclass(frozen=True)
class McVerdict:
    passed: bool
    max_error: float
    worst_entry: Tuple[int, int]
    allowed: float

    def to_json(self) -> dict:
        return {"pass": self.passed, "max_error": self.max_error,
                "worst_entry": list(self.worst_entry), "allowed": self.allowed}


def _block_sums(rho, density, rep, seed, n, start):
    g = sample_group(density, min(BLOCK, n - start), seed, start=start)
    us = rep_unitaries(rep, g)
    samples = us @ rho @ us.conj().transpose(0, 2, 1)
    return samples.sum(axis=0), (np.abs(samples) ** 2).sum(axis=0)


def mc_twirl(rho, density: Density, rep: Rep, n: int, seed: int,
             workers: int = 1) -> McEstimate:
    """Empirical average of ``U_g rho U_g^dag`` over ``n`` draws ``g ~ w``.

    Draws are grouped into fixed blocks of ``BLOCK`` indices and the block
    sums are reduced in index order, so ``workers`` never changes the result.
    """
    check_variants(density, rep)
    r = np.asarray(rho, dtype=complex)
    if r.shape != (rep.dim, rep.dim):
        raise DimMismatch(f"state shape {r.shape} does not match rep dim {rep.dim}")
    if n < 1:
        raise ValueError("n must be positive")
    starts = range(0, n, BLOCK)
    task = partial(_block_sums, r, density, rep, seed, n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, starts))
    else:
        parts = [task(s) for s in starts]
    total = np.zeros_like(r)
    total_sq = np.zeros(r.shape)
    for s, sq in parts:
        total += s
        total_sq += sq
    mean = total / n
    var = np.clip(total_sq / n - np.abs(mean) ** 2, 0, None)
    stderr = float(np.sqrt(var.max() / n))
    # each sample is Hermitian with unit trace; symmetrize away summation roundoff
    mean = (mean + mean.conj().T) / 2
    return McEstimate(mean, n, stderr, seed)


def mc_compare(estimate: McEstimate, analytic, k: float = 4.0,
               slack: float = GRID_SLACK) -> McVerdict:
    """Pass iff every entry is within ``k`` standard errors plus ``slack``."""
    a = np.asarray(analytic, dtype=complex)
    if a.shape != estimate.mean.shape:
        raise DimMismatch(f"estimate shape {estimate.mean.shape} vs analytic shape {a.shape}")
    if k < 1:
        raise ValueError("sigma multiplier k must be at least 1")
    err = np.abs(estimate.mean - a)
    worst = np.unravel_index(np.argmax(err), err.shape)
    allowed = k * estimate.stderr_bound + slack
    max_err = float(err[worst])
    return McVerdict(max_err <= allowed, max_err, (int(worst[0]), int(worst[1])), allowed)
