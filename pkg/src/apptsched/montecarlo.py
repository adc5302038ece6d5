"""Reproducible, parallel Monte-Carlo estimation.

Replication k always draws from substream(k) of a counter-based generator and
writes its result into slot k of a preallocated buffer; the reduction then
runs in index order with exact summation.  Results are therefore bit-identical
for a given seed regardless of the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytics import fluid_summary
from .errors import DomainError
from .model import ModelParams, Realization, Schedule, SystemInstance, sample_realization
from .oracle import ci_cost
from .qsim import simulate

__all__ = [
    "Estimate",
    "RngPolicy",
    "collect",
    "estimate_cost",
    "estimate_sg",
    "estimate_ci_cost",
    "scaled_diffusion_cost",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Estimate:
    """Sample mean, its standard error, and the replication count."""

    mean: float
    stderr: float
    reps: int


@dataclass(frozen=True)
class RngPolicy:
    """Deterministic substream derivation from a single 64-bit seed.

    substream(k) keys a Philox counter-based generator with (seed, k), so
    distinct replication indices give statistically independent streams and
    identical (seed, k) always reproduces identical draws.
    """

    seed: int

    def substream(self, k: int) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, k & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def collect(reps: int, one_rep, threads: int = 1) -> Estimate:
    """Run one_rep(k) for k = 0..reps-1 into an indexed buffer and reduce.

    ``one_rep`` must be self-contained per index (own substream, no shared
    mutable state); the buffer write and the index-ordered exact reduction
    make the estimate independent of the thread count.
    """
    if reps < 2:
        raise DomainError(f"need at least 2 replications, got {reps}")
    buffer = np.empty(reps)

    def fill(lo: int, hi: int) -> None:
        for k in range(lo, hi):
            buffer[k] = one_rep(k)

    if threads <= 1:
        fill(0, reps)
    else:
        chunk = -(-reps // threads)
        bounds = [(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for future in [pool.submit(fill, lo, hi) for lo, hi in bounds]:
                future.result()

    mean = math.fsum(buffer) / reps
    var = math.fsum((x - mean) ** 2 for x in buffer) / (reps - 1)
    return Estimate(mean=mean, stderr=math.sqrt(var / reps), reps=reps)


def _schedule_cost(instance: SystemInstance, schedule: Schedule, realization: Realization) -> float:
    out = simulate(instance, schedule, realization)
    return instance.cw_n * out.makespan_W + instance.co_n * out.overage_O


def estimate_cost(
    instance: SystemInstance,
    schedule: Schedule,
    reps: int,
    rng: RngPolicy,
    threads: int = 1,
) -> Estimate:
    """Expected scaled cost cw_n*E[W] + co_n*E[O] of a schedule."""

    def one_rep(k: int) -> float:
        realization = sample_realization(instance, rng.substream(k))
        return _schedule_cost(instance, schedule, realization)

    return collect(reps, one_rep, threads=threads)


def estimate_sg(
    instance: SystemInstance,
    schedule: Schedule,
    reps: int,
    rng: RngPolicy,
    threads: int = 1,
) -> Estimate:
    """Expected cost excess of a schedule over the complete-information optimum.

    Both costs are evaluated on the same realization per replication (common
    random numbers); the gap is a small difference of large means, and the
    pairing keeps its variance manageable.  Every per-replication difference
    is non-negative up to rounding because the benchmark is pathwise optimal.
    """

    def one_rep(k: int) -> float:
        realization = sample_realization(instance, rng.substream(k))
        return _schedule_cost(instance, schedule, realization) - ci_cost(instance, realization)

    return collect(reps, one_rep, threads=threads)


def estimate_ci_cost(
    instance: SystemInstance,
    reps: int,
    rng: RngPolicy,
    threads: int = 1,
) -> Estimate:
    """Expected scaled cost of the complete-information optimum alone."""

    def one_rep(k: int) -> float:
        return ci_cost(instance, sample_realization(instance, rng.substream(k)))

    return collect(reps, one_rep, threads=threads)


def scaled_diffusion_cost(cost_estimate: Estimate, params: ModelParams, n: int) -> Estimate:
    """Center at the first-order optimum and scale by sqrt(n).

    Maps an estimate of the cost J_n to one of sqrt(n) * (J_n - v_bar), the
    second-order (diffusion-scale) cost.
    """
    v_bar = fluid_summary(params).v_bar
    root = math.sqrt(n)
    return Estimate(
        mean=root * (cost_estimate.mean - v_bar),
        stderr=root * cost_estimate.stderr,
        reps=cost_estimate.reps,
    )
