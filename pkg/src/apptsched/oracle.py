"""Complete-information benchmark.

When the show flags and service times are revealed up front, the best schedule
(keeping job order) lets each show-up arrive exactly when the server frees up,
and batches whatever cannot start before the horizon at the horizon itself.
That choice minimizes waiting, completion time, and overage simultaneously for
the given realization, so it prices the value of perfect foresight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeMismatchError
from .model import Realization, Schedule, SystemInstance

__all__ = ["CIOutcome", "ci_outcome", "ci_schedule", "ci_cost"]


@dataclass(frozen=True)
class CIOutcome:
    """Pathwise-optimal performance for one realization.

    tau_star is the total scaled work of the show-ups; overage and waiting
    follow from running the server without idling until that work is done.
    """

    makespan_W_star: float
    overage_O_star: float
    tau_star: float


def _scaled_work(instance: SystemInstance, realization: Realization) -> np.ndarray:
    if realization.shows.size != instance.population:
        raise SizeMismatchError(
            f"realization has {realization.shows.size} show flags, "
            f"expected {instance.population}"
        )
    count = int(realization.shows.sum())
    if realization.services.size < count:
        raise SizeMismatchError("realization carries fewer service times than show-ups")
    return realization.services[:count] * instance.service_scale


def ci_outcome(instance: SystemInstance, realization: Realization) -> CIOutcome:
    """Exact optimal cost components under complete information.

    With t_m the cumulative scaled work of the first m show-ups, the optimal
    waiting is the integral over [H, tau*] of (shows - completed - 1), which
    collapses to the exact per-job sum of (t_{m-1} - H)^+: job m can start no
    earlier than t_{m-1}, and only time spent past the horizon counts.
    """
    services = _scaled_work(instance, realization)
    if services.size == 0:
        return CIOutcome(0.0, 0.0, 0.0)
    horizon = instance.params.horizon
    total = np.cumsum(services)
    before = np.concatenate(([0.0], total[:-1]))
    tau_star = float(total[-1])
    waits = np.maximum(before - horizon, 0.0)
    return CIOutcome(
        makespan_W_star=float(np.sum(waits)),
        overage_O_star=max(tau_star - horizon, 0.0),
        tau_star=tau_star,
    )


def ci_cost(instance: SystemInstance, realization: Realization) -> float:
    """Scaled cost cw_n * W* + co_n * O* of the complete-information optimum."""
    out = ci_outcome(instance, realization)
    return instance.cw_n * out.makespan_W_star + instance.co_n * out.overage_O_star


def ci_schedule(instance: SystemInstance, realization: Realization) -> Schedule:
    """A schedule achieving the complete-information optimum pathwise.

    The k-th show-up is placed at min(t_{k-1}, H) so it arrives exactly at the
    server's previous departure epoch, with the overflow batched at the
    horizon.  No-show slots ride along at the next show-up's time (or the
    horizon when none follows); they cost nothing, and this placement keeps
    the sequence non-decreasing.  Running :func:`apptsched.qsim.simulate` on
    the result reproduces :func:`ci_outcome` exactly.
    """
    services = _scaled_work(instance, realization)
    horizon = instance.params.horizon
    size = instance.population
    if services.size == 0:
        return Schedule(np.full(size, horizon))
    total = np.cumsum(services)
    before = np.concatenate(([0.0], total[:-1]))
    show_times = np.minimum(before, horizon)
    times = np.full(size, np.inf)
    times[realization.shows] = show_times
    # backward running minimum assigns each no-show the next show-up's time
    times = np.minimum.accumulate(times[::-1])[::-1]
    times[np.isinf(times)] = horizon
    return Schedule(times)
