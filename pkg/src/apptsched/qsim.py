"""Exact evaluation of one schedule against one realization.

Single FCFS server, infinite buffer, punctual show-ups.  Waiting times and the
completion time come from the departure-time recursion

    d_0 = 0,  start_k = max(d_{k-1}, a_k),  d_k = start_k + s_k,

evaluated in closed form with prefix sums, so a call costs a handful of
vectorized passes over the show-ups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeMismatchError
from .model import Realization, Schedule, SimOutcome, SystemInstance

__all__ = ["simulate", "queue_path", "QueuePath"]


def _served(instance: SystemInstance, schedule: Schedule, realization: Realization):
    """Arrival times and scaled service times of the show-ups, in slot order."""
    size = instance.population
    if len(schedule) != size:
        raise SizeMismatchError(
            f"schedule has {len(schedule)} slots, instance population is {size}"
        )
    if realization.shows.size != size:
        raise SizeMismatchError(
            f"realization has {realization.shows.size} show flags, expected {size}"
        )
    arrivals = schedule.times[realization.shows]
    if realization.services.size < arrivals.size:
        raise SizeMismatchError("realization carries fewer service times than show-ups")
    services = realization.services[: arrivals.size] * instance.service_scale
    return arrivals, services


def _departure_stats(arrivals: np.ndarray, services: np.ndarray):
    """Prefix-sum form of the departure recursion.

    With S_k the cumulative service and M_k = max_{j<=k} (a_j - S_{j-1}),
    departures satisfy d_k = S_k + M_k and waits w_k = S_{k-1} + M_k - a_k.
    """
    total = np.cumsum(services)
    before = np.concatenate(([0.0], total[:-1]))
    runmax = np.maximum.accumulate(arrivals - before)
    departures = total + runmax
    waits = before + runmax - arrivals
    return departures, waits, total


def simulate(instance: SystemInstance, schedule: Schedule, realization: Realization) -> SimOutcome:
    """Run the queue once and return exact waiting, overage, and idle figures.

    When nobody shows up all outputs are zero by convention.
    """
    arrivals, services = _served(instance, schedule, realization)
    horizon = instance.params.horizon
    if arrivals.size == 0:
        return SimOutcome(0.0, 0.0, 0.0, 0.0, 0, np.empty(0))
    departures, waits, total = _departure_stats(arrivals, services)
    tau = float(departures[-1])
    return SimOutcome(
        makespan_W=float(np.sum(waits)),
        overage_O=max(tau - horizon, 0.0),
        tau=tau,
        idle=tau - float(total[-1]),
        shows_count=arrivals.size,
        per_job_waits=waits,
    )


@dataclass(frozen=True, eq=False)
class QueuePath:
    """Right-continuous step function t -> number in system.

    ``levels[i]`` is the queue length on [times[i], times[i+1]); the path is
    zero after the last breakpoint.
    """

    times: np.ndarray
    levels: np.ndarray

    def integral_excess(self) -> float:
        """Exact integral of (Q(t) - 1)^+ over the whole path."""
        if self.times.size < 2:
            return 0.0
        widths = np.diff(self.times)
        excess = np.maximum(self.levels[:-1] - 1, 0)
        return float(np.sum(excess * widths))

    def value_at(self, t: float) -> int:
        if self.times.size == 0 or t < self.times[0]:
            return 0
        j = int(np.searchsorted(self.times, t, side="right")) - 1
        return int(self.levels[j])


def queue_path(instance: SystemInstance, schedule: Schedule, realization: Realization) -> QueuePath:
    """Reconstruct the queue-length path: batch up-jumps at arrival epochs,
    unit down-jumps at departures.

    The integral of (Q - 1)^+ along the path equals the makespan from
    :func:`simulate` exactly up to float summation order.
    """
    arrivals, services = _served(instance, schedule, realization)
    if arrivals.size == 0:
        return QueuePath(times=np.empty(0), levels=np.empty(0, dtype=np.int64))
    departures, _, _ = _departure_stats(arrivals, services)
    events = np.concatenate((arrivals, departures))
    jumps = np.concatenate((np.ones(arrivals.size, dtype=np.int64),
                            -np.ones(departures.size, dtype=np.int64)))
    order = np.argsort(events, kind="stable")
    events = events[order]
    jumps = jumps[order]
    # merge simultaneous events into a single net breakpoint
    distinct, start = np.unique(events, return_index=True)
    net = np.add.reduceat(jumps, start)
    levels = np.cumsum(net)
    return QueuePath(times=distinct, levels=levels)
