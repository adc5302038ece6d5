"""Candidate schedule generators and schedule/control conversions.

The two workhorses place one job every p/(n*mu) time units (first-order
optimal: arrivals match the effective service rate, leftovers batch at the
horizon) or every p/(n*mu + sqrt(n)*beta) time units (second-order refinement
with a drift correction of order 1/sqrt(n)).
"""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from . import analytics
from .controls import CumulativeControl
from .errors import DomainError, MassMismatchError, NotOverloadedError
from .model import Schedule, SystemInstance

__all__ = [
    "fluid_schedule",
    "linear_drift_schedule",
    "diffusion_schedule",
    "uniform_schedule",
    "from_cumulative",
    "counting_control",
    "schedule_to_csv",
    "schedule_from_csv",
]


def fluid_schedule(instance: SystemInstance) -> Schedule:
    """Equally spaced arrivals at the effective service rate.

    T_i = min(p*(i-1)/(n*mu), H): one job every p/(n*mu) units, and every slot
    whose formula time reaches the horizon is placed exactly at the horizon.
    The asymptotic optimality guarantee needs an overloaded instance; the
    schedule itself is valid either way, so milder inputs only warn.
    """
    params = instance.params
    if not params.overloaded():
        warnings.warn(
            "fluid schedule on a non-overloaded instance has no optimality guarantee",
            RuntimeWarning,
            stacklevel=2,
        )
    slots = np.arange(instance.population, dtype=np.float64)
    times = np.minimum(params.p * slots / (instance.n * params.mu), params.horizon)
    return Schedule(times)


def linear_drift_schedule(instance: SystemInstance, beta: float, clamp: bool = False) -> Schedule:
    """Equally spaced arrivals with a drift-adjusted rate.

    T_i = min(p*(i-1) / (n*mu + sqrt(n)*beta), H).  Requires the adjusted rate
    to stay positive, i.e. n > (beta/mu)^2 for beta < 0.  If the adjusted rate
    is so slow that every slot lands before the horizon (a non-overloaded
    small-n corner), the schedule cannot realize the intended pre-horizon
    flow; that raises unless ``clamp`` accepts the truncated schedule.
    """
    params = instance.params
    n = instance.n
    denom = n * params.mu + np.sqrt(n) * beta
    if denom <= 0.0:
        raise DomainError(
            f"drift {beta} is infeasible at n={n}: need n > (beta/mu)^2"
        )
    size = instance.population
    spacing_count = params.p * (size - 1)
    if spacing_count < params.horizon * denom and not clamp:
        raise DomainError(
            "all slots fall before the horizon; the drifted flow cannot be "
            "realized with this population (pass clamp=True to accept)"
        )
    slots = np.arange(size, dtype=np.float64)
    times = np.minimum(params.p * slots / denom, params.horizon)
    return Schedule(times)


def diffusion_schedule(instance: SystemInstance, legacy: bool = False) -> Schedule:
    """Drift-adjusted schedule at the optimal second-order drift.

    The default drift is the large-horizon optimizer beta_star; ``legacy``
    selects the variant coefficient -c_star_legacy instead (see
    :class:`apptsched.analytics.DiffusionConstants` for both conventions).
    """
    params = instance.params
    if not params.overloaded():
        raise NotOverloadedError("diffusion schedule requires an overloaded instance")
    constants = analytics.diffusion_constants(params)
    beta = -constants.c_star_legacy if legacy else constants.beta_star
    return linear_drift_schedule(instance, beta)


def uniform_schedule(instance: SystemInstance) -> Schedule:
    """Baseline: the population spread evenly over [0, H]."""
    size = instance.population
    horizon = instance.params.horizon
    if size == 1:
        return Schedule(np.zeros(1))
    slots = np.arange(size, dtype=np.float64)
    return Schedule(horizon * slots / (size - 1))


def from_cumulative(instance: SystemInstance, control: CumulativeControl) -> Schedule:
    """Invert a cumulative control into appointment times.

    T_i = inf{t : control(t) >= i}.  The control's total mass must equal the
    population.  Step controls (counting functions) are reproduced exactly;
    for a continuous ramp the i-th time sits one mass unit into the ramp, one
    slot later than the closed-form generators above, which is immaterial at
    scale and documented here rather than hidden.
    """
    size = instance.population
    if abs(control.mass - size) > 1e-9 * max(1.0, size):
        raise MassMismatchError(
            f"control mass {control.mass} does not match population {size}"
        )
    times = np.array([control.inverse(i) for i in range(1, size + 1)])
    times = np.minimum(times, instance.params.horizon)
    return Schedule(times)


def counting_control(schedule: Schedule) -> CumulativeControl:
    """The schedule's counting function as a step-shaped cumulative control."""
    if len(schedule) == 0:
        raise DomainError("cannot build a counting function for an empty schedule")
    distinct, counts = np.unique(schedule.times, return_counts=True)
    cum = np.cumsum(counts).astype(np.float64)
    times = [0.0]
    values = [0.0]
    for t, level in zip(distinct, cum):
        if t != times[-1]:
            times.append(t)
            values.append(values[-1])
        times.append(t)
        values.append(level)
    return CumulativeControl(np.array(times), np.array(values))


def schedule_to_csv(schedule: Schedule, path) -> None:
    """One appointment time per line, 17 significant digits."""
    Path(path).write_text("".join(f"{t:.17g}\n" for t in schedule.times))


def schedule_from_csv(path) -> Schedule:
    lines = [line.strip() for line in Path(path).read_text().splitlines()]
    return Schedule(np.array([float(x) for x in lines if x], dtype=np.float64))
