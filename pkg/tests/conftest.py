"""Shared fixtures and slow-but-obviously-correct reference implementations.

The reference queue evaluators below are deliberately written as plain event
loops, independent of the vectorized production code, so they can serve as
oracles for it.
"""

import numpy as np
import pytest

from apptsched import ModelParams, ServiceLaw


@pytest.fixture
def p0():
    """Reference parameter set used throughout: overloaded, exponential."""
    return ModelParams(
        alpha=2.0, p=0.8, mu=1.0, horizon=1.0, cs2=1.0,
        service_law=ServiceLaw.EXPONENTIAL, cw=1.0, co=1.0,
    )


@pytest.fixture
def p_deterministic_shows():
    """Degenerate randomness: everyone shows, unit service times."""
    return ModelParams(
        alpha=2.0, p=1.0, mu=1.0, horizon=1.0, cs2=0.0,
        service_law=ServiceLaw.DETERMINISTIC, cw=1.0, co=1.0,
    )


def naive_queue_stats(arrivals, services, horizon):
    """Step-by-step FCFS evaluation: waits, departures, tau, overage, idle."""
    waits = []
    departures = []
    free_at = 0.0
    for a, s in zip(arrivals, services):
        start = max(free_at, a)
        waits.append(start - a)
        free_at = start + s
        departures.append(free_at)
    if not waits:
        return [], [], 0.0, 0.0, 0.0
    tau = departures[-1]
    overage = max(tau - horizon, 0.0)
    idle = tau - sum(services)
    return waits, departures, tau, overage, idle


def naive_excess_integral(arrivals, departures):
    """Integral of (number-in-system - 1)^+ via explicit event sweep."""
    events = sorted(set(list(arrivals) + list(departures)))
    total = 0.0
    for left, right in zip(events[:-1], events[1:]):
        in_system = sum(1 for a, d in zip(arrivals, departures) if a <= left < d)
        total += max(in_system - 1, 0) * (right - left)
    return total


@pytest.fixture
def reference_queue():
    return naive_queue_stats


@pytest.fixture
def reference_excess():
    return naive_excess_integral
