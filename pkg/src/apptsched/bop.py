"""Path-level Brownian machinery.

Discrete Skorohod reflection, Brownian path sampling on a uniform grid, and
Monte-Carlo evaluation of the second-order cost for piecewise-linear
controls.  Reflection on a grid carries a known O(sqrt(dt)) downward bias in
path levels; it is documented here and absorbed by the tolerances of the
statistical checks rather than corrected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controls import PiecewiseLinearControl
from .errors import DomainError
from .model import ModelParams
from . import analytics
from . import montecarlo

__all__ = ["GridPath", "skorohod_map", "sample_bm", "bop_cost_mc", "DEFAULT_GRID_CELLS"]

DEFAULT_GRID_CELLS = 2**14


@dataclass(frozen=True, eq=False)
class GridPath:
    """Values on the uniform grid 0, dt, 2*dt, ..."""

    dt: float
    values: np.ndarray

    def __post_init__(self):
        if self.dt <= 0.0:
            raise DomainError(f"grid step must be positive, got {self.dt}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise DomainError("grid path needs a one-dimensional, non-empty value array")
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt

    @property
    def horizon(self) -> float:
        return (self.values.size - 1) * self.dt


def _steps(horizon: float, dt: float) -> int:
    if dt <= 0.0:
        raise DomainError(f"grid step must be positive, got {dt}")
    nsteps = int(round(horizon / dt))
    if nsteps < 1 or abs(nsteps * dt - horizon) > 1e-9 * max(1.0, horizon):
        raise DomainError(f"dt={dt} does not divide the horizon {horizon}")
    return nsteps


def skorohod_map(path: GridPath) -> tuple[GridPath, GridPath]:
    """Reflection at zero by a single left-to-right pass.

    Returns (reflected, pushing): pushing(t) is the running maximum of the
    negative part of the path, and reflected = path + pushing is non-negative
    with pushing flat wherever reflected is away from zero.
    """
    pushing = np.maximum.accumulate(np.maximum(-path.values, 0.0))
    reflected = path.values + pushing
    return GridPath(path.dt, reflected), GridPath(path.dt, pushing)


def reflect_values(values: np.ndarray) -> np.ndarray:
    """Reflected values only; allocation-light variant of :func:`skorohod_map`."""
    return values + np.maximum.accumulate(np.maximum(-values, 0.0))


def sample_bm(sigma: float, horizon: float, dt: float, rng: np.random.Generator) -> GridPath:
    """Driftless Brownian path started at zero: Gaussian increments with
    variance sigma^2 * dt per grid step."""
    if sigma < 0.0:
        raise DomainError(f"sigma must be non-negative, got {sigma}")
    nsteps = _steps(horizon, dt)
    increments = rng.normal(0.0, sigma * math.sqrt(dt), nsteps)
    values = np.empty(nsteps + 1)
    values[0] = 0.0
    np.cumsum(increments, out=values[1:])
    return GridPath(dt, values)


def bop_cost_mc(
    control: PiecewiseLinearControl,
    params: ModelParams,
    horizon: float,
    dt: float,
    reps: int,
    seed: int,
    threads: int = 1,
) -> "montecarlo.Estimate":
    """Monte-Carlo estimate of the per-unit-horizon cost of a control.

    Per replication: reflect control + noise, then charge (cw/H) times the
    trapezoid integral of the reflected path plus (tilde_co/H) times the
    terminal pushing.  Cost coefficients cw and tilde_co come from ``params``
    (requires overload); ``horizon`` is the optimization window.
    """
    if dt >= horizon:
        raise DomainError(f"grid step {dt} must be smaller than the horizon {horizon}")
    nsteps = _steps(horizon, dt)
    sigma = analytics.noise_sigma(params)
    tilde_co = analytics.overage_cost_coefficient(params)
    cw = params.cw
    grid_control = control.sample_on_grid(nsteps, dt)
    scale = sigma * math.sqrt(dt)
    policy = montecarlo.RngPolicy(seed)

    def one_rep(k: int) -> float:
        rng = policy.substream(k)
        increments = rng.normal(0.0, scale, nsteps)
        np.cumsum(increments, out=increments)
        noise_end = float(increments[-1])
        path = grid_control.copy()
        path[1:] += increments
        reflected = reflect_values(path)
        hold = (cw / horizon) * float(np.trapezoid(reflected, dx=dt))
        push = (tilde_co / horizon) * float(reflected[-1] - grid_control[-1] - noise_end)
        return hold + push

    return montecarlo.collect(reps, one_rep, threads=threads)
