"""Piecewise-linear control functions.

Two flavors are used throughout: non-decreasing cumulative controls (mass
allocations over the horizon, possibly with atoms) and general right-continuous
piecewise-linear controls for the Brownian machinery.  Both are stored as knot
sequences; a repeated knot time encodes a jump, and the function is
right-continuous there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["CumulativeControl", "PiecewiseLinearControl"]


def _check_knots(times, values):
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if times.ndim != 1 or values.ndim != 1 or times.size != values.size:
        raise DomainError("knot times and values must be 1-d sequences of equal length")
    if times.size == 0:
        raise DomainError("need at least one knot")
    if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
        raise DomainError("knots must be finite")
    if times[0] != 0.0:
        raise DomainError("first knot must be at time 0")
    if np.any(np.diff(times) < 0.0):
        raise DomainError("knot times must be non-decreasing")
    times.flags.writeable = False
    values.flags.writeable = False
    return times, values


def _eval_rcll(times, values, t):
    """Evaluate the right-continuous piecewise-linear knot function at t.

    Constant extension beyond the last knot.  t may be a scalar or array.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < times[0]):
        raise DomainError("evaluation time before the first knot")
    j = np.searchsorted(times, t, side="right")
    j = np.minimum(j, times.size - 1)
    left_t = times[j - 1]
    right_t = times[j]
    left_v = values[j - 1]
    right_v = values[j]
    span = right_t - left_t
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(span > 0.0, (t - left_t) / np.where(span > 0.0, span, 1.0), 0.0)
    out = left_v + frac * (right_v - left_v)
    # at or past a knot time the value is the latest knot there (right limit)
    out = np.where(t >= right_t, right_v, out)
    out = np.where(j == 0, values[0], out)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class CumulativeControl:
    """Non-decreasing right-continuous piecewise-linear mass allocation.

    The value at time t is the cumulative mass scheduled by t; the final knot
    value is the total mass.  Atoms (e.g. a terminal batch at the horizon) are
    encoded as repeated knot times.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times, values = _check_knots(self.times, self.values)
        if values[0] < 0.0 or np.any(np.diff(values) < 0.0):
            raise DomainError("cumulative control must be non-negative and non-decreasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def mass(self) -> float:
        return float(self.values[-1])

    def __call__(self, t):
        return _eval_rcll(self.times, self.values, t)

    def inverse(self, level: float) -> float:
        """Generalized inverse: inf{t : control(t) >= level}."""
        if level > self.values[-1]:
            raise DomainError(f"level {level} exceeds total mass {self.values[-1]}")
        if level <= self.values[0]:
            return float(self.times[0])
        k = int(np.searchsorted(self.values, level, side="left"))
        t0, t1 = self.times[k - 1], self.times[k]
        v0, v1 = self.values[k - 1], self.values[k]
        if t1 == t0 or v1 == v0:
            return float(t1)
        return float(t0 + (level - v0) / (v1 - v0) * (t1 - t0))

    @classmethod
    def ramp(cls, mass: float, horizon: float) -> "CumulativeControl":
        """Mass spread linearly over [0, horizon]."""
        return cls(np.array([0.0, horizon]), np.array([0.0, mass]))

    @classmethod
    def atom(cls, mass: float, at: float) -> "CumulativeControl":
        """All mass as a single batch at one instant."""
        if at == 0.0:
            return cls(np.array([0.0, 0.0]), np.array([0.0, mass]))
        return cls(np.array([0.0, at, at]), np.array([0.0, 0.0, mass]))


@dataclass(frozen=True, eq=False)
class PiecewiseLinearControl:
    """Right-continuous piecewise-linear control on [0, H], any sign or slope.

    Supports an optional terminal jump at H (repeated final knot time).
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times, values = _check_knots(self.times, self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        return _eval_rcll(self.times, self.values, t)

    @classmethod
    def linear(cls, slope: float, horizon: float) -> "PiecewiseLinearControl":
        return cls(np.array([0.0, horizon]), np.array([0.0, slope * horizon]))

    @classmethod
    def constant(cls, value: float, horizon: float) -> "PiecewiseLinearControl":
        return cls(np.array([0.0, horizon]), np.array([value, value]))

    def sample_on_grid(self, nsteps: int, dt: float) -> np.ndarray:
        """Values on the uniform grid 0, dt, ..., nsteps*dt.

        Jumps that fall strictly inside a grid cell are applied at the cell's
        left endpoint, so their effect is never delayed past the cell; a jump
        on a grid point (including a terminal jump at H) takes effect there.
        """
        grid = np.arange(nsteps + 1) * dt
        tol = 1e-9 * max(1.0, float(grid[-1]))
        if self.times[-1] > grid[-1] + tol:
            raise DomainError("control extends beyond the sampling grid")
        # split into continuous part plus explicit jump terms
        jump_idx = np.nonzero(np.diff(self.times) == 0.0)[0]
        deltas = self.values[jump_idx + 1] - self.values[jump_idx]
        shift = np.zeros_like(self.values)
        for i, d in zip(jump_idx, deltas):
            shift[i + 1:] += d
        cont = np.asarray(
            _eval_rcll(self.times, self.values - shift, np.minimum(grid, self.times[-1]))
        ).copy()
        for i, d in zip(jump_idx, deltas):
            # 1e-6 cells of slack so jumps meant to sit on a grid point stay there
            cell = min(int(np.floor(self.times[i] / dt + 1e-6)), nsteps)
            cont[cell:] += d
        return cont
