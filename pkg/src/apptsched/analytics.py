"""Closed forms and quadrature for the limit quantities.

First-order (fluid) limit: with overload p*alpha > mu*horizon, the optimal
allocation feeds the server at exactly its effective rate and batches the
remainder at the horizon; the limiting cost is

    v_bar = cw * (p*alpha - mu*H)^2 / (2*mu) + co * (tau_bar - H),

with tau_bar = p*alpha/mu the limiting completion time.

Second-order (diffusion) limit: centered fluctuations follow a reflected
Brownian motion with diffusion coefficient
sigma = sqrt(mu*(1 - p + cs2)), and the drift trade-off

    F(beta) = cw * sigma^2 / (2|beta|) + tilde_co * |beta|,   beta < 0,

with tilde_co = cw*(tau_bar - H) + co/mu, is minimized at
beta_star = -sigma * sqrt(cw / (2*tilde_co)) with value
v_star = sigma * sqrt(2*cw*tilde_co).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr, ndtr

from .controls import CumulativeControl
from .errors import (
    DegenerateNoiseError,
    DomainError,
    MassMismatchError,
    NotOverloadedError,
    QuadratureError,
)
from .model import ModelParams

__all__ = [
    "FluidSummary",
    "DiffusionConstants",
    "fluid_summary",
    "fop_cost",
    "diffusion_constants",
    "noise_sigma",
    "overage_cost_coefficient",
    "rbm_cdf",
    "rbm_mean",
    "rbm_stationary_mean",
    "drift_tradeoff",
    "linear_bop_cost",
]

_SURVIVAL_CUTOFF = 1e-12


def _require_overloaded(params: ModelParams) -> None:
    if not params.overloaded():
        raise NotOverloadedError(
            f"requires p*alpha > mu*horizon, got {params.p * params.alpha} "
            f"<= {params.mu * params.horizon}"
        )


@dataclass(frozen=True, eq=False)
class FluidSummary:
    """First-order limit: completion time, optimal value, optimal control."""

    tau_bar: float
    v_bar: float
    lambda_star: CumulativeControl


@dataclass(frozen=True)
class DiffusionConstants:
    """Second-order constants.

    sigma         -- diffusion coefficient of the centered noise
    tilde_co      -- effective overage cost rate in the diffusion trade-off
    beta_star     -- optimal (negative) drift in the large-horizon limit
    v_star        -- optimal large-horizon cost per unit horizon
    c_star_legacy -- variant drift magnitude that weights the no-show noise
                     without the time change (kept for comparison runs)
    """

    sigma: float
    tilde_co: float
    beta_star: float
    v_star: float
    c_star_legacy: float


def fluid_summary(params: ModelParams) -> FluidSummary:
    """Limiting completion time, optimal cost, and the optimal control."""
    _require_overloaded(params)
    tau_bar = params.p * params.alpha / params.mu
    surplus = params.p * params.alpha - params.mu * params.horizon
    v_bar = params.cw * surplus**2 / (2.0 * params.mu) + params.co * (tau_bar - params.horizon)
    ramp_height = params.mu * params.horizon / params.p
    lambda_star = CumulativeControl(
        np.array([0.0, params.horizon, params.horizon]),
        np.array([0.0, ramp_height, params.alpha]),
    )
    return FluidSummary(tau_bar=tau_bar, v_bar=v_bar, lambda_star=lambda_star)


def fop_cost(params: ModelParams, control: CumulativeControl) -> float:
    """Exact first-order cost of an arbitrary admissible control.

    The queue is the reflected net flow q = p*control - mu*t plus the minimal
    pushing term keeping it non-negative; both are piecewise linear, so the
    waiting integral is a sum of trapezoids split at the points where the net
    flow crosses its running minimum.  Waiting is the time integral of q, and
    the overage is the time past the horizon until q drains.
    """
    _require_overloaded(params)
    tol = 1e-9 * max(1.0, params.alpha)
    if abs(control.mass - params.alpha) > tol:
        raise MassMismatchError(
            f"control mass {control.mass} does not match alpha {params.alpha}"
        )
    if abs(control(params.horizon) - params.alpha) > tol:
        raise MassMismatchError("all mass must be scheduled by the horizon")
    mu = params.mu
    times = control.times
    net = params.p * control.values - mu * times

    area = 0.0
    runmin = 0.0  # min(0, running minimum of the net flow)
    for i in range(times.size - 1):
        t0, t1 = times[i], times[i + 1]
        if t1 == t0:
            continue  # upward jump: no area, running minimum unchanged
        x0, x1 = net[i], net[i + 1]
        if x1 >= runmin:
            area += ((x0 - runmin) + (x1 - runmin)) * 0.5 * (t1 - t0)
        else:
            # drops below the running minimum: trapezoid until the crossing,
            # zero afterwards while the reflection tracks the flow
            cross = t0 + (x0 - runmin) / (x0 - x1) * (t1 - t0)
            area += (x0 - runmin) * 0.5 * (cross - t0)
            runmin = x1

    # after the last knot the flow drains at rate mu from level p*alpha - mu*t
    t_end = times[-1]
    x_end = params.p * control.mass - mu * t_end
    tau = (params.p * control.mass - runmin) / mu
    area += (x_end - runmin) * 0.5 * (tau - t_end)
    overage = max(tau - params.horizon, 0.0)
    return params.cw * area + params.co * overage


def noise_sigma(params: ModelParams) -> float:
    """Diffusion coefficient sqrt(mu*(1-p) + mu*cs2) of the centered noise.

    The first term is the no-show noise after the time change by the
    effective rate mu/p; the second is the service-time noise.
    """
    return math.sqrt(params.mu * (1.0 - params.p + params.cs2))


def overage_cost_coefficient(params: ModelParams) -> float:
    """Effective overage rate tilde_co = cw*(tau_bar - H) + co/mu."""
    _require_overloaded(params)
    tau_bar = params.p * params.alpha / params.mu
    return params.cw * (tau_bar - params.horizon) + params.co / params.mu


def diffusion_constants(params: ModelParams) -> DiffusionConstants:
    """All second-order constants; requires overload, cw > 0, and noise."""
    _require_overloaded(params)
    if params.cw <= 0.0:
        raise DomainError("diffusion constants need a positive waiting cost rate")
    sigma = noise_sigma(params)
    if sigma == 0.0:
        raise DegenerateNoiseError("no second-order noise: p = 1 and cs2 = 0")
    tilde_co = overage_cost_coefficient(params)
    beta_star = -sigma * math.sqrt(params.cw / (2.0 * tilde_co))
    v_star = sigma * math.sqrt(2.0 * params.cw * tilde_co)
    legacy_noise = params.p * (1.0 - params.p) + params.mu * params.cs2
    c_star_legacy = math.sqrt(params.cw * legacy_noise / (2.0 * tilde_co))
    return DiffusionConstants(
        sigma=sigma,
        tilde_co=tilde_co,
        beta_star=beta_star,
        v_star=v_star,
        c_star_legacy=c_star_legacy,
    )


def rbm_cdf(t: float, y, beta: float, sigma: float):
    """Distribution function of reflected Brownian motion started at zero.

    P(Q_t <= y) = Phi((y - beta*t)/(sigma*sqrt(t)))
                  - exp(2*beta*y/sigma^2) * Phi((-y - beta*t)/(sigma*sqrt(t))).

    The exponential factor is combined with the normal CDF in log space so
    the formula stays finite for strongly positive drifts.  Vectorized in y.
    """
    if t <= 0.0:
        raise DomainError(f"time must be positive, got {t}")
    if sigma <= 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0.0):
        raise DomainError("reflected process lives on [0, inf)")
    scale = sigma * math.sqrt(t)
    main = ndtr((y - beta * t) / scale)
    mirror = np.exp(2.0 * beta * y / sigma**2 + log_ndtr((-y - beta * t) / scale))
    out = main - mirror
    return out if out.ndim else float(out)


def _rbm_survival(t, beta, sigma):
    scale = sigma * math.sqrt(t)

    def survival(y):
        y = np.asarray(y, dtype=np.float64)
        upper = ndtr(-(y - beta * t) / scale)
        mirror = np.exp(2.0 * beta * y / sigma**2 + log_ndtr((-y - beta * t) / scale))
        return upper + mirror

    return survival


def _survival_cutoff(t, beta, sigma):
    """A y past which the survival of the reflected process is below 1e-12."""
    start = abs(beta) * t + 10.0 * sigma * math.sqrt(t) + sigma**2
    if beta < 0.0:
        start = max(start, 15.0 * sigma**2 / abs(beta))
    survival = _rbm_survival(t, beta, sigma)
    for _ in range(200):
        if survival(start) < _SURVIVAL_CUTOFF:
            return start
        start *= 2.0
    raise QuadratureError("could not bound the survival tail of the reflected process")


def rbm_mean(t: float, beta: float, sigma: float) -> float:
    """E[Q_t] for reflected Brownian motion started at zero.

    Integrates the survival function 1 - CDF by adaptive quadrature to
    absolute tolerance 1e-8, truncating the tail once the survival bound
    drops below 1e-12.  With sigma = 0 the reflected path is the determinstic
    drift pushed up at zero, so the mean is (beta*t)^+.
    """
    if t <= 0.0:
        raise DomainError(f"time must be positive, got {t}")
    if sigma < 0.0:
        raise DomainError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0.0:
        return max(beta * t, 0.0)
    cutoff = _survival_cutoff(t, beta, sigma)
    survival = _rbm_survival(t, beta, sigma)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(survival, 0.0, cutoff, epsabs=1e-8, limit=400)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"reflected-mean quadrature failed: {exc}") from exc
    return float(value)


def rbm_stationary_mean(beta: float, sigma: float) -> float:
    """Long-run mean sigma^2 / (2|beta|); the stationary law is exponential."""
    if beta >= 0.0:
        raise DomainError("stationary distribution requires negative drift")
    return sigma**2 / (2.0 * abs(beta))


def drift_tradeoff(beta: float, params: ModelParams) -> float:
    """Stationary holding cost plus pushing cost at constant drift beta < 0.

    F(beta) = cw * sigma^2/(2|beta|) + tilde_co * |beta|; the two terms are
    equal at the optimal drift, where F equals v_star.
    """
    _require_overloaded(params)
    if beta >= 0.0:
        raise DomainError("drift trade-off is defined for negative drifts only")
    sigma = noise_sigma(params)
    tilde_co = overage_cost_coefficient(params)
    return params.cw * sigma**2 / (2.0 * abs(beta)) + tilde_co * abs(beta)


def linear_bop_cost(beta: float, horizon: float, params: ModelParams) -> float:
    """Per-unit-horizon cost of the constant-drift control on [0, horizon].

    (cw/H) * int_0^H E[Q_t] dt + (tilde_co/H) * (E[Q_H] - beta*H), where Q is
    the reflected noise with drift beta and E[Q_H] - beta*H is the expected
    terminal pushing because the driving noise is centered.  The cost
    coefficients cw and tilde_co come from ``params`` (evaluated at the
    params' own horizon); ``horizon`` is the optimization window, which may
    be taken large independently.  Outer quadrature tolerance 1e-6.
    """
    _require_overloaded(params)
    if horizon <= 0.0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    sigma = noise_sigma(params)
    tilde_co = overage_cost_coefficient(params)
    if sigma == 0.0:
        # noiseless: Q_t = (beta*t)^+ and the pushing term is (-beta*t)^+
        hold = params.cw * max(beta, 0.0) * horizon / 2.0
        push = tilde_co * max(-beta, 0.0)
        return hold + push
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            total, _ = integrate.quad(
                lambda t: rbm_mean(t, beta, sigma), 0.0, horizon, epsabs=1e-6, limit=400
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"horizon quadrature failed: {exc}") from exc
    terminal = rbm_mean(horizon, beta, sigma) - beta * horizon
    return (params.cw / horizon) * total + (tilde_co / horizon) * terminal
