"""Model primitives.

Holds the problem constants (population mass, show-up probability, service
rate, horizon, cost rates), the n-th scaled system, appointment schedules,
and sampled realizations of the stochastic primitives.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

__all__ = [
    "ServiceLaw",
    "ModelParams",
    "SystemInstance",
    "Schedule",
    "Realization",
    "SimOutcome",
    "validate_params",
    "build_instance",
    "sample_realization",
    "params_to_dict",
    "params_from_dict",
    "load_params",
    "save_params",
]


class ServiceLaw(enum.Enum):
    """Service-time distribution family, parameterized by mean 1/mu and squared CV cs2."""

    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"
    GAMMA = "gamma"
    LOGNORMAL = "lognormal"

    @classmethod
    def parse(cls, name):
        if isinstance(name, ServiceLaw):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise DomainError(f"unknown service law {name!r}") from None


@dataclass(frozen=True)
class ModelParams:
    """Primitive constants of the scheduling problem.

    alpha   -- fluid population mass (> 0)
    p       -- show-up probability, in (0, 1]
    mu      -- service rate, jobs per unit time (> 0)
    horizon -- length H of the appointment window (> 0)
    cs2     -- squared coefficient of variation of the service time (>= 0)
    service_law -- distribution family for raw service times
    cw      -- waiting cost rate (>= 0)
    co      -- overage cost rate (>= 0)
    """

    alpha: float
    p: float
    mu: float
    horizon: float
    cs2: float
    service_law: ServiceLaw
    cw: float
    co: float

    def __post_init__(self):
        object.__setattr__(self, "service_law", ServiceLaw.parse(self.service_law))
        for name in ("alpha", "p", "mu", "horizon", "cs2", "cw", "co"):
            object.__setattr__(self, name, float(getattr(self, name)))
        validate_params(self)

    def overloaded(self) -> bool:
        """True iff expected demand exceeds horizon capacity: p*alpha > mu*horizon."""
        return self.p * self.alpha > self.mu * self.horizon


def validate_params(params: ModelParams) -> ModelParams:
    """Check all parameter invariants; return the params unchanged if they hold.

    Non-overloaded parameter sets are accepted here (they remain simulatable);
    only the fluid/diffusion analytics reject them.
    """
    if not (0.0 < params.p <= 1.0):
        raise DomainError(f"p must lie in (0, 1], got {params.p}")
    if params.alpha <= 0.0:
        raise DomainError(f"alpha must be positive, got {params.alpha}")
    if params.mu <= 0.0:
        raise DomainError(f"mu must be positive, got {params.mu}")
    if params.horizon <= 0.0:
        raise DomainError(f"horizon must be positive, got {params.horizon}")
    if params.cs2 < 0.0:
        raise DomainError(f"cs2 must be non-negative, got {params.cs2}")
    if params.cw < 0.0 or params.co < 0.0:
        raise DomainError("cost rates cw, co must be non-negative")
    law = params.service_law
    if law is ServiceLaw.EXPONENTIAL and params.cs2 != 1.0:
        raise DomainError("exponential service law requires cs2 = 1")
    if law is ServiceLaw.DETERMINISTIC and params.cs2 != 0.0:
        raise DomainError("deterministic service law requires cs2 = 0")
    if law in (ServiceLaw.GAMMA, ServiceLaw.LOGNORMAL) and params.cs2 <= 0.0:
        raise DomainError(f"{law.value} service law requires cs2 > 0")
    return params


@dataclass(frozen=True)
class SystemInstance:
    """The n-th scaled system: population ceil(alpha*n), services scaled by 1/n.

    Cost coefficients scale as cw_n = cw/n and co_n = co, so waiting and
    overage contributions stay comparable as n grows.
    """

    params: ModelParams
    n: int
    population: int
    service_scale: float
    cw_n: float
    co_n: float


def build_instance(params: ModelParams, n: int) -> SystemInstance:
    """Construct the n-th system for validated params."""
    if int(n) != n or n < 1:
        raise DomainError(f"scale index n must be a positive integer, got {n}")
    n = int(n)
    return SystemInstance(
        params=params,
        n=n,
        population=math.ceil(params.alpha * n),
        service_scale=1.0 / n,
        cw_n=params.cw / n,
        co_n=params.co,
    )


@dataclass(frozen=True, eq=False)
class Schedule:
    """A non-decreasing sequence of appointment times.

    Entries must lie in [0, horizon] of the instance the schedule is bound to;
    generators in :mod:`apptsched.schedules` guarantee this.
    """

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1:
            raise DomainError("schedule times must be a one-dimensional sequence")
        if t.size and not np.all(np.isfinite(t)):
            raise DomainError("schedule times must be finite")
        if t.size and t[0] < 0.0:
            raise DomainError("schedule times must be non-negative")
        if np.any(np.diff(t) < 0.0):
            raise DomainError("schedule times must be non-decreasing")
        t.flags.writeable = False
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True, eq=False)
class Realization:
    """One draw of the stochastic primitives.

    shows    -- Bernoulli show flags, one per appointment slot
    services -- raw (unscaled) service times; the k-th entry serves the k-th
                job that actually enters service.  Stored raw so the same
                realization can be reused at a fixed n across schedules
                (common random numbers); the 1/n scaling happens in qsim.
    """

    shows: np.ndarray
    services: np.ndarray

    def __post_init__(self):
        shows = np.asarray(self.shows, dtype=bool)
        services = np.asarray(self.services, dtype=np.float64)
        if shows.ndim != 1 or services.ndim != 1:
            raise DomainError("shows and services must be one-dimensional")
        if services.size < int(shows.sum()):
            raise DomainError("need at least one service time per show-up")
        if services.size and not np.all(services > 0.0):
            raise DomainError("service times must be strictly positive")
        shows.flags.writeable = False
        services.flags.writeable = False
        object.__setattr__(self, "shows", shows)
        object.__setattr__(self, "services", services)


@dataclass(frozen=True, eq=False)
class SimOutcome:
    """Exact per-realization performance of one schedule.

    makespan_W -- total queueing wait summed over arriving jobs (job*time)
    overage_O  -- time past the horizon needed to finish the last show-up
    tau        -- completion time of the last show-up (0 if nobody shows)
    idle       -- server idle time within [0, tau]
    """

    makespan_W: float
    overage_O: float
    tau: float
    idle: float
    shows_count: int
    per_job_waits: np.ndarray


def sample_realization(instance: SystemInstance, rng: np.random.Generator) -> Realization:
    """Draw one realization for the instance from the given generator.

    Produces population-many IID Bernoulli(p) show flags and population-many
    IID raw service times with mean 1/mu and squared CV cs2.
    """
    params = instance.params
    size = instance.population
    shows = rng.random(size) < params.p
    services = _sample_services(params, size, rng)
    return Realization(shows=shows, services=services)


def _sample_services(params: ModelParams, size: int, rng: np.random.Generator) -> np.ndarray:
    mean = 1.0 / params.mu
    law = params.service_law
    if law is ServiceLaw.EXPONENTIAL:
        return rng.exponential(mean, size)
    if law is ServiceLaw.DETERMINISTIC:
        return np.full(size, mean)
    if law is ServiceLaw.GAMMA:
        # shape 1/cs2, scale cs2/mu gives mean 1/mu and variance cs2/mu^2
        return rng.gamma(1.0 / params.cs2, params.cs2 * mean, size)
    if law is ServiceLaw.LOGNORMAL:
        # underlying normal: variance log(1+cs2), mean log(1/mu) - variance/2
        var = math.log1p(params.cs2)
        return rng.lognormal(math.log(mean) - 0.5 * var, math.sqrt(var), size)
    raise DomainError(f"unsupported service law {law!r}")


_PARAM_KEYS = ("alpha", "p", "mu", "horizon", "cs2", "service_law", "cw", "co")


def params_to_dict(params: ModelParams) -> dict:
    """Flat key-value form used by config files."""
    out = {k: getattr(params, k) for k in _PARAM_KEYS}
    out["service_law"] = params.service_law.value
    return out


def params_from_dict(raw: dict) -> ModelParams:
    missing = [k for k in _PARAM_KEYS if k not in raw]
    if missing:
        raise DomainError(f"missing parameter keys: {', '.join(missing)}")
    extra = set(raw) - set(_PARAM_KEYS)
    if extra:
        raise DomainError(f"unknown parameter keys: {', '.join(sorted(extra))}")
    return ModelParams(**raw)


def load_params(path) -> ModelParams:
    """Read params from a flat TOML or JSON file (chosen by extension)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        raw = json.loads(path.read_text())
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        raw = tomllib.loads(path.read_text())
    return params_from_dict(raw)


def save_params(params: ModelParams, path) -> None:
    """Write params as flat JSON or TOML depending on the file extension."""
    path = Path(path)
    data = params_to_dict(params)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return
    lines = []
    for key, value in data.items():
        if isinstance(value, str):
            lines.append(f'{key} = "{value}"')
        else:
            lines.append(f"{key} = {value!r}")
    path.write_text("\n".join(lines) + "\n")
