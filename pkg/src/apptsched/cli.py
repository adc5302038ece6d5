"""Batch experiment driver.

Each subcommand reads one config file, runs a sweep, and writes a CSV with a
fixed header.  All floating-point output uses 17 significant digits so reruns
can be compared byte for byte; a timestamp comment line at the top is
suppressed by --deterministic.

Subcommands:
  fluid-conv  cost of a schedule family against the first-order optimum
  diff-conv   diffusion-scaled cost against the constant-drift quadrature
  sg          paired gap between a schedule and the full-information optimum
  bop         Monte-Carlo versus quadrature for constant-drift controls
  rbm         reflected-diffusion means at given times
  ci          full-information optimal cost
  simulate    one-off cost evaluation of a schedule family
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import analytics, bop, montecarlo, schedules
from .controls import PiecewiseLinearControl
from .errors import DomainError, QuadratureError
from .model import ModelParams, build_instance, params_from_dict

__all__ = ["main", "entry", "ExperimentConfig", "load_config"]

_SCHEDULE_KINDS = ("fluid", "diffusion", "diffusion_legacy", "uniform", "file")


@dataclass
class ExperimentConfig:
    """Parsed experiment configuration."""

    params: ModelParams
    n_list: list = field(default_factory=lambda: [64, 256, 1024])
    reps: int = 1000
    seed: int = 0
    schedule_kind: str | None = None
    dt: float | None = None
    out: str | None = None
    # subcommand-specific optional knobs
    beta: float | None = None
    sigma: float | None = None
    t_list: list | None = None
    beta_list: list | None = None
    bop_horizon: float | None = None
    schedule_file: str | None = None

    def __post_init__(self):
        if not self.n_list:
            raise DomainError("n_list must be non-empty")
        if any(int(n) != n or n < 1 for n in self.n_list):
            raise DomainError("n_list entries must be positive integers")
        self.n_list = [int(n) for n in self.n_list]
        if sorted(self.n_list) != self.n_list:
            raise DomainError("n_list must be sorted ascending")
        if self.reps < 2:
            raise DomainError("reps must be at least 2")
        if self.schedule_kind is not None and self.schedule_kind not in _SCHEDULE_KINDS:
            raise DomainError(
                f"schedule_kind must be one of {', '.join(_SCHEDULE_KINDS)}"
            )
        if self.schedule_kind == "file" and not self.schedule_file:
            raise DomainError("schedule_kind 'file' needs a schedule_file path")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise DomainError(f"config file not found: {path}")
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(path.read_text())
        else:
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            raw = tomllib.loads(path.read_text())
    except ValueError as exc:  # malformed JSON or TOML
        raise DomainError(f"could not parse config {path}: {exc}") from exc
    if not isinstance(raw, dict) or "params" not in raw:
        raise DomainError("config must contain a 'params' table")
    params = params_from_dict(raw.pop("params"))
    known = {f for f in ExperimentConfig.__dataclass_fields__ if f != "params"}
    unknown = set(raw) - known
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return ExperimentConfig(params=params, **raw)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, header, rows, deterministic: bool) -> None:
    lines = []
    if not deterministic:
        stamp = datetime.now(timezone.utc).isoformat()
        lines.append(f"# generated {stamp}")
    lines.append(header)
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _make_schedule(config: ExperimentConfig, instance, default_kind="fluid"):
    kind = config.schedule_kind or default_kind
    if kind == "fluid":
        return schedules.fluid_schedule(instance)
    if kind == "diffusion":
        return schedules.diffusion_schedule(instance)
    if kind == "diffusion_legacy":
        return schedules.diffusion_schedule(instance, legacy=True)
    if kind == "uniform":
        return schedules.uniform_schedule(instance)
    return schedules.schedule_from_csv(config.schedule_file)


def _default_dt(config: ExperimentConfig, horizon: float) -> float:
    return config.dt if config.dt is not None else horizon / bop.DEFAULT_GRID_CELLS


def _run_fluid_conv(config, threads):
    """Schedule cost against the first-order optimal value."""
    v_bar = analytics.fluid_summary(config.params).v_bar
    rng = montecarlo.RngPolicy(config.seed)
    rows = []
    for n in config.n_list:
        instance = build_instance(config.params, n)
        estimate = montecarlo.estimate_cost(
            instance, _make_schedule(config, instance), config.reps, rng, threads
        )
        rows.append((n, estimate.mean, estimate.stderr, v_bar, estimate.mean - v_bar))
    return "n,cost_mean,cost_stderr,v_bar,gap", rows


def _run_diff_conv(config, threads):
    """Diffusion-scaled cost against the constant-drift quadrature."""
    params = config.params
    horizon = params.horizon
    constants = analytics.diffusion_constants(params)
    quadrature = analytics.linear_bop_cost(constants.beta_star, horizon, params)
    rng = montecarlo.RngPolicy(config.seed)
    rows = []
    for n in config.n_list:
        instance = build_instance(params, n)
        estimate = montecarlo.estimate_cost(
            instance,
            _make_schedule(config, instance, default_kind="diffusion"),
            config.reps,
            rng,
            threads,
        )
        scaled = montecarlo.scaled_diffusion_cost(estimate, params, n)
        rows.append(
            (
                n,
                horizon,
                scaled.mean / horizon,
                scaled.stderr / horizon,
                quadrature,
                constants.v_star,
            )
        )
    return "n,H,hatJ_mean,hatJ_stderr,bop_linear_cost,v_star", rows


def _run_sg(config, threads):
    """Paired gap between a schedule and the full-information optimum."""
    rng = montecarlo.RngPolicy(config.seed)
    rows = []
    for n in config.n_list:
        instance = build_instance(config.params, n)
        estimate = montecarlo.estimate_sg(
            instance, _make_schedule(config, instance), config.reps, rng, threads
        )
        rows.append((n, estimate.mean, estimate.stderr))
    return "n,sg_mean,sg_stderr", rows


def _run_bop(config, threads):
    """Monte-Carlo versus quadrature for constant-drift controls."""
    params = config.params
    horizon = config.bop_horizon if config.bop_horizon is not None else params.horizon
    dt = _default_dt(config, horizon)
    betas = config.beta_list
    if betas is None:
        betas = [analytics.diffusion_constants(params).beta_star]
    rows = []
    for beta in betas:
        control = PiecewiseLinearControl.linear(beta, horizon)
        estimate = bop.bop_cost_mc(
            control, params, horizon, dt, config.reps, config.seed, threads
        )
        quadrature = analytics.linear_bop_cost(beta, horizon, params)
        rows.append((beta, horizon, estimate.mean, estimate.stderr, quadrature))
    return "beta,H,mc_mean,mc_stderr,quadrature", rows


def _run_rbm(config, threads):
    """Reflected-diffusion means at the requested times."""
    params = config.params
    constants = analytics.diffusion_constants(params)
    beta = config.beta if config.beta is not None else constants.beta_star
    sigma = config.sigma if config.sigma is not None else constants.sigma
    t_list = config.t_list if config.t_list is not None else [1.0, 10.0, 100.0]
    stationary = analytics.rbm_stationary_mean(beta, sigma) if beta < 0 else float("inf")
    rows = [
        (t, beta, sigma, analytics.rbm_mean(t, beta, sigma), stationary) for t in t_list
    ]
    return "t,beta,sigma,mean,stationary_mean", rows


def _run_ci(config, threads):
    """Full-information optimal cost."""
    v_bar = analytics.fluid_summary(config.params).v_bar
    rng = montecarlo.RngPolicy(config.seed)
    rows = []
    for n in config.n_list:
        instance = build_instance(config.params, n)
        estimate = montecarlo.estimate_ci_cost(instance, config.reps, rng, threads)
        rows.append((n, estimate.mean, estimate.stderr, v_bar))
    return "n,ci_cost_mean,ci_cost_stderr,v_bar", rows


def _run_simulate(config, threads):
    """One-off cost evaluation of a schedule family."""
    rng = montecarlo.RngPolicy(config.seed)
    kind = config.schedule_kind or "fluid"
    rows = []
    for n in config.n_list:
        instance = build_instance(config.params, n)
        estimate = montecarlo.estimate_cost(
            instance, _make_schedule(config, instance), config.reps, rng, threads
        )
        rows.append((n, kind, estimate.mean, estimate.stderr))
    return "n,schedule_kind,cost_mean,cost_stderr", rows


_RUNNERS = {
    "fluid-conv": _run_fluid_conv,
    "diff-conv": _run_diff_conv,
    "sg": _run_sg,
    "bop": _run_bop,
    "rbm": _run_rbm,
    "ci": _run_ci,
    "simulate": _run_simulate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apptsched", description="appointment-scheduling experiment driver"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, runner in _RUNNERS.items():
        p = sub.add_parser(name, help=(runner.__doc__ or "").strip() or None)
        p.add_argument("--config", required=True, help="TOML or JSON config file")
        p.add_argument("--out", default=None, help="output CSV path (overrides config)")
        p.add_argument(
            "--threads",
            type=int,
            default=1,
            help="worker threads; affects speed, never results",
        )
        p.add_argument(
            "--deterministic",
            action="store_true",
            help="suppress the timestamp header line",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        out = args.out or config.out
        if not out:
            raise DomainError("no output path: pass --out or set 'out' in the config")
        header, rows = _RUNNERS[args.subcommand](config, max(1, args.threads))
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _write_csv(out, header, rows, args.deterministic)
    return 0


def entry() -> None:
    raise SystemExit(main())
