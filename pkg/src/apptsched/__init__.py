"""Appointment scheduling under no-shows.

Exact single-server queue evaluation of appointment schedules, first- and
second-order optimal schedule generators, closed forms and quadrature for the
limiting costs, reflected-Brownian path machinery, and reproducible
Monte-Carlo estimation of expected costs and of the value of perfect
information about show-ups and service times.
"""

from .controls import CumulativeControl, PiecewiseLinearControl
from .errors import (
    DegenerateNoiseError,
    DomainError,
    MassMismatchError,
    NotOverloadedError,
    QuadratureError,
    SizeMismatchError,
)
from .model import (
    ModelParams,
    Realization,
    Schedule,
    ServiceLaw,
    SimOutcome,
    SystemInstance,
    build_instance,
    load_params,
    params_from_dict,
    params_to_dict,
    sample_realization,
    save_params,
    validate_params,
)
from .qsim import QueuePath, queue_path, simulate
from .schedules import (
    counting_control,
    diffusion_schedule,
    fluid_schedule,
    from_cumulative,
    linear_drift_schedule,
    schedule_from_csv,
    schedule_to_csv,
    uniform_schedule,
)
from .oracle import CIOutcome, ci_cost, ci_outcome, ci_schedule
from .analytics import (
    DiffusionConstants,
    FluidSummary,
    diffusion_constants,
    drift_tradeoff,
    fluid_summary,
    fop_cost,
    linear_bop_cost,
    noise_sigma,
    overage_cost_coefficient,
    rbm_cdf,
    rbm_mean,
    rbm_stationary_mean,
)
from .bop import GridPath, bop_cost_mc, sample_bm, skorohod_map
from .montecarlo import (
    Estimate,
    RngPolicy,
    estimate_ci_cost,
    estimate_cost,
    estimate_sg,
    scaled_diffusion_cost,
)

__version__ = "0.1.0"
