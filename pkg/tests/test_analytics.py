import math

import numpy as np
import pytest

from apptsched import (
    CumulativeControl,
    DegenerateNoiseError,
    DomainError,
    MassMismatchError,
    ModelParams,
    NotOverloadedError,
    diffusion_constants,
    drift_tradeoff,
    fluid_summary,
    fop_cost,
    linear_bop_cost,
    rbm_cdf,
    rbm_mean,
    rbm_stationary_mean,
)

# closed-form oracle values for the reference parameters, derived by hand:
#   sigma     = sqrt(mu*(1-p+cs2)) = sqrt(1.2)
#   tilde_co  = cw*(p*alpha/mu - H) + co/mu = 0.6 + 1.0
#   beta_star = -sigma*sqrt(cw/(2*tilde_co))
#   v_star    = sigma*sqrt(2*cw*tilde_co)
SIGMA_P0 = math.sqrt(1.2)
TILDE_CO_P0 = 1.6
BETA_STAR_P0 = -SIGMA_P0 * math.sqrt(1.0 / 3.2)
V_STAR_P0 = SIGMA_P0 * math.sqrt(3.2)
# folded-normal mean E|N(0, t)| = sqrt(2t/pi) drives the zero-drift cost:
# (cw/H)*int_0^H sigma*sqrt(2t/pi) dt + tilde_co*sigma*sqrt(2H/pi) at H=1
ZERO_DRIFT_COST_P0 = SIGMA_P0 * math.sqrt(2.0 / math.pi) * (2.0 / 3.0 + TILDE_CO_P0)


def params(**overrides):
    base = dict(alpha=2.0, p=0.8, mu=1.0, horizon=1.0, cs2=1.0,
                service_law="exponential", cw=1.0, co=1.0)
    base.update(overrides)
    return ModelParams(**base)


class TestFluidSummary:
    def test_p0(self, p0):
        fs = fluid_summary(p0)
        assert fs.tau_bar == pytest.approx(1.6, abs=1e-15)
        # triangle area 0.6^2/2 plus overage 0.6
        assert fs.v_bar == pytest.approx(0.78, abs=1e-12)

    def test_second_parameter_set(self):
        fs = fluid_summary(params(alpha=3.0, p=0.5, mu=1.0, cw=2.0, co=1.0))
        assert fs.tau_bar == pytest.approx(1.5, abs=1e-15)
        assert fs.v_bar == pytest.approx(2.0 * 0.25 / 2.0 + 0.5, abs=1e-12)

    def test_critical_load_boundary(self):
        fs = fluid_summary(params(alpha=(1.0 + 1e-9) / 0.8))
        assert 0.0 < fs.v_bar < 1e-8

    def test_rejects_non_overloaded(self):
        with pytest.raises(NotOverloadedError):
            fluid_summary(params(alpha=1.0, p=0.5))

    def test_optimal_control_shape(self, p0):
        lam = fluid_summary(p0).lambda_star
        assert lam.mass == pytest.approx(2.0)
        assert lam(0.5) == pytest.approx(0.625)  # mu*t/p
        assert lam(1.0) == pytest.approx(2.0)  # jump to alpha at the horizon


class TestFopCost:
    def test_optimal_control_attains_v_bar(self, p0):
        fs = fluid_summary(p0)
        assert fop_cost(p0, fs.lambda_star) == pytest.approx(fs.v_bar, abs=1e-12)

    def test_uniform_ramp(self, p0):
        # net flow 0.6t on [0,1], then drains: 0.3 + 0.18 waiting, 0.6 overage
        control = CumulativeControl.ramp(2.0, 1.0)
        assert fop_cost(p0, control) == pytest.approx(1.08, abs=1e-12)

    def test_atom_at_zero(self, p0):
        control = CumulativeControl.atom(2.0, 0.0)
        assert fop_cost(p0, control) == pytest.approx(1.88, abs=1e-12)

    def test_mass_mismatch(self, p0):
        with pytest.raises(MassMismatchError):
            fop_cost(p0, CumulativeControl.ramp(1.5, 1.0))

    def test_mass_after_horizon_rejected(self, p0):
        late = CumulativeControl(np.array([0.0, 2.0]), np.array([0.0, 2.0]))
        with pytest.raises(MassMismatchError):
            fop_cost(p0, late)

    def test_random_perturbations_cannot_beat_optimum(self, p0):
        fs = fluid_summary(p0)
        rng = np.random.default_rng(2)
        for _ in range(200):
            knots = np.sort(rng.uniform(0.0, p0.horizon, rng.integers(1, 6)))
            times = np.concatenate(([0.0], knots, [p0.horizon, p0.horizon]))
            interior = np.sort(rng.uniform(0.0, p0.alpha, knots.size + 1))
            values = np.concatenate(([0.0], interior, [p0.alpha]))
            cost = fop_cost(p0, CumulativeControl(times, values))
            assert cost >= fs.v_bar - 1e-9


class TestDiffusionConstants:
    def test_p0_closed_forms(self, p0):
        dc = diffusion_constants(p0)
        assert dc.sigma == pytest.approx(SIGMA_P0, rel=1e-15)
        assert dc.tilde_co == pytest.approx(TILDE_CO_P0, rel=1e-15)
        assert dc.beta_star == pytest.approx(BETA_STAR_P0, rel=1e-15)
        assert dc.v_star == pytest.approx(V_STAR_P0, rel=1e-15)
        assert dc.c_star_legacy == pytest.approx(math.sqrt(1.16 / 3.2), rel=1e-15)

    def test_algebraic_identity(self, p0):
        dc = diffusion_constants(p0)
        assert dc.v_star == pytest.approx(-2.0 * dc.tilde_co * dc.beta_star, rel=1e-12)

    def test_cost_scaling_homogeneity(self, p0):
        dc = diffusion_constants(p0)
        scaled = diffusion_constants(params(cw=3.0, co=3.0))
        assert scaled.beta_star == pytest.approx(dc.beta_star, rel=1e-12)
        assert scaled.v_star == pytest.approx(3.0 * dc.v_star, rel=1e-12)

    def test_degenerate_noise(self):
        with pytest.raises(DegenerateNoiseError):
            diffusion_constants(params(p=1.0, cs2=0.0, service_law="deterministic"))

    def test_requires_positive_waiting_cost(self, p0):
        with pytest.raises(DomainError):
            diffusion_constants(params(cw=0.0))


class TestRbmCdf:
    def test_zero_at_origin(self):
        for beta, sigma, t in [(-1.0, 1.0, 0.5), (0.0, 2.0, 3.0), (2.0, 0.5, 1.0)]:
            assert rbm_cdf(t, 0.0, beta, sigma) == pytest.approx(0.0, abs=1e-15)

    def test_zero_drift_folds_the_normal(self):
        # P(|N(0,1)| <= 1) = erf(1/sqrt(2))
        assert rbm_cdf(1.0, 1.0, 0.0, 1.0) == pytest.approx(
            math.erf(1.0 / math.sqrt(2.0)), abs=1e-14)

    def test_limits_to_one(self):
        assert rbm_cdf(1.0, 60.0, -1.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_level(self):
        ys = np.linspace(0.0, 8.0, 200)
        vals = rbm_cdf(2.0, ys, -0.7, 1.3)
        assert np.all(np.diff(vals) >= -1e-14)

    def test_monotone_decreasing_in_time_for_negative_drift(self):
        for y in (0.3, 1.0, 2.5):
            vals = [rbm_cdf(t, y, -0.8, 1.1) for t in np.linspace(0.2, 30.0, 60)]
            assert np.all(np.diff(vals) <= 1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            rbm_cdf(0.0, 1.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            rbm_cdf(1.0, -0.5, 0.0, 1.0)
        with pytest.raises(DomainError):
            rbm_cdf(1.0, 1.0, 0.0, 0.0)


class TestRbmMean:
    def test_half_normal(self):
        assert rbm_mean(1.0, 0.0, 1.0) == pytest.approx(
            math.sqrt(2.0 / math.pi), abs=1e-7)

    def test_long_run_reaches_stationary_mean(self):
        assert rbm_mean(200.0, -1.0, math.sqrt(2.0)) == pytest.approx(1.0, abs=1e-4)

    def test_vanishing_noise(self):
        assert rbm_mean(5.0, -1.0, 0.0) == 0.0
        assert rbm_mean(5.0, 0.5, 0.0) == 2.5

    def test_monotone_increasing_in_drift(self):
        for t in (0.5, 3.0, 20.0):
            vals = [rbm_mean(t, beta, 1.0) for beta in np.linspace(-2.0, 0.5, 12)]
            assert np.all(np.diff(vals) > 0.0)

    def test_positive_drift_grows_linearly(self):
        assert rbm_mean(50.0, 1.0, 1.0) == pytest.approx(50.0, rel=0.05)


class TestStationaryMean:
    def test_values(self):
        assert rbm_stationary_mean(-1.0, math.sqrt(2.0)) == pytest.approx(1.0, rel=1e-15)
        assert rbm_stationary_mean(BETA_STAR_P0, SIGMA_P0) == pytest.approx(
            1.2 / (2.0 * abs(BETA_STAR_P0)), rel=1e-15)

    def test_quadratic_in_sigma(self):
        assert rbm_stationary_mean(-0.5, 2.0) == pytest.approx(
            4.0 * rbm_stationary_mean(-0.5, 1.0), rel=1e-15)

    def test_rejects_nonnegative_drift(self):
        with pytest.raises(DomainError):
            rbm_stationary_mean(0.0, 1.0)


class TestDriftTradeoff:
    def test_balanced_at_the_optimum(self, p0):
        value = drift_tradeoff(BETA_STAR_P0, p0)
        assert value == pytest.approx(V_STAR_P0, rel=1e-12)
        hold = p0.cw * SIGMA_P0**2 / (2.0 * abs(BETA_STAR_P0))
        push = TILDE_CO_P0 * abs(BETA_STAR_P0)
        assert abs(hold - push) < 1e-12

    def test_unit_drift(self, p0):
        assert drift_tradeoff(-1.0, p0) == pytest.approx(0.6 + 1.6, abs=1e-12)

    def test_divergence_near_zero(self, p0):
        assert drift_tradeoff(-1e-9, p0) > 1e8

    def test_grid_argmin_matches_closed_form(self, p0):
        step = 0.005 * SIGMA_P0
        grid = np.arange(-3.0 * SIGMA_P0, -0.01 * SIGMA_P0 + step / 2, step)
        values = [drift_tradeoff(b, p0) for b in grid]
        best = grid[int(np.argmin(values))]
        assert abs(best - BETA_STAR_P0) <= step + 1e-12
        assert min(values) <= V_STAR_P0 + 1e-3 * V_STAR_P0

    def test_rejects_nonnegative_drift(self, p0):
        with pytest.raises(DomainError):
            drift_tradeoff(0.1, p0)


class TestLinearBopCost:
    def test_zero_drift_closed_form(self, p0):
        assert linear_bop_cost(0.0, 1.0, p0) == pytest.approx(
            ZERO_DRIFT_COST_P0, abs=5e-6)

    def test_large_horizon_approaches_v_star_from_above(self, p0):
        values = [linear_bop_cost(BETA_STAR_P0, h, p0) for h in (10.0, 50.0, 200.0)]
        assert values[0] > values[1] > values[2] > V_STAR_P0 - 1e-9
        assert values[2] == pytest.approx(V_STAR_P0, rel=0.05)

    def test_noiseless_negative_drift(self):
        q = params(p=1.0, cs2=0.0, service_law="deterministic")
        # tilde_co = cw*(2-1) + co = 2; pure pushing at rate |beta|
        assert linear_bop_cost(-0.5, 1.0, q) == pytest.approx(1.0, rel=1e-15)

    def test_rejects_non_overloaded(self):
        with pytest.raises(NotOverloadedError):
            linear_bop_cost(0.0, 1.0, params(alpha=1.0))
