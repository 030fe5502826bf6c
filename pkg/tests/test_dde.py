import math

import numpy as np
import pytest

from deltarec import (
    InitialFunction,
    ProblemParams,
    StepSolverConfig,
    ValidationError,
    compare_with_member,
    decay_envelope_check,
    fundamental_function,
    initial_from_density,
    positivity_scan,
    residual_sup,
    solve_steps,
)
from deltarec.constructors import (
    exponential_member,
    solve_exponential_rates,
    tangent_continuous_params,
)

# Published reference run: c=0.2, delta=1, phi(x) = 1 - x/2, values of y at
# the integers 0..20 (middle column of the reference table).
TABLE1_Y = [
    1.0000, 0.5000, 0.3498, 0.2665, 0.2053, 0.1583, 0.1222, 0.0942, 0.0727,
    0.0561, 0.0433, 0.0334, 0.0257, 0.0199, 0.0153, 0.0118, 0.0091, 0.0070,
    0.0054, 0.0042, 0.0032,
]


def table1():
    params = ProblemParams(0.2, 1.0)
    phi = InitialFunction.polynomial([1.0, -0.5], 1.0)
    return params, solve_steps(params, phi, StepSolverConfig(horizon_delays=30))


def at(sol, x):
    return float(sol.values[int(round(x / sol.grid_step))])


class TestSolveSteps:
    def test_exponential_initial_segment_reproduces_exponential(self):
        params = ProblemParams(0.2, 1.0)
        for theta in solve_exponential_rates(params).roots:
            t0 = np.linspace(0.0, 1.0, 1025)
            phi = InitialFunction.from_table(t0, np.exp(-theta * t0))
            sol = solve_steps(params, phi, StepSolverConfig(horizon_delays=20))
            dev = np.max(np.abs(sol.values - np.exp(-theta * sol.knots)))
            assert dev <= 1e-8

    def test_table1_values(self):
        params, sol = table1()
        for x, y in enumerate(TABLE1_Y):
            assert at(sol, x) == pytest.approx(y, abs=5e-4)

    def test_first_step_closed_form(self):
        # y(2) = phi(1) - 2*a*I1 with a = 0.1, I1 = 3/4, exactly 0.35
        params, sol = table1()
        assert at(sol, 2.0) == pytest.approx(0.35, abs=1e-12)
        # hand-propagated third and fourth steps
        assert at(sol, 3.0) == pytest.approx(4.0 / 15.0, abs=1e-10)
        assert at(sol, 4.0) == pytest.approx(0.2055, abs=1e-9)

    def test_step_identity_independent_trapezoid(self):
        # y(t) = y(k d) - c * int_{(k-1)d}^{t-d} y, re-integrated from scratch
        params, sol = table1()
        h, vals = sol.grid_step, sol.values
        P = int(round(params.delta / h))
        tol = 10.0 * sol.error_estimate + 1e-12
        for k in (1, 5, 17):
            seg = vals[(k - 1) * P : k * P + 1]
            prefix = np.concatenate(([0.0], np.cumsum((seg[:-1] + seg[1:]) * h / 2.0)))
            resid = vals[k * P : (k + 1) * P + 1] - (vals[k * P] - params.c * prefix)
            assert np.max(np.abs(resid)) <= tol

    def test_boundary_continuity(self):
        params, sol = table1()
        P = int(round(params.delta / sol.grid_step))
        assert sol.step_boundaries[1] == P
        assert np.all(np.diff(sol.values) <= 1e-15)  # survival never increases

    def test_grid_convergence_order(self):
        params = ProblemParams(0.2, 1.0)
        phi = InitialFunction.polynomial([1.0, -0.5], 1.0)
        ref = solve_steps(params, phi, StepSolverConfig(points_per_delay=2048, horizon_delays=8))
        devs = []
        for ppd in (16, 32, 64):
            sol = solve_steps(params, phi, StepSolverConfig(points_per_delay=ppd, horizon_delays=8))
            devs.append(abs(at(sol, 6.0) - at(ref, 6.0)))
        assert devs[0] / devs[1] >= 3.0
        assert devs[1] / devs[2] >= 3.0

    def test_inadmissible_phi_rejected(self):
        params = ProblemParams(0.2, 1.0)
        with pytest.raises(ValidationError):
            solve_steps(params, InitialFunction.polynomial([1.0, 0.2], 1.0))

    def test_bijection_roundtrip_gamma_mixture(self):
        from deltarec.constructors import gamma_exp_mixture

        member = gamma_exp_mixture(1.0, 0.5, horizon_delays=12)
        t0 = np.linspace(0.0, 1.0, 1025)
        phi = InitialFunction.from_table(t0, np.asarray(member.closed_form.value(t0)))
        sol = solve_steps(member.params, phi, StepSolverConfig(horizon_delays=12))
        dev = np.max(np.abs(sol.values - np.asarray(member.closed_form.value(sol.knots))))
        assert dev <= 1e-9


class TestFundamental:
    def test_flat_then_linear(self):
        params = ProblemParams(0.3, 1.0)
        y0 = fundamental_function(params)
        assert at(y0, 2.0) == pytest.approx(1.0, abs=1e-12)
        assert at(y0, 3.0) == pytest.approx(1.0 - 0.3, abs=1e-12)
        assert at(y0, 2.5) == pytest.approx(1.0 - 0.3 * 0.5, abs=1e-12)

    def test_positive_below_threshold(self):
        verdict = positivity_scan(fundamental_function(ProblemParams(0.3, 1.0)))
        assert verdict.positive_on_horizon

    def test_positive_at_tangent(self):
        params = tangent_continuous_params(1.0)
        verdict = positivity_scan(fundamental_function(params))
        assert verdict.positive_on_horizon

    def test_oscillates_above_threshold(self):
        verdict = positivity_scan(fundamental_function(ProblemParams(0.6, 1.0)))
        assert not verdict.positive_on_horizon
        assert verdict.first_nonpositive_t is not None


class TestInitialFromDensity:
    def test_uniform_density_quadratic_phi(self):
        params = ProblemParams(0.2, 1.0)
        phi = initial_from_density(lambda t: np.ones_like(t), params)
        assert phi(1.0) == pytest.approx(0.9, abs=1e-10)
        assert phi(0.5) == pytest.approx(1.0 - 0.2 * 0.125, abs=1e-10)

    def test_linear_density_cubic_phi(self):
        params = ProblemParams(0.25, 1.0)
        phi = initial_from_density(lambda t: 2.0 * t, params)
        t = np.array([0.3, 0.7, 1.0])
        assert np.allclose(phi(t), 1.0 - 0.25 * t**3 / 3.0, atol=1e-6)
        sol = solve_steps(params, phi)
        assert positivity_scan(sol).positive_on_horizon

    def test_spike_density_near_constant_phi(self):
        # nearly all mass just below delta: phi stays close to 1
        params = ProblemParams(0.2, 1.0)
        width = 0.02

        def spike(t):
            return np.where(t >= 1.0 - width, 2.0 / width * (1.0 - (1.0 - t) / width), 0.0)

        phi = initial_from_density(spike, params, n_grid=4000)
        assert phi(0.5) == pytest.approx(1.0, abs=1e-9)
        assert phi(1.0) > 0.99
        sol = solve_steps(params, phi)
        assert positivity_scan(sol).positive_on_horizon

    def test_rejections(self):
        params = ProblemParams(0.2, 1.0)
        with pytest.raises(ValidationError):
            initial_from_density(lambda t: -np.ones_like(t), params)
        with pytest.raises(ValidationError):
            initial_from_density(lambda t: 3.0 * np.ones_like(t), params)


class TestCompare:
    def test_equality_case(self):
        params = tangent_continuous_params(1.0)
        member = exponential_member(params, 1.0)
        t0 = np.linspace(0.0, 1.0, 513)
        phi = InitialFunction.from_table(t0, np.exp(-t0))
        cert = compare_with_member(phi, member)
        assert cert.positive

    def test_dominated_initial_function(self):
        params = tangent_continuous_params(1.0)
        member = exponential_member(params, 1.0)
        eps = 0.05
        t0 = np.linspace(0.0, 1.0, 2049)
        phi_vals = np.exp(-t0) * (1.0 - eps * t0 * (1.0 - t0))
        phi = InitialFunction.from_table(t0, phi_vals)
        cert = compare_with_member(phi, member)
        assert cert.positive
        sol = solve_steps(params, phi, StepSolverConfig(horizon_delays=15))
        g = np.exp(-sol.knots)
        assert np.min(sol.values - g) >= -1e-9  # extension dominates the member

    def test_premise_failure_witness(self):
        params = tangent_continuous_params(1.0)
        member = exponential_member(params, 1.0)
        phi = InitialFunction.polynomial([1.0, -0.5], 1.0)
        with pytest.raises(ValidationError):
            compare_with_member(phi, member)


class TestPositivityScan:
    def test_supercritical_crossing_located(self):
        params = ProblemParams(0.5, 1.0)
        phi = InitialFunction.polynomial([1.0, -0.5], 1.0)
        sol = solve_steps(params, phi)
        verdict = positivity_scan(sol)
        assert not verdict.positive_on_horizon
        assert 1.0 < verdict.first_nonpositive_t < 30.0

    def test_table1_positive(self):
        _, sol = table1()
        assert positivity_scan(sol).positive_on_horizon


class TestDecayEnvelope:
    def test_fast_exponential_inside_envelope(self):
        params = ProblemParams(0.2, 1.0)
        theta2 = solve_exponential_rates(params).roots[1]
        t0 = np.linspace(0.0, 1.0, 1025)
        phi = InitialFunction.from_table(t0, np.exp(-theta2 * t0))
        sol = solve_steps(params, phi, StepSolverConfig(horizon_delays=15))
        assert decay_envelope_check(sol) <= 1e-9

    def test_table1_inside_envelope(self):
        _, sol = table1()
        assert decay_envelope_check(sol) <= 5e-4

    def test_fundamental_flat_segment_violates(self):
        params = ProblemParams(0.3, 1.0)
        y0 = fundamental_function(params)
        violation = decay_envelope_check(y0)
        # y = 1 on [delta, 2*delta] while the envelope decays from 1
        expected = 1.0 - math.exp(-params.c * params.delta * (1.0 - 1.0 / 1024))
        assert violation == pytest.approx(expected, abs=1e-6)

    def test_envelope_bounds_tail_integral_error(self):
        # the residual certificate at default tolerance passes for Table 1
        params, sol = table1()
        cert = residual_sup(sol, params, np.linspace(1.0, 20.0, 39))
        assert cert.member
