import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deltarec import (
    ClosedForm,
    ContinuousSolution,
    DiscreteSurvival,
    HorizonError,
    InitialFunction,
    ProblemParams,
    ValidationError,
    eval_survival,
    from_json,
    geometric_member,
    mix,
    residual_H,
    residual_sup,
    solve_steps,
    tail_condition,
    to_csv,
    to_json,
)
from deltarec.constructors import exponential_member, solve_exponential_rates


def exp_grid_member(theta=1.0, c=1.0, delta=1.0, horizon=30.0, per_unit=1024):
    """Plain grid tabulation of Exp(theta) under arbitrary (c, delta); no
    closed form attached, so evaluation exercises the grid paths."""
    n = int(horizon * per_unit)
    h = horizon / n
    t = np.arange(n + 1) * h
    return ContinuousSolution(
        params=ProblemParams(c, delta), grid_step=h, values=np.exp(-theta * t)
    )


def table1_solution():
    params = ProblemParams(0.2, 1.0)
    phi = InitialFunction.polynomial([1.0, -0.5], 1.0)
    return params, solve_steps(params, phi)


class TestEvalSurvival:
    def test_geometric_step_function(self):
        g = geometric_member(0.2)
        assert eval_survival(g, 1.5) == pytest.approx(0.64, abs=1e-15)

    def test_left_of_support_is_one(self):
        g = geometric_member(0.2)
        assert eval_survival(g, -1.0) == 1.0
        m = exp_grid_member()
        assert eval_survival(m, -0.5) == 1.0

    def test_exponential_grid_interpolation(self):
        m = exp_grid_member()
        assert eval_survival(m, 0.5) == pytest.approx(math.exp(-0.5), abs=1e-6)

    def test_complete_support_is_zero_beyond(self):
        d = DiscreteSurvival([0.0, 1.0], [0.4, 0.0])
        assert eval_survival(d, 5.0) == 0.0

    def test_truncated_out_of_range(self):
        g = geometric_member(0.2, n_max=10)
        with pytest.raises(HorizonError):
            eval_survival(g, 11.5)


class TestResidual:
    def test_exponential_member_residual_vanishes(self):
        params = ProblemParams(0.2, 1.0)
        for theta in solve_exponential_rates(params).roots:
            m = exponential_member(params, theta)
            for x in (0.0, 1.0, 7.5):
                assert abs(residual_H(m, params, x)) < 1e-12

    def test_geometric_member_residual_vanishes(self):
        # p(1-p)^delta = c with p=0.2, delta=1
        params = ProblemParams(0.2 * 0.8, 1.0)
        g = geometric_member(0.2)
        assert abs(residual_H(g, params, 0.0)) < 1e-12

    def test_mismatched_exponential_residual(self):
        # H(0) = e^{-1} - 1 for Exp(1) under (c, delta) = (1, 1)
        m = exp_grid_member(theta=1.0, c=1.0, delta=1.0)
        h0 = residual_H(m, ProblemParams(1.0, 1.0), 0.0)
        assert h0 == pytest.approx(math.exp(-1.0) - 1.0, abs=2e-4)

    def test_residual_sup_table1(self):
        params, sol = table1_solution()
        cert = residual_sup(sol, params, np.linspace(1.0, 20.0, 96))
        assert cert.residual_sup <= 5e-4
        assert cert.member

    def test_residual_sup_mismatch_worst_at_zero(self):
        m = exp_grid_member(theta=1.0, c=0.5, delta=1.0)
        params = ProblemParams(0.5, 1.0)
        cert = residual_sup(m, params, np.linspace(0.0, 10.0, 21))
        assert cert.residual_sup == pytest.approx(abs(math.exp(-1.0) - 0.5), abs=2e-4)
        assert cert.worst_x == 0.0
        assert not cert.member

    def test_tail_integral_monotone_in_horizon(self):
        params = ProblemParams(0.2, 1.0)
        phi = InitialFunction.polynomial([1.0, -0.5], 1.0)
        from deltarec import StepSolverConfig

        short = solve_steps(params, phi, StepSolverConfig(horizon_delays=25))
        long = solve_steps(params, phi, StepSolverConfig(horizon_delays=30))
        assert short.tail_integral(1.0) >= long.tail_integral(1.0) - 1e-12


class TestMix:
    def setup_method(self):
        self.params = ProblemParams(0.16, 1.0)
        self.g1 = geometric_member(0.2, n_max=120)
        self.g2 = geometric_member(0.8, n_max=120)

    def test_identity_weights(self):
        assert np.array_equal(mix(self.g1, self.g2, 0.0).survival, self.g2.survival)
        assert np.array_equal(mix(self.g1, self.g2, 1.0).survival, self.g1.survival)

    def test_geometric_mixture_is_member(self):
        mixed = mix(self.g1, self.g2, 0.5)
        cert = residual_sup(mixed, self.params, np.arange(0.0, 51.0))
        assert cert.residual_sup <= 1e-10

    def test_support_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            mix(self.g1, geometric_member(0.8, n_max=60), 0.5)

    @given(
        lam=st.floats(0.0, 1.0),
        x=st.floats(0.0, 40.0),
    )
    def test_h_linearity(self, lam, x):
        mixed = mix(self.g1, self.g2, lam)
        h = residual_H(mixed, self.params, x)
        h1 = residual_H(self.g1, self.params, x)
        h2 = residual_H(self.g2, self.params, x)
        assert abs(h - (lam * h1 + (1.0 - lam) * h2)) < 1e-12


class TestTailCondition:
    def test_exponential_memoryless(self):
        params = ProblemParams(0.2, 1.0)
        theta = solve_exponential_rates(params).roots[1]
        m = exponential_member(params, theta)
        shifted = tail_condition(m, 1.0)
        t = np.array([0.2, 1.0, 2.5, 9.0])
        expected = np.where(t < 1.0, 1.0, np.exp(-theta * (t - 1.0)))
        assert np.allclose(shifted.survival_at(t), expected, atol=1e-12)
        for x in (1.0, 3.0):
            assert abs(residual_H(shifted, params, x)) < 1e-12

    def test_left_endpoint_is_identity_for_continuous(self):
        params, sol = table1_solution()
        same = tail_condition(sol, 0.0)
        assert np.allclose(same.values, sol.values, atol=0.0)

    def test_table1_tail(self):
        params, sol = table1_solution()
        cond = tail_condition(sol, 2.0)
        g2 = sol.survival_at(2.0)
        assert g2 == pytest.approx(0.3498, abs=5e-4)
        k = int(round(5.0 / cond.grid_step))
        assert cond.values[k] == pytest.approx(sol.survival_at(5.0) / g2, abs=1e-12)
        cert = residual_sup(cond, params, np.linspace(2.0, 20.0, 37))
        assert cert.residual_sup <= 5e-4

    def test_discrete_tail_drops_left_atoms(self):
        g = geometric_member(0.2, n_max=60)
        cond = tail_condition(g, 0.0)
        assert cond.points[0] == 1.0
        assert cond.survival[0] == pytest.approx(0.8, abs=1e-15)
        params = ProblemParams(0.16, 1.0)
        assert abs(residual_H(cond, params, 1.0)) < 1e-12

    def test_exhausted_survival_rejected(self):
        d = DiscreteSurvival([0.0, 1.0], [0.4, 0.0])
        with pytest.raises(ValidationError):
            tail_condition(d, 1.0)


class TestValidation:
    def test_params(self):
        with pytest.raises(ValidationError):
            ProblemParams(0.0, 1.0)
        with pytest.raises(ValidationError):
            ProblemParams(1.0, 0.0)

    def test_survival_must_decrease(self):
        with pytest.raises(ValidationError):
            DiscreteSurvival([0.0, 1.0, 2.0], [0.5, 0.6, 0.0])

    def test_complete_table_must_end_at_zero(self):
        with pytest.raises(ValidationError):
            DiscreteSurvival([0.0, 1.0], [0.5, 0.2], truncated=False)

    def test_initial_function_class(self):
        with pytest.raises(ValidationError):
            InitialFunction.polynomial([0.9, -0.5], 1.0).validate()  # phi(0) != 1
        with pytest.raises(ValidationError):
            InitialFunction.polynomial([1.0, 0.5], 1.0).validate()  # increasing
        with pytest.raises(ValidationError):
            InitialFunction.polynomial([1.0, -1.0], 1.0).validate()  # phi(delta) = 0
        with pytest.raises(ValidationError):
            InitialFunction.lattice_table([1.0, 0.5]).validate()  # 1 excluded

    @given(x=st.floats(-2.0, 40.0), y=st.floats(-2.0, 40.0))
    def test_survival_monotone(self, x, y):
        g = geometric_member(0.37, n_max=80)
        lo, hi = min(x, y), max(x, y)
        assert g.survival_at(lo) >= g.survival_at(hi)


class TestSerialisation:
    def test_json_roundtrip_idempotent(self):
        g = geometric_member(0.2, n_max=12)
        text = to_json(g)
        again = to_json(from_json(text))
        assert text == again

    def test_json_keeps_closed_form(self):
        params = ProblemParams(0.2, 1.0)
        m = exponential_member(params, solve_exponential_rates(params).roots[0])
        loaded = from_json(to_json(m))
        assert loaded.closed_form is not None
        assert abs(residual_H(loaded, params, 3.0)) < 1e-10

    def test_csv_contract(self):
        g = geometric_member(0.2, n_max=3)
        text = to_csv(g)
        lines = text.strip().split("\n")
        assert lines[0] == "x,G"
        assert len(lines) == 5
        x, gval = lines[2].split(",")
        assert float(x) == 1.0
        assert float(gval) == pytest.approx(0.64, abs=1e-10)

    def test_closed_form_tail_shift(self):
        cf = ClosedForm("exponential", {"theta": 2.0})
        shifted = cf.shifted_tail(1.0)
        assert shifted.value(0.5) == 1.0
        assert shifted.value(1.5) == pytest.approx(math.exp(-1.0), rel=1e-12)
        # integral over [0.2, inf): flat part 0.8 plus exp tail 1/theta
        assert shifted.tail_integral(0.2) == pytest.approx(0.8 + 0.5, rel=1e-12)
