import numpy as np
import pytest

from deltarec import (
    InitialFunction,
    ProblemParams,
    ValidationError,
    decay_bound_check,
    mix,
    positivity_scan_lattice,
    solve_steps_lattice,
    threshold_lattice,
)
from deltarec.constructors import (
    continuous_threshold,
    geom_negbin_mixture,
    geometric_member,
    tangent_lattice_params,
)


class TestSolveStepsLattice:
    def test_geometric_prefix_exact(self):
        params = ProblemParams(0.16, 1.0)
        phi = InitialFunction.lattice_table([0.8, 0.64])
        sol = solve_steps_lattice(params, phi, 60)
        expected = 0.8 ** (np.arange(61.0) + 1.0)
        assert np.max(np.abs(sol.values - expected)) < 1e-14

    def test_single_term_first_step(self):
        params = ProblemParams(0.3, 1.0)
        phi = InitialFunction.lattice_table([0.9, 0.5])
        sol = solve_steps_lattice(params, phi, 4)
        assert sol.values[2] == pytest.approx(0.5 - 0.3 * 0.9, abs=0.0)

    def test_delta_two_hand_values(self):
        params = ProblemParams(0.1, 2.0)
        phi = InitialFunction.lattice_table([0.9, 0.7, 0.5])
        sol = solve_steps_lattice(params, phi, 8)
        assert sol.values[3] == pytest.approx(0.41, abs=1e-15)
        assert sol.values[4] == pytest.approx(0.34, abs=1e-15)

    def test_step_identity_brute_force(self):
        # y(i) = y(k*delta) - c * sum_{j=(k-1)delta}^{i-delta-1} y(j)
        params = ProblemParams(0.08, 3.0)
        phi = InitialFunction.lattice_table([0.95, 0.8, 0.6, 0.45])
        sol = solve_steps_lattice(params, phi, 40)
        d = 3
        for k in (1, 4, 9):
            for i in range(k * d + 1, (k + 1) * d + 1):
                ssum = float(np.sum(sol.values[(k - 1) * d : i - d]))
                assert sol.values[i] == pytest.approx(
                    sol.values[k * d] - params.c * ssum, abs=1e-14
                )

    def test_rejections(self):
        with pytest.raises(ValidationError):
            solve_steps_lattice(
                ProblemParams(0.1, 1.5),
                InitialFunction.lattice_table([0.8, 0.5]),
                10,
            )
        with pytest.raises(ValidationError):
            solve_steps_lattice(
                ProblemParams(0.1, 1.0),
                InitialFunction.lattice_table([0.5, 0.8]),
                10,
            )


class TestThreshold:
    def test_values(self):
        assert threshold_lattice(1) == 0.25
        assert threshold_lattice(2) == pytest.approx(8.0 / 27.0, rel=1e-15)

    def test_monotone_and_below_continuous(self):
        vals = [threshold_lattice(d) for d in range(1, 101)]
        assert np.all(np.diff(vals) > 0)
        assert vals[-1] < continuous_threshold()


class TestDecayBound:
    def test_geometric_member(self):
        params = ProblemParams(0.16, 1.0)
        phi = InitialFunction.lattice_table([0.8, 0.64])
        sol = solve_steps_lattice(params, phi, 100)
        violation = decay_bound_check(sol)
        assert violation <= 1e-12
        # equality at k = delta, so the max sits exactly at zero
        assert violation == 0.0

    def test_geometric_mixture(self):
        params = ProblemParams(0.16, 1.0)
        g = mix(geometric_member(0.2, 110), geometric_member(0.8, 110), 0.5)
        phi = InitialFunction.lattice_table(g.survival[:2])
        sol = solve_steps_lattice(params, phi, 100)
        assert decay_bound_check(sol) <= 1e-12
        assert np.max(np.abs(sol.values - g.survival[: sol.values.size])) < 1e-13

    def test_requires_positive_solution(self):
        params = ProblemParams(0.4, 1.0)
        phi = InitialFunction.lattice_table([0.9, 0.3])
        sol = solve_steps_lattice(params, phi, 30)
        with pytest.raises(ValidationError):
            decay_bound_check(sol)


class TestPositivityScanLattice:
    def test_supercritical_crossing(self):
        params = ProblemParams(0.3, 1.0)  # c*delta above 1/4
        phi = InitialFunction.lattice_table([0.9, 0.6])
        sol = solve_steps_lattice(params, phi, 40)
        verdict = positivity_scan_lattice(sol)
        assert not verdict.positive_on_horizon
        assert verdict.first_nonpositive_t is not None

    def test_tangent_geometric(self):
        params = ProblemParams(0.25, 1.0)
        phi = InitialFunction.lattice_table([0.5, 0.25])
        sol = solve_steps_lattice(params, phi, 80)
        assert positivity_scan_lattice(sol).positive_on_horizon

    def test_negbin_mixture_roundtrip(self):
        params = tangent_lattice_params(2)
        member = geom_negbin_mixture(2, 0.4, n_max=80)
        phi = InitialFunction.lattice_table(member.survival[:3])
        sol = solve_steps_lattice(params, phi, 80)
        assert positivity_scan_lattice(sol).positive_on_horizon
        assert np.max(np.abs(sol.values - member.survival)) < 1e-14
