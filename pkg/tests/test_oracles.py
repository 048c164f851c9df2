import math

import numpy as np
import pytest

from epblab import (
    Environment,
    TieBreak,
    deviation_gain_exact,
    generate_environment,
    minimize_rate_function_grid,
    optimal_set,
    pivotal_log_probability_exact,
    pivotal_probability_exact,
    sample_quality_vector,
    tie_probability_exact,
)
from epblab.model import InstanceTooLargeError
from epblab.oracles import _mitm_max_value, _subset_sums

from conftest import costed_env


class TestOptimalSet:
    def test_example_optimum(self, example_env):
        winning, value = optimal_set(example_env, [1, 1, 0])
        assert winning.members == (0, 1)
        assert value == 2.0

    def test_all_zero_qualities_pick_empty(self, example_env):
        winning, value = optimal_set(example_env, [0, 0, 0])
        assert winning.members == ()
        assert value == 0.0

    def test_against_utility_level_dp(self):
        """Independent oracle: knapsack DP over integer utility levels."""
        rng = np.random.default_rng(21)
        for _ in range(1000):
            env = generate_environment(10, float(rng.uniform(1, 4)),
                                       float(rng.uniform(4, 10)), 2, rng)
            L = sample_quality_vector(env, rng)
            _, value = optimal_set(env, L)
            top = int(L.sum())
            best = [math.inf] * (top + 1)
            best[0] = 0.0
            for j in range(10):
                lj = int(L[j])
                if lj == 0:
                    continue
                for u in range(top - lj, -1, -1):
                    if best[u] + env.costs[j] < best[u + lj]:
                        best[u + lj] = best[u] + env.costs[j]
            dp_value = max(u for u in range(top + 1) if best[u] <= env.budget + 1e-9)
            assert value == float(dp_value)

    def test_meet_in_the_middle_matches_direct(self):
        rng = np.random.default_rng(4)
        m = 21
        costs = rng.uniform(1, 3, m)
        weights = rng.integers(0, 3, m).astype(float)
        budget = float(rng.uniform(5, 12))
        got = _mitm_max_value(costs, weights, budget)
        direct_costs = _subset_sums(costs)
        direct_vals = _subset_sums(weights)
        expect = direct_vals[direct_costs <= budget + 1e-9].max()
        assert got == pytest.approx(expect)

    def test_mitm_path_full_result(self):
        rng = np.random.default_rng(9)
        m = 22
        env = costed_env(rng.uniform(1, 2, m), budget=6.0, lmax=2)
        L = rng.integers(0, 3, m)
        winning, value = optimal_set(env, L)
        assert winning.total_cost <= env.budget + 1e-9
        assert value == pytest.approx(sum(L[j] for j in winning.members))

    def test_lexicographic_ties(self):
        # two optimal sets {0, 2} and {1}: tuple order prefers (0, 2)
        env = costed_env([1.0, 2.0, 1.0], budget=2.0)
        winning, value = optimal_set(env, [1, 2, 1])
        assert value == 2.0
        assert winning.members == (0, 2)

    def test_instance_too_large(self):
        env = costed_env(np.ones(25), budget=3.0)
        with pytest.raises(InstanceTooLargeError):
            optimal_set(env, np.zeros(25, dtype=int))


class TestTieProbability:
    def test_n1_half(self):
        assert tie_probability_exact(1, 0.5, 0.5) == pytest.approx(0.5)

    def test_n2_hand_convolution(self):
        assert tie_probability_exact(2, 0.5, 0.5) == pytest.approx(0.375)

    def test_n100_central_binomial(self):
        expect = math.comb(200, 100) / 4**100
        got = tie_probability_exact(100, 0.5, 0.5)
        assert abs(got - expect) / expect < 1e-12

    def test_symmetric_under_complement(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            p1, p2 = rng.uniform(0.05, 0.95, 2)
            a = tie_probability_exact(60, p1, p2)
            b = tie_probability_exact(60, 1 - p1, 1 - p2)
            assert a == pytest.approx(b, rel=1e-12)


class TestPivotalProbability:
    def test_equality_only_sums_to_one(self):
        assert pivotal_probability_exact(50, [0.37]) == pytest.approx(1.0)

    def test_two_variable_hand_sum(self):
        # Pr[X1 = x] * Pr[X2 < x] summed: only x = 1 contributes 0.5 * 0.5
        assert pivotal_probability_exact(1, [0.5], lt_probs=[0.5]) == pytest.approx(0.25)

    def test_monotone_decreasing_in_n(self):
        eq, gt, lt = [0.45, 0.6], [0.3], [0.75]
        values = [pivotal_probability_exact(n, eq, gt, lt) for n in (50, 100, 200, 400)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_rate_matches_grid_minimum(self):
        """-ln P / n at n = 400 sits within 10% of the rate-function minimum
        for well-separated configurations."""
        rng = np.random.default_rng(14)
        checked = 0
        while checked < 20:
            eq = [float(rng.uniform(0.1, 0.3)), float(rng.uniform(0.7, 0.9))]
            gt = [float(rng.uniform(0.05, 0.95))] if rng.random() < 0.5 else []
            lt = [float(rng.uniform(0.05, 0.95))] if rng.random() < 0.5 else []
            t_g, g_g = minimize_rate_function_grid(eq, gt, lt)
            if g_g < 0.25:
                continue
            rate = -pivotal_log_probability_exact(400, eq, gt, lt) / 400
            assert abs(rate - g_g) <= 0.1 * g_g
            checked += 1


class TestGridMinimizer:
    def test_single_equality(self):
        t, g = minimize_rate_function_grid([0.3])
        assert t == pytest.approx(0.3, abs=1e-7)
        assert g == pytest.approx(0.0, abs=1e-12)

    def test_two_equalities_frozen_value(self):
        t, g = minimize_rate_function_grid([0.3, 0.6])
        assert t == pytest.approx(0.4449944320643648, abs=1e-7)
        assert g == pytest.approx(0.0954114098737552, abs=1e-10)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            eq = rng.uniform(0.05, 0.95, rng.integers(1, 4)).tolist()
            gt = rng.uniform(0.05, 0.95, rng.integers(0, 3)).tolist()
            lt = rng.uniform(0.05, 0.95, rng.integers(0, 3)).tolist()
            _, g = minimize_rate_function_grid(eq, gt, lt)
            assert g >= -1e-15

    def test_matches_closed_form_for_pure_equalities(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            eq = rng.uniform(0.05, 0.95, rng.integers(1, 5))
            alpha = math.exp(np.log(eq).mean())
            beta = math.exp(np.log1p(-eq).mean())
            t, g = minimize_rate_function_grid(eq.tolist())
            assert t == pytest.approx(alpha / (alpha + beta), abs=1e-8)


class TestDeviationGain:
    def test_identical_reports_zero(self):
        env = costed_env([1.0, 1.0], budget=1.0)
        tb = TieBreak.disfavoring(2, 0)
        assert deviation_gain_exact(env, 6, [0, 0], [0, 0], tb) == 0.0

    def test_equal_quality_prior_zero(self):
        priors = np.zeros((2, 2))
        priors[:, 1] = 1.0
        env = Environment(costs=np.ones(2), budget=1.0, lmax=1, priors=priors,
                          q=np.array([[0.3, 0.7], [0.35, 0.65]]))
        tb = TieBreak.disfavoring(2, 0)
        assert deviation_gain_exact(env, 6, [0, 0], [0, 1], tb) == pytest.approx(0.0, abs=1e-15)

    def test_sign_matches_tie_probability_comparison(self):
        # Posterior-balanced instance, deviation approving the disfavoured
        # alternative: the pivotal event is then the exact tie on the other
        # agents' counts, and the sign of the honest-vs-deviate gap follows
        # the tie-probability comparison between the two opposing quality
        # states.
        from epblab import binary_bne_lhs_rhs
        q = np.array([[0.45, 0.75], [0.35, 0.5]])
        # balance the posterior weights of L = (1, 0) and L = (0, 1):
        # (1 - q_a1)(1 - q_b0) == (1 - q_a0)(1 - q_b1)
        q[1, 1] = 1 - (1 - q[0, 1]) * (1 - q[1, 0]) / (1 - q[0, 0])
        lhs, rhs = binary_bne_lhs_rhs(q)
        env = Environment(costs=np.ones(2), budget=1.0, lmax=1,
                          priors=np.full((2, 2), 0.5), q=q)
        tb = TieBreak.disfavoring(2, 0)
        gain = deviation_gain_exact(env, 8, [0, 0], [1, 0], tb)
        assert math.copysign(1, gain) == math.copysign(1, rhs - lhs)

    def test_instance_too_large(self):
        env = costed_env([1.0, 1.0], budget=1.0)
        tb = TieBreak.disfavoring(2, 0)
        with pytest.raises(InstanceTooLargeError):
            deviation_gain_exact(env, 9, [0, 0], [0, 1], tb)
