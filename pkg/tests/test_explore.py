import math

import numpy as np
import pytest

from sharedq import (
    Action,
    AnnealSchedule,
    ConfigError,
    EvalPolicy,
    exploration_strength,
    greedy_action,
    softmax_policy,
    softmax_probs,
    temperature,
)
from sharedq.explore import temperatures


class TestSchedule:
    def test_endpoints(self):
        s = AnnealSchedule(1.0, 0.1, 100)
        assert temperature(s, 1) == 1.0
        assert temperature(s, 100) == 0.1

    def test_linear_midpoint(self):
        s = AnnealSchedule(1.0, 0.1, 3)
        assert temperature(s, 2) == pytest.approx(0.55, abs=1e-15)

    def test_constant_after_anneal(self):
        s = AnnealSchedule(1.0, 0.1, 50)
        for t in (50, 51, 99, 10_000):
            assert temperature(s, t) == 0.1

    def test_degenerate_single_step_schedule(self):
        s = AnnealSchedule(0.7, 0.1, 1)
        assert temperature(s, 1) == 0.7
        assert temperature(s, 2) == 0.1

    def test_non_increasing(self):
        s = AnnealSchedule(1.3, 0.05, 997)
        taus = [temperature(s, t) for t in range(1, 1200)]
        assert all(a >= b for a, b in zip(taus, taus[1:]))

    def test_vectorized_matches_scalar_bitwise(self):
        s = AnnealSchedule(0.8, 0.1, 137)
        ts = np.arange(1, 300)
        vec = temperatures(s, ts)
        for i, t in enumerate(ts):
            assert vec[i] == temperature(s, int(t))

    def test_validation(self):
        with pytest.raises(ConfigError):
            AnnealSchedule(0.1, 0.5, 100)  # init below final
        with pytest.raises(ConfigError):
            AnnealSchedule(1.0, 0.0, 100)  # final must stay positive
        with pytest.raises(ConfigError):
            AnnealSchedule(1.0, 0.1, 0)
        with pytest.raises(ConfigError):
            temperature(AnnealSchedule(1.0, 0.1, 5), 0)


class TestSoftmax:
    def test_equal_values_give_half_half(self):
        for c in (-3.0, 0.0, 7.5):
            probs = softmax_probs(np.array([c, c]), tau=0.37)
            np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-15)

    def test_hand_computed_probability(self):
        probs = softmax_probs(np.array([1.0, 0.0]), tau=1.0)
        assert probs[0] == pytest.approx(math.e / (1 + math.e), abs=1e-12)
        assert probs[0] == pytest.approx(0.731059, abs=1e-6)

    def test_low_temperature_saturates(self):
        # p_first = 1/(1 + e^-100): the defect tail is ~3.7e-44 < 1e-40
        probs = softmax_probs(np.array([1.0, 0.0]), tau=0.01)
        assert probs[1] < 1e-40
        assert probs[0] == pytest.approx(1.0, abs=1e-40)

    def test_probs_sum_to_one(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            q = rng.standard_normal(2) * 50
            probs = softmax_probs(q, tau=float(rng.random()) + 1e-3)
            assert abs(probs.sum() - 1.0) < 1e-12

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            q = rng.standard_normal(2)
            shift = float(rng.standard_normal()) * 100
            a = softmax_probs(q, tau=0.5)
            b = softmax_probs(q + shift, tau=0.5)
            assert np.max(np.abs(a - b)) < 1e-12

    def test_monotone_in_temperature(self):
        q = np.array([1.0, 0.5])
        last = 0.5
        for tau in (2.0, 1.0, 0.5, 0.25, 0.1, 0.02):
            p_first = softmax_probs(q, tau)[0]
            assert p_first > last
            last = p_first

    def test_non_finite_values_fault(self):
        with pytest.raises(ValueError):
            softmax_probs(np.array([np.nan, 0.0]), tau=1.0)
        with pytest.raises(ValueError):
            softmax_probs(np.array([np.inf, 0.0]), tau=1.0)

    def test_sampling_deterministic_given_rng(self):
        q = np.tile([0.3, 0.1], (50, 1))
        a1, _ = softmax_policy(q, 0.5, np.random.default_rng(7))
        a2, _ = softmax_policy(q, 0.5, np.random.default_rng(7))
        np.testing.assert_array_equal(a1, a2)

    def test_sampling_frequency_matches_probs(self):
        # 1e6 draws against the analytic probability, 3-sigma binomial band
        q = np.tile([0.4, -0.2], (1_000_000, 1))
        probs = softmax_probs(q[0], tau=0.7)
        actions, _ = softmax_policy(q, 0.7, np.random.default_rng(42))
        n_coop = int(np.count_nonzero(actions == Action.COOPERATE))
        expect = probs[0] * 1_000_000
        sigma = math.sqrt(1_000_000 * probs[0] * (1 - probs[0]))
        assert abs(n_coop - expect) < 3 * sigma

    def test_scalar_call_returns_scalar_action(self):
        action, probs = softmax_policy(
            np.array([5.0, -5.0]), 0.1, np.random.default_rng(3)
        )
        assert action in (0, 1)
        assert probs.shape == (2,)


class TestGreedy:
    def test_cooperate_when_higher(self):
        assert greedy_action(np.array([2.0, 1.0])) == Action.COOPERATE

    def test_defect_when_higher(self):
        assert greedy_action(np.array([1.0, 2.0])) == Action.DEFECT

    def test_tie_breaks_to_cooperate(self):
        assert greedy_action(np.array([1.0, 1.0])) == Action.COOPERATE

    def test_batch_form(self):
        q = np.array([[2.0, 1.0], [0.0, 0.5], [3.0, 3.0]])
        np.testing.assert_array_equal(greedy_action(q), [0, 1, 0])

    def test_eval_policy_validation(self):
        with pytest.raises(ConfigError):
            EvalPolicy(mode="softmax", tau_eval=0.0)
        with pytest.raises(ConfigError):
            EvalPolicy(mode="epsilon")
        assert EvalPolicy().tau_eval == 0.10


class TestExplorationStrength:
    def test_constant_schedule(self):
        s = AnnealSchedule(0.3, 0.3, 1000)
        assert exploration_strength(s) == pytest.approx(0.3, abs=1e-15)

    def test_short_schedule_half_window_mean(self):
        # tau(1)=1, tau(2)=2/3 for a 4-step anneal toward (near) zero:
        # the half-window mean is 5/6
        s = AnnealSchedule(1.0, 1e-12, 4)
        assert exploration_strength(s) == pytest.approx(5 / 6, abs=1e-9)

    def test_matches_direct_summation(self):
        s = AnnealSchedule(0.8, 0.1, 95_000)
        k = s.t_anneal // 2
        direct = sum(temperature(s, t) for t in range(1, k + 1)) / k
        assert exploration_strength(s) == pytest.approx(direct, abs=1e-10)

    def test_monotone_in_tau_init(self):
        values = [
            exploration_strength(AnnealSchedule(ti, 0.1, 5000))
            for ti in (0.2, 0.4, 0.8, 1.2, 2.0)
        ]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_needs_two_anneal_steps(self):
        with pytest.raises(ConfigError):
            exploration_strength(AnnealSchedule(1.0, 0.1, 1))
