import math

import numpy as np
import pytest

from banditcoord.bandit import (ROLE_ACTSEL, ROLE_NEISEL, Exp3State, learning_rate, stream)


class TestConstruction:
    def test_initial_weights_and_learning_rate(self):
        b = Exp3State(4, 100)
        assert np.array_equal(b.weights, np.ones(4))
        assert b.eta == pytest.approx(math.sqrt(2 * math.log(4) / (4 * 100)))

    def test_single_arm_is_degenerate(self):
        b = Exp3State(1, 50)
        assert b.distribution().tolist() == [1.0]
        rng = stream(0, 0, 0, ROLE_ACTSEL)
        assert all(b.sample(rng) == 0 for _ in range(10))

    def test_learning_rate_formula(self):
        assert learning_rate(16, 3000) == pytest.approx(
            math.sqrt(2 * math.log(16) / (16 * 3000)))

    def test_rejects_empty_bandit(self):
        with pytest.raises(ValueError):
            Exp3State(0, 10)
        with pytest.raises(ValueError):
            Exp3State(3, 0)


class TestDistribution:
    def test_uniform_at_start(self):
        assert Exp3State(5, 10).distribution().tolist() == [0.2] * 5

    def test_normalizes_weights(self):
        b = Exp3State(3, 10)
        b.weights = np.array([2.0, 1.0, 1.0])
        assert b.distribution().tolist() == [0.5, 0.25, 0.25]

    def test_matches_hand_normalization_after_updates(self):
        b = Exp3State(4, 200)
        rng = stream(1, 0, 0, ROLE_ACTSEL)
        for _ in range(50):
            arm = b.sample(rng)
            b.update(arm, rng.random())
        w = b.weights
        assert np.allclose(b.distribution(), w / w.sum(), rtol=0, atol=0)


class TestSampling:
    def test_empirical_frequencies_uniform(self):
        b = Exp3State(4, 10)
        rng = stream(2, 0, 0, ROLE_ACTSEL)
        draws = np.array([b.sample(rng) for _ in range(100_000)])
        freqs = np.bincount(draws, minlength=4) / len(draws)
        sigma = math.sqrt(0.25 * 0.75 / len(draws))
        assert np.all(np.abs(freqs - 0.25) < 3 * sigma + 1e-12)

    def test_fixed_seed_reproducible(self):
        b1, b2 = Exp3State(6, 10), Exp3State(6, 10)
        r1 = stream(7, 3, 2, ROLE_NEISEL, 1)
        r2 = stream(7, 3, 2, ROLE_NEISEL, 1)
        assert [b1.sample(r1) for _ in range(100)] == [b2.sample(r2) for _ in range(100)]

    def test_distinct_slots_get_distinct_streams(self):
        a = [stream(7, 3, 2, ROLE_NEISEL, 0).random() for _ in range(5)]
        b = [stream(7, 3, 2, ROLE_NEISEL, 1).random() for _ in range(5)]
        assert a != b


class TestUpdate:
    def test_reward_one_leaves_distribution_unchanged(self):
        b = Exp3State(4, 100)
        b.update(2, 0.3)
        before = b.distribution().copy()
        b.update(1, 1.0)
        assert np.array_equal(b.distribution(), before)

    def test_two_arm_zero_reward_ratio(self):
        b = Exp3State(2, 100)
        b.update(0, 0.0)
        # chosen arm estimate 1 - 1/0.5 = -1, other arm 1: ratio exp(-2 eta)
        assert b.weights[0] / b.weights[1] == pytest.approx(math.exp(-2 * b.eta))

    def test_full_feedback_drives_probability_to_best_arm(self):
        b = Exp3State(2, 4000)
        trend = []
        for _ in range(2000):
            b.update(0, 1.0)
            b.update(1, 0.0)
            trend.append(b.distribution()[0])
        assert trend[-1] > 0.99
        # monotone trend up to float noise
        assert all(b >= a - 1e-12 for a, b in zip(trend, trend[1:]))

    def test_out_of_range_reward_clamped_with_warning(self, caplog):
        b = Exp3State(3, 10)
        with caplog.at_level("WARNING"):
            b.update(0, 1.5)
        assert any("clamped" in r.message for r in caplog.records)
        assert np.all(np.isfinite(b.weights))

    def test_rejects_bad_arm(self):
        with pytest.raises(ValueError):
            Exp3State(3, 10).update(5, 0.5)


class TestInvariants:
    def test_distribution_valid_after_every_update(self):
        b = Exp3State(5, 500)
        rng = stream(9, 0, 0, ROLE_ACTSEL)
        for _ in range(500):
            arm = b.sample(rng)
            b.update(arm, float(rng.random()))
            p = b.distribution()
            assert abs(p.sum() - 1.0) < 1e-12
            assert np.all(p > 0) and np.all(p <= 1.0)

    def test_weights_stay_finite_positive_under_adversarial_rewards(self):
        # 10^6 worst-case updates: always punish the currently likeliest arm.
        b = Exp3State(3, 1_000_000)
        for i in range(1_000_000):
            arm = int(np.argmax(b.weights))
            b.update(arm, 0.0)
        assert np.all(np.isfinite(b.weights))
        assert np.all(b.weights > 0)

    def test_regret_trend_and_bound(self):
        # Fixed stochastic two-arm instance: Bernoulli means 0.9 / 0.1.
        def run(horizon, seed):
            rng = np.random.default_rng(seed)
            rewards = (rng.random((horizon, 2)) < np.array([0.9, 0.1])).astype(float)
            b = Exp3State(2, horizon)
            sample_rng = stream(seed, 0, 0, ROLE_ACTSEL)
            earned = 0.0
            for t in range(horizon):
                arm = b.sample(sample_rng)
                earned += rewards[t, arm]
                b.update(arm, rewards[t, arm])
            best = rewards.sum(axis=0).max()
            return best - earned

        r1k = run(1_000, seed=5)
        r10k = run(10_000, seed=5)
        assert r10k / 10_000 < r1k / 1_000
        assert r10k <= 3 * math.sqrt(2 * 10_000 * 2 * math.log(2))
