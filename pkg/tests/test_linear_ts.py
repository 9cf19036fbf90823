import math
from dataclasses import replace

import numpy as np
import pytest

from gpscreen.data import ArmSet
from gpscreen.errors import InputError
from gpscreen.linear_ts import lints_init, lints_step, lints_update, sample_weights


def arm_set(features):
    features = np.atleast_2d(np.asarray(features, dtype=float))
    ids = tuple(f"a{i}" for i in range(features.shape[0]))
    return ArmSet(ids, features, tuple(range(features.shape[0])))


class TestInit:
    def test_initial_state(self):
        s = lints_init(d=2, R=1.0, delta=0.1, T=100)
        np.testing.assert_array_equal(s.B, np.eye(2))
        np.testing.assert_array_equal(s.mu_hat, np.zeros(2))
        np.testing.assert_array_equal(s.f, np.zeros(2))

    def test_v_formula(self):
        # independent evaluation: eps = 1/ln(100), v = sqrt(24 ln(100) * 2 * ln(10))
        s = lints_init(d=2, R=1.0, delta=0.1, T=100)
        expected = math.sqrt(24.0 * math.log(100.0) * 2.0 * math.log(10.0))
        assert s.v == pytest.approx(expected, abs=1e-12)
        assert s.v == pytest.approx(22.6, abs=0.05)

    def test_horizon_too_short(self):
        with pytest.raises(InputError):
            lints_init(d=2, R=1.0, delta=0.1, T=1)

    def test_bad_parameters(self):
        with pytest.raises(InputError):
            lints_init(d=0, R=1.0, delta=0.1, T=10)
        with pytest.raises(InputError):
            lints_init(d=2, R=1.0, delta=1.5, T=10)
        with pytest.raises(InputError):
            lints_init(d=2, R=0.0, delta=0.1, T=10)


class TestStep:
    def test_single_arm(self):
        s = lints_init(d=2, R=1.0, delta=0.1, T=10)
        arms = arm_set([[1.0, 0.0]])
        assert lints_step(s, arms, np.random.default_rng(0)) == 0

    def test_zero_scale_breaks_ties_to_lowest(self):
        s = replace(lints_init(d=2, R=1.0, delta=0.1, T=10), v=0.0)
        arms = arm_set([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        for seed in range(10):
            assert lints_step(s, arms, np.random.default_rng(seed)) == 0

    def test_zero_scale_is_greedy(self):
        rng = np.random.default_rng(3)
        s = lints_init(d=3, R=1.0, delta=0.1, T=50)
        for _ in range(15):
            s = lints_update(s, rng.standard_normal(3), rng.standard_normal())
        greedy = replace(s, v=0.0)
        feats = rng.standard_normal((20, 3))
        arms = arm_set(feats)
        chosen = lints_step(greedy, arms, np.random.default_rng(0))
        assert chosen == int(np.argmax(feats @ s.mu_hat))

    def test_sampled_weight_covariance(self):
        rng = np.random.default_rng(5)
        s = lints_init(d=3, R=1.0, delta=0.1, T=50)
        for _ in range(10):
            s = lints_update(s, rng.standard_normal(3), rng.standard_normal())
        draws = np.array([sample_weights(s, rng) for _ in range(20_000)])
        emp = np.cov(draws, rowvar=False)
        ref = s.v**2 * np.linalg.inv(s.B)
        rel = np.linalg.norm(emp - ref, 2) / np.linalg.norm(ref, 2)
        assert rel < 0.05

    def test_dimension_mismatch(self):
        s = lints_init(d=2, R=1.0, delta=0.1, T=10)
        with pytest.raises(InputError):
            lints_step(s, arm_set([[1.0, 0.0, 0.0]]), np.random.default_rng(0))


class TestUpdate:
    def test_one_step_arithmetic(self):
        s = lints_init(d=3, R=1.0, delta=0.1, T=10)
        s2 = lints_update(s, [1.0, 0.0, 0.0], 1.0)
        np.testing.assert_array_equal(s2.B, np.diag([2.0, 1.0, 1.0]))
        np.testing.assert_array_equal(s2.f, [1.0, 0.0, 0.0])
        np.testing.assert_allclose(s2.mu_hat, [0.5, 0.0, 0.0], atol=1e-12)

    def test_zero_vector_is_null_update(self):
        s = lints_init(d=2, R=1.0, delta=0.1, T=10)
        s2 = lints_update(s, [0.0, 0.0], 3.0)
        np.testing.assert_array_equal(s2.B, s.B)
        np.testing.assert_array_equal(s2.mu_hat, s.mu_hat)

    def test_updates_commute(self):
        rng = np.random.default_rng(7)
        s = lints_init(d=4, R=1.0, delta=0.1, T=10)
        x1, x2 = rng.standard_normal(4), rng.standard_normal(4)
        a = lints_update(lints_update(s, x1, 1.0), x2, -2.0)
        b = lints_update(lints_update(s, x2, -2.0), x1, 1.0)
        np.testing.assert_allclose(a.B, b.B, atol=1e-10)
        np.testing.assert_allclose(a.f, b.f, atol=1e-10)

    def test_immutability(self):
        s = lints_init(d=2, R=1.0, delta=0.1, T=10)
        lints_update(s, [1.0, 1.0], 1.0)
        np.testing.assert_array_equal(s.B, np.eye(2))

    def test_b_stays_psd(self):
        rng = np.random.default_rng(11)
        s = lints_init(d=3, R=1.0, delta=0.1, T=10)
        for _ in range(50):
            s = lints_update(s, rng.standard_normal(3), rng.standard_normal())
            assert np.linalg.eigvalsh(s.B).min() >= 1.0 - 1e-8
            np.testing.assert_allclose(s.B, s.B.T, atol=1e-12)
