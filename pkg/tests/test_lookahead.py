import math

import numpy as np
import pytest
from scipy.integrate import quad

import gpscreen.policies as pol
from gpscreen.data import ArmSet
from gpscreen.errors import InputError
from gpscreen.gp import GPBelief, KernelSpec
from gpscreen.policies import (
    RewardMode,
    TreeConfig,
    _TreeSearch,
    batch_gp_tree_step,
    descend_q,
    descend_v,
    gp_tree_step,
)
from naive_tree import naive_descend_q

RBF = KernelSpec()


def arm_set(features, tested=()):
    features = np.atleast_2d(np.asarray(features, dtype=float))
    ids = tuple(f"a{i}" for i in range(features.shape[0]))
    untested = tuple(i for i in range(features.shape[0]) if i not in set(tested))
    return ArmSet(ids, features, untested)


def terminal_cfg(**kw):
    kw.setdefault("reward_mode", RewardMode.TERMINAL)
    return TreeConfig(**kw)


class TestFantasyConditioning:
    """The in-context pathwise update must match honest GP conditioning."""

    def test_joint_draw_matches_conditioned_posterior(self):
        rng = np.random.default_rng(3)
        feats = rng.standard_normal((5, 2))
        belief = GPBelief.from_data(RBF, 0.1, rng.standard_normal((4, 2)), rng.standard_normal(4))
        arms = arm_set(feats)
        ctx = _TreeSearch(belief, arms, TreeConfig(), scheme="independent")

        fantasy_idx, fantasy_y = (1, 3), (0.8, -0.4)
        ref = belief.condition_many(feats[[1, 3]], fantasy_y).posterior(feats)

        n = 40_000
        draws = np.stack(
            [ctx.joint_draw(fantasy_idx, fantasy_y, r) for r in np.random.default_rng(7).spawn(n)]
        )
        emp_mean = draws.mean(axis=0)
        emp_cov = np.cov(draws, rowvar=False)
        sd = np.sqrt(np.diag(ref.covariance))
        np.testing.assert_allclose(emp_mean, ref.mean, atol=5 * sd.max() / math.sqrt(n) + 1e-6)
        se = np.sqrt((np.outer(sd, sd) ** 2 + ref.covariance**2) / n)
        assert np.all(np.abs(emp_cov - ref.covariance) <= 5 * se + 1e-6)

    def test_noiseless_fantasy_draw_interpolates(self):
        feats = np.array([[0.0, 0.0], [3.0, 3.0]])
        belief = GPBelief.empty(RBF, 0.0)
        ctx = _TreeSearch(belief, arm_set(feats), TreeConfig(), scheme="independent")
        draw = ctx.joint_draw((0,), (1.25,), np.random.default_rng(0))
        assert draw[0] == pytest.approx(1.25, abs=1e-4)


class TestDescendQ:
    def test_k1_terminal_is_single_leaf(self, monkeypatch):
        calls = []
        original = pol._descend_v

        def spy(ctx, f_idx, f_y, depth, rng):
            calls.append(depth)
            return original(ctx, f_idx, f_y, depth, rng)

        monkeypatch.setattr(pol, "_descend_v", spy)
        arms = arm_set([[0.0], [2.0]])
        cfg = terminal_cfg(horizon=1, branches=1, thompson_samples=1)
        descend_q(GPBelief.empty(RBF, 0.1), arms, 0, 0, cfg, np.random.default_rng(0))
        assert calls == [1]  # exactly one leaf evaluation at depth == horizon

    def test_k3_stubbed_branch_values_average(self, monkeypatch):
        stub_values = iter([1.0, 2.0, 3.0])
        monkeypatch.setattr(pol, "_descend_v", lambda *a, **k: next(stub_values))
        arms = arm_set([[0.0]])
        cfg = terminal_cfg(horizon=1, branches=3, thompson_samples=1)
        v = descend_q(GPBelief.empty(RBF, 0.1), arms, 0, 0, cfg, np.random.default_rng(0))
        assert v == pytest.approx(2.0, abs=1e-12)

    def test_depth_must_be_below_horizon(self):
        arms = arm_set([[0.0]])
        with pytest.raises(InputError):
            descend_q(GPBelief.empty(RBF, 0.1), arms, 0, 1, terminal_cfg(horizon=1),
                      np.random.default_rng(0))

    def test_tested_arm_rejected(self):
        arms = arm_set([[0.0], [1.0]], tested=(0,))
        with pytest.raises(InputError):
            descend_q(GPBelief.empty(RBF, 0.1), arms, 0, 0, terminal_cfg(horizon=1),
                      np.random.default_rng(0))

    def test_conjugate_toy_with_conditioned_prior_matches_quadrature(self):
        # one arm, belief already holding (x0, 1.0): E[descend_q] must equal
        # the integral over the predictive y of the two-observation mean
        noise = 0.1
        belief = GPBelief.empty(RBF, noise).condition([0.0], 1.0)
        arms = arm_set([[0.0]])
        cfg = terminal_cfg(horizon=1, branches=300, thompson_samples=1)

        mu1 = 1.0 / (1.0 + noise)
        var1 = 1.0 - 1.0 / (1.0 + noise)
        K2 = np.ones((2, 2)) + noise * np.eye(2)

        def mean_after_second_obs(y):
            return float(np.ones(2) @ np.linalg.solve(K2, np.array([1.0, y])))

        def integrand(y):
            pred_sd = math.sqrt(var1 + noise)
            w = math.exp(-0.5 * ((y - mu1) / pred_sd) ** 2) / (pred_sd * math.sqrt(2 * math.pi))
            return mean_after_second_obs(y) * w

        exact, _ = quad(integrand, mu1 - 12, mu1 + 12)
        vals = [
            descend_q(belief, arms, 0, 0, cfg, np.random.default_rng(1000 + s))
            for s in range(20)
        ]
        assert np.mean(vals) == pytest.approx(exact, abs=0.05)


class TestDescendV:
    def test_leaf_single_arm_is_a_posterior_draw(self):
        arms = arm_set([[0.5]])
        belief = GPBelief.empty(RBF, 0.1).condition([0.5], 2.0)
        cfg = terminal_cfg(horizon=1)
        vals = [
            descend_v(belief, arms, 1, cfg, np.random.default_rng(s)) for s in range(4000)
        ]
        post = belief.posterior([[0.5]])
        assert np.mean(vals) == pytest.approx(post.mean[0], abs=0.03)
        assert np.var(vals) == pytest.approx(post.covariance[0, 0], rel=0.15)

    def test_leaf_bounded_by_posterior_tail(self):
        rng = np.random.default_rng(11)
        cfg = terminal_cfg(horizon=1)
        for trial in range(1000):
            n_arms = int(rng.integers(2, 7))
            feats = rng.standard_normal((n_arms, 2))
            n_obs = int(rng.integers(0, 4))
            if n_obs:
                belief = GPBelief.from_data(
                    RBF, 0.1, rng.standard_normal((n_obs, 2)), rng.standard_normal(n_obs)
                )
            else:
                belief = GPBelief.empty(RBF, 0.1)
            arms = arm_set(feats)
            mean, var = belief.posterior_marginals(feats)
            bound = mean.max() + 6.0 * math.sqrt(var.max())
            leaf = descend_v(belief, arms, 1, cfg, np.random.default_rng(trial))
            assert leaf <= bound

    def test_n1_equals_descend_q_of_single_candidate(self):
        # with one Thompson sample the interior max has a single element
        arms = arm_set([[0.0], [4.0]])
        cfg = terminal_cfg(horizon=2, branches=1, thompson_samples=1)
        v = descend_v(GPBelief.empty(RBF, 0.1), arms, 1, cfg, np.random.default_rng(5))
        assert np.isfinite(v)


class TestGPTreeStep:
    def test_n1_returns_the_single_candidate(self):
        arms = arm_set(np.linspace(0, 5, 6)[:, None])
        cfg = terminal_cfg(horizon=1, branches=2, thompson_samples=1)
        b = GPBelief.empty(RBF, 0.1)
        d = gp_tree_step(b, arms, cfg, np.random.default_rng(3))
        [cand] = list(d.scores)
        assert d.arm_indices == cand

    def test_deterministic(self):
        arms = arm_set(np.random.default_rng(1).standard_normal((8, 2)))
        cfg = TreeConfig(horizon=1, branches=2, thompson_samples=4)
        b = GPBelief.empty(RBF, 0.1)
        d1 = gp_tree_step(b, arms, cfg, np.random.default_rng(9))
        d2 = gp_tree_step(b, arms, cfg, np.random.default_rng(9))
        assert d1 == d2

    def test_small_assay_sequential_configuration_runs(self):
        # n=20, K=4, h=1 on a small candidate pool
        arms = arm_set(np.random.default_rng(2).standard_normal((25, 3)))
        cfg = TreeConfig(horizon=1, branches=4, thompson_samples=20)
        d = gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(0))
        assert len(d.arm_indices) == 1
        assert len(d.scores) == 20
        assert d.conditionings == 20 * 4

    def test_returns_argmax_of_diagnostics(self):
        arms = arm_set(np.random.default_rng(3).standard_normal((10, 2)))
        cfg = TreeConfig(horizon=1, branches=3, thompson_samples=5)
        d = gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(1))
        assert d.scores[d.arm_indices] == max(d.scores.values())

    def test_node_count_accounting(self):
        # each of the n candidates spawns K branches per level, so a full
        # tree conditions sum_{j=1..h} (nK)^j times; for h=1 this is the
        # exact nK budget of one decision
        b = GPBelief.empty(RBF, 0.1)
        for h, K, n in [(1, 3, 4), (2, 2, 3), (3, 2, 2)]:
            arms = arm_set(np.random.default_rng(h).standard_normal((6, 2)))
            cfg = TreeConfig(horizon=h, branches=K, thompson_samples=n)
            d = gp_tree_step(b, arms, cfg, np.random.default_rng(h))
            bound = sum((n * K) ** j for j in range(1, h + 1))
            assert 0 < d.conditionings <= bound
            if h == 1:
                assert d.conditionings == n * (K * n) ** (h - 1) * K

    def test_terminal_mode_intermediate_rewards_are_zero(self, monkeypatch):
        rewards = []
        original = pol._step_reward

        def spy(mode, y_values):
            r = original(mode, y_values)
            rewards.append(r)
            return r

        monkeypatch.setattr(pol, "_step_reward", spy)
        arms = arm_set(np.random.default_rng(4).standard_normal((6, 2)))
        cfg = terminal_cfg(horizon=2, branches=2, thompson_samples=2)
        gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(2))
        assert rewards and all(r == 0.0 for r in rewards)

    def test_cumulative_mode_rewards_are_sampled_outcomes(self, monkeypatch):
        rewards = []
        original = pol._step_reward

        def spy(mode, y_values):
            r = original(mode, y_values)
            rewards.append(r)
            return r

        monkeypatch.setattr(pol, "_step_reward", spy)
        arms = arm_set(np.random.default_rng(4).standard_normal((6, 2)))
        cfg = TreeConfig(horizon=1, branches=2, thompson_samples=2,
                         reward_mode=RewardMode.CUMULATIVE)
        gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(2))
        assert any(r != 0.0 for r in rewards)


class TestBatchGPTreeStep:
    def test_batch_has_b_distinct_untested_arms(self):
        arms = arm_set(np.random.default_rng(5).standard_normal((12, 2)), tested=(0, 1))
        cfg = TreeConfig(horizon=1, branches=2, thompson_samples=5, batch_size=4)
        d = batch_gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(3))
        assert len(d.arm_indices) == 4
        assert len(set(d.arm_indices)) == 4
        assert not {0, 1} & set(d.arm_indices)

    def test_b1_reduces_to_singleton_decisions(self):
        arms = arm_set(np.random.default_rng(6).standard_normal((8, 2)))
        cfg = TreeConfig(horizon=1, branches=2, thompson_samples=4, batch_size=1)
        d = batch_gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(4))
        assert len(d.arm_indices) == 1
        assert all(len(c) == 1 for c in d.scores)

    def test_oversized_batch_rejected(self):
        arms = arm_set(np.random.default_rng(7).standard_normal((3, 2)))
        cfg = TreeConfig(horizon=1, branches=2, thompson_samples=2, batch_size=4)
        with pytest.raises(InputError):
            batch_gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(0))

    def test_deterministic(self):
        arms = arm_set(np.random.default_rng(8).standard_normal((10, 2)))
        cfg = TreeConfig(horizon=1, branches=2, thompson_samples=4, batch_size=3)
        b = GPBelief.empty(RBF, 0.1)
        d1 = batch_gp_tree_step(b, arms, cfg, np.random.default_rng(11))
        d2 = batch_gp_tree_step(b, arms, cfg, np.random.default_rng(11))
        assert d1 == d2

    def test_sample_count_may_exceed_arm_count(self):
        # n counts joint draws for batch candidates, not selected arms, so
        # n > |untested| is legal; duplicate batches merge
        arms = arm_set(np.random.default_rng(10).standard_normal((4, 2)))
        cfg = TreeConfig(horizon=1, branches=1, thompson_samples=12, batch_size=2)
        d = batch_gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(6))
        assert 1 <= len(d.scores) <= 6  # at most C(4,2) distinct batches
        assert len(d.arm_indices) == 2

    def test_candidate_batches_come_from_rank_draws(self):
        # every scored batch must consist of untested arms and have size b
        arms = arm_set(np.random.default_rng(9).standard_normal((9, 2)), tested=(4,))
        cfg = TreeConfig(horizon=1, branches=1, thompson_samples=6, batch_size=3)
        d = batch_gp_tree_step(GPBelief.empty(RBF, 0.1), arms, cfg, np.random.default_rng(5))
        for batch in d.scores:
            assert len(batch) == 3
            assert 4 not in batch


class TestAgainstNaiveReference:
    """The candidate-space tree must estimate the same value as a literal
    re-conditioning implementation (distributional equivalence)."""

    @pytest.mark.parametrize("fantasy_noise", [True, False])
    def test_h1_mean_value_matches(self, fantasy_noise):
        feats = np.array([[0.0, 0.0], [1.0, 0.5], [2.0, -0.5]])
        belief = GPBelief.from_data(RBF, 0.1, [[0.5, 0.25]], [1.0])
        arms = arm_set(feats)
        cfg = TreeConfig(horizon=1, branches=2, thompson_samples=2,
                         reward_mode=RewardMode.TERMINAL, fantasy_noise=fantasy_noise)
        n_seeds = 400
        fast = [
            descend_q(belief, arms, 1, 0, cfg, np.random.default_rng(s))
            for s in range(n_seeds)
        ]
        slow = [
            naive_descend_q(belief, arms, (1,), 0, cfg, np.random.default_rng(10_000 + s))
            for s in range(n_seeds)
        ]
        se = math.sqrt(np.var(fast) / n_seeds + np.var(slow) / n_seeds)
        assert abs(np.mean(fast) - np.mean(slow)) < 4 * se + 1e-9

    def test_h2_mean_value_matches(self):
        feats = np.array([[0.0, 0.0], [1.5, 0.5], [-1.0, 1.0]])
        belief = GPBelief.from_data(RBF, 0.1, [[0.2, 0.2]], [0.5])
        arms = arm_set(feats)
        cfg = TreeConfig(horizon=2, branches=2, thompson_samples=2,
                         reward_mode=RewardMode.CUMULATIVE)
        n_seeds = 400
        fast = [
            descend_q(belief, arms, 0, 0, cfg, np.random.default_rng(s))
            for s in range(n_seeds)
        ]
        slow = [
            naive_descend_q(belief, arms, (0,), 0, cfg, np.random.default_rng(20_000 + s))
            for s in range(n_seeds)
        ]
        se = math.sqrt(np.var(fast) / n_seeds + np.var(slow) / n_seeds)
        assert abs(np.mean(fast) - np.mean(slow)) < 4 * se + 1e-9
