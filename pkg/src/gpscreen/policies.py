"""Action-selection policies for sequential and batch screening.

Flat policies (GP-Thompson, GP-UCB, random, linear TS) pick the next
molecule from the current posterior alone.  The lookahead policies build a
sparse tree over hypothetical futures: candidate actions are restricted to
Thompson samples and the outcome integral at each node is replaced by K
Monte Carlo branches, each conditioning the belief on a fantasy outcome.

Tree evaluation works in candidate space.  Once per decision the posterior
mean and covariance over all untested arms are computed and factorized;
every fantasy belief inside the tree is then a Gaussian conditional within
that joint distribution, and fantasy-conditioned function draws use the
pathwise update

    f | (y_B) = g + Cov[:, B] (Cov[B, B] + noise I)^-1 (y_B - g[B] - eps)

with g a fresh root draw and eps fresh observation noise.  This is exact
(conditioning a GP on candidate-set points commutes with restriction to
the candidate set) and avoids refactorizing per node, so batch selection
stays tractable on thousands of arms.

Randomness: every node spawns independent child streams up front
(``Generator.spawn``), so branch evaluations are order-independent and a
decision is a pure function of (belief, arms, config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .data import ArmSet
from .errors import InputError
from .gp import GPBelief, _sampling_chol
from .linear_ts import LinTSState, lints_init, lints_step, lints_update

SOLVE_JITTER = 1e-9


class RewardMode(Enum):
    """What a fantasy branch contributes while descending the tree.

    CUMULATIVE credits every sampled outcome (optimize average regret);
    TERMINAL zeroes intermediate rewards so only leaf maxima matter
    (optimize simple regret).
    """

    CUMULATIVE = "cumulative"
    TERMINAL = "terminal"


@dataclass(frozen=True)
class TreeConfig:
    """Lookahead settings: horizon h, branches K, Thompson samples n, batch b."""

    horizon: int = 1
    branches: int = 2
    thompson_samples: int = 10
    batch_size: int = 1
    reward_mode: RewardMode = RewardMode.CUMULATIVE
    fantasy_noise: bool = True

    def __post_init__(self) -> None:
        for field_name in ("horizon", "branches", "thompson_samples", "batch_size"):
            if getattr(self, field_name) < 1:
                raise InputError(f"{field_name} must be >= 1, got {getattr(self, field_name)}")


@dataclass(frozen=True)
class Decision:
    """A chosen arm (or batch) with per-candidate diagnostic values."""

    arm_indices: tuple[int, ...]
    scores: dict[tuple[int, ...], float]
    conditionings: int = 0

    def __post_init__(self) -> None:
        if not self.arm_indices:
            raise InputError("a Decision must name at least one arm")
        if len(set(self.arm_indices)) != len(self.arm_indices):
            raise InputError(f"arm indices must be distinct, got {self.arm_indices}")


def _require_untested(arms: ArmSet) -> None:
    if not arms.untested:
        raise InputError("no untested arms remain")


# ----------------------------------------------------------------------
# Thompson set selection
# ----------------------------------------------------------------------


def thompson_rank(belief: GPBelief, arms: ArmSet, n: int, rng: np.random.Generator) -> list[int]:
    """Top-n untested arms of a single joint posterior draw, best first."""
    _require_untested(arms)
    if not 1 <= n <= len(arms.untested):
        raise InputError(f"n must be in [1, {len(arms.untested)}], got {n}")
    sample = belief.sample_function_values(arms.untested_features, rng)
    order = np.argsort(-sample, kind="stable")[:n]
    return [arms.untested[i] for i in order]


def thompson_independent(
    belief: GPBelief, arms: ArmSet, n: int, rng: np.random.Generator
) -> list[int]:
    """n arms from n independent joint draws, selected without replacement.

    The k-th selection is the argmax of the k-th draw over arms not chosen
    by earlier draws.
    """
    _require_untested(arms)
    if not 1 <= n <= len(arms.untested):
        raise InputError(f"n must be in [1, {len(arms.untested)}], got {n}")
    draws = belief.sample_function_values(arms.untested_features, rng, size=n)
    return [arms.untested[i] for i in _argmax_without_replacement(draws)]


def _argmax_without_replacement(draws: np.ndarray) -> list[int]:
    picked: list[int] = []
    scratch = draws.copy()
    for k in range(draws.shape[0]):
        if picked:
            scratch[k, picked] = -np.inf
        picked.append(int(np.argmax(scratch[k])))
    return picked


# ----------------------------------------------------------------------
# flat policies
# ----------------------------------------------------------------------


def gp_thompson_step(belief: GPBelief, arms: ArmSet, rng: np.random.Generator) -> Decision:
    """Play the argmax of one joint posterior draw over untested arms."""
    _require_untested(arms)
    sample = belief.sample_function_values(arms.untested_features, rng)
    best = int(np.argmax(sample))
    chosen = arms.untested[best]
    return Decision((chosen,), {(chosen,): float(sample[best])})


def ucb_beta(t: int, delta: float, d_size: int) -> float:
    """Confidence scaling 2 ln(|D| t^2 pi^2 / (6 delta))."""
    if t < 1:
        raise InputError(f"t must be >= 1, got {t}")
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must be in (0, 1), got {delta}")
    if d_size < 1:
        raise InputError(f"d_size must be >= 1, got {d_size}")
    return 2.0 * math.log(d_size * t**2 * math.pi**2 / (6.0 * delta))


def _ucb_scores(mean: np.ndarray, var: np.ndarray, beta: float) -> np.ndarray:
    return mean + math.sqrt(beta) * np.sqrt(var)


def gp_ucb_step(
    belief: GPBelief, arms: ArmSet, t: int, delta: float, d_size: int | None = None
) -> Decision:
    """Play the untested arm maximizing mean + sqrt(beta_t) * std."""
    _require_untested(arms)
    beta = ucb_beta(t, delta, len(arms) if d_size is None else d_size)
    mean, var = belief.posterior_marginals(arms.untested_features)
    scores = _ucb_scores(mean, var, beta)
    best = int(np.argmax(scores))
    chosen = arms.untested[best]
    return Decision((chosen,), {(chosen,): float(scores[best])})


def random_baseline_step(arms: ArmSet, rng: np.random.Generator) -> Decision:
    """Uniform choice among untested arms (control baseline)."""
    _require_untested(arms)
    chosen = arms.untested[int(rng.integers(len(arms.untested)))]
    return Decision((chosen,), {(chosen,): 0.0})


# ----------------------------------------------------------------------
# sparse lookahead tree
# ----------------------------------------------------------------------


class _TreeSearch:
    """Per-decision cache: root posterior over the untested candidate set.

    ``scheme`` picks how interior action sets are proposed: "independent"
    (one arm per independent draw, without replacement) for the sequential
    tree, "rank" (top-b of each draw) for the batch tree.
    """

    def __init__(self, belief: GPBelief, arms: ArmSet, cfg: TreeConfig, scheme: str):
        _require_untested(arms)
        self.cfg = cfg
        self.scheme = scheme
        self.globals = arms.untested
        self.noise = belief.noise_variance
        post = belief.posterior(arms.untested_features)
        self.mean = post.mean
        self.chol = _sampling_chol(post.covariance)
        self.cov = post.covariance
        self.q = self.mean.size
        self.conditionings = 0

    def joint_draw(self, f_idx: tuple[int, ...], f_y: tuple[float, ...],
                   rng: np.random.Generator) -> np.ndarray:
        """One joint draw of f over all candidates under the fantasy belief."""
        g = self.mean + self.chol @ rng.standard_normal(self.q)
        if not f_idx:
            return g
        B = list(f_idx)
        S = self.cov[np.ix_(B, B)] + (self.noise + SOLVE_JITTER) * np.eye(len(B))
        eps = math.sqrt(self.noise) * rng.standard_normal(len(B)) if self.noise > 0 else 0.0
        resid = np.asarray(f_y) - g[B] - eps
        return g + self.cov[:, B] @ np.linalg.solve(S, resid)

    def propose_actions(self, f_idx, f_y, size: int,
                        rng: np.random.Generator) -> list[tuple[int, ...]]:
        """Thompson-sampled action set (local indices), one entry per draw.

        Independent scheme: n distinct single arms, selected without
        replacement (n capped at the candidate count).  Rank scheme: the
        top-``size`` arms of each of n draws, duplicate batches merged;
        n is a sample count there and needs no cap.
        """
        if self.scheme == "independent":
            n = min(self.cfg.thompson_samples, self.q)
            draws = np.stack([self.joint_draw(f_idx, f_y, r) for r in rng.spawn(n)])
            return [(i,) for i in _argmax_without_replacement(draws)]
        n = self.cfg.thompson_samples
        batches: list[tuple[int, ...]] = []
        seen: set[tuple[int, ...]] = set()
        for draw_rng in rng.spawn(n):
            draw = self.joint_draw(f_idx, f_y, draw_rng)
            top = tuple(int(i) for i in np.argsort(-draw, kind="stable")[:size])
            key = tuple(sorted(top))
            if key not in seen:
                seen.add(key)
                batches.append(top)
        return batches


def _step_reward(mode: RewardMode, y_values: np.ndarray) -> float:
    """Reward a fantasy branch contributes at an intermediate node."""
    if mode is RewardMode.TERMINAL:
        return 0.0
    return float(np.sum(y_values))


def _descend_q(ctx: _TreeSearch, f_idx: tuple[int, ...], f_y: tuple[float, ...],
               action: tuple[int, ...], depth: int, rng: np.random.Generator) -> float:
    """Value of playing ``action`` here: mean over K fantasy branches."""
    cfg = ctx.cfg
    total = 0.0
    for branch_rng in rng.spawn(cfg.branches):
        draw = ctx.joint_draw(f_idx, f_y, branch_rng)
        f_vals = draw[list(action)]
        if cfg.fantasy_noise and ctx.noise > 0:
            y_vals = f_vals + math.sqrt(ctx.noise) * branch_rng.standard_normal(len(action))
        else:
            y_vals = f_vals
        ctx.conditionings += 1
        child_idx = f_idx + action
        child_y = f_y + tuple(float(v) for v in y_vals)
        total += _step_reward(cfg.reward_mode, y_vals) + _descend_v(
            ctx, child_idx, child_y, depth + 1, branch_rng
        )
    return total / cfg.branches


def _descend_v(ctx: _TreeSearch, f_idx: tuple[int, ...], f_y: tuple[float, ...],
               depth: int, rng: np.random.Generator) -> float:
    """Value of a belief node: leaf max at the horizon, else best action."""
    if depth >= ctx.cfg.horizon:
        return float(ctx.joint_draw(f_idx, f_y, rng).max())
    gen_rng, eval_root = rng.spawn(2)
    actions = ctx.propose_actions(f_idx, f_y, ctx.cfg.batch_size, gen_rng)
    action_rngs = eval_root.spawn(len(actions))
    return max(
        _descend_q(ctx, f_idx, f_y, action, depth, r)
        for action, r in zip(actions, action_rngs)
    )


def descend_q(belief: GPBelief, arms: ArmSet, x, depth: int, cfg: TreeConfig,
              rng: np.random.Generator) -> float:
    """Estimated value of playing arm (or batch) ``x`` at ``depth``.

    ``x`` is a global arm index or a sequence of them; every index must be
    untested.
    """
    if depth >= cfg.horizon:
        raise InputError(f"depth must be < horizon {cfg.horizon}, got {depth}")
    action_globals = (int(x),) if np.ndim(x) == 0 else tuple(int(i) for i in x)
    local = {g: i for i, g in enumerate(arms.untested)}
    missing = [g for g in action_globals if g not in local]
    if missing:
        raise InputError(f"arms {missing} are not untested")
    scheme = "rank" if cfg.batch_size > 1 else "independent"
    ctx = _TreeSearch(belief, arms, cfg, scheme=scheme)
    return _descend_q(ctx, (), (), tuple(local[g] for g in action_globals), depth, rng)


def descend_v(belief: GPBelief, arms: ArmSet, depth: int, cfg: TreeConfig,
              rng: np.random.Generator) -> float:
    """Estimated value of the belief itself at ``depth``."""
    if depth > cfg.horizon:
        raise InputError(f"depth must be <= horizon {cfg.horizon}, got {depth}")
    scheme = "rank" if cfg.batch_size > 1 else "independent"
    ctx = _TreeSearch(belief, arms, cfg, scheme=scheme)
    return _descend_v(ctx, (), (), depth, rng)


def _pick_best(candidates: list[tuple[int, ...]], values: list[float]) -> int:
    """Index of the best candidate; ties break to the smallest arm indices."""
    best = max(values)
    tied = [i for i, v in enumerate(values) if v == best]
    return min(tied, key=lambda i: tuple(sorted(candidates[i])))


def gp_tree_step(belief: GPBelief, arms: ArmSet, cfg: TreeConfig,
                 rng: np.random.Generator) -> Decision:
    """One sequential lookahead decision.

    Root candidates are n independent Thompson selections; each is scored
    by :func:`descend_q` from depth 0 and the best is played.
    """
    _require_untested(arms)
    if not 1 <= cfg.thompson_samples <= len(arms.untested):
        raise InputError(
            f"thompson_samples must be in [1, {len(arms.untested)}], got {cfg.thompson_samples}"
        )
    ctx = _TreeSearch(belief, arms, cfg, scheme="independent")
    gen_rng, eval_root = rng.spawn(2)
    candidates = ctx.propose_actions((), (), 1, gen_rng)
    cand_rngs = eval_root.spawn(len(candidates))
    values = [_descend_q(ctx, (), (), c, 0, r) for c, r in zip(candidates, cand_rngs)]
    globals_ = [tuple(ctx.globals[i] for i in c) for c in candidates]
    best = _pick_best(globals_, values)
    return Decision(globals_[best], dict(zip(globals_, values)), ctx.conditionings)


def batch_gp_tree_step(belief: GPBelief, arms: ArmSet, cfg: TreeConfig,
                       rng: np.random.Generator) -> Decision:
    """One batch lookahead decision: play ``batch_size`` arms at once.

    Candidate batches are the top-b arms of each of n joint draws
    (duplicate batches merged); a batch is scored by drawing and
    conditioning on all b fantasy outcomes jointly before recursing.
    """
    _require_untested(arms)
    if cfg.batch_size > len(arms.untested):
        raise InputError(
            f"batch_size {cfg.batch_size} exceeds {len(arms.untested)} untested arms"
        )
    ctx = _TreeSearch(belief, arms, cfg, scheme="rank")
    gen_rng, eval_root = rng.spawn(2)
    candidates = ctx.propose_actions((), (), cfg.batch_size, gen_rng)
    cand_rngs = eval_root.spawn(len(candidates))
    values = [_descend_q(ctx, (), (), c, 0, r) for c, r in zip(candidates, cand_rngs)]
    globals_ = [tuple(ctx.globals[i] for i in c) for c in candidates]
    best = _pick_best(globals_, values)
    return Decision(globals_[best], dict(zip(globals_, values)), ctx.conditionings)


# ----------------------------------------------------------------------
# registry
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PolicyConfig:
    """Per-policy knobs; unset delta/R fall back to goal- or data-driven defaults."""

    name: str
    horizon: int = 1
    branches: int = 2
    thompson_samples: int = 10
    batch_size: int = 1
    delta: float | None = None
    R: float | None = None
    fantasy_noise: bool = True


class Policy:
    """Harness-facing adapter: decide on arms, observe outcomes."""

    def decide(self, belief: GPBelief, arms: ArmSet, t: int,
               rng: np.random.Generator) -> Decision:
        raise NotImplementedError

    def observe(self, x: np.ndarray, y: float) -> None:
        """Hook for policies with internal state beyond the GP belief."""


class RandomPolicy(Policy):
    def decide(self, belief, arms, t, rng):
        return random_baseline_step(arms, rng)


class GPThompsonPolicy(Policy):
    def decide(self, belief, arms, t, rng):
        return gp_thompson_step(belief, arms, rng)


class GPUCBPolicy(Policy):
    def __init__(self, delta: float):
        self.delta = delta

    def decide(self, belief, arms, t, rng):
        return gp_ucb_step(belief, arms, t, self.delta, d_size=len(arms))


class LinTSPolicy(Policy):
    def __init__(self, R: float, delta: float, T: int):
        self.R, self.delta, self.T = R, delta, max(T, 2)
        self.state: LinTSState | None = None

    def decide(self, belief, arms, t, rng):
        if self.state is None:
            self.state = lints_init(arms.features.shape[1], self.R, self.delta, self.T)
        chosen = lints_step(self.state, arms, rng)
        return Decision((chosen,), {(chosen,): 0.0})

    def observe(self, x, y):
        if self.state is None:
            self.state = lints_init(np.asarray(x).size, self.R, self.delta, self.T)
        self.state = lints_update(self.state, x, y)


class GPTreePolicy(Policy):
    def __init__(self, cfg: TreeConfig):
        self.cfg = cfg

    def decide(self, belief, arms, t, rng):
        cfg = replace(self.cfg, thompson_samples=min(self.cfg.thompson_samples,
                                                     len(arms.untested)))
        return gp_tree_step(belief, arms, cfg, rng)


class BatchGPTreePolicy(Policy):
    def __init__(self, cfg: TreeConfig):
        self.cfg = cfg

    def decide(self, belief, arms, t, rng):
        # tail rule: the final batch shrinks to what is left to test
        cfg = replace(self.cfg, batch_size=min(self.cfg.batch_size, len(arms.untested)))
        return batch_gp_tree_step(belief, arms, cfg, rng)


POLICY_NAMES = ("random", "gp-thompson", "gp-ucb", "lin-ts", "gp-tree", "batch-gp-tree")


def policy_index(name: str) -> int:
    """Stable ordinal of a policy name, used in replicate seed derivation."""
    try:
        return POLICY_NAMES.index(name)
    except ValueError:
        raise InputError(f"unknown policy {name!r}; known: {', '.join(POLICY_NAMES)}") from None


def make_policy(config: PolicyConfig, goal: str, horizon: int,
                target_range: tuple[float, float] | None = None) -> Policy:
    """Instantiate a registered policy with goal-aware defaults.

    delta defaults to 0.99 when optimizing simple regret and 0.01 for
    average regret; R defaults to half the dataset target range.  The
    reward mode follows the goal: average regret uses cumulative fantasy
    rewards, simple regret zeroes intermediate rewards (terminal mode).
    """
    if goal not in ("aregret", "sregret"):
        raise InputError(f"goal must be 'aregret' or 'sregret', got {goal!r}")
    delta = config.delta if config.delta is not None else (0.99 if goal == "sregret" else 0.01)
    mode = RewardMode.TERMINAL if goal == "sregret" else RewardMode.CUMULATIVE
    tree_cfg = TreeConfig(
        horizon=config.horizon,
        branches=config.branches,
        thompson_samples=config.thompson_samples,
        batch_size=config.batch_size,
        reward_mode=mode,
        fantasy_noise=config.fantasy_noise,
    )
    if config.name == "random":
        return RandomPolicy()
    if config.name == "gp-thompson":
        return GPThompsonPolicy()
    if config.name == "gp-ucb":
        return GPUCBPolicy(delta)
    if config.name == "lin-ts":
        if config.R is not None:
            R = config.R
        elif target_range is not None and target_range[1] > target_range[0]:
            R = (target_range[1] - target_range[0]) / 2.0
        else:
            R = 1.0
        return LinTSPolicy(R, delta, horizon)
    if config.name == "gp-tree":
        return GPTreePolicy(replace(tree_cfg, batch_size=1))
    if config.name == "batch-gp-tree":
        return BatchGPTreePolicy(tree_cfg)
    raise InputError(f"unknown policy {config.name!r}; known: {', '.join(POLICY_NAMES)}")
