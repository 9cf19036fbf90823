"""Inside one lookahead decision: candidates, fantasy branches, values.

Run:  python demos/04_lookahead_tree.py
"""

import numpy as np

from gpscreen import GPBelief, KernelSpec, RewardMode, TreeConfig
from gpscreen.data import ArmSet
from gpscreen.policies import descend_q, gp_tree_step

rng = np.random.default_rng(1)

# Nine candidate molecules on a line; the belief has seen two of the
# mediocre ones, so everything far from them is still uncertain.
feats = np.linspace(-2.0, 2.0, 9)[:, None]
arms = ArmSet(tuple(f"mol-{i}" for i in range(9)), feats, tuple(range(9)))
belief = (GPBelief.empty(KernelSpec(), 0.1)
          .condition([-2.0], 0.1)
          .condition([-1.5], 0.3))

cfg = TreeConfig(horizon=1, branches=4, thompson_samples=5,
                 reward_mode=RewardMode.TERMINAL)

# descend_q scores a single action: K fantasy outcomes are drawn, the
# belief is conditioned on each, and the leaf takes the max of one joint
# posterior draw over all molecules.
for arm in (0, 4, 8):
    value = descend_q(belief, arms, arm, 0, cfg, np.random.default_rng(10 + arm))
    print(f"descend_q(mol-{arm}) = {value:.4f}")

# gp_tree_step wraps the whole decision: Thompson-sampled root candidates,
# one descend_q each, best value wins. The diagnostics expose every
# candidate's estimated value.
decision = gp_tree_step(belief, arms, cfg, np.random.default_rng(99))
print("\nroot candidate values:")
for cand, value in sorted(decision.scores.items(), key=lambda kv: -kv[1]):
    marker = "  <- play this" if cand == decision.arm_indices else ""
    print(f"  mol-{cand[0]}: {value:.4f}{marker}")
print(f"\nconditionings used: {decision.conditionings} "
      f"(= n*K = {cfg.thompson_samples * cfg.branches} at horizon 1)")
