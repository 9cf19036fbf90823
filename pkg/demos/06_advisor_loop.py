"""A live advisory session: suggest, run the assay, report back.

Simulates the scientist with a hidden reward function; in a real campaign
the observe() values would come from the lab. Shows the what-if panel's
contract: hypothetical observations never change the campaign.

Run:  python demos/06_advisor_loop.py
"""

import tempfile
from pathlib import Path

import numpy as np

from gpscreen.advisor import Campaign, CampaignConfig
from gpscreen.data import Dataset
from gpscreen.harness import GPSettings
from gpscreen.policies import PolicyConfig

rng = np.random.default_rng(21)
feats = rng.standard_normal((30, 6))
hidden = np.tanh(feats @ (rng.standard_normal(6) / 2.0)) * 3.0 + 5.0

# The uploaded candidate file would normally have blank y cells; here we
# keep the truth around so the demo can play the lab's role.
candidates = Dataset("demo-campaign", tuple(f"mol-{i:02d}" for i in range(30)),
                     feats, hidden)

root = Path(tempfile.mkdtemp(prefix="gpscreen-advisor-")) / "campaign"
campaign = Campaign.create(root, candidates, CampaignConfig(
    policy=PolicyConfig("batch-gp-tree", thompson_samples=8, branches=2, batch_size=3),
    goal="aregret",
    seed=4,
    gp=GPSettings(lengthscale=np.sqrt(6), noise_variance=0.1),
))
print(f"campaign at {root} with {len(candidates)} candidates\n")

for round_no in range(1, 4):
    decision = campaign.suggest()
    ids = [candidates.ids[i] for i in decision.arm_indices]
    print(f"round {round_no}: advisor suggests {', '.join(ids)}")
    for arm_id in ids:
        y = float(hidden[candidates.index_of(arm_id)])
        campaign.observe(arm_id, y)
        print(f"  assay result {arm_id} = {y:.3f}")

# What-if: preview how a hypothetical blockbuster result would redirect
# the search, without committing anything.
next_up = campaign.suggest()
probe = candidates.ids[next_up.arm_indices[0]]
hypothetical = campaign.whatif(probe, 9.5)
print(f"\nwhat if {probe} came back at 9.5? next suggestion would be "
      f"{[candidates.ids[i] for i in hypothetical.arm_indices]}")
print(f"campaign unchanged: suggest() still returns "
      f"{[candidates.ids[i] for i in campaign.suggest().arm_indices]}")

status = campaign.status()
print(f"\nstatus: {status['n_observed']}/{status['n_candidates']} observed, "
      f"best {status['best_observed']:.3f}, "
      f"running average regret {status['regret']['average']:.3f}")

# Reloading from disk replays the observation log deterministically.
reloaded = Campaign.load(root)
assert reloaded.suggest() == campaign.suggest()
print("reload from the append-only log reproduces the same suggestion")
