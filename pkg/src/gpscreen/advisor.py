"""Live screening campaigns: suggest molecules, record assay results.

A campaign is a directory holding the candidate file, the policy
configuration and an append-only observation log (one JSON object per
line).  Loading replays the log, so the belief, the policy state and the
next suggestion are reconstructed deterministically; ``suggest`` never
mutates anything and draws its randomness from
``mix64(campaign seed, number of observations)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import ArmSet, Dataset, load_dataset, save_dataset, standardize_features
from .errors import ConfigError, DataError, InputError
from .gp import GPBelief
from .harness import GPSettings
from .metrics import instantaneous_regret
from .policies import Decision, Policy, PolicyConfig, make_policy, policy_index
from .rng import mix64

CAMPAIGN_FILE = "campaign.json"
CANDIDATES_FILE = "candidates.csv"
LOG_FILE = "observations.jsonl"


@dataclass(frozen=True)
class CampaignConfig:
    policy: PolicyConfig
    goal: str = "aregret"
    seed: int = 0
    horizon: int = 100
    gp: GPSettings = field(default_factory=GPSettings)
    standardize: bool = True

    def __post_init__(self) -> None:
        if self.goal not in ("aregret", "sregret"):
            raise ConfigError(f"goal must be 'aregret' or 'sregret', got {self.goal!r}")
        policy_index(self.policy.name)

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(raw: dict) -> "CampaignConfig":
        data = dict(raw)
        try:
            policy = PolicyConfig(**data.pop("policy"))
            gp = GPSettings(**data.pop("gp")) if "gp" in data else GPSettings()
            return CampaignConfig(policy=policy, gp=gp, **data)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"invalid campaign config: {exc}") from None


class Campaign:
    """One persisted suggest/observe loop over a fixed candidate set.

    Mutations go through :meth:`observe` (the service serializes them per
    campaign); reads grab the single ``_snapshot`` attribute, so a
    concurrent observe can never hand a reader a mismatched belief/arms
    pair.
    """

    def __init__(self, root: Path, dataset: Dataset, config: CampaignConfig,
                 observations: list[tuple[str, float]]):
        self.root = Path(root)
        self.dataset = dataset
        self.config = config
        feats = dataset.features
        if config.standardize:
            feats, _ = standardize_features(feats)
        self._features = feats
        self.observations: list[tuple[str, float]] = []
        self._policy = self._fresh_policy()
        belief = GPBelief.empty(config.gp.kernel(), config.gp.noise_variance)
        arms = ArmSet(dataset.ids, feats, tuple(range(len(dataset))))
        self._snapshot: tuple[GPBelief, ArmSet, int] = (belief, arms, 0)
        for arm_id, y in observations:
            self._apply(arm_id, y)

    def _fresh_policy(self) -> Policy:
        ds = self.dataset
        if ds.has_truth and len(ds):
            rng_pair = ds.y_range or (float(ds.targets.min()), float(ds.targets.max()))
        else:
            rng_pair = ds.y_range
        return make_policy(self.config.policy, self.config.goal, self.config.horizon, rng_pair)

    # ------------------------------------------------------------------
    # lifecycle
    # ------------------------------------------------------------------

    @classmethod
    def create(cls, root, dataset: Dataset, config: CampaignConfig) -> "Campaign":
        root = Path(root)
        if (root / CAMPAIGN_FILE).exists():
            raise ConfigError(f"campaign already exists at {root}")
        root.mkdir(parents=True, exist_ok=True)
        save_dataset(dataset, root / CANDIDATES_FILE)
        (root / CAMPAIGN_FILE).write_text(
            json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (root / LOG_FILE).touch()
        return cls(root, dataset, config, [])

    @classmethod
    def load(cls, root) -> "Campaign":
        root = Path(root)
        meta = root / CAMPAIGN_FILE
        if not meta.exists():
            raise ConfigError(f"no campaign at {root}")
        config = CampaignConfig.from_dict(json.loads(meta.read_text(encoding="utf-8")))
        dataset = load_dataset(root / CANDIDATES_FILE, require_targets=False)
        observations = []
        log = root / LOG_FILE
        if log.exists():
            for lineno, line in enumerate(log.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                    observations.append((str(entry["arm_id"]), float(entry["y"])))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    raise DataError(f"{log}: line {lineno} is corrupt: {exc}") from None
        return cls(root, dataset, config, observations)

    # ------------------------------------------------------------------
    # the suggest / observe loop
    # ------------------------------------------------------------------

    @property
    def complete(self) -> bool:
        return not self._snapshot[1].untested

    def suggest(self) -> Decision | None:
        """Next decision, or None when every candidate has been observed.

        Pure: repeated calls without an intervening observe return the
        same suggestion.
        """
        belief, arms, n_obs = self._snapshot
        if not arms.untested:
            return None
        rng = np.random.default_rng(mix64(self.config.seed, n_obs))
        return self._policy.decide(belief, arms, n_obs + 1, rng)

    def observe(self, arm_id: str, y: float) -> None:
        """Record a real assay outcome; appends to the log, then updates state."""
        y = float(y)
        if not math.isfinite(y):
            raise InputError(f"observed value must be finite, got {y}")
        idx = self.dataset.index_of(arm_id)  # raises DataError on unknown id
        if idx not in self._snapshot[1].untested:
            raise DataError(f"arm {arm_id!r} was already observed")
        with open(self.root / LOG_FILE, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"arm_id": arm_id, "y": y}) + "\n")
        self._apply(arm_id, y)

    def _apply(self, arm_id: str, y: float) -> None:
        belief, arms, n_obs = self._snapshot
        idx = self.dataset.index_of(arm_id)
        if idx not in arms.untested:
            raise DataError(f"arm {arm_id!r} observed twice in the log")
        x = self._features[idx]
        self._policy.observe(x, y)
        self.observations.append((arm_id, float(y)))
        self._snapshot = (belief.condition(x, y), arms.mark_tested([idx]), n_obs + 1)

    def whatif(self, arm_id: str, y: float) -> Decision | None:
        """Suggestion after a hypothetical observation, on a cloned belief.

        The campaign itself is untouched; two consecutive ``suggest`` calls
        around a ``whatif`` return identical decisions.
        """
        y = float(y)
        if not math.isfinite(y):
            raise InputError(f"hypothetical value must be finite, got {y}")
        idx = self.dataset.index_of(arm_id)
        if idx not in self._snapshot[1].untested:
            raise DataError(f"arm {arm_id!r} was already observed")
        clone = Campaign(self.root, self.dataset, self.config,
                         self.observations + [(arm_id, y)])
        return clone.suggest()

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------

    def posterior(self, arm_ids: list[str]) -> list[dict]:
        """Posterior mean and std of f for the requested arms."""
        belief = self._snapshot[0]
        idx = [self.dataset.index_of(a) for a in arm_ids]
        mean, var = belief.posterior_marginals(self._features[idx])
        return [
            {"arm_id": a, "mean": float(m), "std": float(math.sqrt(v))}
            for a, m, v in zip(arm_ids, mean, var)
        ]

    def status(self) -> dict:
        out = {
            "n_candidates": len(self.dataset),
            "n_observed": len(self.observations),
            "status": "complete" if self.complete else "active",
            "has_truth": self.dataset.has_truth,
        }
        if self.observations:
            ys = [y for _, y in self.observations]
            out["best_observed"] = max(ys)
            if self.dataset.has_truth:
                r_star = float(self.dataset.targets.max())
                gaps = [instantaneous_regret(r_star, y) for y in ys]
                out["regret"] = {
                    "average": sum(gaps) / len(gaps),
                    "simple": min(gaps),
                }
        return out
