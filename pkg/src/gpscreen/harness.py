"""Experiment orchestration: configs, replication, result files.

A run is fully determined by its config: replicate r of policy p draws its
stream from ``mix64(master_seed, policy_index(p), r)``, the initial reveal
and every policy decision come from that stream, and result files format
floats with ``repr``, so identical configs produce byte-identical outputs.

Each replicate reveals ``initial_reveal_count`` uniformly chosen molecules
(conditioning the belief on their true rewards, recorded as the first
steps) and then lets the policy choose until T molecules are tested.
Batch decisions append one record per molecule at consecutive t; when the
remaining budget is smaller than the batch, the final batch is truncated
to the remainder (best-ranked arms kept).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import ArmSet, Dataset, load_dataset, standardize_features
from .errors import ConfigError, DataError, InputError
from .gp import GPBelief, KernelSpec
from .metrics import RunRecord, instantaneous_regret
from .policies import Policy, PolicyConfig, make_policy, policy_index
from .projection import project_dataset
from .rng import mix64

GOALS = ("aregret", "sregret")


@dataclass(frozen=True)
class GPSettings:
    """Kernel and noise hyperparameters, fixed for a whole run."""

    lengthscale: float = 1.0
    signal_variance: float = 1.0
    noise_variance: float = 0.1

    def kernel(self) -> KernelSpec:
        return KernelSpec(lengthscale=self.lengthscale, signal_variance=self.signal_variance)


@dataclass(frozen=True)
class ProjectionSettings:
    m: int
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    policy: PolicyConfig
    goal: str = "aregret"
    horizon: int = 100
    replications: int = 20
    master_seed: int = 0
    initial_reveal_count: int = 1
    projection: ProjectionSettings | None = None
    gp: GPSettings = field(default_factory=GPSettings)
    standardize: bool = True
    output: str | None = None

    def __post_init__(self) -> None:
        if self.goal not in GOALS:
            raise ConfigError(f"goal must be one of {GOALS}, got {self.goal!r}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.initial_reveal_count < 0:
            raise ConfigError(f"initial_reveal_count must be >= 0, got {self.initial_reveal_count}")
        try:
            policy_index(self.policy.name)
        except InputError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        out = asdict(self)
        return out

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        data = dict(raw)
        try:
            policy = PolicyConfig(**data.pop("policy"))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"invalid or missing policy section: {exc}") from None
        proj = data.pop("projection", None)
        gp = data.pop("gp", None)
        try:
            return ExperimentConfig(
                policy=policy,
                projection=ProjectionSettings(**proj) if proj else None,
                gp=GPSettings(**gp) if gp else GPSettings(),
                **data,
            )
        except TypeError as exc:
            raise ConfigError(f"invalid config: {exc}") from None

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from None
        return ExperimentConfig.from_dict(raw)

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RunResult:
    config: ExperimentConfig
    digest: str
    replicates: tuple[tuple[RunRecord, ...], ...]
    summary: dict[str, np.ndarray]


def prepare_dataset(cfg: ExperimentConfig, dataset: Dataset | None = None) -> Dataset:
    """Load (or accept) the dataset and apply the configured projection."""
    ds = dataset if dataset is not None else load_dataset(cfg.dataset)
    if not ds.has_truth:
        raise DataError("simulation requires known targets for every molecule")
    if cfg.projection is not None:
        ds = project_dataset(ds, cfg.projection.m, cfg.projection.seed)
    return ds


def run_experiment(cfg: ExperimentConfig, dataset: Dataset | None = None) -> RunResult:
    """Run every replicate of the configured policy and aggregate curves.

    ``dataset`` overrides loading from ``cfg.dataset`` (used by callers that
    already hold one); it receives the same projection/standardization.
    """
    ds = prepare_dataset(cfg, dataset)
    if cfg.horizon > len(ds):
        raise ConfigError(f"horizon {cfg.horizon} exceeds {len(ds)} candidate molecules")
    feats = ds.features
    if cfg.standardize:
        feats, _ = standardize_features(feats)
    target_range = ds.y_range or (float(ds.targets.min()), float(ds.targets.max()))
    p_index = policy_index(cfg.policy.name)

    replicates = []
    for rep in range(cfg.replications):
        policy = make_policy(cfg.policy, cfg.goal, cfg.horizon, target_range)
        seed = mix64(cfg.master_seed, p_index, rep)
        replicates.append(tuple(_simulate(policy, ds, feats, cfg, seed)))
    return RunResult(cfg, cfg.digest(), tuple(replicates), _summarize(replicates, cfg.horizon))


def _simulate(policy: Policy, ds: Dataset, feats: np.ndarray,
              cfg: ExperimentConfig, seed: int) -> list[RunRecord]:
    rng = np.random.default_rng(seed)
    r_star = float(ds.targets.max())
    belief = GPBelief.empty(cfg.gp.kernel(), cfg.gp.noise_variance)
    arms = ArmSet(ds.ids, feats, tuple(range(len(ds))))

    records: list[RunRecord] = []
    total_regret = 0.0
    best = -math.inf

    def record(arm: int) -> None:
        nonlocal total_regret, best
        y = float(ds.targets[arm])
        best = max(best, y)
        ireg = instantaneous_regret(r_star, y)
        if ireg < 0:
            raise DataError(f"negative instantaneous regret for arm {ds.ids[arm]}")
        total_regret += ireg
        records.append(RunRecord(
            t=len(records) + 1,
            arm_id=ds.ids[arm],
            y_observed=y,
            r_star=r_star,
            iregret=ireg,
            running_aregret=total_regret / (len(records) + 1),
            best_so_far=best,
        ))

    reveal = min(cfg.initial_reveal_count, cfg.horizon, len(ds))
    if reveal:
        shown = [int(i) for i in rng.choice(len(ds), size=reveal, replace=False)]
        for arm in shown:
            record(arm)
            policy.observe(feats[arm], float(ds.targets[arm]))
        belief = belief.condition_many(feats[shown], ds.targets[shown])
        arms = arms.mark_tested(shown)

    while len(records) < cfg.horizon:
        decision = policy.decide(belief, arms, len(records) + 1, rng)
        chosen = list(decision.arm_indices)[: cfg.horizon - len(records)]
        for arm in chosen:
            record(arm)
            policy.observe(feats[arm], float(ds.targets[arm]))
        belief = belief.condition_many(feats[chosen], ds.targets[chosen])
        arms = arms.mark_tested(chosen)
    return records


def _summarize(replicates, T: int) -> dict[str, np.ndarray]:
    """Per-t mean and standard error of both regret curves across replicates."""
    areg = np.array([[r.running_aregret for r in rep] for rep in replicates])
    sreg = np.array([[rep[0].r_star - r.best_so_far for r in rep] for rep in replicates])
    n = areg.shape[0]

    def se(mat):
        if n < 2:
            return np.zeros(T)
        return mat.std(axis=0, ddof=1) / math.sqrt(n)

    return {
        "t": np.arange(1, T + 1),
        "aregret_mean": areg.mean(axis=0),
        "aregret_se": se(areg),
        "sregret_mean": sreg.mean(axis=0),
        "sregret_se": se(sreg),
    }


# ----------------------------------------------------------------------
# result files
# ----------------------------------------------------------------------


def emit_results(result: RunResult, out_dir) -> dict[str, Path]:
    """Write records.csv, summary.csv and config.json under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config

    records_path = out / "records.csv"
    with open(records_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["policy", "goal", "rep", "t", "arm_id", "y", "iregret", "avg_regret",
             "simple_regret"]
        )
        for rep_i, rep in enumerate(result.replicates):
            for r in rep:
                writer.writerow([
                    cfg.policy.name, cfg.goal, rep_i, r.t, r.arm_id,
                    repr(r.y_observed), repr(r.iregret), repr(r.running_aregret),
                    repr(r.r_star - r.best_so_far),
                ])

    summary_path = out / "summary.csv"
    s = result.summary
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "aregret_mean", "aregret_se", "sregret_mean", "sregret_se"])
        for i in range(len(s["t"])):
            writer.writerow([
                int(s["t"][i]),
                repr(float(s["aregret_mean"][i])), repr(float(s["aregret_se"][i])),
                repr(float(s["sregret_mean"][i])), repr(float(s["sregret_se"][i])),
            ])

    config_path = out / "config.json"
    payload = dict(result.config.to_dict(), digest=result.digest)
    config_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    return {"records": records_path, "summary": summary_path, "config": config_path}


def verify_records(path) -> list[str]:
    """Re-validate the per-record metric invariants of a records.csv file.

    Returns a list of human-readable problems (empty means the file is
    internally consistent).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"records file not found: {path}")
    problems: list[str] = []
    groups: dict[tuple[str, str, str], list[dict]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"policy", "goal", "rep", "t", "arm_id", "y", "iregret",
                    "avg_regret", "simple_regret"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError(f"{path}: missing columns {sorted(required)}")
        for row in reader:
            groups.setdefault((row["policy"], row["goal"], row["rep"]), []).append(row)

    for key, rows in groups.items():
        label = f"policy={key[0]} goal={key[1]} rep={key[2]}"
        running = 0.0
        best_gap = math.inf
        r_star_ref = None
        seen_arms = set()
        for i, row in enumerate(rows):
            t = int(row["t"])
            y, ireg = float(row["y"]), float(row["iregret"])
            avg, simple = float(row["avg_regret"]), float(row["simple_regret"])
            if t != i + 1:
                problems.append(f"{label}: t jumps to {t} at position {i + 1}")
            if ireg < 0:
                problems.append(f"{label} t={t}: negative iregret {ireg}")
            if row["arm_id"] in seen_arms:
                problems.append(f"{label} t={t}: arm {row['arm_id']} repeated")
            seen_arms.add(row["arm_id"])
            r_star = y + ireg
            if r_star_ref is None:
                r_star_ref = r_star
            elif abs(r_star - r_star_ref) > 1e-9:
                problems.append(f"{label} t={t}: inconsistent r* ({r_star} vs {r_star_ref})")
            running += ireg
            if abs(avg - running / t) > 1e-9:
                problems.append(f"{label} t={t}: avg_regret {avg} != running mean {running / t}")
            best_gap = min(best_gap, ireg)
            if abs(simple - best_gap) > 1e-9:
                problems.append(f"{label} t={t}: simple_regret {simple} != min iregret {best_gap}")
            if simple > avg + 1e-9:
                problems.append(f"{label} t={t}: simple_regret exceeds avg_regret")
    return problems
