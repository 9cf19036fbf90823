"""Sequential experiment design for drug screening with GP bandit policies.

The package is organized around a few small layers:

* :mod:`gpscreen.gp` — exact GP regression with incremental conditioning,
  the belief state every policy shares;
* :mod:`gpscreen.projection` — seeded Gaussian random projection;
* :mod:`gpscreen.data` — dataset CSV / descriptor ingestion and synthetic
  dataset generation;
* :mod:`gpscreen.policies` — GP-Thompson, GP-UCB, linear TS, random, and
  the sparse lookahead tree (sequential and batch);
* :mod:`gpscreen.metrics` / :mod:`gpscreen.harness` — regret accounting and
  the deterministic experiment runner;
* :mod:`gpscreen.advisor` / :mod:`gpscreen.service` — live campaigns and
  their HTTP facade.
"""

__version__ = "0.1.0"

from .data import ArmSet, Dataset, DescriptorTable, generate_synthetic, load_dataset, save_dataset
from .gp import GPBelief, KernelSpec, PosteriorGaussian, kernel_eval, kernel_matrix
from .harness import ExperimentConfig, GPSettings, ProjectionSettings, emit_results, run_experiment
from .metrics import RunRecord, average_regret, instantaneous_regret, simple_regret
from .policies import (
    Decision,
    PolicyConfig,
    RewardMode,
    TreeConfig,
    batch_gp_tree_step,
    descend_q,
    descend_v,
    gp_thompson_step,
    gp_tree_step,
    gp_ucb_step,
    make_policy,
    random_baseline_step,
    thompson_independent,
    thompson_rank,
)
from .projection import ProjectionMatrix, apply_projection, build_projection

__all__ = [
    "ArmSet",
    "Dataset",
    "Decision",
    "DescriptorTable",
    "ExperimentConfig",
    "GPBelief",
    "GPSettings",
    "KernelSpec",
    "PolicyConfig",
    "PosteriorGaussian",
    "ProjectionMatrix",
    "ProjectionSettings",
    "RewardMode",
    "RunRecord",
    "TreeConfig",
    "apply_projection",
    "average_regret",
    "batch_gp_tree_step",
    "build_projection",
    "descend_q",
    "descend_v",
    "emit_results",
    "generate_synthetic",
    "gp_thompson_step",
    "gp_tree_step",
    "gp_ucb_step",
    "instantaneous_regret",
    "kernel_eval",
    "kernel_matrix",
    "load_dataset",
    "make_policy",
    "random_baseline_step",
    "run_experiment",
    "save_dataset",
    "simple_regret",
    "thompson_independent",
    "thompson_rank",
    "__version__",
]
