"""Command line entry points.

Subcommands: ``run`` (a configured experiment), ``synth`` (grow a synthetic
dataset), ``project`` (random-project a dataset), ``verify`` (re-check a
records.csv), ``serve`` (start the advisor HTTP service) and ``advise``
(drive a campaign from the terminal).

Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .advisor import Campaign, CampaignConfig
from .data import generate_synthetic, load_dataset, save_dataset
from .errors import ConfigError, DataError, GPScreenError, InputError, NumericalError
from .gp import KernelSpec
from .harness import ExperimentConfig, GPSettings, emit_results, run_experiment, verify_records
from .policies import POLICY_NAMES, PolicyConfig
from .projection import project_dataset
from .service import serve_forever


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpscreen",
                                     description="GP bandit experiment design for drug screening")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--output", help="output directory (overrides config)")

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset from a source CSV")
    p_synth.add_argument("--source", required=True)
    p_synth.add_argument("--n", type=int, default=3000, help="number of synthetic molecules")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--lengthscale", type=float, default=1.0)
    p_synth.add_argument("--signal-variance", type=float, default=1.0)
    p_synth.add_argument("--noise", type=float, default=0.1)

    p_proj = sub.add_parser("project", help="random-project a dataset to m dimensions")
    p_proj.add_argument("--input", required=True)
    p_proj.add_argument("--m", type=int, default=128,
                        help="target dimension (default 128; not a value from the assay studies)")
    p_proj.add_argument("--seed", type=int, default=0)
    p_proj.add_argument("--out", required=True)

    p_verify = sub.add_parser("verify", help="re-validate a records.csv")
    p_verify.add_argument("--records", required=True)

    p_serve = sub.add_parser("serve", help="start the advisor HTTP service")
    p_serve.add_argument("--store", required=True, help="campaign store directory")
    p_serve.add_argument("--host", default=os.environ.get("GPSCREEN_HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("GPSCREEN_PORT", "8720")))
    p_serve.add_argument("--static", help="directory with the built UI bundle")

    p_adv = sub.add_parser("advise", help="drive a campaign from the terminal")
    adv_sub = p_adv.add_subparsers(dest="advise_command", required=True)

    a_init = adv_sub.add_parser("init", help="create a campaign")
    a_init.add_argument("--campaign", required=True, help="campaign directory")
    a_init.add_argument("--candidates", required=True, help="candidate CSV (y may be blank)")
    a_init.add_argument("--policy", required=True, choices=POLICY_NAMES)
    a_init.add_argument("--goal", default="aregret", choices=("aregret", "sregret"))
    a_init.add_argument("--seed", type=int, default=0)
    a_init.add_argument("--horizon", type=int, default=100)
    a_init.add_argument("--batch-size", type=int, default=1)
    a_init.add_argument("--thompson-samples", type=int, default=10)
    a_init.add_argument("--branches", type=int, default=2)
    a_init.add_argument("--tree-horizon", type=int, default=1)
    a_init.add_argument("--noise", type=float, default=0.1)
    a_init.add_argument("--lengthscale", type=float, default=1.0)

    for name, help_text in (("suggest", "print the next suggestion"),
                            ("status", "print campaign status")):
        p = adv_sub.add_parser(name, help=help_text)
        p.add_argument("--campaign", required=True)

    for name, help_text in (("observe", "record an assay outcome"),
                            ("whatif", "preview the suggestion after a hypothetical outcome")):
        p = adv_sub.add_parser(name, help=help_text)
        p.add_argument("--campaign", required=True)
        p.add_argument("--arm", required=True)
        p.add_argument("--y", type=float, required=True)

    return parser


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    result = run_experiment(cfg)
    out_dir = args.output or cfg.output
    if out_dir is None:
        raise ConfigError("no output directory: pass --output or set 'output' in the config")
    paths = emit_results(result, out_dir)
    final = result.summary
    print(f"wrote {paths['records']}, {paths['summary']}, {paths['config']}")
    print(f"final mean aregret={final['aregret_mean'][-1]:.4f} "
          f"sregret={final['sregret_mean'][-1]:.4f} over {cfg.replications} replicates")
    return 0


def _cmd_synth(args) -> int:
    source = load_dataset(args.source)
    kernel = KernelSpec(lengthscale=args.lengthscale, signal_variance=args.signal_variance)
    syn = generate_synthetic(source, args.n, args.seed, kernel, args.noise)
    save_dataset(syn, args.out)
    print(f"wrote {args.out}: {len(syn)} molecules, dim {syn.dim}")
    return 0


def _cmd_project(args) -> int:
    ds = load_dataset(args.input, require_targets=False)
    projected = project_dataset(ds, args.m, args.seed)
    save_dataset(projected, args.out)
    print(f"wrote {args.out}: {len(projected)} molecules, dim {ds.dim} -> {projected.dim}")
    return 0


def _cmd_verify(args) -> int:
    problems = verify_records(args.records)
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        raise DataError(f"{len(problems)} inconsistencies in {args.records}")
    print(f"{args.records}: all record invariants hold")
    return 0


def _campaign_config(args) -> CampaignConfig:
    policy = PolicyConfig(
        name=args.policy,
        horizon=args.tree_horizon,
        branches=args.branches,
        thompson_samples=args.thompson_samples,
        batch_size=args.batch_size,
    )
    gp = GPSettings(lengthscale=args.lengthscale, noise_variance=args.noise)
    return CampaignConfig(policy=policy, goal=args.goal, seed=args.seed,
                          horizon=args.horizon, gp=gp)


def _print_decision(campaign: Campaign, decision) -> None:
    if decision is None:
        print("campaign complete: every candidate has been observed")
        return
    ids = [campaign.dataset.ids[i] for i in decision.arm_indices]
    print("suggest: " + " ".join(ids))
    for cand, value in sorted(decision.scores.items(), key=lambda kv: -kv[1]):
        label = ",".join(campaign.dataset.ids[i] for i in cand)
        print(f"  candidate {label}: {value:.4f}")


def _cmd_advise(args) -> int:
    if args.advise_command == "init":
        dataset = load_dataset(args.candidates, require_targets=False)
        Campaign.create(args.campaign, dataset, _campaign_config(args))
        print(f"campaign ready at {args.campaign} ({len(dataset)} candidates)")
        return 0
    campaign = Campaign.load(args.campaign)
    if args.advise_command == "suggest":
        _print_decision(campaign, campaign.suggest())
    elif args.advise_command == "observe":
        campaign.observe(args.arm, args.y)
        print(f"recorded {args.arm} = {args.y}; {campaign.status()['n_observed']} observed")
    elif args.advise_command == "whatif":
        _print_decision(campaign, campaign.whatif(args.arm, args.y))
    elif args.advise_command == "status":
        print(json.dumps(campaign.status(), indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    commands = {
        "run": _cmd_run,
        "synth": _cmd_synth,
        "project": _cmd_project,
        "verify": _cmd_verify,
        "serve": lambda a: serve_forever(a.store, a.host, a.port, a.static) or 0,
        "advise": _cmd_advise,
    }
    try:
        return commands[args.command](args)
    except (ConfigError, InputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except GPScreenError as exc:  # fallback for any future subclass
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
