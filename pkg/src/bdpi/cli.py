"""Command line entry point: ``python -m bdpi {run,sensitivity,oracle} ...``."""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .agent import AgentConfig
from .env import FrozenLakeEnv
from .harness import (
    ConfigSample, aggregate, emit_aggregate, emit_curve, optimal_success_probability,
    parse_config_items, read_config, read_grid, returns_matrix, run_campaign, run_seed,
    sample_configs, sensitivity_score, value_iteration_oracle,
)

ENV_NAMES = ("table", "frozenlake8x8")
VARIANT_NAMES = ("bdpi", "abcdqn", "bdqn", "bdpi-am")


def default_grid_path() -> Path:
    return Path(str(resources.files("bdpi") / "grids" / "bdpi_default.grid"))


def cmd_run(args) -> int:
    config = read_config(args.config) if args.config else AgentConfig()
    overrides = {"variant": args.variant}
    if args.noise is not None:
        overrides["noise_prob"] = args.noise
    if args.seed is not None:
        overrides["seed"] = args.seed
    config = replace(config, **overrides)
    config.__post_init__()
    records = run_campaign(config, args.env, args.episodes, args.seeds,
                           timed=args.timing, map_file=args.map)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train = [r for r in records if r.training]
    emit_curve(train, out / "episodes.csv")
    emit_aggregate(aggregate(train), out / "aggregate.csv")
    test = [r for r in records if not r.training]
    if test:
        emit_curve(test, out / "test_episodes.csv")
        emit_aggregate(aggregate(test, training=False), out / "test_aggregate.csv")
    final = returns_matrix(train)[:, -min(100, args.episodes):].mean()
    print(f"{args.env} {config.variant}: {len(train)} training episodes, "
          f"mean return over the last 100 episodes {final:.4f}")
    return 0


def cmd_sensitivity(args) -> int:
    grid = read_grid(args.grid or default_grid_path())
    rng = np.random.default_rng(args.seed)
    base = read_config(args.config) if args.config else AgentConfig()
    samples, rows = [], []
    for k, (idx, values) in enumerate(sample_configs(grid, args.samples, rng)):
        config = parse_config_items(values, replace(base, seed=args.seed + k))
        records = run_seed(config, args.env, args.episodes, run_id=k)
        score = float(sum(r.episode_return for r in records if r.training))
        varying = {name: i for name, i in idx.items() if len(grid[name]) > 1}
        samples.append(ConfigSample(varying, score))
        rows.append([k] + [values[name] for name in grid] + [repr(score)])
        print(f"sample {k}: score {score:.3f}", file=sys.stderr)
    score = sensitivity_score(samples, args.pairs, np.random.default_rng(args.seed))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample"] + list(grid) + ["score"])
        w.writerows(rows)
    print(f"S = {score!r}")
    return 0


def cmd_oracle(args) -> int:
    V, success = value_iteration_oracle(args.env, args.gamma, args.tolerance)
    env = FrozenLakeEnv(np.random.default_rng(0))
    horizon = env.spec.max_steps
    print(f"optimal discounted value of the start state (gamma={args.gamma}): {float(V[env.start])!r}")
    print(f"success probability of the gamma-optimal policy within {horizon} steps: {success!r}")
    print(f"best success probability within {horizon} steps (non-stationary policy): "
          f"{optimal_success_probability(env, horizon=horizon)!r}")
    print(f"best success probability, no time limit: {optimal_success_probability(env)!r}")
    with np.printoptions(precision=4, suppress=True, linewidth=120):
        print(V.reshape(env.n_rows, env.n_cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdpi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train agents over several seeds and write CSV curves")
    run.add_argument("--env", choices=ENV_NAMES, required=True)
    run.add_argument("--variant", choices=VARIANT_NAMES, default="bdpi")
    run.add_argument("--episodes", type=int, default=1000)
    run.add_argument("--seeds", type=int, default=8)
    run.add_argument("--seed", type=int, default=None, help="base seed (overrides the config file)")
    run.add_argument("--noise", type=float, default=None, help="off-policy action noise probability")
    run.add_argument("--config", help="key=value file of AgentConfig fields")
    run.add_argument("--map", help="custom FrozenLake map file (rows of S/F/H/G)")
    run.add_argument("--timing", action="store_true", help="record wall-clock time per episode")
    run.add_argument("--out", required=True, help="output directory")
    run.set_defaults(func=cmd_run)

    sens = sub.add_parser("sensitivity", help="sample configurations and compute the sensitivity score")
    sens.add_argument("--grid", help="grid file (default: the packaged BDPI grid)")
    sens.add_argument("--samples", type=int, default=20)
    sens.add_argument("--pairs", type=int, default=10000)
    sens.add_argument("--env", choices=ENV_NAMES, default="frozenlake8x8")
    sens.add_argument("--episodes", type=int, default=100)
    sens.add_argument("--config", help="base key=value file applied before grid values")
    sens.add_argument("--seed", type=int, default=0)
    sens.add_argument("--out", required=True, help="CSV of sampled configurations and scores")
    sens.set_defaults(func=cmd_sensitivity)

    orc = sub.add_parser("oracle", help="value iteration on the tabular environment")
    orc.add_argument("--env", choices=("frozenlake8x8",), required=True)
    orc.add_argument("--gamma", type=float, default=0.99)
    orc.add_argument("--tolerance", type=float, default=1e-10)
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        parser.exit(2, f"bdpi: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
