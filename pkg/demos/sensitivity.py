"""Hyper-parameter sensitivity of tabular BDPI on FrozenLake at toy scale.

Samples a few configurations from a small grid, trains each briefly and
reports the distance-weighted sensitivity score (lower is more robust).
"""
import numpy as np

from bdpi.agent import AgentConfig
from bdpi.harness import ConfigSample, parse_config_items, run_seed, sample_configs, sensitivity_score

grid = {
    "approximator": ["tabular"],
    "n_critics": ["2", "4", "8"],
    "n_t": ["1", "2", "4"],
    "batch_size": ["16", "32"],
}
rng = np.random.default_rng(0)
samples = []
for indices, items in sample_configs(grid, 6, rng):
    cfg = parse_config_items(items, AgentConfig(seed=0))
    score = sum(r.episode_return for r in run_seed(cfg, "frozenlake8x8", 150))
    samples.append(ConfigSample(indices, score))
    print(items, "total reward", score)
print("S =", sensitivity_score(samples, None))
