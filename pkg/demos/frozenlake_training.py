"""Train tabular BDPI on FrozenLake for one seed and print the learning curve.

Pass a number of episodes as the first argument (default 1500).
"""
import sys
import time

import numpy as np

from bdpi import AgentConfig, value_iteration_oracle
from bdpi.harness import run_seed

n_episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 1500
_, optimum = value_iteration_oracle("frozenlake8x8", 0.99)

start = time.perf_counter()
records = run_seed(AgentConfig(approximator="tabular", seed=0), "frozenlake8x8", n_episodes)
returns = np.array([r.episode_return for r in records])
entropy = np.array([r.mean_entropy for r in records])

print(f"{'episodes':>10} {'success':>8} {'entropy':>8}")
for lo in range(0, n_episodes, 250):
    hi = min(lo + 250, n_episodes)
    print(f"{lo:4d}-{hi:<5d} {returns[lo:hi].mean():8.3f} {entropy[lo:hi].mean():8.3f}")
print(f"gamma-optimal policy succeeds with probability {optimum:.3f}; "
      f"{time.perf_counter() - start:.0f}s")
