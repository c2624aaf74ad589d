"""The Table robot under three hand-written policies.

Turning around and driving straight docks; driving straight from the start
falls off; spinning in place times out.
"""
import math

import numpy as np

from bdpi.env import TABLE_FORWARD, TABLE_LEFT, TableEnv


def rollout(policy):
    env = TableEnv(np.random.default_rng(0))
    obs = env.reset()
    for t in range(env.spec.max_steps):
        result = env.step(policy(obs, t))
        obs = result.next_obs
        if result.done:
            return result.reward, t + 1, obs
    raise AssertionError("episode did not end")


turns = round(math.pi / 0.1)  # face the goal


def dock(obs, t):
    return TABLE_LEFT if t < turns else TABLE_FORWARD


for name, policy in [("turn around, then forward", dock),
                     ("forward only", lambda obs, t: TABLE_FORWARD),
                     ("spin", lambda obs, t: TABLE_LEFT)]:
    reward, steps, obs = rollout(policy)
    print(f"{name:26s} reward {reward:6.1f} after {steps:3d} steps at "
          f"x={obs[0]:.3f} y={obs[1]:.3f} theta={obs[2]:+.3f}")
