"""Value iteration on slippery 8x8 FrozenLake.

Prints the optimal discounted values, the greedy policy as arrows, and the
three success probabilities a learning curve can be compared against.
"""
import numpy as np

from bdpi.env import FrozenLakeEnv
from bdpi.harness import (
    optimal_success_probability, policy_success_probability, value_iteration,
    value_iteration_oracle,
)

env = FrozenLakeEnv(np.random.default_rng(0))
V, success = value_iteration_oracle("frozenlake8x8", gamma=0.99)
P, R, terminal = env.transition_model()
_, Q = value_iteration(P, R, 0.99)

arrows = np.array(list("^v<>"))[Q.argmax(axis=1)]
arrows[terminal] = "."
print("greedy policy (holes and goal shown as '.'):")
for row in arrows.reshape(8, 8):
    print("  " + " ".join(row))

with np.printoptions(precision=3, suppress=True):
    print("\noptimal values, gamma = 0.99:")
    print(V.reshape(8, 8))

uniform = np.full((64, 4), 0.25)
print(f"\nsuccess within 200 steps, gamma-optimal policy : {success:.4f}")
print(f"success within 200 steps, best possible       : {optimal_success_probability(env, horizon=200):.4f}")
print(f"success without a time limit, best possible   : {optimal_success_probability(env):.10f}")
print(f"success within 200 steps, uniform policy      : {policy_success_probability(env, uniform, 200):.4f}")
