"""Posterior-sampling behaviour on a two-armed Gaussian bandit.

The actor's probability of pulling the better arm is printed next to the
fraction of critics whose greedy choice is that arm. The actor tracks the
critics' vote, like Thompson sampling tracks the posterior.
"""
import numpy as np

from bdpi import Agent, AgentConfig, GaussianBandit, run_episode

rng = np.random.default_rng(1)
env = GaussianBandit((0.0, 0.5), rng)
agent = Agent(AgentConfig(approximator="tabular", batch_size=16, seed=1), env.spec, rng)

print(f"{'step':>5} {'P(arm 1)':>9} {'critics voting 1':>17}")
for step in range(1, 2001):
    run_episode(agent, env, True, rng, episode=step)
    if step in (20, 50, 100, 200, 500, 1000, 2000):
        votes = np.mean([c.q_a.predict(0).argmax() == 1 for c in agent.critics.critics])
        print(f"{step:5d} {agent.actor.distribution(0)[1]:9.3f} {votes:17.2f}")
