"""How far one conservative actor step can move a policy.

For a few trust-region sizes delta, apply the update to the worst case
(all mass on the action the critic dislikes) and to random policies, then
print the KL divergence next to the bound.
"""
import numpy as np

from bdpi import cpi_update, greedy_distribution, lambda_from_delta

rng = np.random.default_rng(0)

print(f"{'delta':>6} {'lambda':>8} {'worst KL':>10} {'max random KL':>14}")
for delta in (0.01, 0.05, 0.2, 1.0):
    lam = lambda_from_delta(delta)
    worst = cpi_update([0.0, 1.0], [1.0, 0.0], lam)
    worst_kl = np.log(1.0 / worst[1])

    pi = rng.dirichlet(np.ones(4), size=5000)
    new = cpi_update(pi, greedy_distribution(rng.normal(size=(5000, 4))), lam)
    kl = (pi * np.log(pi / new)).sum(axis=1)
    print(f"{delta:6.2f} {lam:8.4f} {worst_kl:10.6f} {kl.max():14.6f}")

# repeated steps toward a fixed greedy target close the gap geometrically
lam = lambda_from_delta(0.05)
p = np.full(4, 0.25)
target = greedy_distribution(np.array([0.0, 1.0, 0.5, 1.0]))
for k in range(1, 101):
    p = cpi_update(p, target, lam)
    if k in (1, 10, 50, 100):
        print(f"after {k:3d} steps: {np.round(p, 4)}")
