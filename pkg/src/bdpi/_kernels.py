"""Compiled inner loop for tabular clipped critics (and their tabular actor).

A training iteration sets every (state, action) cell visited by the batch to

    (1 - alpha) q + alpha * mean of its per-sample clipped targets,

which is what ``TabularFn.fit`` produces on the generic path.
``tests/test_agent.py`` checks both paths agree.
"""
import numpy as np
from numba import njit


@njit(cache=True, error_model="numpy")
def tabular_clipped_learn(tables, a_slot, order, batch_pos, states, actions, rewards,
                          next_states, terminals, alpha, gamma, n_t, actor, lam, update_actor):
    n_states = tables.shape[2]
    n_actions = tables.shape[3]
    n = batch_pos.shape[1]

    counts = np.zeros(n_states * n_actions)
    sums = np.zeros(n_states * n_actions)
    cell = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    rew = np.empty(n)
    cells = np.empty(n, dtype=np.int64)
    # values[n_states] stands in for terminal next states
    values = np.zeros(n_states + 1)
    seen = np.zeros(n_states, dtype=np.bool_)
    row = np.empty(n_actions)

    for k in range(order.shape[0]):
        i = order[k]

        n_touched = 0
        for j in range(n):
            p = batch_pos[k, j]
            c = states[p] * n_actions + actions[p]
            cell[j] = c
            nxt[j] = n_states if terminals[p] else next_states[p]
            rew[j] = rewards[p]
            if counts[c] == 0.0:
                cells[n_touched] = c
                n_touched += 1
            counts[c] += 1.0

        for _ in range(n_t):
            slot = 1 - a_slot[i]
            a_slot[i] = slot
            qa = tables[i, slot]
            qb = tables[i, 1 - slot]
            # clipped bootstrap value of every state, argmax ties to the lowest action
            for s2 in range(n_states):
                best = 0
                top = qa[s2, 0]
                for b in range(1, n_actions):
                    if qa[s2, b] > top:
                        best = b
                        top = qa[s2, b]
                values[s2] = min(top, qb[s2, best])
            for j in range(n):
                sums[cell[j]] += rew[j] + gamma * values[nxt[j]]
            for m in range(n_touched):
                c = cells[m]
                s = c // n_actions
                a = c - s * n_actions
                qa[s, a] = (1.0 - alpha) * qa[s, a] + alpha * (sums[c] / counts[c])
                sums[c] = 0.0

        for m in range(n_touched):
            counts[cells[m]] = 0.0

        if update_actor:
            qa = tables[i, a_slot[i]]
            for j in range(n):
                s = states[batch_pos[k, j]]
                if seen[s]:
                    continue
                seen[s] = True
                top = qa[s, 0]
                for b in range(1, n_actions):
                    if qa[s, b] > top:
                        top = qa[s, b]
                ties = 0
                for b in range(n_actions):
                    if qa[s, b] == top:
                        ties += 1
                total = 0.0
                for b in range(n_actions):
                    row[b] = max(actor[s, b], 0.0)
                    total += row[b]
                for b in range(n_actions):
                    if total > 0.0:
                        pb = row[b] / total
                    else:
                        pb = 1.0 / n_actions
                    g = 0.0
                    if qa[s, b] == top:
                        g = 1.0 / ties
                    actor[s, b] = (1.0 - lam) * pb + lam * g
            for j in range(n):
                seen[states[batch_pos[k, j]]] = False
