"""The exponential-weights bandit on a fixed stochastic instance.

Two arms with Bernoulli means 0.9 and 0.1; the learner sees only the chosen
arm's reward.  Regret per round shrinks as the horizon grows.
"""
import math

import numpy as np

from banditcoord.bandit import ROLE_ACTSEL, Exp3State, stream


def run(horizon, seed=12):
    rng = np.random.default_rng(seed)
    rewards = (rng.random((horizon, 2)) < np.array([0.9, 0.1])).astype(float)
    bandit = Exp3State(2, horizon)
    sampler = stream(seed, 0, 0, ROLE_ACTSEL)
    earned = 0.0
    for t in range(horizon):
        arm = bandit.sample(sampler)
        earned += rewards[t, arm]
        bandit.update(arm, rewards[t, arm])
    best = rewards.sum(axis=0).max()
    return best - earned, bandit.distribution()


for horizon in (100, 1_000, 10_000):
    regret, dist = run(horizon)
    bound = math.sqrt(2 * horizon * 2 * math.log(2))
    print(f"T={horizon:6d}  regret={regret:7.1f}  regret/T={regret / horizon:.4f}  "
          f"theory O(sqrt(2TK logK))={bound:6.1f}  P(best arm)={dist[0]:.3f}")
