"""Adversarial bandit core: exponential weights with importance-weighted
reward estimates, shared by action selection, neighbor selection, and the
bandit sequential-greedy benchmark.

The update is loss-based: unobserved arms receive estimated reward 1 and the
chosen arm 1 - (1 - r)/p, so a reward of 1 leaves the sampling distribution
unchanged and low rewards push the chosen arm down.
"""
from __future__ import annotations

import logging
import math

import numpy as np

logger = logging.getLogger(__name__)

# Stream roles for deriving independent RNG streams, one per bandit instance.
ROLE_PLACEMENT = 0
ROLE_ACTSEL = 1
ROLE_NEISEL = 2
ROLE_RANDOM_NEIGHBORS = 3
ROLE_BSG = 4

# Renormalized weights are floored here to keep them strictly positive over
# arbitrarily long adversarial runs (the sampling distribution is unaffected
# beyond ~1e-300 relative mass).
_MIN_WEIGHT = 1e-300
_CLAMP_SLACK = 1e-9


def stream(master_seed: int, trial: int, agent: int, role: int, slot: int = 0) -> np.random.Generator:
    """Counter-based splittable RNG stream keyed by (seed, trial, agent, role, slot)."""
    seq = np.random.SeedSequence((int(master_seed), int(trial), int(agent), int(role), int(slot)))
    return np.random.Generator(np.random.Philox(seq))


def learning_rate(arm_count: int, horizon: int) -> float:
    """sqrt(2 log K / (K T)); zero for the degenerate single-arm bandit."""
    return math.sqrt(2.0 * math.log(arm_count) / (arm_count * horizon))


class Exp3State:
    """One exponential-weights bandit over a fixed arm set.

    Weights start at 1 and are renormalized by their maximum after every
    update, which leaves the sampling distribution unchanged and prevents
    overflow/underflow over long horizons.
    """

    __slots__ = ("weights", "eta", "arm_count", "horizon")

    def __init__(self, arm_count: int, horizon: int):
        if arm_count < 1:
            raise ValueError("arm_count must be >= 1")
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        self.arm_count = arm_count
        self.horizon = horizon
        self.eta = learning_rate(arm_count, horizon)
        self.weights = np.ones(arm_count, dtype=np.float64)

    def distribution(self) -> np.ndarray:
        """Sampling probabilities: weights / ||weights||_1."""
        return self.weights / self.weights.sum()

    def sample(self, rng: np.random.Generator) -> int:
        """Draw one arm by inverse-CDF on the current distribution."""
        if self.arm_count == 1:
            rng.random()  # keep the stream advancing uniformly per draw
            return 0
        cdf = np.cumsum(self.weights)
        u = rng.random() * cdf[-1]
        arm = int(np.searchsorted(cdf, u, side="right"))
        return min(arm, self.arm_count - 1)

    def update(self, chosen_arm: int, reward: float) -> None:
        """Importance-weighted exponential update for one observed reward.

        Estimated rewards are 1 for unobserved arms and 1 - (1 - r)/p for the
        chosen one; the common exp(eta) factor cancels under renormalization,
        so only the chosen arm's weight needs the exponential.
        """
        if not 0 <= chosen_arm < self.arm_count:
            raise ValueError(f"arm {chosen_arm} out of range")
        if reward < 0.0 or reward > 1.0:
            if reward < -_CLAMP_SLACK or reward > 1.0 + _CLAMP_SLACK:
                logger.warning("reward %.6g outside [0,1]; clamped", reward)
            reward = min(1.0, max(0.0, reward))
        w = self.weights
        p = w[chosen_arm] / w.sum()
        w[chosen_arm] *= math.exp(-self.eta * (1.0 - reward) / p)
        w /= w.max()
        np.maximum(w, _MIN_WEIGHT, out=w)
