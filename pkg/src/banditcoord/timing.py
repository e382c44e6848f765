"""Simulated-clock model: converts decision rounds to wall time under
per-evaluation and per-message delays, plus closed-form convergence estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class DelayModel:
    """tau_f: seconds per objective evaluation; tau_c: seconds per one-action message."""

    tau_f: float
    tau_c: float

    def __post_init__(self):
        if self.tau_f < 0 or self.tau_c < 0:
            raise ValueError("delays must be nonnegative")


NO_DELAY = DelayModel(0.0, 0.0)


def anaconda_round_time(alpha: int, model: DelayModel) -> float:
    """One coordination round for an agent of bandwidth alpha:
    2*alpha + 3 objective evaluations plus one communication phase."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return model.tau_f * (2 * alpha + 3) + model.tau_c


def team_round_time(alphas, model: DelayModel) -> float:
    """Synchronous phases run in parallel across agents: the round takes as
    long as the slowest agent."""
    return max(anaconda_round_time(a, model) for a in alphas)


def convergence_rounds(v_bar: int, n: int, epsilon: float, alpha_bar: int = 0, m_bar: int = 0) -> int:
    """Rounds until the convergence error is within epsilon.

    With neighbor selection uninvolved (alpha_bar = 0 or alpha_bar >= m_bar)
    the estimate is |V̄| |N|^2 / eps; otherwise (ᾱ^2 |M̄| + |V̄|) |N|^2 / eps.
    """
    if v_bar <= 0 or n <= 0 or epsilon <= 0:
        raise ValueError("v_bar, n and epsilon must be positive")
    if alpha_bar == 0 or alpha_bar >= m_bar:
        raw = v_bar * n * n / epsilon
    else:
        raw = (alpha_bar * alpha_bar * m_bar + v_bar) * n * n / epsilon
    return math.ceil(raw)


def convergence_time(v_bar: int, n: int, epsilon: float, model: DelayModel,
                     alpha_bar: int = 0, m_bar: int = 0) -> float:
    """Estimated convergence wall time: rounds-to-converge times round time.

    An order-of-magnitude label, not a hard bound; the sparse-network case
    (m_bar = o(n)) is covered by the alpha_bar >= m_bar branch collapsing the
    neighbor term.
    """
    rounds = convergence_rounds(v_bar, n, epsilon, alpha_bar=alpha_bar, m_bar=m_bar)
    return rounds * anaconda_round_time(alpha_bar, model)


def budget_to_rounds(budget_seconds: float, per_round_seconds: float) -> int:
    """How many full rounds fit in a simulated-time budget."""
    if budget_seconds < 0:
        raise ValueError("budget must be nonnegative")
    if per_round_seconds <= 0:
        raise ValueError(
            "per-round time is zero: rounds are unbounded, supply an explicit horizon"
        )
    return math.floor(budget_seconds / per_round_seconds)
