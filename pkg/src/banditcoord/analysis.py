"""Bound evaluators and exhaustive oracles: curvature-based approximation
factors, the empirical marginals-to-joint ratio, brute-force optima, and the
report that ties them together for a finished run.

Expectations are estimated over the last quarter of the recorded rounds
(earlier rounds are burn-in; the bounds' vanishing regret terms are dropped,
so checks carry an explicit slack).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

from .coordination import RoundRecord
from .errors import CapacityError, DegenerateObjectiveError
from .objective import SubmodularOracle, curvature

BRUTE_FORCE_CAP = 10_000_000
SUBSET_CAP = 1_000_000


def rho(kappa: float, alpha: int) -> float:
    """Approximation factor for cardinality-constrained greedy maximization of
    a submodular function with curvature kappa and budget alpha:
    (1/kappa) * (1 - (1 - kappa/alpha)^alpha), in [1 - 1/e, 1]."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [0, 1]")
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if kappa == 0.0:
        return 1.0  # modular limit
    if alpha == 1:
        return 1.0  # (1/k)(1 - (1 - k)) for any curvature
    return -math.expm1(alpha * math.log1p(-kappa / alpha)) / kappa


def compute_beta(history: Sequence[RoundRecord]) -> float:
    """Empirical ratio of summed per-agent conditional marginals to the joint
    objective value, over the given records."""
    if not history:
        raise ValueError("history must be nonempty")
    numerator = sum(sum(r.per_agent_marginals.values()) for r in history)
    denominator = sum(r.f_value for r in history)
    if denominator <= 0.0:
        raise DegenerateObjectiveError("all recorded objective values are zero; beta undefined")
    return numerator / denominator


def voc_curvature(oracle: SubmodularOracle, agent: int, action: int,
                  neighbor_actions: Mapping[int, int]) -> float:
    """Curvature of N -> f(a) - f(a | N's actions) over the given neighbors.

    Neighbors whose singleton coordination value is zero are excluded (0/0);
    if all are zero the function is degenerate and 0 is returned.
    """
    members = sorted(neighbor_actions)
    if not members:
        return 0.0

    def value(subset) -> float:
        return oracle.voc(agent, action, {j: neighbor_actions[j] for j in subset})

    total = value(members)
    ratios = []
    for j in members:
        single = value([j])
        if single <= 0.0:
            continue
        rest = value([m for m in members if m != j])
        ratios.append((total - rest) / single)
    if not ratios:
        return 0.0
    return min(1.0, max(0.0, 1.0 - min(ratios)))


def brute_force_opt(oracle: SubmodularOracle, agents: Sequence[int] | None = None):
    """Exact maximizer of the joint objective by exhaustive scan; ties go to
    the lexicographically smallest assignment."""
    if agents is None:
        agents = list(range(oracle.agent_count))
    counts = [oracle.action_count(i) for i in agents]
    total = math.prod(counts) if counts else 0
    if total > BRUTE_FORCE_CAP:
        raise CapacityError(f"{total} joint assignments exceed the cap of {BRUTE_FORCE_CAP}")
    best_value = -1.0
    best = None
    for combo in itertools.product(*(range(c) for c in counts)):
        mask = 0
        for agent, action in zip(agents, combo):
            mask |= oracle.mask(agent, action)
        value = oracle.area_of_mask(mask)
        if value > best_value:
            best_value = value
            best = combo
    return dict(zip(agents, best)), best_value


def brute_force_neighborhood(oracle: SubmodularOracle, agent: int,
                             own_actions: Sequence[int],
                             neighbor_action_trace: Sequence[Mapping[int, int]],
                             candidates: Sequence[int], alpha: int):
    """Exact maximizer of the summed coordination value over a fixed
    neighborhood, enumerating every subset of the candidates of size <= alpha;
    ties go to the lexicographically smallest subset.

    ``own_actions[t]`` and ``neighbor_action_trace[t]`` give the agent's action
    and every candidate's action at round t of the trace.
    """
    candidates = sorted(candidates)
    m = len(candidates)
    size_cap = min(alpha, m)
    subsets = sum(math.comb(m, k) for k in range(size_cap + 1))
    if subsets > SUBSET_CAP:
        raise CapacityError(f"{subsets} candidate subsets exceed the cap of {SUBSET_CAP}")

    cache: dict[tuple, float] = {}

    def summed_voc(subset: tuple[int, ...]) -> float:
        total = 0.0
        for a_t, profile in zip(own_actions, neighbor_action_trace):
            key = (a_t, subset, tuple(profile[j] for j in subset))
            if key not in cache:
                cache[key] = oracle.voc(agent, a_t, {j: profile[j] for j in subset})
            total += cache[key]
        return total

    best_value = -1.0
    best: tuple[int, ...] = ()
    for size in range(size_cap + 1):
        for subset in itertools.combinations(candidates, size):
            value = summed_voc(subset)
            if value > best_value or (value == best_value and subset < best):
                best_value = value
                best = subset
    return frozenset(best)


@dataclass
class BoundReport:
    """Curvatures, the empirical marginals ratio, the brute-force optimum, and
    the resulting lower bounds (as fractions of the optimum)."""

    kappa_f: float
    kappa_i: float
    rho: float
    beta_hat: float
    f_opt: float
    apriori_lb: float
    aposteriori_lb: float
    asymptotic_lb: float
    empirical_mean_f: float
    slack: float
    window_rounds: int
    satisfied_aposteriori: bool
    satisfied_asymptotic: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _last_quarter(records: Sequence[RoundRecord]) -> Sequence[RoundRecord]:
    window = max(1, len(records) // 4)
    return records[-window:]


def evaluate_bounds(history: Sequence[RoundRecord], oracle: SubmodularOracle,
                    neighborhoods: Mapping[int, Sequence[int]],
                    bandwidths: Mapping[int, int],
                    slack_fraction: float = 0.05) -> BoundReport:
    """Fill a BoundReport for a finished run on a brute-forceable instance.

    The a priori bound uses the best fixed neighborhood for the realized
    action trace; the a posteriori bound uses the run's own marginals ratio;
    the asymptotic bound is the larger of 1 - kappa_f and 1/(1 + beta*kappa_f).
    Checks are soft: expectation estimates get ``slack_fraction * f_opt``.
    """
    if not history:
        raise ValueError("history must be nonempty")
    window = _last_quarter(history)
    agents = sorted(history[0].actions)

    ground = [
        (agent, action)
        for agent in agents
        for action in range(oracle.action_count(agent))
    ]
    kappa_f = curvature(oracle, ground)
    _, f_opt = brute_force_opt(oracle, agents)
    beta_hat = compute_beta(window)

    alpha_bar = max((bandwidths.get(i, 0) for i in agents), default=0)
    kappa_i = 0.0
    voc_star_total = 0.0
    if alpha_bar >= 1:
        for agent in agents:
            members = sorted(neighborhoods.get(agent, ()))
            if not members or bandwidths.get(agent, 0) < 1:
                continue
            seen: set[tuple] = set()
            own_trace = []
            profile_trace = []
            for record in window:
                own = record.actions[agent]
                profile = {j: record.actions[j] for j in members}
                own_trace.append(own)
                profile_trace.append(profile)
                key = (own, tuple(profile[j] for j in members))
                if key not in seen:
                    seen.add(key)
                    kappa_i = max(kappa_i, voc_curvature(oracle, agent, own, profile))
            star = brute_force_neighborhood(
                oracle, agent, own_trace, profile_trace, members, bandwidths[agent]
            )
            star_sum = sum(
                oracle.voc(agent, a_t, {j: prof[j] for j in star})
                for a_t, prof in zip(own_trace, profile_trace)
            )
            voc_star_total += star_sum / len(window)

    rho_value = rho(kappa_i, alpha_bar) if alpha_bar >= 1 else 1.0
    apriori_lb = (1.0 - kappa_f) + kappa_f * (1.0 - kappa_f) * rho_value * voc_star_total / f_opt
    aposteriori_lb = 1.0 / (1.0 + beta_hat * kappa_f)
    asymptotic_lb = max(1.0 - kappa_f, aposteriori_lb)

    empirical_mean_f = sum(r.f_value for r in window) / len(window)
    slack = slack_fraction * f_opt
    return BoundReport(
        kappa_f=kappa_f,
        kappa_i=kappa_i,
        rho=rho_value,
        beta_hat=beta_hat,
        f_opt=f_opt,
        apriori_lb=apriori_lb,
        aposteriori_lb=aposteriori_lb,
        asymptotic_lb=asymptotic_lb,
        empirical_mean_f=empirical_mean_f,
        slack=slack,
        window_rounds=len(window),
        satisfied_aposteriori=empirical_mean_f >= aposteriori_lb * f_opt - slack,
        satisfied_asymptotic=empirical_mean_f >= asymptotic_lb * f_opt - slack,
    )
