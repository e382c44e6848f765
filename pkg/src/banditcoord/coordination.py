"""Per-agent coordination: bandit action selection, bandit neighbor selection,
and the synchronous per-round alternation of the two.

A round runs in four phases, each completed by every agent before the next
begins: (1) draw an action, (2) draw a communication neighborhood, (3) exchange
own-action messages along the chosen edges, (4) compute rewards from the
received actions only and update the bandits.  Agents own independent RNG
streams, so results are independent of the order agents are processed within a
phase.

Evaluation accounting: every agent performs exactly 2*alpha + 3 objective
evaluations per round — one own-action baseline, two per neighborhood-chain
slot, and two for the action reward.  The chain degenerates (zero increments,
no bandit updates) when neighbor sampling is bypassed or impossible, keeping
the count identical in every regime so the simulated-time charge is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .bandit import ROLE_ACTSEL, ROLE_NEISEL, Exp3State, stream
from .objective import SubmodularOracle


def evals_per_round(alpha: int) -> int:
    """Objective evaluations charged to one agent for one coordination round."""
    return 2 * alpha + 3


@dataclass
class AgentState:
    """One agent: an action bandit over its headings plus ``bandwidth`` stacked
    neighbor bandits over its coordination neighborhood."""

    agent_id: int
    action_bandit: Exp3State
    neighbor_bandits: list[Exp3State]
    neighborhood: tuple[int, ...]  # M_i, ascending agent ids; arm k <-> neighborhood[k]
    bandwidth: int
    normalizer: float
    rng_action: object
    rng_slots: list = field(default_factory=list)

    @property
    def samples_neighbors(self) -> bool:
        """Neighbor sampling runs only when 1 <= bandwidth < |M_i|; with
        bandwidth >= |M_i| the full neighborhood is taken outright."""
        return 0 < self.bandwidth < len(self.neighborhood)

    def scaled(self, raw_reward: float) -> float:
        """Normalize a raw gain into [0, 1] by the agent's max singleton value."""
        if self.normalizer <= 0.0:
            return 0.0
        return raw_reward / self.normalizer


def make_agent(agent_id, action_count, neighborhood, bandwidth, normalizer,
               horizon, master_seed, trial) -> AgentState:
    neighborhood = tuple(sorted(neighborhood))
    rng_slots = [stream(master_seed, trial, agent_id, ROLE_NEISEL, k) for k in range(bandwidth)]
    neighbor_bandits = []
    if neighborhood:
        neighbor_bandits = [Exp3State(len(neighborhood), horizon) for _ in range(bandwidth)]
    return AgentState(
        agent_id=agent_id,
        action_bandit=Exp3State(action_count, horizon),
        neighbor_bandits=neighbor_bandits,
        neighborhood=neighborhood,
        bandwidth=bandwidth,
        normalizer=normalizer,
        rng_action=stream(master_seed, trial, agent_id, ROLE_ACTSEL),
        rng_slots=rng_slots,
    )


def build_team(oracle: SubmodularOracle, neighborhoods: Mapping[int, Sequence[int]],
               bandwidths, horizon: int, master_seed: int, trial: int) -> list[AgentState]:
    """One agent per camera in the oracle's world; bandwidths may be a scalar
    or a per-agent sequence."""
    n = oracle.agent_count
    if isinstance(bandwidths, int):
        bandwidths = [bandwidths] * n
    return [
        make_agent(
            i,
            oracle.action_count(i),
            neighborhoods.get(i, ()),
            bandwidths[i],
            oracle.normalizers[i],
            horizon,
            master_seed,
            trial,
        )
        for i in range(n)
    ]


def actsel_draw(agent: AgentState) -> int:
    return agent.action_bandit.sample(agent.rng_action)


def neisel_draw(agent: AgentState) -> tuple[tuple[int, ...], frozenset[int]]:
    """Draw the ordered slot picks and the deduplicated neighborhood N_{i,t}.

    Bandwidth 0 or an empty coordination neighborhood yields no neighbors;
    bandwidth >= |M_i| takes all of M_i without sampling.
    """
    m = agent.neighborhood
    if agent.bandwidth == 0 or not m:
        return (), frozenset()
    if not agent.samples_neighbors:
        return (), frozenset(m)
    picks = tuple(
        m[agent.neighbor_bandits[k].sample(agent.rng_slots[k])]
        for k in range(agent.bandwidth)
    )
    return picks, frozenset(picks)


def agent_feedback(agent: AgentState, oracle: SubmodularOracle, own_action: int,
                   picks: tuple[int, ...], neighbor_actions: Mapping[int, int]) -> float:
    """Phase-4 reward computation for one agent; returns the raw marginal gain
    f(a_i | received neighbor actions).

    Reads nothing beyond the agent's own action and the actions received from
    its chosen neighbors.  Slot k's bandit is rewarded with the increment of
    the coordination value f(a) - f(a | picks) from adding pick k; duplicate
    picks therefore earn zero.
    """
    own_mask = oracle.mask(agent.agent_id, own_action)
    f_own = oracle.area_of_mask(own_mask)

    if agent.samples_neighbors:
        slot_members = picks
        arm_of = {j: k for k, j in enumerate(agent.neighborhood)}
    elif agent.neighborhood:
        # Bypass: deterministic chain over the full neighborhood, padded with
        # repeats so the evaluation count matches the bandwidth charge.
        m = agent.neighborhood
        slot_members = tuple(m[min(k, len(m) - 1)] for k in range(agent.bandwidth))
        arm_of = None
    else:
        slot_members = (None,) * agent.bandwidth
        arm_of = None

    running = 0
    voc_prev = 0.0
    for k, member in enumerate(slot_members):
        if member is not None:
            running |= oracle.mask(member, neighbor_actions[member])
        f_with = oracle.area_of_mask(running | own_mask)
        f_without = oracle.area_of_mask(running)
        voc_k = f_own - (f_with - f_without)
        if arm_of is not None:
            agent.neighbor_bandits[k].update(arm_of[slot_members[k]], agent.scaled(voc_k - voc_prev))
        voc_prev = voc_k

    context = 0
    for j, a_j in neighbor_actions.items():
        context |= oracle.mask(j, a_j)
    marginal = oracle.area_of_mask(context | own_mask) - oracle.area_of_mask(context)
    agent.action_bandit.update(own_action, agent.scaled(marginal))
    return marginal


@dataclass
class RoundRecord:
    """Everything observable about one synchronous round."""

    round: int
    actions: dict[int, int]
    neighborhoods: dict[int, frozenset[int]]
    f_value: float
    per_agent_marginals: dict[int, float]
    sim_time_elapsed: float
    oracle_calls: dict[int, int]
    message_count: int


def anaconda_round(agents: Sequence[AgentState], oracle: SubmodularOracle, t: int,
                   sim_time_elapsed: float = 0.0, order: Sequence[int] | None = None) -> RoundRecord:
    """Execute one round for all agents; ``order`` only permutes the in-phase
    processing sequence and must not change the outcome."""
    idx = list(range(len(agents))) if order is None else list(order)

    actions: dict[int, int] = {}
    for i in idx:
        actions[agents[i].agent_id] = actsel_draw(agents[i])

    picks: dict[int, tuple[int, ...]] = {}
    neighborhoods: dict[int, frozenset[int]] = {}
    for i in idx:
        agent = agents[i]
        picks[agent.agent_id], neighborhoods[agent.agent_id] = neisel_draw(agent)

    # Exchange: one message per chosen edge, carrying exactly one action.
    inboxes = {
        aid: {j: actions[j] for j in neigh} for aid, neigh in neighborhoods.items()
    }
    message_count = sum(len(n) for n in neighborhoods.values())

    marginals: dict[int, float] = {}
    calls: dict[int, int] = {}
    for i in idx:
        agent = agents[i]
        before = oracle.calls
        marginals[agent.agent_id] = agent_feedback(
            agent, oracle, actions[agent.agent_id], picks[agent.agent_id],
            inboxes[agent.agent_id],
        )
        calls[agent.agent_id] = oracle.calls - before

    f_value = oracle.eval(actions)  # recorder bookkeeping, not agent-attributed
    return RoundRecord(
        round=t,
        actions=actions,
        neighborhoods=neighborhoods,
        f_value=f_value,
        per_agent_marginals=marginals,
        sim_time_elapsed=sim_time_elapsed,
        oracle_calls=calls,
        message_count=message_count,
    )


def rebuild_neighborhoods(agents: Sequence[AgentState],
                          new_neighborhoods: Mapping[int, Sequence[int]]) -> None:
    """Apply a membership change: each agent's coordination neighborhood is
    replaced, neighbor bandits are resized, surviving arms keep their weights,
    and new arms start fresh at weight 1."""
    for agent in agents:
        new_m = tuple(sorted(new_neighborhoods.get(agent.agent_id, ())))
        if new_m == agent.neighborhood:
            continue
        old_index = {j: k for k, j in enumerate(agent.neighborhood)}
        rebuilt = []
        for bandit in agent.neighbor_bandits:
            fresh = Exp3State(len(new_m), bandit.horizon) if new_m else None
            if fresh is not None:
                for k, j in enumerate(new_m):
                    if j in old_index:
                        fresh.weights[k] = bandit.weights[old_index[j]]
                rebuilt.append(fresh)
        if new_m and not agent.neighbor_bandits:
            rebuilt = [Exp3State(len(new_m), agent.action_bandit.horizon)
                       for _ in range(agent.bandwidth)]
        agent.neighborhood = new_m
        agent.neighbor_bandits = rebuilt if new_m else []
