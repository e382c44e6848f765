"""Comparison algorithms: nearest/random neighbor heuristics, full-information
sequential greedy over a depth-first agent ordering (DFS-SG), and its bandit
variant (DFS-BSG).

The DFS benchmarks need a (strongly) connected communication graph.  Their
simulated duration accounts for sequential message relay: the step from the
k-th to the (k+1)-th agent in the order forwards the k actions selected so
far along the shortest path between them.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .bandit import ROLE_BSG, Exp3State, stream
from .coordination import RoundRecord
from .errors import ConnectivityError
from .objective import SubmodularOracle
from .timing import DelayModel


class CommGraph:
    """Directed communication graph over agents 0..n-1."""

    def __init__(self, node_count: int, edges):
        self.node_count = node_count
        clean = set()
        for u, v in edges:
            if u == v:
                raise ValueError("self-loops are not allowed")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u}, {v}) references an unknown node")
            clean.add((int(u), int(v)))
        self.edges = frozenset(clean)
        self.out_neighbors = [[] for _ in range(node_count)]
        self.in_neighbors = [[] for _ in range(node_count)]
        for u, v in sorted(self.edges):
            self.out_neighbors[u].append(v)
            self.in_neighbors[v].append(u)

    def _reaches_all(self, adjacency, start=0) -> bool:
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == self.node_count

    def is_strongly_connected(self) -> bool:
        if self.node_count <= 1:
            return True
        return self._reaches_all(self.out_neighbors) and self._reaches_all(self.in_neighbors)

    def shortest_hops(self, src: int) -> list[int]:
        """BFS hop counts from src along directed edges; -1 if unreachable."""
        dist = [-1] * self.node_count
        dist[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in self.out_neighbors[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist


def graph_from_positions(positions, comm_ranges) -> CommGraph:
    """Edge j -> i whenever j lies within i's communication range."""
    pts = [(float(x), float(y)) for x, y in positions]
    if isinstance(comm_ranges, (int, float)):
        comm_ranges = [float(comm_ranges)] * len(pts)
    edges = []
    for i, (xi, yi) in enumerate(pts):
        for j, (xj, yj) in enumerate(pts):
            if i != j and math.hypot(xj - xi, yj - yi) <= comm_ranges[i]:
                edges.append((j, i))
    return CommGraph(len(pts), edges)


@dataclass(frozen=True)
class DfsOrder:
    """Depth-first visitation order plus the hop count of each consecutive
    traversal step (shortest path in the underlying graph)."""

    order: tuple[int, ...]
    hops: tuple[int, ...]


def dfs_order(graph: CommGraph, root: int | None = None) -> DfsOrder:
    """Depth-first order from the root (lowest id by default), children
    explored in ascending agent id."""
    if not graph.is_strongly_connected():
        raise ConnectivityError("DFS benchmarks require a (strongly) connected network")
    root = 0 if root is None else root
    visited = []
    seen = set()
    stack = [root]
    while stack:
        u = stack.pop()
        if u in seen:
            continue
        seen.add(u)
        visited.append(u)
        for v in reversed(graph.out_neighbors[u]):
            if v not in seen:
                stack.append(v)
    hops = tuple(
        graph.shortest_hops(visited[k])[visited[k + 1]] for k in range(len(visited) - 1)
    )
    return DfsOrder(order=tuple(visited), hops=hops)


def nearest_neighbors(positions, agent: int, candidates: Sequence[int], alpha: int) -> frozenset[int]:
    """The alpha candidates closest to the agent, ties to the lower id; static
    across rounds."""
    if alpha <= 0 or not candidates:
        return frozenset()
    ax, ay = positions[agent]
    ranked = sorted(candidates, key=lambda j: (math.hypot(positions[j][0] - ax, positions[j][1] - ay), j))
    return frozenset(ranked[:alpha])


def random_neighbors(candidates: Sequence[int], alpha: int, rng) -> frozenset[int]:
    """alpha distinct candidates drawn uniformly without replacement; resampled
    by the caller every round."""
    if alpha <= 0 or not candidates:
        return frozenset()
    if alpha >= len(candidates):
        return frozenset(candidates)
    picked = rng.choice(len(candidates), size=alpha, replace=False)
    return frozenset(candidates[int(k)] for k in picked)


def communication_seconds(order: DfsOrder, tau_c: float) -> float:
    """Sequential relay cost: step k forwards k actions over its hop count."""
    return tau_c * sum((k + 1) * d for k, d in enumerate(order.hops))


def dfs_sg_run(oracle: SubmodularOracle, graph: CommGraph, model: DelayModel,
               charge_compute: bool = True):
    """Full-information sequential greedy in DFS order.

    Each agent maximizes its marginal gain given all predecessors' actions
    (ties to the lowest action index).  Duration charges one evaluation per
    candidate action per agent (disable with charge_compute=False) plus the
    sequential relay of the growing action message.
    """
    seq = dfs_order(graph)
    assignment: dict[int, int] = {}
    prefix_mask = 0
    duration = 0.0
    for agent in seq.order:
        best_action, best_value = 0, -1.0
        for action in range(oracle.action_count(agent)):
            value = oracle.area_of_mask(prefix_mask | oracle.mask(agent, action))
            if value > best_value:
                best_action, best_value = action, value
        assignment[agent] = best_action
        prefix_mask |= oracle.mask(agent, best_action)
        if charge_compute:
            duration += oracle.action_count(agent) * model.tau_f
    duration += communication_seconds(seq, model.tau_c)
    return assignment, duration


@dataclass
class BsgAgent:
    """One bandit sequential-greedy agent: a single action bandit."""

    agent_id: int
    bandit: Exp3State
    normalizer: float
    rng: object


def build_bsg_team(oracle: SubmodularOracle, horizon: int, master_seed: int, trial: int) -> list[BsgAgent]:
    return [
        BsgAgent(
            agent_id=i,
            bandit=Exp3State(oracle.action_count(i), horizon),
            normalizer=oracle.normalizers[i],
            rng=stream(master_seed, trial, i, ROLE_BSG),
        )
        for i in range(oracle.agent_count)
    ]


def bsg_round_seconds(oracle: SubmodularOracle, order: DfsOrder, model: DelayModel,
                      compute_evals: float | None = None) -> float:
    """Per-round time: a configurable computation charge (default max|V| + 2
    evaluations) plus the sequential relay cost."""
    if compute_evals is None:
        compute_evals = max(oracle.action_count(i) for i in range(oracle.agent_count)) + 2
    return model.tau_f * compute_evals + communication_seconds(order, model.tau_c)


def dfs_bsg_round(team: Sequence[BsgAgent], oracle: SubmodularOracle, order: DfsOrder,
                  t: int, sim_time_elapsed: float = 0.0) -> RoundRecord:
    """One round: every agent draws from its bandit, then rewards are the
    prefix marginal gains in DFS order (normalized per agent), so the
    per-round marginals telescope to f(A_t) exactly."""
    actions = {a.agent_id: a.bandit.sample(a.rng) for a in team}
    by_id = {a.agent_id: a for a in team}
    prefix_mask = 0
    prefix_value = 0.0
    prefix_agents: list[int] = []
    marginals: dict[int, float] = {}
    neighborhoods: dict[int, frozenset[int]] = {}
    calls: dict[int, int] = {}
    for agent_id in order.order:
        agent = by_id[agent_id]
        before = oracle.calls
        with_own = oracle.area_of_mask(prefix_mask | oracle.mask(agent_id, actions[agent_id]))
        base = oracle.area_of_mask(prefix_mask)
        calls[agent_id] = oracle.calls - before
        marginal = with_own - base
        marginals[agent_id] = marginal
        neighborhoods[agent_id] = frozenset(prefix_agents)
        reward = marginal / agent.normalizer if agent.normalizer > 0 else 0.0
        agent.bandit.update(actions[agent_id], reward)
        prefix_mask |= oracle.mask(agent_id, actions[agent_id])
        prefix_value = with_own
        prefix_agents.append(agent_id)
    message_count = sum((k + 1) * d for k, d in enumerate(order.hops))
    return RoundRecord(
        round=t,
        actions=actions,
        neighborhoods=neighborhoods,
        f_value=prefix_value,
        per_agent_marginals=marginals,
        sim_time_elapsed=sim_time_elapsed,
        oracle_calls=calls,
        message_count=message_count,
    )
