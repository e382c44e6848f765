"""Experiment construction and execution: worlds, coordination neighborhoods,
Monte-Carlo trials, and cross-trial summaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from . import analysis, benchmarks, coordination, timing
from .bandit import ROLE_PLACEMENT, ROLE_RANDOM_NEIGHBORS, stream
from .errors import AuditError, ConfigError, ConnectivityError
from .objective import SubmodularOracle, blank_world, camera_ring, rectangles_world

URBAN_POSITIONS = (
    (0.0, 20.0), (20.0, 20.0), (30.0, 20.0), (50.0, 20.0),
    (60.0, 20.0), (80.0, 20.0), (90.0, 20.0), (110.0, 20.0),
)
URBAN_BLOCKS = ((0, 0, 20, 40), (30, 0, 50, 40), (60, 0, 80, 40), (90, 0, 110, 40))
URBAN_FOV_RADIUS = 20.0
URBAN_AOV = math.pi / 2
URBAN_DIRECTIONS = 16
URBAN_COMM_RANGE = 200.0  # exceeds the map diagonal: every camera reaches every other


def build_urban_preset():
    """The eight-camera street-block monitoring world: a 110x40 map with four
    20x40 blocks of interest, cameras on the block edges at mid-height."""
    cameras = [
        camera_ring(p, URBAN_FOV_RADIUS, URBAN_AOV, URBAN_DIRECTIONS, URBAN_COMM_RANGE)
        for p in URBAN_POSITIONS
    ]
    world = rectangles_world(110, 40, URBAN_BLOCKS, cameras)
    return world, cameras


def urban_structural_optimum() -> dict[int, int]:
    """The hand-written optimal configuration: the two cameras of each block
    split it into complementary diagonal quarter-sectors (headings 45 and 225
    degrees off east), giving zero FOV overlap within each block."""
    ne = URBAN_DIRECTIONS // 8   # heading pi/4
    sw = 5 * URBAN_DIRECTIONS // 8  # heading 5*pi/4
    return {i: (ne if i % 2 == 0 else sw) for i in range(len(URBAN_POSITIONS))}


def build_coordination_neighborhoods(positions, comm_ranges) -> dict[int, tuple[int, ...]]:
    """M_i = agents within agent i's communication range (range need not be
    symmetric, so neither is the result)."""
    pts = [(float(x), float(y)) for x, y in positions]
    if len(set(pts)) != len(pts):
        raise ValueError("positions must be distinct")
    if isinstance(comm_ranges, (int, float)):
        comm_ranges = [float(comm_ranges)] * len(pts)
    out: dict[int, tuple[int, ...]] = {}
    for i, (xi, yi) in enumerate(pts):
        members = [
            j
            for j, (xj, yj) in enumerate(pts)
            if j != i and math.hypot(xj - xi, yj - yi) <= comm_ranges[i]
        ]
        out[i] = tuple(members)
    return out


ALGORITHM_KINDS = ("anaconda", "actsel+nearest", "actsel+random", "dfs-sg", "dfs-bsg")
MAX_PLACEMENT_ATTEMPTS = 1000
AUTO_BOUND_CAP = 200_000  # joint assignments; above this no automatic BoundReport


@dataclass(frozen=True)
class AlgoVariant:
    """One algorithm under test; ``alpha`` overrides the config bandwidth."""

    kind: str
    alpha: int | None = None

    @property
    def label(self) -> str:
        return self.kind if self.alpha is None else f"{self.kind}:alpha={self.alpha}"

    @classmethod
    def parse(cls, token: str) -> "AlgoVariant":
        token = token.strip()
        kind, _, rest = token.partition(":")
        alpha = None
        if rest:
            key, _, value = rest.partition("=")
            if key.strip() != "alpha":
                raise ConfigError(f"unknown algorithm option {key!r} in {token!r}")
            try:
                alpha = int(value)
            except ValueError as exc:
                raise ConfigError(f"bad alpha in {token!r}") from exc
            if alpha < 0:
                raise ConfigError(f"alpha must be nonnegative in {token!r}")
        if kind not in ALGORITHM_KINDS:
            raise ConfigError(f"unknown algorithm {kind!r}")
        return cls(kind=kind, alpha=alpha)


@dataclass(frozen=True)
class SweepPoint:
    camera_count: int
    map_side: float | None = None

    @property
    def label(self) -> str:
        if self.map_side is None:
            return f"n{self.camera_count}"
        side = self.map_side
        side_txt = str(int(side)) if float(side).is_integer() else f"{side:g}"
        return f"n{self.camera_count}_map{side_txt}"


@dataclass(frozen=True)
class ScenarioConfig:
    """A full experiment definition; see the shipped preset files for the
    on-disk key names."""

    world_kind: str = "blank"  # urban | blank
    width: float = 50.0
    height: float = 50.0
    camera_count: int = 8
    placement: str = "uniform"  # preset | explicit | uniform
    positions: tuple[tuple[float, float], ...] | None = None
    fov_radius: float = 8.0
    aov: float = math.pi / 3
    direction_count: int = 16
    comm_range: float = 16.0
    bandwidth: int = 1
    tau_f: float = 0.0
    tau_c: float = 0.0
    algorithms: tuple[AlgoVariant, ...] = (AlgoVariant("anaconda"),)
    rounds: int | None = None
    budget_seconds: float | None = None
    trials: int = 1
    seed: int = 0
    camera_counts: tuple[int, ...] | None = None
    map_sides: tuple[float, ...] | None = None
    dfs_sg_charge_compute: bool = True
    dfs_bsg_compute_evals: float | None = None  # None: max|V| + 2

    def validate(self) -> list[str]:
        errors = []
        if self.world_kind not in ("urban", "blank"):
            errors.append(f"world kind must be urban or blank, got {self.world_kind!r}")
        if self.world_kind == "blank" and (self.width <= 0 or self.height <= 0):
            errors.append("blank world needs positive width/height")
        if self.placement not in ("preset", "explicit", "uniform"):
            errors.append(f"unknown placement {self.placement!r}")
        if self.world_kind == "urban":
            if self.placement != "preset":
                errors.append("the urban world uses placement = preset")
            if self.camera_count != len(URBAN_POSITIONS):
                errors.append(f"the urban preset has exactly {len(URBAN_POSITIONS)} cameras")
        if self.placement == "explicit":
            if not self.positions:
                errors.append("explicit placement needs positions")
            elif len(self.positions) != self.camera_count:
                errors.append("positions count must match camera_count")
        if self.camera_count < 1:
            errors.append("camera_count must be >= 1")
        if self.fov_radius <= 0:
            errors.append("fov_radius must be positive")
        if not 0 < self.aov <= 2 * math.pi:
            errors.append("aov_rad must lie in (0, 2*pi]")
        if self.direction_count < 1:
            errors.append("direction_count must be >= 1")
        if self.comm_range < 0:
            errors.append("comm_range must be nonnegative")
        if self.bandwidth < 0:
            errors.append("bandwidth must be nonnegative")
        if self.tau_f < 0 or self.tau_c < 0:
            errors.append("delays must be nonnegative")
        if not self.algorithms:
            errors.append("at least one algorithm is required")
        if (self.rounds is None) == (self.budget_seconds is None):
            errors.append("exactly one of rounds / budget_seconds must be set")
        if self.rounds is not None and self.rounds < 1:
            errors.append("rounds must be >= 1")
        if self.budget_seconds is not None and self.budget_seconds <= 0:
            errors.append("budget_seconds must be positive")
        if self.budget_seconds is not None and self.tau_f == 0 and self.tau_c == 0:
            errors.append("a time budget needs nonzero delays")
        if self.trials < 1:
            errors.append("trials must be >= 1")
        if (self.camera_counts is None) != (self.map_sides is None):
            errors.append("camera_counts and map_sides must be given together")
        if self.camera_counts is not None and self.map_sides is not None:
            if len(self.camera_counts) != len(self.map_sides):
                errors.append("camera_counts and map_sides must have equal length")
            if self.world_kind != "blank" or self.placement != "uniform":
                errors.append("sweeps need a blank world with uniform placement")
        return errors

    @property
    def delay_model(self) -> timing.DelayModel:
        return timing.DelayModel(self.tau_f, self.tau_c)

    def sweep_points(self) -> tuple[SweepPoint, ...]:
        if self.camera_counts is None:
            side = self.width if self.world_kind == "blank" else None
            return (SweepPoint(self.camera_count, side),)
        return tuple(
            SweepPoint(int(n), float(s)) for n, s in zip(self.camera_counts, self.map_sides)
        )

    def needs_connectivity(self) -> bool:
        return any(v.kind in ("dfs-sg", "dfs-bsg") for v in self.algorithms)


@dataclass
class TrialResult:
    """Per-round series plus the per-trial summary and runtime audit."""

    trial: int
    label: str
    rounds: np.ndarray
    sim_time: np.ndarray
    f_values: np.ndarray
    coverage_pct: np.ndarray
    beta_running: np.ndarray
    final_neighborhoods: dict[int, tuple[int, ...]]
    round_seconds: float
    interest_area: float
    audit: dict
    placement_attempts: int
    bound_report: dict | None = None

    def summary(self) -> dict:
        pct = self.coverage_pct
        i_min = int(np.argmin(pct))
        i_max = int(np.argmax(pct))
        return {
            "rounds_completed": int(len(pct)),
            "mean_pct": float(pct.mean()),
            "std_pct": float(pct.std()),
            "min_pct": float(pct[i_min]),
            "argmin_round": int(self.rounds[i_min]),
            "max_pct": float(pct[i_max]),
            "argmax_round": int(self.rounds[i_max]),
            "last_quarter_mean_pct": float(pct[-max(1, len(pct) // 4):].mean()),
        }


def _trial_world(config: ScenarioConfig, point: SweepPoint, trial: int):
    """World, positions and the accepted placement attempt for one trial.

    When the experiment includes a DFS benchmark, placements are resampled
    until the communication graph is strongly connected, and the accepted
    placement is shared by every variant of the trial.
    """
    if config.world_kind == "urban":
        positions = list(URBAN_POSITIONS)
        cameras = [
            camera_ring(p, config.fov_radius, config.aov, config.direction_count, config.comm_range)
            for p in positions
        ]
        world = rectangles_world(110, 40, URBAN_BLOCKS, cameras)
        return world, positions, 1

    side_w = point.map_side if point.map_side is not None else config.width
    side_h = point.map_side if point.map_side is not None else config.height
    n = point.camera_count

    def build(positions):
        cameras = [
            camera_ring(p, config.fov_radius, config.aov, config.direction_count, config.comm_range)
            for p in positions
        ]
        return blank_world(side_w, side_h, cameras)

    if config.placement == "explicit":
        positions = [tuple(map(float, p)) for p in config.positions]
        return build(positions), positions, 1

    needs_conn = config.needs_connectivity()
    for attempt in range(1, MAX_PLACEMENT_ATTEMPTS + 1):
        rng = stream(config.seed, trial, 0, ROLE_PLACEMENT, attempt)
        pts = rng.random((n, 2))
        positions = [(float(x * side_w), float(y * side_h)) for x, y in pts]
        if not needs_conn:
            return build(positions), positions, attempt
        graph = benchmarks.graph_from_positions(positions, config.comm_range)
        if graph.is_strongly_connected():
            return build(positions), positions, attempt
    raise ConnectivityError(
        f"no strongly connected placement found in {MAX_PLACEMENT_ATTEMPTS} attempts"
    )


def _heuristic_round(team, oracle, neighborhoods_now, t, sim_time_elapsed):
    """ActSel with externally supplied neighborhoods (two evaluations per
    agent: the reward marginal)."""
    actions = {a.agent_id: coordination.actsel_draw(a) for a in team}
    marginals = {}
    calls = {}
    for agent in team:
        neigh = neighborhoods_now[agent.agent_id]
        before = oracle.calls
        context = 0
        for j in neigh:
            context |= oracle.mask(j, actions[j])
        own = oracle.mask(agent.agent_id, actions[agent.agent_id])
        marginal = oracle.area_of_mask(context | own) - oracle.area_of_mask(context)
        calls[agent.agent_id] = oracle.calls - before
        agent.action_bandit.update(actions[agent.agent_id], agent.scaled(marginal))
        marginals[agent.agent_id] = marginal
    f_value = oracle.eval(actions)
    return coordination.RoundRecord(
        round=t,
        actions=actions,
        neighborhoods={k: frozenset(v) for k, v in neighborhoods_now.items()},
        f_value=f_value,
        per_agent_marginals=marginals,
        sim_time_elapsed=sim_time_elapsed,
        oracle_calls=calls,
        message_count=sum(len(v) for v in neighborhoods_now.values()),
    )


def _audit_record(record, expected_calls, bandwidths, coordination_sets):
    for agent_id, neigh in record.neighborhoods.items():
        if len(neigh) > bandwidths[agent_id]:
            raise AuditError(
                f"round {record.round}: agent {agent_id} has {len(neigh)} neighbors, "
                f"bandwidth {bandwidths[agent_id]}"
            )
        if not neigh <= coordination_sets[agent_id]:
            raise AuditError(
                f"round {record.round}: agent {agent_id} listened outside its "
                f"coordination neighborhood"
            )
        if record.oracle_calls[agent_id] != expected_calls[agent_id]:
            raise AuditError(
                f"round {record.round}: agent {agent_id} made "
                f"{record.oracle_calls[agent_id]} evaluations, charged {expected_calls[agent_id]}"
            )


def _horizon(config: ScenarioConfig, round_seconds: float) -> int:
    if config.rounds is not None:
        return config.rounds
    return timing.budget_to_rounds(config.budget_seconds, round_seconds)


def run_trial(config: ScenarioConfig, point: SweepPoint, variant: AlgoVariant,
              trial: int, with_bounds: bool = False,
              shuffle_phase_order: bool = False) -> TrialResult:
    """Execute one algorithm variant for one Monte Carlo trial.

    ``shuffle_phase_order`` permutes the order agents are processed inside
    each synchronous phase (results must be identical; used by order-
    independence checks).  ``with_bounds`` attaches a BoundReport
    when the instance is small enough to brute force.
    """
    world, positions, attempts = _trial_world(config, point, trial)
    oracle = SubmodularOracle(world)
    neighborhoods = build_coordination_neighborhoods(positions, config.comm_range)
    coordination_sets = {i: frozenset(m) for i, m in neighborhoods.items()}
    model = config.delay_model
    n = point.camera_count
    alpha = variant.alpha if variant.alpha is not None else config.bandwidth
    interest_area = world.interest_area

    records: list[coordination.RoundRecord] = []
    kind = variant.kind

    if kind == "dfs-sg":
        graph = benchmarks.graph_from_positions(positions, config.comm_range)
        before = oracle.calls
        assignment, duration = benchmarks.dfs_sg_run(
            oracle, graph, model, charge_compute=config.dfs_sg_charge_compute
        )
        actual_calls = oracle.calls - before
        expected = sum(oracle.action_count(i) for i in range(n))
        audit = {
            "expected_evaluations": expected,
            "actual_evaluations": actual_calls,
            "ok": actual_calls == expected,
        }
        if not audit["ok"]:
            raise AuditError("sequential greedy evaluation count mismatch")
        # Replay the greedy order to recover the per-agent prefix marginals.
        seq = benchmarks.dfs_order(graph)
        prefix = 0
        marginals = {}
        for agent_id in seq.order:
            new = prefix | oracle.mask(agent_id, assignment[agent_id])
            marginals[agent_id] = (new.bit_count() - prefix.bit_count()) * oracle.cell_area
            prefix = new
        f_value = prefix.bit_count() * oracle.cell_area
        total_marg = sum(marginals.values())
        records.append(coordination.RoundRecord(
            round=1, actions=assignment,
            neighborhoods={i: frozenset(seq.order[:k]) for k, i in enumerate(seq.order)},
            f_value=f_value, per_agent_marginals=marginals,
            sim_time_elapsed=duration, oracle_calls={}, message_count=0,
        ))
        series_beta = [total_marg / f_value if f_value > 0 else float("nan")]
        round_seconds = duration
    else:
        if kind == "anaconda":
            round_seconds = timing.team_round_time([alpha] * n, model)
            expected_calls = {i: coordination.evals_per_round(alpha) for i in range(n)}
        elif kind in ("actsel+nearest", "actsel+random"):
            round_seconds = model.tau_f * 2 + model.tau_c
            expected_calls = {i: 2 for i in range(n)}
        elif kind == "dfs-bsg":
            graph = benchmarks.graph_from_positions(positions, config.comm_range)
            order = benchmarks.dfs_order(graph)
            round_seconds = benchmarks.bsg_round_seconds(
                oracle, order, model, config.dfs_bsg_compute_evals
            )
            expected_calls = {i: 2 for i in range(n)}
        else:
            raise ConfigError(f"unknown algorithm kind {kind!r}")

        horizon = _horizon(config, round_seconds)
        if horizon < 1:
            raise ConfigError("the time budget does not fit a single round")

        shuffle_rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence((config.seed, trial, 0xD15C, 0))
        )) if shuffle_phase_order else None

        if kind == "anaconda":
            team = coordination.build_team(
                oracle, neighborhoods, alpha, horizon, config.seed, trial
            )
            bandwidths = {i: alpha for i in range(n)}
            for t in range(1, horizon + 1):
                order_perm = shuffle_rng.permutation(n) if shuffle_rng is not None else None
                rec = coordination.anaconda_round(
                    team, oracle, t, sim_time_elapsed=t * round_seconds, order=order_perm
                )
                _audit_record(rec, expected_calls, bandwidths, coordination_sets)
                records.append(rec)
            final_team = team
        elif kind in ("actsel+nearest", "actsel+random"):
            team = coordination.build_team(
                oracle, neighborhoods, 0, horizon, config.seed, trial
            )
            bandwidths = {i: alpha for i in range(n)}
            if kind == "actsel+nearest":
                static = {
                    i: benchmarks.nearest_neighbors(positions, i, neighborhoods[i], alpha)
                    for i in range(n)
                }
            rngs = {
                i: stream(config.seed, trial, i, ROLE_RANDOM_NEIGHBORS) for i in range(n)
            } if kind == "actsel+random" else None
            for t in range(1, horizon + 1):
                if kind == "actsel+nearest":
                    now = static
                else:
                    now = {
                        i: benchmarks.random_neighbors(neighborhoods[i], alpha, rngs[i])
                        for i in range(n)
                    }
                rec = _heuristic_round(team, oracle, now, t, t * round_seconds)
                _audit_record(rec, expected_calls, bandwidths, coordination_sets)
                records.append(rec)
        else:  # dfs-bsg
            team = benchmarks.build_bsg_team(oracle, horizon, config.seed, trial)
            for t in range(1, horizon + 1):
                rec = benchmarks.dfs_bsg_round(
                    team, oracle, order, t, sim_time_elapsed=t * round_seconds
                )
                for agent_id, c in rec.oracle_calls.items():
                    if c != expected_calls[agent_id]:
                        raise AuditError("bandit sequential greedy evaluation count mismatch")
                records.append(rec)

        audit = {
            "expected_evaluations_per_agent_round": expected_calls,
            "ok": True,
        }
        running_marg = 0.0
        running_f = 0.0
        series_beta = []
        for rec in records:
            running_marg += sum(rec.per_agent_marginals.values())
            running_f += rec.f_value
            series_beta.append(running_marg / running_f if running_f > 0 else float("nan"))

    rounds_arr = np.array([r.round for r in records], dtype=np.int64)
    sim_time = np.array([r.sim_time_elapsed for r in records], dtype=np.float64)
    f_values = np.array([r.f_value for r in records], dtype=np.float64)
    coverage = 100.0 * f_values / interest_area
    beta_running = np.array(series_beta, dtype=np.float64)

    bound = None
    if with_bounds and kind != "dfs-sg":
        joint = math.prod(oracle.action_count(i) for i in range(n))
        if joint <= AUTO_BOUND_CAP:
            bandmap = {i: (alpha if kind == "anaconda" else 0) for i in range(n)}
            try:
                bound = analysis.evaluate_bounds(records, oracle, neighborhoods, bandmap).to_dict()
            except DegenerateObjectiveError:
                bound = None

    return TrialResult(
        trial=trial,
        label=variant.label,
        rounds=rounds_arr,
        sim_time=sim_time,
        f_values=f_values,
        coverage_pct=coverage,
        beta_running=beta_running,
        final_neighborhoods={
            i: tuple(sorted(records[-1].neighborhoods.get(i, ()))) for i in range(n)
        },
        round_seconds=round_seconds,
        interest_area=interest_area,
        audit=audit,
        placement_attempts=attempts,
        bound_report=bound,
    )


@dataclass
class VariantRun:
    """All trials of one algorithm variant at one sweep point."""

    point: SweepPoint
    variant: AlgoVariant
    trials: list[TrialResult]

    def mean_curve(self) -> np.ndarray:
        """Across-trial mean coverage curve, truncated to the shortest trial."""
        n = min(len(t.coverage_pct) for t in self.trials)
        return np.mean([t.coverage_pct[:n] for t in self.trials], axis=0)

    def summary(self) -> dict:
        curve = self.mean_curve()
        i_min = int(np.argmin(curve))
        i_max = int(np.argmax(curve))
        trial_means = [float(t.coverage_pct.mean()) for t in self.trials]
        trial_summaries = [t.summary() for t in self.trials]
        bounds = [t.bound_report for t in self.trials if t.bound_report is not None]
        bound_agg = None
        if bounds:
            keys = [k for k, v in bounds[0].items() if isinstance(v, (int, float))]
            bound_agg = {k: float(np.mean([b[k] for b in bounds])) for k in keys}
            bound_agg["satisfied_aposteriori_rate"] = float(
                np.mean([b["satisfied_aposteriori"] for b in bounds])
            )
            bound_agg["satisfied_asymptotic_rate"] = float(
                np.mean([b["satisfied_asymptotic"] for b in bounds])
            )
        return {
            "point": {"camera_count": self.point.camera_count, "map_side": self.point.map_side},
            "algorithm": self.variant.label,
            "round_stats": {
                "mean_pct": float(curve.mean()),
                "std_pct": float(curve.std()),
                "min_pct": float(curve[i_min]),
                "argmin_round": i_min + 1,
                "max_pct": float(curve[i_max]),
                "argmax_round": i_max + 1,
            },
            "trial_stats": {
                "mean_pct": float(np.mean(trial_means)),
                "std_pct": float(np.std(trial_means)),
            },
            "last_quarter_mean_pct": float(
                np.mean([s["last_quarter_mean_pct"] for s in trial_summaries])
            ),
            "rounds_completed": [s["rounds_completed"] for s in trial_summaries],
            "round_seconds": [t.round_seconds for t in self.trials],
            "max_over_rounds_per_trial": [s["max_pct"] for s in trial_summaries],
            "placement_rejections": int(sum(t.placement_attempts - 1 for t in self.trials)),
            "evaluation_audit_ok": all(t.audit.get("ok", False) for t in self.trials),
            "bound_report": bound_agg,
        }


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    runs: list[VariantRun]

    def summary(self) -> dict:
        return {
            "seed": self.config.seed,
            "trials": self.config.trials,
            "variants": [run.summary() for run in self.runs],
        }

    def find(self, label: str, point_index: int = 0) -> VariantRun:
        points = self.config.sweep_points()
        target = points[point_index]
        for run in self.runs:
            if run.variant.label == label and run.point == target:
                return run
        raise KeyError(f"no run for {label!r} at {target}")


def _run_one(args):
    config, point, variant, trial, with_bounds = args
    return run_trial(config, point, variant, trial, with_bounds=with_bounds)


def run_experiment(config: ScenarioConfig, jobs: int = 1,
                   with_bounds: bool = False) -> ExperimentResult:
    """Run every (sweep point, algorithm, trial) combination and aggregate."""
    errors = config.validate()
    if errors:
        raise ConfigError("; ".join(errors))
    tasks = [
        (config, point, variant, trial, with_bounds)
        for point in config.sweep_points()
        for variant in config.algorithms
        for trial in range(config.trials)
    ]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]

    runs = []
    idx = 0
    for point in config.sweep_points():
        for variant in config.algorithms:
            trials = results[idx:idx + config.trials]
            idx += config.trials
            runs.append(VariantRun(point=point, variant=variant, trials=trials))
    return ExperimentResult(config=config, runs=runs)
