"""Distributed bandit submodular coordination: simulator and algorithm library.

Agents repeatedly coordinate sector fields of view on a rasterized map under
bandit feedback, learning both what to do (action bandits) and whom to listen
to (neighbor bandits), with a simulated clock that prices objective
evaluations and one-action messages.
"""

__version__ = "0.1.0"

from .analysis import (BoundReport, brute_force_neighborhood, brute_force_opt, compute_beta,
                       evaluate_bounds, rho, voc_curvature)
from .bandit import Exp3State, stream
from .benchmarks import (CommGraph, DfsOrder, build_bsg_team, dfs_bsg_round, dfs_order,
                         dfs_sg_run, graph_from_positions, nearest_neighbors, random_neighbors)
from .coordination import (AgentState, RoundRecord, anaconda_round, build_team,
                           rebuild_neighborhoods)
from .errors import (AuditError, CapacityError, ConfigError, ConnectivityError,
                     DegenerateObjectiveError)
from .objective import (CameraSpec, CoverageWorld, SubmodularOracle, blank_world, camera_ring,
                        check_second_order_submodular, coverage_cells, curvature,
                        rectangles_world)
from .scenario import (AlgoVariant, ScenarioConfig, TrialResult, build_coordination_neighborhoods,
                       build_urban_preset, run_experiment, run_trial, urban_structural_optimum)
from .timing import (DelayModel, anaconda_round_time, budget_to_rounds, convergence_rounds,
                     convergence_time, team_round_time)

__all__ = [
    "__version__",
    "AgentState", "AlgoVariant", "AuditError", "BoundReport", "CameraSpec", "CapacityError",
    "CommGraph", "ConfigError", "ConnectivityError", "CoverageWorld", "DegenerateObjectiveError",
    "DelayModel", "DfsOrder", "Exp3State", "RoundRecord", "ScenarioConfig", "SubmodularOracle",
    "TrialResult", "anaconda_round", "anaconda_round_time", "blank_world",
    "brute_force_neighborhood", "brute_force_opt", "budget_to_rounds",
    "build_bsg_team", "build_coordination_neighborhoods", "build_team", "build_urban_preset",
    "camera_ring", "check_second_order_submodular", "compute_beta", "convergence_rounds",
    "convergence_time", "coverage_cells", "curvature", "dfs_bsg_round", "dfs_order", "dfs_sg_run",
    "evaluate_bounds", "graph_from_positions", "nearest_neighbors", "random_neighbors",
    "rebuild_neighborhoods", "rectangles_world", "rho", "run_experiment", "run_trial", "stream",
    "team_round_time", "urban_structural_optimum", "voc_curvature",
]
