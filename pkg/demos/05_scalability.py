"""Round throughput as the network grows.

Bandit coordination does a constant amount of work per agent per round, so
its round count under a time budget is independent of the network size.  The
sequential-greedy bandit relays a growing message across the whole network
every round, so its round count collapses.  Demo scale; the full sweep is:

    banditcoord run --preset scalability --out out/scalability
"""
from banditcoord.cli import preset_text
from banditcoord.configio import parse_config
from banditcoord.scenario import run_experiment

overrides = [
    "camera_counts = 6, 12, 18",
    "map_side_units = 18, 25, 31",
    "trials=2",
    "budget_seconds=60",
]
config = parse_config(preset_text("scalability"), overrides)
result = run_experiment(config, jobs=2)

print(f"{'cameras':>8s} {'algorithm':>18s} {'rounds':>7s} {'mean %':>8s}")
for run in result.runs:
    summary = run.summary()
    rounds = summary["rounds_completed"]
    print(f"{run.point.camera_count:8d} {run.variant.label:>18s} "
          f"{int(sum(rounds) / len(rounds)):7d} {summary['trial_stats']['mean_pct']:8.2f}")
