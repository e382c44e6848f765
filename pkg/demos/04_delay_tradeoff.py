"""Bandwidth against the clock: more neighbors per round means more objective
evaluations per round, so under a fixed time budget the round count falls as
tau_f * (2*alpha + 3) + tau_c grows.

Demo scale (2 trials, 12 cameras); the full Table-II style sweep is:

    banditcoord run --preset delay --out out/delay
    banditcoord run --preset delay --override tau_f_seconds=0.09 --out out/delay_slow_eval
"""
from banditcoord.cli import preset_text
from banditcoord.configio import parse_config
from banditcoord.scenario import run_experiment

for tau_f in (0.01, 0.09):
    overrides = [
        "algorithms=anaconda:alpha=1, anaconda:alpha=3, anaconda:alpha=5, dfs-bsg",
        f"tau_f_seconds={tau_f}",
        "count=12",
        "trials=2",
        "budget_seconds=120",
    ]
    config = parse_config(preset_text("delay"), overrides)
    result = run_experiment(config, jobs=2)
    print(f"\ntau_f={tau_f}s, tau_c=0.03s, 120 s budget")
    for run in result.runs:
        summary = run.summary()
        rounds = summary["rounds_completed"][0]
        print(f"  {run.variant.label:18s} rounds={rounds:5d} "
              f"mean coverage={summary['trial_stats']['mean_pct']:6.2f}%")
