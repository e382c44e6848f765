"""Command-line front end: config parsing, experiment execution, result
emission.  Exit codes: 0 success, 2 config/usage errors, 3 failed runtime
preconditions (connectivity, capacity).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from importlib import resources
from pathlib import Path

from . import __version__, analysis
from .configio import apply_overrides, canonical_text, config_digest, config_from_parser, _parser
from .errors import CapacityError, ConfigError, ConnectivityError
from .objective import SubmodularOracle, blank_world, camera_ring, check_second_order_submodular, curvature, rectangles_world
from .scenario import (URBAN_AOV, URBAN_BLOCKS, URBAN_FOV_RADIUS, URBAN_POSITIONS,
                       ExperimentResult, ScenarioConfig, run_experiment)

logger = logging.getLogger(__name__)

CSV_SCHEMA = "banditcoord.trial.v1"
CSV_COLUMNS = ("trial", "round", "sim_time_s", "f_value", "coverage_pct", "beta_running")

PRESETS = {
    "urban": "8-camera street-block monitoring, neighbor strategies compared over 3000 rounds",
    "density": "20 cameras, map area swept 200..2000, neighbor strategies per density",
    "no-delay": "50 cameras, bandwidths 0..5 vs DFS benchmarks, 4000 rounds, no delays",
    "delay": "50 cameras, 300 s budget under evaluation/message delays",
    "scalability": "10..50 cameras at constant density, 300 s budget, delays 0.01/0.01",
}


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return resources.files("banditcoord.presets").joinpath(f"{name}.cfg").read_text()


def _load(args) -> ScenarioConfig:
    if getattr(args, "preset", None):
        text = preset_text(args.preset)
    elif getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text()
    else:
        raise ConfigError("give a config path or --preset NAME")
    parser = _parser(text)
    apply_overrides(parser, getattr(args, "override", None))
    config = config_from_parser(parser)
    errors = config.validate()
    if errors:
        raise ConfigError("; ".join(errors))
    return config


def _variant_dirname(label: str) -> str:
    return label.replace(":alpha=", "_alpha").replace("+", "_")


def _write_trial_csv(path: Path, trial) -> None:
    with path.open("w", newline="") as fh:
        fh.write(f"# schema={CSV_SCHEMA} version={__version__}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for k in range(len(trial.rounds)):
            writer.writerow([
                trial.trial,
                int(trial.rounds[k]),
                repr(float(trial.sim_time[k])),
                repr(float(trial.f_values[k])),
                repr(float(trial.coverage_pct[k])),
                repr(float(trial.beta_running[k])),
            ])


def write_outputs(result: ExperimentResult, out_dir: Path, wall_seconds: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    trial_paths = []
    for run in result.runs:
        sub = out_dir / run.point.label / _variant_dirname(run.variant.label)
        sub.mkdir(parents=True, exist_ok=True)
        for trial in run.trials:
            path = sub / f"trial_{trial.trial:03d}.csv"
            _write_trial_csv(path, trial)
            trial_paths.append(str(path.relative_to(out_dir)))

    summary = result.summary()
    summary["config_digest"] = config_digest(result.config)
    summary["csv_schema"] = CSV_SCHEMA
    summary["version"] = __version__
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    manifest = {
        "config_digest": summary["config_digest"],
        "canonical_config": canonical_text(result.config),
        "master_seed": result.config.seed,
        "version": __version__,
        "trial_csv_paths": trial_paths,
        "placement_rejections": {
            f"{run.point.label}/{run.variant.label}": sum(t.placement_attempts - 1 for t in run.trials)
            for run in result.runs
        },
        "wall_clock_seconds": wall_seconds,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_run(args) -> int:
    config = _load(args)
    out_dir = Path(args.out or os.environ.get("BANDITCOORD_OUT", "banditcoord_out"))
    started = time.monotonic()
    result = run_experiment(config, jobs=args.jobs, with_bounds=True)
    write_outputs(result, out_dir, wall_seconds=time.monotonic() - started)
    print(f"wrote {out_dir}/summary.json ({len(result.runs)} variant runs)")
    return 0


def cmd_presets(_args) -> int:
    for name in sorted(PRESETS):
        print(f"{name:12s} {PRESETS[name]}")
    return 0


def cmd_validate(args) -> int:
    _load(args)
    print("ok")
    return 0


def _micro_oracle(args):
    """A small instance for the oracle subcommands: the first ``--cameras``
    urban cameras with a reduced heading set, or the same restriction applied
    to a supplied config's world."""
    n = args.cameras
    d = args.directions
    if getattr(args, "config", None) or getattr(args, "preset", None):
        config = _load(args)
        if config.world_kind == "urban":
            positions = list(URBAN_POSITIONS)[:n]
            cams = [camera_ring(p, config.fov_radius, config.aov, d, config.comm_range)
                    for p in positions]
            world = rectangles_world(110, 40, URBAN_BLOCKS, cams)
        else:
            from .bandit import ROLE_PLACEMENT, stream

            rng = stream(config.seed, 0, 0, ROLE_PLACEMENT, 1)
            pts = rng.random((n, 2))
            cams = [
                camera_ring((float(x * config.width), float(y * config.height)),
                            config.fov_radius, config.aov, d, config.comm_range)
                for x, y in pts
            ]
            world = blank_world(config.width, config.height, cams)
    else:
        positions = list(URBAN_POSITIONS)[:n]
        cams = [camera_ring(p, URBAN_FOV_RADIUS, URBAN_AOV, d, 200.0) for p in positions]
        world = rectangles_world(110, 40, URBAN_BLOCKS, cams)
    return SubmodularOracle(world)


def cmd_oracle(args) -> int:
    oracle = _micro_oracle(args)
    universe = [
        (agent, action)
        for agent in range(oracle.agent_count)
        for action in range(oracle.action_count(agent))
    ]
    if args.oracle_cmd == "check-submodular":
        if oracle.eval({}) != 0.0:
            print("violated: normalization, f(empty) != 0")
            return 1
        # First-order: f(s|A) >= f(s|B) for all A within B over the universe.
        values = {}
        n = len(universe)
        for mask in range(1 << n):
            pairs = [universe[i] for i in range(n) if mask >> i & 1]
            values[mask] = oracle.eval_pairs(pairs)
        full = (1 << n) - 1
        b = full
        while True:
            a = b
            while True:
                for i in range(n):
                    ga = values[a | 1 << i] - values[a]
                    gb = values[b | 1 << i] - values[b]
                    if ga < gb - 1e-9 or values[a] > values[b] + 1e-9:
                        print(f"violated: submodularity witness A={a:b} B={b:b} s={universe[i]}")
                        return 1
                if a == 0:
                    break
                a = (a - 1) & b
            if b == 0:
                break
            b = (b - 1) & full
        ok, witness = check_second_order_submodular(oracle, universe)
        if not ok:
            print(f"violated: second-order submodularity witness {witness}")
            return 1
        print("ok")
        return 0
    if args.oracle_cmd == "brute-force-opt":
        assignment, value = analysis.brute_force_opt(oracle)
        pct = oracle.world.coverage_percent(value)
        print(json.dumps({"assignment": assignment, "f_opt": value, "coverage_pct": pct},
                         sort_keys=True))
        return 0
    if args.oracle_cmd == "curvature":
        kappa = curvature(oracle, universe)
        print(json.dumps({"kappa_f": kappa, "ground_size": len(universe)}, sort_keys=True))
        return 0
    raise ConfigError(f"unknown oracle subcommand {args.oracle_cmd!r}")


def _add_config_args(sub, with_out=False):
    sub.add_argument("config", nargs="?", help="path to a scenario config file")
    sub.add_argument("--preset", help="use a shipped preset instead of a config file")
    sub.add_argument("--override", action="append", metavar="KEY=VALUE",
                     help="override a config key (repeatable)")
    if with_out:
        sub.add_argument("--out", help="output directory (default $BANDITCOORD_OUT or ./banditcoord_out)")
        sub.add_argument("--jobs", type=int, default=1, help="trial-level parallelism")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditcoord",
        description="Delay-aware simulator for distributed bandit submodular coordination",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    run_p = commands.add_parser("run", help="run an experiment and write CSVs + summary")
    _add_config_args(run_p, with_out=True)
    run_p.set_defaults(func=cmd_run)

    presets_p = commands.add_parser("presets", help="list the shipped scenario presets")
    presets_p.set_defaults(func=cmd_presets)

    validate_p = commands.add_parser("validate", help="check a config without running it")
    _add_config_args(validate_p)
    validate_p.set_defaults(func=cmd_validate)

    oracle_p = commands.add_parser("oracle", help="exhaustive checks on a small instance")
    oracle_p.add_argument("oracle_cmd", choices=["check-submodular", "brute-force-opt", "curvature"])
    oracle_p.add_argument("--cameras", type=int, default=4)
    oracle_p.add_argument("--directions", type=int, default=2)
    _add_config_args(oracle_p)
    oracle_p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConnectivityError, CapacityError) as exc:
        name = type(exc).__name__
        print(f"precondition failed ({name}): {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
