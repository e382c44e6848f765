import math

import numpy as np
import pytest

from banditcoord.errors import ConfigError
from banditcoord.scenario import (AlgoVariant, ScenarioConfig, SweepPoint, URBAN_POSITIONS,
                                  build_coordination_neighborhoods, build_urban_preset,
                                  run_experiment, run_trial)
from banditcoord.timing import DelayModel, anaconda_round_time, budget_to_rounds


def micro_config(**kw):
    base = dict(
        world_kind="blank", width=12.0, height=12.0, camera_count=3,
        placement="explicit",
        positions=((3.0, 3.0), (6.0, 8.0), (9.0, 4.0)),
        fov_radius=4.0, aov=math.pi / 2, direction_count=4, comm_range=20.0,
        bandwidth=1, algorithms=(AlgoVariant("anaconda"),), rounds=30, trials=2, seed=5,
    )
    base.update(kw)
    return ScenarioConfig(**base)


class TestNeighborhoods:
    def test_zero_range_isolates_everyone(self):
        got = build_coordination_neighborhoods([(0, 0), (3, 0), (0, 4)], 0.0)
        assert got == {0: (), 1: (), 2: ()}

    def test_large_range_connects_everyone(self):
        got = build_coordination_neighborhoods([(0, 0), (3, 0), (0, 4)], 1000.0)
        assert got == {0: (1, 2), 1: (0, 2), 2: (0, 1)}

    def test_urban_range_25_matches_distance_oracle(self):
        got = build_coordination_neighborhoods(URBAN_POSITIONS, 25.0)
        expected = {}
        for i, (xi, yi) in enumerate(URBAN_POSITIONS):
            expected[i] = tuple(
                j for j, (xj, yj) in enumerate(URBAN_POSITIONS)
                if j != i and math.hypot(xj - xi, yj - yi) <= 25.0
            )
        assert got == expected
        assert got[0] == (1,)        # (0,20) only reaches (20,20)
        assert got[3] == (2, 4)      # (50,20) reaches (30,20) and (60,20)

    def test_asymmetric_ranges(self):
        got = build_coordination_neighborhoods([(0, 0), (10, 0)], [5.0, 50.0])
        assert got == {0: (), 1: (0,)}

    def test_rejects_duplicate_positions(self):
        with pytest.raises(ValueError):
            build_coordination_neighborhoods([(0, 0), (0, 0)], 5.0)


class TestUrbanPreset:
    def test_camera_count_and_interest_area(self):
        world, cameras = build_urban_preset()
        assert len(cameras) == 8
        assert world.interest_mask.sum() == 3200
        assert all(len(c.directions) == 16 for c in cameras)


class TestConfigValidation:
    def test_valid_micro_config(self):
        assert micro_config().validate() == []

    def test_exactly_one_horizon(self):
        assert micro_config(rounds=None, budget_seconds=None).validate()
        assert micro_config(budget_seconds=10.0).validate()  # both set

    def test_budget_requires_delays(self):
        cfg = micro_config(rounds=None, budget_seconds=10.0)
        assert any("delays" in e for e in cfg.validate())

    def test_sweep_must_pair_lists(self):
        cfg = micro_config(camera_counts=(2, 3), map_sides=None)
        assert cfg.validate()

    def test_urban_placement_rules(self):
        cfg = ScenarioConfig(world_kind="urban", placement="uniform", camera_count=8,
                             algorithms=(AlgoVariant("anaconda"),), rounds=5)
        assert any("preset" in e for e in cfg.validate())

    def test_algo_variant_parsing(self):
        assert AlgoVariant.parse("anaconda:alpha=3") == AlgoVariant("anaconda", 3)
        assert AlgoVariant.parse(" dfs-bsg ") == AlgoVariant("dfs-bsg")
        with pytest.raises(ConfigError):
            AlgoVariant.parse("anaconda:beta=3")
        with pytest.raises(ConfigError):
            AlgoVariant.parse("simulated-annealing")


class TestRunTrial:
    def test_single_round_single_agent(self):
        cfg = micro_config(camera_count=1, positions=((6.0, 6.0),), bandwidth=0,
                           rounds=1, trials=1)
        result = run_trial(cfg, cfg.sweep_points()[0], AlgoVariant("anaconda"), 0)
        assert len(result.rounds) == 1
        assert result.coverage_pct[0] == pytest.approx(
            100.0 * result.f_values[0] / result.interest_area)
        assert result.final_neighborhoods[0] == ()

    def test_deterministic_given_config_and_seed(self):
        cfg = micro_config()
        a = run_trial(cfg, cfg.sweep_points()[0], AlgoVariant("anaconda"), 1)
        b = run_trial(cfg, cfg.sweep_points()[0], AlgoVariant("anaconda"), 1)
        assert np.array_equal(a.f_values, b.f_values)
        assert np.array_equal(a.beta_running, b.beta_running)
        assert a.final_neighborhoods == b.final_neighborhoods

    def test_shuffled_phase_order_is_identical(self):
        cfg = micro_config(rounds=40)
        point = cfg.sweep_points()[0]
        plain = run_trial(cfg, point, AlgoVariant("anaconda"), 0)
        shuffled = run_trial(cfg, point, AlgoVariant("anaconda"), 0, shuffle_phase_order=True)
        assert np.array_equal(plain.f_values, shuffled.f_values)
        assert np.array_equal(plain.beta_running, shuffled.beta_running)
        assert plain.final_neighborhoods == shuffled.final_neighborhoods

    def test_budget_mode_round_count_is_exact(self):
        cfg = micro_config(rounds=None, budget_seconds=9.0, tau_f=0.05, tau_c=0.02)
        point = cfg.sweep_points()[0]
        result = run_trial(cfg, point, AlgoVariant("anaconda", 2), 0)
        per_round = anaconda_round_time(2, DelayModel(0.05, 0.02))
        assert len(result.rounds) == budget_to_rounds(9.0, per_round)
        assert result.sim_time[-1] <= 9.0

    def test_dfs_sg_produces_single_row(self):
        cfg = micro_config(tau_f=0.1, tau_c=0.01)
        result = run_trial(cfg, cfg.sweep_points()[0], AlgoVariant("dfs-sg"), 0)
        assert len(result.rounds) == 1
        assert result.audit["ok"]
        assert result.beta_running[0] == pytest.approx(1.0)  # prefix marginals telescope

    def test_heuristic_variants_run(self):
        cfg = micro_config()
        point = cfg.sweep_points()[0]
        for kind in ("actsel+nearest", "actsel+random"):
            result = run_trial(cfg, point, AlgoVariant(kind), 0)
            assert len(result.rounds) == 30
            for neigh in result.final_neighborhoods.values():
                assert len(neigh) <= 1

    def test_bound_report_on_small_instance(self):
        cfg = micro_config(rounds=200)
        result = run_trial(cfg, cfg.sweep_points()[0], AlgoVariant("anaconda"), 0,
                           with_bounds=True)
        report = result.bound_report
        assert report is not None
        assert 0.0 < report["asymptotic_lb"] <= 1.0
        assert report["f_opt"] > 0


class TestRunExperiment:
    def test_deterministic_degenerate_scenario_has_zero_std(self):
        cfg = micro_config(camera_count=1, positions=((6.0, 6.0),), direction_count=1,
                           bandwidth=0, rounds=3, trials=4)
        result = run_experiment(cfg)
        summ = result.runs[0].summary()
        assert summ["trial_stats"]["std_pct"] == 0.0

    def test_parallel_jobs_match_serial(self):
        cfg = micro_config(trials=3)
        serial = run_experiment(cfg, jobs=1)
        parallel = run_experiment(cfg, jobs=2)
        for a, b in zip(serial.runs, parallel.runs):
            for ta, tb in zip(a.trials, b.trials):
                assert np.array_equal(ta.f_values, tb.f_values)

    def test_uniform_placement_shared_across_variants(self):
        cfg = micro_config(placement="uniform", positions=None, camera_count=4,
                           comm_range=30.0, trials=2,
                           algorithms=(AlgoVariant("anaconda"), AlgoVariant("dfs-bsg")))
        result = run_experiment(cfg)
        ana, bsg = result.runs
        for ta, tb in zip(ana.trials, bsg.trials):
            assert ta.placement_attempts == tb.placement_attempts
            assert ta.interest_area == tb.interest_area

    def test_rejects_invalid_config(self):
        with pytest.raises(ConfigError):
            run_experiment(micro_config(rounds=None, budget_seconds=None))


@pytest.mark.slow
def test_density_sweep_coverage_fraction_is_nonincreasing():
    """Fixed team on growing maps: the covered fraction can only fall (in
    expectation over trials) as the same sensors are spread ever thinner."""
    sides = (math.sqrt(200.0), math.sqrt(800.0), math.sqrt(2000.0))
    cfg = ScenarioConfig(
        world_kind="blank", camera_count=20, placement="uniform",
        fov_radius=8.0, aov=math.pi / 3, direction_count=16, comm_range=16.0,
        bandwidth=1, algorithms=(AlgoVariant("anaconda"),),
        rounds=800, trials=20, seed=99,
        camera_counts=(20, 20, 20), map_sides=sides,
    )
    result = run_experiment(cfg)
    means = [run.summary()["round_stats"]["mean_pct"] for run in result.runs]
    assert means[0] >= means[1] - 1.0
    assert means[1] >= means[2] - 1.0
