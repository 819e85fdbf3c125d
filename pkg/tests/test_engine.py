import math
import os
from dataclasses import replace

import numpy as np
import pytest

from swarmform.engine import (
    ConfigError,
    EarlyStopConfig,
    LeaderPathConfig,
    ScenarioConfig,
    StraightPath,
    Trace,
    TraceRecord,
    UTurnPath,
    WaypointPath,
    config_from_dict,
    convergence_time,
    derive_seed,
    final_formation,
    init_scenario,
    read_trace_csv,
    run,
    scalability_batch,
    sense,
    tick,
    write_trace_csv,
)
from swarmform.kinematics import Pose

# A small, fast, connected scenario used where the full protocol is not
# the point of the test.
SMALL = config_from_dict({
    "n_robots": 3,
    "area_side": 6.0,
    "max_steps": 40,
    "seed": 5,
})


class TestConfig:
    def test_empty_dict_gives_defaults(self):
        cfg = config_from_dict({})
        assert cfg.sensor_range == 10.0
        assert cfg.d_s == 0.5
        assert cfg.formation.l_d == 1.0
        assert cfg.formation.phi_left == pytest.approx(-math.pi / 4)
        assert cfg.formation.phi_right == pytest.approx(math.pi / 4)
        assert cfg.n_robots == 11
        assert cfg.speed_limits.v_max == 2.0
        assert cfg.dt == 0.1

    def test_even_robot_count_rejected(self):
        with pytest.raises(ConfigError, match="n_robots"):
            config_from_dict({"n_robots": 4})

    def test_unknown_key_rejected_with_path(self):
        with pytest.raises(ConfigError, match="bso.p_wrong"):
            config_from_dict({"bso": {"p_wrong": 0.5}})

    def test_range_ordering_enforced(self):
        with pytest.raises(ConfigError, match="sensor_range"):
            config_from_dict({"sensor_range": 0.8})

    def test_invalid_nested_value_names_key(self):
        with pytest.raises(ConfigError, match="leader_path.type"):
            config_from_dict({"leader_path": {"type": "spiral"}})

    def test_to_dict_roundtrip(self):
        cfg = config_from_dict({"n_robots": 5, "seed": 3,
                                "leader_path": {"type": "u_turn"}})
        assert config_from_dict(cfg.to_dict()) == cfg

    def test_leader_spawn_formula(self):
        assert config_from_dict({"n_robots": 11}).leader_spawn() == (5.0, 5.0)
        assert config_from_dict({"n_robots": 5}).leader_spawn() == (2.0, 2.0)


class TestPaths:
    def test_straight_endpoints(self):
        p = StraightPath((5.0, 5.0), (5.0, 25.0))
        assert p.length == pytest.approx(20.0)
        start, end = p.pose_at(0.0), p.pose_at(p.length)
        assert (start.x, start.y) == (5.0, 5.0)
        assert (end.x, end.y) == (5.0, 25.0)
        assert start.theta == pytest.approx(math.pi / 2)

    def test_straight_clamps_beyond_length(self):
        p = StraightPath((0.0, 0.0), (1.0, 0.0))
        assert p.pose_at(99.0).x == 1.0
        assert p.pose_at(-1.0).x == 0.0

    def test_u_turn_geometry(self):
        p = UTurnPath((5.0, 5.0), math.pi / 2, leg=10.0, radius=3.0,
                      direction="right")
        assert p.length == pytest.approx(20.0 + 3.0 * math.pi)
        end = p.pose_at(p.length)
        # A right U-turn from heading +y shifts the return leg +2r in x
        # and reverses the heading.
        assert (end.x, end.y) == pytest.approx((11.0, 5.0), abs=1e-9)
        assert abs(end.theta) == pytest.approx(math.pi / 2, abs=1e-9)
        mid = p.pose_at(10.0 + 1.5 * math.pi)
        assert mid.y == pytest.approx(18.0, abs=1e-9)

    def test_u_turn_arc_interval(self):
        p = UTurnPath((0.0, 0.0), 0.0, leg=4.0, radius=2.0)
        assert p.arc_interval() == pytest.approx((4.0, 4.0 + 2.0 * math.pi))

    def test_waypoint_path(self):
        p = WaypointPath([(0.0, 0.0), (1.0, 0.0), (1.0, 2.0)])
        assert p.length == pytest.approx(3.0)
        mid = p.pose_at(2.0)
        assert (mid.x, mid.y) == pytest.approx((1.0, 1.0))
        assert mid.theta == pytest.approx(math.pi / 2)

    def test_waypoint_rejects_duplicates(self):
        with pytest.raises(ConfigError):
            WaypointPath([(0.0, 0.0), (0.0, 0.0)])

    def test_path_config_defaults_to_spawn(self):
        path = LeaderPathConfig().build((2.0, 2.0))
        assert path.pose_at(0.0).x == 2.0
        assert path.length == pytest.approx(20.0)


class TestInitScenario:
    def test_leader_at_grid_center(self):
        cfg = config_from_dict({"n_robots": 11, "area_side": 30.0, "seed": 1,
                                "leader_path": {"type": "straight",
                                                "start": [5.0, 5.0],
                                                "end": [5.0, 25.0]}})
        world = init_scenario(cfg)
        leader = world.robots[0].pose
        assert (leader.x, leader.y) == (5.0, 5.0)
        for rid, st in world.robots.items():
            assert 0.0 <= st.pose.x <= 30.0 or rid == 0
            assert 0.0 <= st.pose.y <= 30.0 or rid == 0

    def test_same_seed_identical_world(self):
        w1 = init_scenario(SMALL)
        w2 = init_scenario(SMALL)
        for rid in w1.robots:
            assert w1.robots[rid].pose == w2.robots[rid].pose
            assert w1.robots[rid].gains == w2.robots[rid].gains

    def test_min_separation_enforced(self):
        cfg = config_from_dict({"n_robots": 5, "area_side": 4.0, "seed": 9})
        world = init_scenario(cfg)
        pts = [(st.pose.x, st.pose.y) for st in world.robots.values()]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                assert math.hypot(pts[i][0] - pts[j][0],
                                  pts[i][1] - pts[j][1]) >= 0.5

    def test_impossible_placement_rejected(self):
        cfg = replace(config_from_dict({"n_robots": 9}), area_side=0.5, d_s=0.45)
        with pytest.raises(ConfigError, match="area_side"):
            init_scenario(cfg)

    def test_followers_have_initialized_tuners(self):
        world = init_scenario(SMALL)
        for rid in world.follower_ids():
            st = world.robots[rid]
            assert st.tuner is not None
            assert len(st.tuner.solutions) == SMALL.bso.population_size
            assert all(0.0 <= g <= 10.0 for g in st.gains.as_tuple())


class TestSense:
    def test_out_of_range_excluded(self):
        poses = {0: Pose(0, 0, 0), 1: Pose(10.1, 0, 0)}
        assert sense(poses, 0, 10.0) == []

    def test_range_and_bearing(self):
        poses = {0: Pose(0, 0, 0), 1: Pose(3, 4, 0.7)}
        (d,) = sense(poses, 0, 10.0)
        assert d.range == pytest.approx(5.0)
        assert d.bearing == pytest.approx(math.atan2(4, 3), abs=1e-12)
        assert d.heading == 0.7
        assert d.id == 1

    def test_body_frame_bearing(self):
        poses = {0: Pose(0, 0, math.pi / 2), 1: Pose(0, 1, 0)}
        (d,) = sense(poses, 0, 10.0)
        assert d.bearing == pytest.approx(0.0, abs=1e-12)

    def test_sorted_by_range_then_id(self):
        poses = {0: Pose(0, 0, 0), 1: Pose(2, 0, 0), 2: Pose(1, 0, 0),
                 3: Pose(0, 1, 0)}
        dets = sense(poses, 0, 10.0)
        assert [d.id for d in dets] == [2, 3, 1]

    def test_symmetric_ranges(self):
        rng = np.random.default_rng(4)
        poses = {i: Pose(*rng.uniform(0, 8, size=2), rng.uniform(-3, 3))
                 for i in range(5)}
        for a in poses:
            for d in sense(poses, a, 10.0):
                back = [b for b in sense(poses, d.id, 10.0) if b.id == a]
                assert back and back[0].range == pytest.approx(d.range, abs=1e-12)


class TestTickAndRun:
    def test_trace_completeness(self):
        trace = run(SMALL)
        assert len(trace.records) == SMALL.n_robots * SMALL.max_steps
        steps = sorted({r.step for r in trace.records})
        assert steps == list(range(SMALL.max_steps))

    def test_leader_follows_path_exactly(self):
        trace = run(SMALL)
        leader = trace.robot_records(0)
        path = SMALL.leader_path.build(SMALL.leader_spawn())
        for rec in leader[:5] + leader[-5:]:
            s = min(path.length, SMALL.leader_speed * SMALL.dt * (rec.step + 1))
            want = path.pose_at(s)
            assert (rec.x, rec.y) == pytest.approx((want.x, want.y), abs=1e-9)

    def test_determinism_bitwise(self):
        t1 = run(SMALL)
        t2 = run(SMALL)
        assert t1.records == t2.records

    def test_seeds_differ(self):
        t1 = run(SMALL)
        t2 = run(replace(SMALL, seed=6))
        assert t1.records != t2.records

    def test_two_phase_reads_previous_poses(self):
        # The twist recorded at step t must integrate the step-(t-1) pose
        # into the step-t pose: decisions never see same-step writes.
        trace = run(SMALL)
        for rid in (1, 2):
            recs = trace.robot_records(rid)
            for prev, cur in zip(recs[:-1], recs[1:]):
                nx = prev.x + cur.v * math.cos(prev.theta) * SMALL.dt
                ny = prev.y + cur.v * math.sin(prev.theta) * SMALL.dt
                assert (cur.x, cur.y) == pytest.approx((nx, ny), abs=1e-9)

    def test_speed_limits_respected(self):
        trace = run(SMALL)
        for r in trace.records:
            if r.robot_id != 0:
                assert abs(r.v) <= SMALL.speed_limits.v_max + 1e-12
                assert abs(r.omega) <= SMALL.speed_limits.omega_max + 1e-12

    def test_single_tick_counts(self):
        world = init_scenario(SMALL)
        records = tick(world, SMALL)
        assert len(records) == SMALL.n_robots
        assert world.step == 1

    def test_error_decreases_over_run(self):
        cfg = config_from_dict({"n_robots": 3, "area_side": 6.0,
                                "max_steps": 300, "seed": 5,
                                "rollout_horizon": 40, "w_theta": 0.5})
        trace = run(cfg)
        norms = trace.follower_norms()
        for rid, series in norms.items():
            finite = series[np.isfinite(series)]
            assert len(finite) > 250
            assert np.mean(finite[-50:]) < np.mean(finite[:50])

    def test_early_stop_truncates(self):
        cfg = config_from_dict({
            "n_robots": 3, "area_side": 6.0, "max_steps": 400, "seed": 5,
            "rollout_horizon": 40, "w_theta": 0.5,
            "early_stop": {"enabled": True, "threshold": 0.5, "dwell": 20}})
        trace = run(cfg)
        assert trace.n_steps < 400


class TestTraceIO:
    def _trace(self):
        return run(SMALL)

    def test_roundtrip(self, tmp_path):
        trace = self._trace()
        path = os.path.join(tmp_path, "trace.csv")
        write_trace_csv(trace, path)
        back = read_trace_csv(path)
        assert len(back) == len(trace.records)
        for a, b in zip(trace.records, back):
            assert a.step == b.step and a.robot_id == b.robot_id
            assert b.x == pytest.approx(a.x, rel=1e-8, abs=1e-8)

    def test_write_is_byte_stable(self, tmp_path):
        trace = self._trace()
        p1 = os.path.join(tmp_path, "a.csv")
        p2 = os.path.join(tmp_path, "b.csv")
        write_trace_csv(trace, p1)
        write_trace_csv(trace, p2)
        with open(p1, "rb") as f1, open(p2, "rb") as f2:
            assert f1.read() == f2.read()

    def test_header_validated_on_read(self, tmp_path):
        path = os.path.join(tmp_path, "bad.csv")
        with open(path, "w") as fh:
            fh.write("step,robot\n0,0\n")
        with pytest.raises(ValueError, match="header"):
            read_trace_csv(path)

    def test_no_temp_files_left(self, tmp_path):
        write_trace_csv(self._trace(), os.path.join(tmp_path, "t.csv"))
        assert sorted(os.listdir(tmp_path)) == ["t.csv"]


def synthetic_trace(norm_series: dict[int, list[float]]) -> Trace:
    cfg = config_from_dict({"n_robots": 3})
    n_steps = len(next(iter(norm_series.values())))
    records = []
    for step in range(n_steps):
        records.append(TraceRecord(step, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.0,
                                   *([0.0] * 9), 0.0))
        for rid, series in norm_series.items():
            records.append(TraceRecord(step, rid, 0, 0, 0, 0, 0,
                                       series[step], 0, 0, series[step],
                                       *([0.0] * 9), 0.0))
    return Trace(cfg, records)


class TestConvergenceTime:
    def test_always_below(self):
        trace = synthetic_trace({1: [0.01] * 50, 2: [0.02] * 50})
        assert convergence_time(trace, 0.1, 10) == 0

    def test_crossing_step_found_by_scan(self):
        # Oracle: brute-force scan of a monotone series crossing at 137.
        series = [1.0 - 0.0066 * k for k in range(200)]
        crossing = min(k for k, v in enumerate(series) if v < 0.1)
        assert crossing == 137
        trace = synthetic_trace({1: series})
        assert convergence_time(trace, 0.1, 1) == crossing

    def test_never_converged(self):
        trace = synthetic_trace({1: [0.5] * 30})
        assert convergence_time(trace, 0.1, 5) is None

    def test_dwell_must_hold(self):
        series = [0.05] * 10 + [0.5] + [0.05] * 20
        trace = synthetic_trace({1: series})
        assert convergence_time(trace, 0.1, 15) == 11

    def test_nan_blocks_convergence(self):
        trace = synthetic_trace({1: [math.nan] * 30})
        assert convergence_time(trace, 0.1, 5) is None

    def test_invalid_args(self):
        trace = synthetic_trace({1: [0.0] * 5})
        with pytest.raises(ValueError):
            convergence_time(trace, 0.0, 5)
        with pytest.raises(ValueError):
            convergence_time(trace, 0.1, 0)


class TestScalabilityBatch:
    BASE = config_from_dict({"area_side": 8.0, "max_steps": 30, "seed": 2})

    def test_single_population_shape(self):
        rows = scalability_batch([5], 2, self.BASE)
        assert len(rows) == 1
        assert rows[0].population == 5 and rows[0].runs == 2

    def test_two_population_shape(self):
        rows = scalability_batch([5, 7], 1, self.BASE)
        assert [r.population for r in rows] == [5, 7]

    def test_rejects_even_population(self):
        with pytest.raises(ConfigError):
            scalability_batch([4], 1, self.BASE)

    def test_rejects_zero_runs(self):
        with pytest.raises(ConfigError):
            scalability_batch([5], 0, self.BASE)

    def test_unconverged_runs_counted(self):
        # 30 steps cannot satisfy a 100-step dwell, so nothing converges.
        rows = scalability_batch([3], 2, self.BASE)
        assert rows[0].n_not_converged == 2
        assert math.isnan(rows[0].mean_convergence_steps)

    def test_on_trace_called_in_order(self):
        seen = []
        scalability_batch([3, 5], 2, self.BASE,
                          on_trace=lambda pop, ri, tr: seen.append((pop, ri)))
        assert seen == [(3, 0), (3, 1), (5, 0), (5, 1)]

    def test_derive_seed_stable_and_distinct(self):
        a = derive_seed(7, 5, 0)
        assert a == derive_seed(7, 5, 0)
        keys = {derive_seed(7, p, r) for p in (5, 7, 9, 11) for r in range(10)}
        assert len(keys) == 40


class TestFinalFormation:
    def test_pairs_on_converged_golden_trace(self, golden_dir):
        records = read_trace_csv(os.path.join(golden_dir, "straight_trace.csv"))
        import json
        with open(os.path.join(golden_dir, "straight_config.json")) as fh:
            cfg = config_from_dict(json.load(fh))
        trace = Trace(cfg, records)
        pairs = final_formation(trace, cfg)
        assert len(pairs) == cfg.n_robots - 1
        for p in pairs:
            assert p.follower_id != p.target_id
            assert p.phi_d in (cfg.formation.phi_left, cfg.formation.phi_right)
