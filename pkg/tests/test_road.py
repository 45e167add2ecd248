import math

import numpy as np
import pytest

from vnetsim.road import (
    RoadConfig, DrivingAction, World, VehicleState,
    deploy, apply_driving_action, step_kinematics, neighbors,
    detect_collisions, process_respawns, snapshot_records,
    lane_of, ring_forward, LANE_RIGHT, LANE_LEFT, INF_GAP,
)


def make_world(vehicles, **cfg_kw):
    cfg = RoadConfig(**cfg_kw)
    world = deploy(cfg, np.random.default_rng(0))
    world.vehicles = vehicles
    return world


def av(i, x, lane=LANE_RIGHT, v=30.0, **kw):
    y = 0.0 if lane == LANE_RIGHT else 3.5
    return VehicleState(id=i, x_m=x, lane_id=lane, v_x_mps=v, y_m=y, **kw)


# ------------------------------------------------------------------- deploy

def test_deploy_uniform_tbs_spacing():
    cfg = RoadConfig(corridor_len_m=1000.0, n_rbs=0, n_tbs=10, num_avs=2)
    world = deploy(cfg, np.random.default_rng(0))
    xs = [b.x_m for b in world.tbs]
    assert xs == [50.0 + 100.0 * i for i in range(10)]


def test_deploy_spawn_gap_at_least_df():
    cfg = RoadConfig(num_avs=2)
    world = deploy(cfg, np.random.default_rng(3))
    a, b = world.vehicles
    gap = min(ring_forward(a.x_m, b.x_m, cfg.corridor_len_m),
              ring_forward(b.x_m, a.x_m, cfg.corridor_len_m))
    assert gap >= cfg.d_max_safety_m
    assert all(v.v_x_mps == cfg.v_desired_mps for v in world.vehicles)
    assert all(v.lane_id == LANE_RIGHT for v in world.vehicles)


def test_deploy_seeded_random_layout_repeatable():
    cfg = RoadConfig(bs_layout="random", num_avs=4)
    w1 = deploy(cfg, np.random.default_rng(11))
    w2 = deploy(cfg, np.random.default_rng(11))
    assert [b.x_m for b in w1.stations] == [b.x_m for b in w2.stations]
    assert [v.x_m for v in w1.vehicles] == [v.x_m for v in w2.vehicles]


def test_deploy_overcrowded_raises():
    cfg = RoadConfig(corridor_len_m=200.0, num_avs=10)
    with pytest.raises(ValueError):
        deploy(cfg, np.random.default_rng(0))


def test_deploy_splits_lanes_when_dense():
    cfg = RoadConfig(corridor_len_m=1000.0, num_avs=25)
    world = deploy(cfg, np.random.default_rng(5))
    lanes = {v.lane_id for v in world.vehicles}
    assert lanes == {LANE_RIGHT, LANE_LEFT}


# ---------------------------------------------------------- driving actions

def test_maintain_zeroes_acceleration():
    cfg = RoadConfig()
    v = av(0, 100.0, v=25.0, a_x_mps2=4.0)
    apply_driving_action(v, DrivingAction.MAINTAIN, cfg)
    assert v.a_x_mps2 == 0.0


def test_stop_acceleration_formula():
    cfg = RoadConfig(dt_s=0.5)
    v = av(0, 100.0, v=20.0)
    apply_driving_action(v, DrivingAction.STOP, cfg)
    assert v.a_x_mps2 == -34.0
    step_kinematics(make_world([v]))
    assert v.v_x_mps == 0.0


def test_lane_switch_sets_lateral_speed():
    cfg = RoadConfig()
    v = av(0, 100.0)
    apply_driving_action(v, DrivingAction.LANE_SWITCH, cfg)
    assert v.v_y_mps == 1.5


def test_lane_switch_mid_switch_is_maintain():
    cfg = RoadConfig()
    v = av(0, 100.0, switch_dir=+1, v_y_mps=1.5, a_x_mps2=4.0)
    apply_driving_action(v, DrivingAction.LANE_SWITCH, cfg)
    assert v.a_x_mps2 == 0.0
    assert v.switch_dir == +1  # original switch still in progress


def test_accel_actions_set_targets():
    cfg = RoadConfig(v_at_mps=2.0)
    v = av(0, 0.0, v=10.0)
    apply_driving_action(v, DrivingAction.HARD_ACCEL, cfg)
    assert v.a_x_mps2 == 4.0 and v.v_target_mps == 12.0
    apply_driving_action(v, DrivingAction.MILD_DECEL, cfg)
    assert v.a_x_mps2 == -1.5 and v.v_target_mps == 8.0


# -------------------------------------------------------------- kinematics

def test_constant_speed_advance_exact():
    w = make_world([av(0, 10.0, v=20.0)])
    step_kinematics(w)
    assert w.vehicles[0].x_m == 10.0 + 20.0 * 0.5


def test_speed_clamps_at_zero():
    w = make_world([av(0, 10.0, v=1.0, a_x_mps2=-4.0)])
    step_kinematics(w, dt=1.0)
    v = w.vehicles[0]
    assert v.v_x_mps == 0.0
    assert v.x_m > 10.0  # never moves backward while braking


def test_position_wraps():
    w = make_world([av(0, 1999.0, v=4.0)])
    step_kinematics(w)
    assert w.vehicles[0].x_m == pytest.approx(1.0)


def test_hard_accel_reaches_target_in_one_step():
    cfg = RoadConfig(v_at_mps=2.0)
    v = av(0, 0.0, v=10.0)
    apply_driving_action(v, DrivingAction.HARD_ACCEL, cfg)
    w = make_world([v])
    step_kinematics(w)
    assert v.v_x_mps == 12.0
    assert v.a_x_mps2 == 0.0  # zeroed at target


def test_mild_accel_keeps_accelerating():
    cfg = RoadConfig(v_at_mps=2.0)
    v = av(0, 0.0, v=10.0)
    apply_driving_action(v, DrivingAction.MILD_ACCEL, cfg)
    w = make_world([v])
    step_kinematics(w)
    assert v.v_x_mps == pytest.approx(10.75)
    assert v.a_x_mps2 == 1.5


def test_lane_switch_duration_and_midline_flip():
    cfg = RoadConfig()
    v = av(0, 0.0, v=20.0)
    w = make_world([v])
    apply_driving_action(v, DrivingAction.LANE_SWITCH, cfg)
    steps_needed = math.ceil(cfg.lane_width_m / (1.5 * cfg.dt_s))
    lanes = []
    for _ in range(steps_needed):
        step_kinematics(w)
        lanes.append(v.lane_id)
    assert steps_needed == 5
    assert v.y_m == cfg.lane_width_m and v.switch_dir == 0
    # reports origin lane until the midline is crossed (y > 1.75 after 3 steps)
    assert lanes == [LANE_RIGHT, LANE_RIGHT, LANE_LEFT, LANE_LEFT, LANE_LEFT]


def test_lane_id_never_intermediate():
    cfg = RoadConfig()
    v = av(0, 0.0)
    w = make_world([v])
    apply_driving_action(v, DrivingAction.LANE_SWITCH, cfg)
    for _ in range(6):
        step_kinematics(w)
        assert v.lane_id in (LANE_RIGHT, LANE_LEFT)


# ---------------------------------------------------------------- neighbors

def test_neighbors_equal_speed_zero_relative():
    w = make_world([av(0, 100.0, v=30.0), av(1, 130.0, v=30.0)])
    n = neighbors(w, 0)
    assert n.d_fc == 30.0 and n.v_fc == 0.0


def test_neighbors_slower_front_is_approaching():
    w = make_world([av(0, 100.0, v=30.0), av(1, 130.0, v=20.0)])
    n = neighbors(w, 0)
    assert n.v_fc < 0


def test_neighbors_empty_adjacent_lane_sentinel():
    w = make_world([av(0, 100.0), av(1, 130.0)])
    n = neighbors(w, 0)
    assert n.d_ft == INF_GAP and n.v_ft == 0.0
    assert n.d_rt == INF_GAP and n.v_rt == 0.0


def test_neighbors_adjacent_front_and_rear():
    w = make_world([av(0, 100.0, v=30.0),
                    av(1, 150.0, lane=LANE_LEFT, v=25.0),
                    av(2, 60.0, lane=LANE_LEFT, v=35.0)])
    n = neighbors(w, 0)
    assert n.d_ft == 50.0 and n.v_ft == -5.0      # front adj slower: approaching
    assert n.d_rt == 40.0 and n.v_rt == -5.0      # rear adj faster: approaching


def test_neighbors_wraps_around_ring():
    w = make_world([av(0, 1990.0, v=30.0), av(1, 15.0, v=30.0)])
    n = neighbors(w, 0)
    assert n.d_fc == 25.0


# --------------------------------------------------------------- collisions

def test_collision_same_lane_zero_gap():
    w = make_world([av(0, 100.0), av(1, 100.0)])
    pairs = detect_collisions(w)
    assert pairs == [(0, 1)]
    assert w.vehicles[0].collided and w.vehicles[1].collided
    assert w.vehicles[0].newly_collided


def test_no_collision_at_100m():
    w = make_world([av(0, 100.0), av(1, 200.0)])
    assert detect_collisions(w) == []


def test_no_collision_across_lanes_when_not_switching():
    w = make_world([av(0, 100.0), av(1, 100.0, lane=LANE_LEFT)])
    assert detect_collisions(w) == []


def test_collision_during_lane_change_overlap():
    # switcher has crossed far enough that its lateral gap to the target
    # lane vehicle is under the envelope
    switcher = av(0, 100.0)
    switcher.y_m = 1.0   # 2.5 m from left-lane center
    other = av(1, 102.0, lane=LANE_LEFT)
    w = make_world([switcher, other])
    assert detect_collisions(w) == [(0, 1)]


def test_newly_collided_fires_once():
    w = make_world([av(0, 100.0), av(1, 100.0)])
    detect_collisions(w)
    assert w.vehicles[0].newly_collided
    detect_collisions(w)
    assert not w.vehicles[0].newly_collided
    assert w.vehicles[0].collided


def test_respawn_after_delay():
    cfg_kw = dict(num_avs=3, respawn_delay_steps=10)
    w = make_world([av(0, 100.0, v=0.0), av(1, 100.0, v=0.0), av(2, 900.0)],
                   **cfg_kw)
    detect_collisions(w)
    for _ in range(9):
        process_respawns(w)
        assert w.vehicles[0].collided
    process_respawns(w)
    v0 = w.vehicles[0]
    assert not v0.collided
    assert v0.v_x_mps == w.config.v_desired_mps
    assert v0.respawn_timer == 0
    # respawned into open road, not on top of the wreck
    assert min(abs(v0.x_m - 100.0), abs(v0.x_m - 900.0)) > w.config.vehicle_len_m


# ------------------------------------------------------------ trajectories

def run_script(seed, n_steps=40):
    cfg = RoadConfig(num_avs=6)
    rng = np.random.default_rng(seed)
    world = deploy(cfg, rng)
    log = []
    for _ in range(n_steps):
        for v in world.vehicles:
            action = DrivingAction(int(rng.integers(0, 7)))
            if v.collided:
                action = DrivingAction.STOP
            apply_driving_action(v, action, cfg)
        step_kinematics(world)
        detect_collisions(world)
        process_respawns(world)
        log.append([(v.x_m, v.y_m, v.v_x_mps, v.lane_id) for v in world.vehicles])
    return log


def test_bitwise_deterministic_replay():
    assert run_script(1234) == run_script(1234)


def test_speeds_and_positions_stay_legal():
    cfg = RoadConfig(num_avs=6)
    rng = np.random.default_rng(77)
    world = deploy(cfg, rng)
    for _ in range(300):
        for v in world.vehicles:
            a = DrivingAction(int(rng.integers(0, 7)))
            if v.collided:
                a = DrivingAction.STOP
            apply_driving_action(v, a, cfg)
        step_kinematics(world)
        detect_collisions(world)
        process_respawns(world)
        for v in world.vehicles:
            assert 0.0 <= v.v_x_mps <= cfg.v_max_mps
            assert 0.0 <= v.x_m < cfg.corridor_len_m
            assert v.lane_id in (LANE_RIGHT, LANE_LEFT)


def test_top_speed_caps_sustained_acceleration():
    cfg = RoadConfig(num_avs=1, v_max_mps=40.0)
    world = deploy(cfg, np.random.default_rng(0))
    v = world.vehicles[0]
    for _ in range(50):
        apply_driving_action(v, DrivingAction.HARD_ACCEL, cfg)
        step_kinematics(world)
    assert v.v_x_mps == 40.0


def test_snapshot_records_shape():
    cfg = RoadConfig(num_avs=2)
    world = deploy(cfg, np.random.default_rng(0))
    recs = snapshot_records(world)
    assert len(recs) == 2
    assert set(recs[0]) == {"t", "id", "x", "lane", "v_x", "a_x", "serving_bs"}


def test_lane_of_midline_rule():
    assert lane_of(1.74, 3.5) == LANE_RIGHT
    assert lane_of(1.75, 3.5) == LANE_LEFT
