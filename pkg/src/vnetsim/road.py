"""Two-lane ring corridor: BS layout, AV kinematics, neighbors, collisions.

The corridor wraps around (positions mod corridor length) so AV density is
constant over an episode. Lane 0 is the right lane at lateral y = 0, lane 1
the left lane at y = lane_width. Base stations sit on the roadside at a small
negative lateral offset. All motion is point-mass Euler integration.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

log = logging.getLogger(__name__)

LANE_RIGHT = 0
LANE_LEFT = 1

INF_GAP = math.inf


class DrivingAction(IntEnum):
    HARD_ACCEL = 0
    MILD_ACCEL = 1
    MAINTAIN = 2
    MILD_DECEL = 3
    HARD_DECEL = 4
    LANE_SWITCH = 5
    STOP = 6


# fixed accelerations per action, m/s^2
ACCEL_OF = {
    DrivingAction.HARD_ACCEL: 4.0,
    DrivingAction.MILD_ACCEL: 1.5,
    DrivingAction.MAINTAIN: 0.0,
    DrivingAction.MILD_DECEL: -1.5,
    DrivingAction.HARD_DECEL: -4.0,
}

LANE_SWITCH_VY = 1.5  # m/s lateral speed during a lane change


@dataclass
class RoadConfig:
    corridor_len_m: float = 2000.0
    lane_count: int = 2
    lane_width_m: float = 3.5
    vehicle_len_m: float = 5.0
    lateral_envelope_m: float = 3.0
    dt_s: float = 0.5
    n_rbs: int = 4
    n_tbs: int = 10
    bs_layout: str = "uniform"      # uniform | random
    bs_lateral_m: float = 5.0
    w_rbs_hz: float = 4.0e7
    w_tbs_hz: float = 5.0e8
    quota_rbs: int = 2
    quota_tbs: int = 5
    d_min_safety_m: float = 15.0    # d_c
    d_max_safety_m: float = 50.0    # d_f
    v_desired_mps: float = 30.0
    v_at_mps: float = 2.0
    v_max_mps: float = 60.0         # vehicle top speed
    num_avs: int = 15
    respawn_delay_steps: int = 10

    def validate(self):
        if self.corridor_len_m <= 0 or self.dt_s <= 0:
            raise ValueError("corridor_len_m and dt_s must be positive")
        if not (0 < self.d_min_safety_m < self.d_max_safety_m):
            raise ValueError("need 0 < d_c < d_f")
        if self.v_max_mps < self.v_desired_mps:
            raise ValueError("v_max_mps must be >= v_desired_mps")
        if self.num_avs < 1:
            raise ValueError("num_avs must be >= 1")
        if self.lane_count != 2:
            raise ValueError("only the two-lane corridor is modeled")
        if self.n_rbs < 0 or self.n_tbs < 0 or self.n_rbs + self.n_tbs < 1:
            raise ValueError("need at least one base station")


@dataclass
class BaseStation:
    id: int
    kind: str                # "RBS" | "TBS"
    x_m: float
    y_m: float
    bandwidth_hz: float
    quota: int
    current_load: int = 0    # candidate listings this step (n_s)


@dataclass
class VehicleState:
    id: int
    x_m: float
    lane_id: int
    v_x_mps: float = 0.0
    a_x_mps2: float = 0.0
    v_y_mps: float = 0.0
    serving_bs: int | None = None
    collided: bool = False
    # motion internals
    y_m: float = 0.0
    switch_dir: int = 0              # 0 idle, +1 toward left lane, -1 toward right
    v_target_mps: float | None = None
    hard_stop: bool = False
    respawn_timer: int = 0
    newly_collided: bool = False


def lane_of(y_m: float, lane_width_m: float) -> int:
    """Midline rule: an AV reports its origin lane until it crosses y = width/2."""
    return LANE_RIGHT if y_m < lane_width_m / 2.0 else LANE_LEFT


def lane_center(lane_id: int, lane_width_m: float) -> float:
    return 0.0 if lane_id == LANE_RIGHT else lane_width_m


def ring_forward(from_x: float, to_x: float, corridor_len: float) -> float:
    """Forward arc distance from from_x to to_x on the ring."""
    return (to_x - from_x) % corridor_len


def ring_distance(x1: float, x2: float, corridor_len: float) -> float:
    d = abs(x1 - x2) % corridor_len
    return min(d, corridor_len - d)


@dataclass
class NeighborView:
    d_fc: float = INF_GAP   # gap to front AV, current lane
    v_fc: float = 0.0       # gap growth rate (<0 approaching)
    d_ft: float = INF_GAP   # gap to front AV, adjacent lane
    v_ft: float = 0.0
    d_rt: float = INF_GAP   # gap to rear AV, adjacent lane
    v_rt: float = 0.0


class World:
    """Mutable corridor state: base stations, vehicles, step counter."""

    def __init__(self, config: RoadConfig, stations, vehicles):
        self.config = config
        self.stations = stations
        self.vehicles = vehicles
        self.t = 0

    @property
    def rbs(self):
        return [b for b in self.stations if b.kind == "RBS"]

    @property
    def tbs(self):
        return [b for b in self.stations if b.kind == "TBS"]


def deploy(config: RoadConfig, rng: np.random.Generator) -> World:
    """Place base stations and spawn AVs.

    BSs: uniform spacing per tier starting at half a slot (jittered by up to
    a quarter slot in the random layout). AVs: evenly spaced on the right
    lane when the per-AV slot keeps gaps >= d_f, otherwise alternating
    lanes; spawn speed is v_desired.
    """
    config.validate()
    stations = []
    bs_id = 0
    for kind, count, w_hz, quota in (
        ("RBS", config.n_rbs, config.w_rbs_hz, config.quota_rbs),
        ("TBS", config.n_tbs, config.w_tbs_hz, config.quota_tbs),
    ):
        if count == 0:
            continue
        slot = config.corridor_len_m / count
        for i in range(count):
            x = (i + 0.5) * slot
            if config.bs_layout == "random":
                x = (x + rng.uniform(-0.25, 0.25) * slot) % config.corridor_len_m
            stations.append(BaseStation(bs_id, kind, x, -config.bs_lateral_m,
                                        w_hz, quota))
            bs_id += 1

    m = config.num_avs
    lanes_needed = 1 if config.corridor_len_m / m >= config.d_max_safety_m else 2
    per_lane = m if lanes_needed == 1 else math.ceil(m / 2)
    slot = config.corridor_len_m / per_lane
    if slot < config.d_max_safety_m:
        raise ValueError("corridor too crowded to spawn with d_f gaps")
    jitter_amp = min(0.25 * slot, (slot - config.d_max_safety_m) / 2.0)
    vehicles = []
    for i in range(m):
        lane = LANE_RIGHT if lanes_needed == 1 else (i % 2)
        idx_in_lane = i if lanes_needed == 1 else i // 2
        x = (idx_in_lane + 0.5) * slot
        if jitter_amp > 0:
            x = (x + rng.uniform(-jitter_amp, jitter_amp)) % config.corridor_len_m
        vehicles.append(VehicleState(
            id=i, x_m=x, lane_id=lane, v_x_mps=config.v_desired_mps,
            y_m=lane_center(lane, config.lane_width_m)))
    return World(config, stations, vehicles)


def apply_driving_action(v: VehicleState, action: DrivingAction, config: RoadConfig) -> VehicleState:
    """Set the vehicle's acceleration/lateral state for this step (in place).

    Speed-change actions pair a fixed a_x with a target v +- v_at; the
    integrator zeroes a_x once the target is crossed. Stop records
    a_x = -0.85 v/dt and drops the speed to 0 within the step.
    """
    action = DrivingAction(action)
    v.hard_stop = False
    if action == DrivingAction.LANE_SWITCH:
        if v.switch_dir != 0:
            log.debug("av %d lane switch requested mid-switch, maintaining", v.id)
            v.a_x_mps2 = 0.0
            v.v_target_mps = None
            return v
        target_lane = 1 - lane_of(v.y_m, config.lane_width_m)
        v.switch_dir = +1 if target_lane == LANE_LEFT else -1
        v.v_y_mps = LANE_SWITCH_VY * v.switch_dir
        v.a_x_mps2 = 0.0
        v.v_target_mps = None
    elif action == DrivingAction.STOP:
        v.a_x_mps2 = -0.85 * v.v_x_mps / config.dt_s
        v.v_target_mps = 0.0
        v.hard_stop = True
        v.switch_dir = 0
        v.v_y_mps = 0.0
    elif action == DrivingAction.MAINTAIN:
        v.a_x_mps2 = 0.0
        v.v_target_mps = None
    else:
        a = ACCEL_OF[action]
        v.a_x_mps2 = a
        if a > 0:
            v.v_target_mps = v.v_x_mps + config.v_at_mps
        else:
            v.v_target_mps = max(0.0, v.v_x_mps - config.v_at_mps)
    return v


def step_kinematics(world: World, dt: float | None = None) -> World:
    """Euler-advance every vehicle, wrap positions, settle lane changes.

    Position integrates with the effective acceleration (v_new - v_old)/dt
    so the advance stays consistent with the clamped velocity (no backward
    motion when a decel crosses zero mid-step); with no clamp this equals
    x += v dt + a dt^2 / 2 exactly.
    """
    cfg = world.config
    dt = cfg.dt_s if dt is None else dt
    for v in world.vehicles:
        v_old = v.v_x_mps
        if v.hard_stop:
            v_new = 0.0
            v.hard_stop = False
            v.a_x_mps2 = 0.0
            v.v_target_mps = None
        else:
            v_new = v_old + v.a_x_mps2 * dt
            tgt = v.v_target_mps
            if tgt is not None and v.a_x_mps2 != 0.0:
                crossed = (v.a_x_mps2 > 0 and v_new >= tgt) or \
                          (v.a_x_mps2 < 0 and v_new <= tgt)
                if crossed:
                    v_new = tgt
                    v.a_x_mps2 = 0.0
                    v.v_target_mps = None
            v_new = min(max(0.0, v_new), cfg.v_max_mps)
        a_eff = (v_new - v_old) / dt
        v.x_m = (v.x_m + v_old * dt + 0.5 * a_eff * dt * dt) % cfg.corridor_len_m
        v.v_x_mps = v_new

        if v.switch_dir != 0:
            target_y = lane_center(LANE_LEFT if v.switch_dir > 0 else LANE_RIGHT,
                                   cfg.lane_width_m)
            y_new = v.y_m + v.v_y_mps * dt
            if (v.switch_dir > 0 and y_new >= target_y) or \
               (v.switch_dir < 0 and y_new <= target_y):
                y_new = target_y
                v.switch_dir = 0
                v.v_y_mps = 0.0
            v.y_m = y_new
        v.lane_id = lane_of(v.y_m, cfg.lane_width_m)
    world.t += 1
    return world


def neighbors(world: World, av_id: int) -> NeighborView:
    """Front gap in the current lane plus front/rear gaps in the adjacent lane.

    Gaps are forward/backward arcs on the ring; relative velocity is the gap
    growth rate, so v < 0 means approaching and empty lanes give the +inf
    sentinel with v = 0.
    """
    cfg = world.config
    me = world.vehicles[av_id]
    lane = me.lane_id
    view = NeighborView()
    best = {"fc": INF_GAP, "ft": INF_GAP, "rt": INF_GAP}
    who = {"fc": None, "ft": None, "rt": None}
    for other in world.vehicles:
        if other.id == av_id:
            continue
        fwd = ring_forward(me.x_m, other.x_m, cfg.corridor_len_m)
        if other.lane_id == lane:
            if fwd < best["fc"]:
                best["fc"], who["fc"] = fwd, other
        else:
            if fwd < best["ft"]:
                best["ft"], who["ft"] = fwd, other
            bwd = ring_forward(other.x_m, me.x_m, cfg.corridor_len_m)
            if bwd < best["rt"]:
                best["rt"], who["rt"] = bwd, other
    if who["fc"] is not None:
        view.d_fc = best["fc"]
        view.v_fc = who["fc"].v_x_mps - me.v_x_mps
    if who["ft"] is not None:
        view.d_ft = best["ft"]
        view.v_ft = who["ft"].v_x_mps - me.v_x_mps
    if who["rt"] is not None:
        view.d_rt = best["rt"]
        view.v_rt = me.v_x_mps - who["rt"].v_x_mps
    return view


def detect_collisions(world: World):
    """Flag overlapping AV pairs and return the sorted pair list.

    Overlap: longitudinal ring gap <= vehicle length and lateral distance
    under the envelope (same lane, or brushing a neighbor mid lane-change).
    Freshly collided AVs get newly_collided set (the reward's collision
    indicator fires once per impact) and their respawn timer armed; Stop is
    forced on them by the environment on the following step.
    """
    cfg = world.config
    pairs = []
    hit = set()
    vs = world.vehicles
    for v in vs:
        v.newly_collided = False
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            dx = ring_distance(vs[i].x_m, vs[j].x_m, cfg.corridor_len_m)
            if dx > cfg.vehicle_len_m:
                continue
            if abs(vs[i].y_m - vs[j].y_m) < cfg.lateral_envelope_m:
                pairs.append((i, j))
                hit.add(i)
                hit.add(j)
    for av_id in sorted(hit):
        v = vs[av_id]
        v.newly_collided = not v.collided
        if not v.collided:
            v.collided = True
            v.respawn_timer = cfg.respawn_delay_steps
    return pairs


def process_respawns(world: World):
    """Count down collided AVs and respawn them into the largest gap.

    Respawned AVs restart lane-centered at v_desired in the lane owning the
    largest circular gap, keeping their BS association (the next step hands
    off naturally). Deterministic: ties and ordering resolved by id.
    """
    cfg = world.config
    for v in world.vehicles:
        if not v.collided:
            continue
        v.respawn_timer -= 1
        if v.respawn_timer > 0:
            continue
        lane, x = _largest_gap_slot(world, exclude_id=v.id)
        v.x_m = x
        v.lane_id = lane
        v.y_m = lane_center(lane, cfg.lane_width_m)
        v.v_x_mps = cfg.v_desired_mps
        v.a_x_mps2 = 0.0
        v.v_y_mps = 0.0
        v.switch_dir = 0
        v.v_target_mps = None
        v.collided = False
        v.newly_collided = False
        v.respawn_timer = 0
    return world


def _largest_gap_slot(world: World, exclude_id: int):
    """Midpoint of the largest circular gap over both lanes (lane, x)."""
    cfg = world.config
    best = (-1.0, LANE_RIGHT, cfg.corridor_len_m / 2.0)
    for lane in (LANE_RIGHT, LANE_LEFT):
        xs = sorted(v.x_m for v in world.vehicles
                    if v.lane_id == lane and v.id != exclude_id and not v.collided)
        if not xs:
            return lane, cfg.corridor_len_m / 2.0
        for k in range(len(xs)):
            x0 = xs[k]
            x1 = xs[(k + 1) % len(xs)]
            gap = (x1 - x0) % cfg.corridor_len_m
            if gap == 0.0:
                gap = cfg.corridor_len_m
            if gap > best[0]:
                best = (gap, lane, (x0 + gap / 2.0) % cfg.corridor_len_m)
    return best[1], best[2]


def snapshot_records(world: World):
    """One trace record per AV for the current step."""
    return [
        {
            "t": world.t,
            "id": v.id,
            "x": round(v.x_m, 4),
            "lane": v.lane_id,
            "v_x": round(v.v_x_mps, 4),
            "a_x": round(v.a_x_mps2, 4),
            "serving_bs": v.serving_bs,
        }
        for v in world.vehicles
    ]


def write_trace(records, fh):
    """Line-delimited JSON trace writer."""
    for rec in records:
        fh.write(json.dumps(rec) + "\n")
