"""Tests for the joint driving/telecom MDP: state coding, selection, rewards."""

import math

import numpy as np
import pytest

from vnetsim.env import (
    ActionPair, AssociationState, DiscreteState, Observation, RewardWeights,
    TelecomAction, VNetEnv, N_ACTIONS, N_STATES, STATE_DIMS, discretize,
    encoding_table, onehot_table, handoff_penalty, rank_bs, reward_tele,
    reward_tran, select_bs, weighted_rate, MU_KEEP, MU_TO_RBS, MU_TO_TBS,
)
from vnetsim.road import BaseStation, DrivingAction, RoadConfig


# ------------------------------------------------------------ action coding

def test_action_space_is_21_and_bijective():
    assert N_ACTIONS == 21
    seen = set()
    for idx in range(N_ACTIONS):
        pair = ActionPair.from_index(idx)
        assert pair.index == idx
        seen.add((pair.driving, pair.telecom))
    assert len(seen) == 21


def test_action_index_out_of_range_rejected():
    with pytest.raises(ValueError):
        ActionPair.from_index(21)
    with pytest.raises(ValueError):
        ActionPair.from_index(-1)


# ------------------------------------------------------------- state coding

def test_state_space_is_4374_and_bijective():
    assert N_STATES == 4374
    seen = set()
    for idx in range(N_STATES):
        s = DiscreteState.from_index(idx)
        assert s.index == idx
        for value, dim in zip(s.components(), STATE_DIMS):
            assert 0 <= value < dim
        seen.add(s.components())
    assert len(seen) == 4374


def obs(d_fc=100.0, d_ft=100.0, d_rt=100.0, v_fc=0.0, v_ft=0.0, v_rt=0.0,
        c=3, lane=0):
    return Observation(d_fc, d_ft, d_rt, v_fc, v_ft, v_rt, c, lane)


def test_distance_boundaries_close_and_mid_inclusive():
    s = discretize(obs(d_fc=15.0), 15.0, 50.0)
    assert s.d_fc == 0                 # d == d_c is close
    s = discretize(obs(d_fc=50.0), 15.0, 50.0)
    assert s.d_fc == 1                 # d == d_f is mid
    s = discretize(obs(d_fc=50.0001), 15.0, 50.0)
    assert s.d_fc == 2
    s = discretize(obs(d_fc=math.inf), 15.0, 50.0)
    assert s.d_fc == 2                 # no neighbor reads as far


def test_velocity_dead_band():
    assert discretize(obs(v_fc=0.0), 15, 50).v_fc == 1
    assert discretize(obs(v_fc=0.49), 15, 50, v_eps=0.5).v_fc == 1
    assert discretize(obs(v_fc=-0.49), 15, 50, v_eps=0.5).v_fc == 1
    assert discretize(obs(v_fc=0.5), 15, 50, v_eps=0.5).v_fc == 2
    assert discretize(obs(v_fc=-0.5), 15, 50, v_eps=0.5).v_fc == 0


def test_connectivity_trit_groups_zero_and_one():
    assert discretize(obs(c=0), 15, 50).conn == 0
    assert discretize(obs(c=1), 15, 50).conn == 0
    assert discretize(obs(c=2), 15, 50).conn == 1
    assert discretize(obs(c=3), 15, 50).conn == 2


def test_encoding_tables():
    enc = encoding_table()
    assert enc.shape == (N_STATES, 8)
    assert set(np.unique(enc[:, :7])) == {-1.0, 0.0, 1.0}
    assert set(np.unique(enc[:, 7])) == {0.0, 1.0}
    oh = onehot_table()
    assert oh.shape == (N_STATES, 23)
    assert np.all(oh.sum(axis=1) == 8.0)
    # spot check: index 0 is all-components-0
    s0 = DiscreteState.from_index(0)
    assert s0.components() == (0,) * 8
    assert np.allclose(enc[0], [-1] * 7 + [0])


# ----------------------------------------------------------- telecom pieces

def test_weighted_rate_splits_by_effective_load():
    assert weighted_rate(1.0e9, 5, 2, 0.0) == pytest.approx(5.0e8)
    assert weighted_rate(1.0e9, 5, 2, 0.5) == pytest.approx(2.5e8)
    # load beyond quota saturates at the quota
    assert weighted_rate(1.0e9, 5, 10, 0.0) == pytest.approx(2.0e8)
    with pytest.raises(ValueError):
        weighted_rate(1.0e9, 5, 0, 0.0)


def test_handoff_penalty_cases():
    assert handoff_penalty(None, 3, "TBS") == MU_KEEP
    assert handoff_penalty(3, 3, "TBS") == MU_KEEP
    assert handoff_penalty(2, 3, "TBS") == MU_TO_TBS
    assert handoff_penalty(7, 1, "RBS") == MU_TO_RBS


def test_rank_ties_go_to_lower_id():
    top = rank_bs(np.array([5.0, 7.0, 7.0, 1.0]))
    assert top == [(1, 7.0), (2, 7.0), (0, 5.0)]


def _stations(quotas):
    out = []
    for i, q in enumerate(quotas):
        kind = "RBS" if i == 0 else "TBS"
        out.append(BaseStation(id=i, kind=kind, x_m=0.0, y_m=-5.0,
                               bandwidth_hz=1.0, quota=q))
    return out


def test_select_bs_max_rate_picks_highest_rate():
    stations = _stations([2, 5, 5])
    rates = np.array([3.0e8, 9.0e8, 6.0e8])
    loads = np.array([1, 1, 1])
    counts = np.zeros(3, dtype=int)
    bs, t_q, handoff, mu = select_bs(TelecomAction.MAX_RATE, rates, [1, 2, 0],
                                     None, stations, loads, counts)
    assert bs == 1
    assert t_q == pytest.approx(9.0e8)     # n_s=1, first association mu=0
    assert not handoff and mu == MU_KEEP


def test_select_bs_handoff_aware_can_prefer_incumbent():
    # switching to the faster TBS costs mu=0.5; staying wins
    stations = _stations([2, 5, 5])
    rates = np.array([3.0e8, 5.0e8, 1.0e8])
    loads = np.array([1, 1, 1])
    counts = np.zeros(3, dtype=int)
    bs, t_q, handoff, mu = select_bs(TelecomAction.HANDOFF_AWARE, rates,
                                     [1, 0, 2], 0, stations, loads, counts)
    # candidate metrics: BS1 5e8*0.5=2.5e8, BS0 3e8*1.0=3e8 -> keep BS0
    assert bs == 0
    assert not handoff
    assert t_q == pytest.approx(3.0e8)


def test_select_bs_no_penalty_mode_ignores_mu_but_reports_true_tq():
    stations = _stations([2, 5, 5])
    rates = np.array([3.0e8, 5.0e8, 1.0e8])
    loads = np.array([1, 1, 1])
    counts = np.zeros(3, dtype=int)
    bs, t_q, handoff, mu = select_bs(TelecomAction.NO_HANDOFF_PENALTY, rates,
                                     [1, 0, 2], 0, stations, loads, counts)
    assert bs == 1                      # picked on unpenalized rate
    assert handoff
    assert mu == MU_TO_TBS
    assert t_q == pytest.approx(5.0e8 * 0.5)   # achieved rate pays true mu


def test_select_bs_skips_quota_full_candidates():
    stations = _stations([1, 5, 5])
    rates = np.array([9.0e8, 4.0e8, 2.0e8])
    loads = np.array([2, 2, 1])
    counts = np.zeros(3, dtype=int)
    first = select_bs(TelecomAction.MAX_RATE, rates, [0, 1, 2], None,
                      stations, loads, counts)
    assert first[0] == 0
    counts[0] += 1
    second = select_bs(TelecomAction.MAX_RATE, rates, [0, 1, 2], None,
                       stations, loads, counts)
    assert second[0] == 1               # BS0 quota of 1 already taken


def test_select_bs_falls_back_to_previous_then_unserved():
    stations = _stations([1, 1, 1])
    rates = np.array([9.0e8, 4.0e8, 2.0e8])
    loads = np.array([1, 1, 1])
    counts = np.array([1, 1, 0])
    # candidates 0 and 1 are full; previous BS 2 still has room
    bs, t_q, handoff, mu = select_bs(TelecomAction.MAX_RATE, rates, [0, 1],
                                     2, stations, loads, counts)
    assert bs == 2 and not handoff and mu == MU_KEEP
    assert t_q == pytest.approx(2.0e8)
    counts[2] = 1
    bs, t_q, handoff, mu = select_bs(TelecomAction.MAX_RATE, rates, [0, 1],
                                     2, stations, loads, counts)
    assert bs is None and t_q == 0.0 and not handoff


def test_select_bs_argmax_over_available_candidates():
    # whichever BS is chosen must carry the max mode metric among non-full ones
    rng = np.random.default_rng(7)
    for _ in range(200):
        quotas = [int(q) for q in rng.integers(1, 4, size=5)]
        stations = _stations(quotas)
        rates = rng.uniform(1.0e7, 1.0e9, size=5)
        loads = rng.integers(1, 6, size=5)
        counts = rng.integers(0, 3, size=5)
        prev = int(rng.integers(0, 5)) if rng.random() < 0.7 else None
        cands = [int(i) for i in rng.permutation(5)[:3]]
        telecom = TelecomAction(int(rng.integers(0, 3)))
        bs, t_q, handoff, mu = select_bs(telecom, rates, cands, prev,
                                         stations, loads, counts)

        def metric(j):
            n_s = max(1, int(loads[j]))
            if telecom == TelecomAction.MAX_RATE:
                return rates[j]
            m = 0.0 if telecom == TelecomAction.NO_HANDOFF_PENALTY else \
                handoff_penalty(prev, j, stations[j].kind)
            return weighted_rate(rates[j], stations[j].quota, n_s, m)

        avail = [j for j in cands if counts[j] < stations[j].quota]
        if avail:
            assert bs in avail
            assert metric(bs) == pytest.approx(max(metric(j) for j in avail))


# ----------------------------------------------------------------- rewards

def test_reward_tele_matches_formula_and_saturation():
    w = RewardWeights()
    assert reward_tele(1.0e9, 0.2, w) == pytest.approx(
        4.5 * 10.0 ** -6.5 * 1.0e9 * 0.8)
    assert reward_tele(1.0e9, 0.2, w) == pytest.approx(1138.42, rel=1e-4)
    assert reward_tele(1.0e9, 1.0, w) == 0.0
    assert reward_tele(1.0e9, 3.0, w) == 0.0   # k past 1 clamps, not negative
    assert reward_tele(0.0, 0.0, w) == 0.0


def _lone_env(**cfg_kw):
    cfg = RoadConfig(num_avs=1, **cfg_kw)
    return VNetEnv(road_config=cfg, seed=11)


def test_reward_tran_lone_cruiser_scores_only_headway_bonus():
    env = _lone_env()
    env.reset()
    av = env.world.vehicles[0]
    assert av.v_x_mps == env.weights.v_desired
    r = reward_tran(env.world, 0, DrivingAction.MAINTAIN, env.weights)
    assert r == pytest.approx(env.weights.w3)    # far gap bonus only


def test_reward_tran_penalizes_hard_action_and_left_lane():
    env = _lone_env()
    env.reset()
    av = env.world.vehicles[0]
    av.y_m = 3.5
    av.lane_id = 1
    r = reward_tran(env.world, 0, DrivingAction.HARD_DECEL, env.weights)
    # far gap +1, hard action -3, left lane -1
    assert r == pytest.approx(env.weights.w3 - 3 * env.weights.w4 - env.weights.w5)


def test_reward_tran_velocity_term_clamps():
    env = _lone_env()
    env.reset()
    av = env.world.vehicles[0]
    av.v_x_mps = 10.0        # 0.2*(10-30) = -4 -> clamp to -1
    r = reward_tran(env.world, 0, DrivingAction.MAINTAIN, env.weights)
    assert r == pytest.approx(-env.weights.w2 + env.weights.w3)
    av.v_x_mps = 33.0        # 0.2*3 = 0.6, inside the clamp
    r = reward_tran(env.world, 0, DrivingAction.MAINTAIN, env.weights)
    assert r == pytest.approx(0.6 * env.weights.w2 + env.weights.w3)


def test_reward_tran_collision_dominates():
    env = VNetEnv(road_config=RoadConfig(num_avs=2), seed=3)
    env.reset()
    a, b = env.world.vehicles
    a.x_m, a.y_m, a.lane_id, a.v_x_mps = 100.0, 0.0, 0, 0.0
    b.x_m, b.y_m, b.lane_id, b.v_x_mps = 103.0, 0.0, 0, 0.0
    maintain = ActionPair(DrivingAction.MAINTAIN, TelecomAction.HANDOFF_AWARE).index
    _, rewards, infos = env.step([maintain, maintain])
    assert infos[0]["collision"] and infos[1]["collision"]
    # rear car: -1000 collision, v clamp -5, close gap -1
    assert infos[0]["r_tran"] == pytest.approx(-1006.0)
    # front car sees the rear one a full ring ahead: far gap +1
    assert infos[1]["r_tran"] == pytest.approx(-1004.0)
    assert rewards[0] == pytest.approx(infos[0]["r_tran"] + infos[0]["r_tele"])


# ------------------------------------------------------------- env behavior

MAINTAIN = ActionPair(DrivingAction.MAINTAIN, TelecomAction.HANDOFF_AWARE).index


def test_reset_returns_valid_state_indices():
    env = VNetEnv(road_config=RoadConfig(num_avs=5), seed=0)
    states = env.reset()
    assert len(states) == 5
    assert all(0 <= s < N_STATES for s in states)


def test_connectivity_count_follows_rate_threshold():
    cfg = RoadConfig(num_avs=3)
    hi = VNetEnv(road_config=cfg, weights=RewardWeights(r_th=1.0e30), seed=5)
    states = hi.reset()
    assert all(DiscreteState.from_index(s).conn == 0 for s in states)
    lo = VNetEnv(road_config=cfg, weights=RewardWeights(r_th=0.0), seed=5)
    states = lo.reset()
    assert all(DiscreteState.from_index(s).conn == 2 for s in states)


def test_step_replay_is_deterministic():
    def run():
        env = VNetEnv(road_config=RoadConfig(num_avs=6), seed=42)
        states = env.reset()
        log = [tuple(states)]
        rng = np.random.default_rng(9)
        for _ in range(40):
            acts = rng.integers(0, N_ACTIONS, size=6)
            states, rewards, infos = env.step(acts)
            log.append((tuple(states), tuple(rewards),
                        tuple(i["t_q"] for i in infos),
                        tuple(i["serving_bs"] for i in infos)))
        return log

    assert run() == run()


def test_distinct_seeds_diverge():
    def run(seed):
        env = VNetEnv(road_config=RoadConfig(num_avs=6), seed=seed)
        env.reset()
        out = []
        for _ in range(10):
            _, _, infos = env.step([MAINTAIN] * 6)
            out.append(tuple(i["t_q"] for i in infos))
        return out

    assert run(1) != run(2)


def test_rollout_invariants_tq_quota_tele_sign():
    env = VNetEnv(road_config=RoadConfig(num_avs=10), seed=17)
    env.reset()
    rng = np.random.default_rng(23)
    prev_k = [0.0] * 10
    for _ in range(120):
        acts = rng.integers(0, N_ACTIONS, size=10)
        _, _, infos = env.step(acts)
        served = {}
        for info in infos:
            assert info["t_q"] <= info["t_ij"] + 1e-12
            assert info["r_tele"] >= 0.0
            k = info["handoff_prob"]
            if info["handoff"]:
                assert k >= prev_k[info["av_id"]] - 1e-15
            else:
                assert k <= prev_k[info["av_id"]] + 1e-15
            prev_k[info["av_id"]] = k
            if info["serving_bs"] is not None:
                served[info["serving_bs"]] = served.get(info["serving_bs"], 0) + 1
        for bs_id, n in served.items():
            assert n <= env.world.stations[bs_id].quota


def test_wrecked_av_is_forced_to_stop_until_respawn():
    env = VNetEnv(road_config=RoadConfig(num_avs=2), seed=3)
    env.reset()
    a, b = env.world.vehicles
    a.x_m, a.y_m, a.lane_id, a.v_x_mps = 100.0, 0.0, 0, 5.0
    b.x_m, b.y_m, b.lane_id, b.v_x_mps = 104.0, 0.0, 0, 0.0
    hard = ActionPair(DrivingAction.HARD_ACCEL, TelecomAction.MAX_RATE).index
    _, _, infos = env.step([MAINTAIN, MAINTAIN])
    assert infos[0]["collision"]
    # wreck phase: acceleration commands are ignored
    for _ in range(5):
        _, _, infos = env.step([hard, hard])
        assert infos[0]["wrecked"] and infos[1]["wrecked"]
        assert not infos[0]["collision"]
        assert env.world.vehicles[0].v_x_mps == 0.0
    # respawn clears the wreck after the delay
    for _ in range(10):
        _, _, infos = env.step([MAINTAIN, MAINTAIN])
    assert not env.world.vehicles[0].collided
    assert env.world.vehicles[0].v_x_mps == env.cfg.v_desired_mps


def test_nearest_override_serves_nearest_station_with_room():
    cfg = RoadConfig(num_avs=3)
    env = VNetEnv(road_config=cfg, seed=8, selection_override="nearest")
    env.reset()
    _, _, infos = env.step([MAINTAIN] * 3)
    for info in infos:
        av = env.world.vehicles[info["av_id"]]
        best = min(env.world.stations,
                   key=lambda s: (math.hypot(
                       min(abs(av.x_m - s.x_m), cfg.corridor_len_m - abs(av.x_m - s.x_m)),
                       av.y_m - s.y_m), s.id))
        assert info["serving_bs"] == best.id


def test_handoff_kind_classification():
    env = VNetEnv(road_config=RoadConfig(num_avs=4), seed=19)
    env.reset()
    rng = np.random.default_rng(4)
    seen = set()
    for _ in range(200):
        acts = rng.integers(0, N_ACTIONS, size=4)
        _, _, infos = env.step(acts)
        for info in infos:
            if info["handoff"]:
                assert info["handoff_kind"] in ("horizontal", "vertical")
                seen.add(info["handoff_kind"])
            else:
                assert info["handoff_kind"] is None
    assert seen     # random policy on mixed tiers must produce some handoffs


def test_association_state_handoff_probability():
    assoc = AssociationState()
    assert assoc.handoff_prob == 0.0
    assoc.steps_elapsed = 4
    assoc.handoff_count = 1
    assert assoc.handoff_prob == pytest.approx(0.25)


def test_station_layout_fixed_across_resets():
    env = VNetEnv(road_config=RoadConfig(num_avs=3, bs_layout="random"), seed=2)
    env.reset()
    first = [(s.id, s.x_m) for s in env.world.stations]
    env.reset()
    assert [(s.id, s.x_m) for s in env.world.stations] == first


def test_select_bs_decides_on_selection_rates_but_prices_achieved():
    # the choice ranks long-term link quality; t_q pays the instantaneous rate
    stations = _stations([2, 5, 5])
    sel = np.array([3.0e8, 9.0e8, 6.0e8])
    ach = np.array([1.0e8, 2.0e8, 7.0e8])   # fades reshuffle the moment's order
    loads = np.array([1, 1, 1])
    counts = np.zeros(3, dtype=int)
    bs, t_q, handoff, mu = select_bs(TelecomAction.MAX_RATE, sel, [1, 2, 0],
                                     None, stations, loads, counts,
                                     achieved_row=ach)
    assert bs == 1                           # argmax of sel, not of ach
    assert t_q == pytest.approx(2.0e8)
    assert not handoff and mu == MU_KEEP


def test_parked_traffic_never_hands_off():
    # static geometry means a static selection plane: fading alone must not
    # churn associations once every vehicle is stopped
    env = VNetEnv(road_config=RoadConfig(num_avs=4), seed=3)
    env.reset()
    stop = ActionPair(DrivingAction.STOP, TelecomAction.HANDOFF_AWARE).index
    hold = ActionPair(DrivingAction.MAINTAIN, TelecomAction.HANDOFF_AWARE).index
    for _ in range(12):
        env.step([stop] * 4)
    assert all(v.v_x_mps == 0.0 for v in env.world.vehicles)
    assert not any(v.collided for v in env.world.vehicles)
    env.step([hold] * 4)                     # one settling selection at rest
    for _ in range(40):
        _, _, infos = env.step([hold] * 4)
        assert not any(info["handoff"] for info in infos)
