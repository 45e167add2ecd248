"""Joint driving/network-selection MDP on the two-lane corridor.

Per-AV observation is 8 variables (3 neighbor gaps, 3 relative velocities,
connectivity count, lane), discretized to 3^7 * 2 = 4374 states. Each AV
picks one of 21 joint actions (7 driving x 3 telecom). A step applies
driving, integrates kinematics, detects collisions, redraws the channel,
ranks BSs by long-term link quality (fading filtered out, as in cell
reselection), executes telecom selection in ascending AV id order under
per-BS quotas, and prices the achieved throughput on the instantaneous
faded rate when emitting transportation + telecommunication rewards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import road
from .channel import (
    RfParams, ThzParams, rf_sinr_matrix, thz_sinr_matrix, sample_alignment,
)
from .road import (
    RoadConfig, DrivingAction, World, deploy, apply_driving_action,
    step_kinematics, detect_collisions, process_respawns, neighbors,
    LANE_LEFT,
)


class TelecomAction(IntEnum):
    HANDOFF_AWARE = 0
    NO_HANDOFF_PENALTY = 1
    MAX_RATE = 2


N_DRIVING = 7
N_TELECOM = 3
N_ACTIONS = N_DRIVING * N_TELECOM          # 21
STATE_DIMS = (3, 3, 3, 3, 3, 3, 3, 2)
N_STATES = int(np.prod(STATE_DIMS))        # 4374

MU_KEEP = 0.0
MU_TO_TBS = 0.5
MU_TO_RBS = 0.1


@dataclass(frozen=True)
class ActionPair:
    driving: DrivingAction
    telecom: TelecomAction

    @property
    def index(self) -> int:
        return int(self.driving) * N_TELECOM + int(self.telecom)

    @classmethod
    def from_index(cls, idx: int) -> "ActionPair":
        if not 0 <= idx < N_ACTIONS:
            raise ValueError(f"joint action index {idx} out of range")
        return cls(DrivingAction(idx // N_TELECOM), TelecomAction(idx % N_TELECOM))


@dataclass
class Observation:
    d_fc: float
    d_ft: float
    d_rt: float
    v_fc: float
    v_ft: float
    v_rt: float
    c_count: int
    lane_id: int


@dataclass(frozen=True)
class DiscreteState:
    """8 categorical components; index is mixed-radix over STATE_DIMS."""

    d_fc: int
    d_ft: int
    d_rt: int
    v_fc: int
    v_ft: int
    v_rt: int
    conn: int
    lane: int

    @property
    def index(self) -> int:
        idx = 0
        for value, dim in zip(self.components(), STATE_DIMS):
            idx = idx * dim + value
        return idx

    def components(self):
        return (self.d_fc, self.d_ft, self.d_rt,
                self.v_fc, self.v_ft, self.v_rt, self.conn, self.lane)

    @classmethod
    def from_index(cls, idx: int) -> "DiscreteState":
        if not 0 <= idx < N_STATES:
            raise ValueError(f"state index {idx} out of range")
        parts = []
        for dim in reversed(STATE_DIMS):
            parts.append(idx % dim)
            idx //= dim
        return cls(*reversed(parts))


@dataclass
class RewardWeights:
    w1: float = 1000.0
    w2: float = 5.0
    w3: float = 1.0
    w4: float = 1.0
    w5: float = 1.0
    w6: float = 4.5 * 10.0 ** -6.5
    v_desired: float = 30.0
    r_th: float = 1.0e8     # AV rate requirement, bits/s


@dataclass
class AssociationState:
    previous_bs: int | None = None
    current_bs: int | None = None
    top3: list = field(default_factory=list)     # [(bs_id, t_ij)] desc
    handoff_count: int = 0
    steps_elapsed: int = 0

    @property
    def handoff_prob(self) -> float:
        if self.steps_elapsed == 0:
            return 0.0
        return self.handoff_count / self.steps_elapsed


# ----------------------------------------------------------- discretization

def _dist_trit(d: float, d_c: float, d_f: float) -> int:
    if d <= d_c:
        return 0
    if d <= d_f:
        return 1
    return 2


def _vel_trit(v: float, v_eps: float) -> int:
    if v <= -v_eps:
        return 0
    if v < v_eps:
        return 1
    return 2


def _conn_trit(c: int) -> int:
    return 0 if c <= 1 else (1 if c == 2 else 2)


def discretize(obs: Observation, d_c: float, d_f: float, v_eps: float = 0.5) -> DiscreteState:
    """Map one raw observation to its discrete state.

    Boundary conventions: d == d_c is close, d == d_f is mid, |v| < v_eps is
    the equal-velocity dead band, and the infinite-gap sentinel lands in far.
    """
    return DiscreteState(
        _dist_trit(obs.d_fc, d_c, d_f),
        _dist_trit(obs.d_ft, d_c, d_f),
        _dist_trit(obs.d_rt, d_c, d_f),
        _vel_trit(obs.v_fc, v_eps),
        _vel_trit(obs.v_ft, v_eps),
        _vel_trit(obs.v_rt, v_eps),
        _conn_trit(obs.c_count),
        obs.lane_id,
    )


def _build_encoding_table() -> np.ndarray:
    table = np.empty((N_STATES, 8), dtype=np.float64)
    for idx in range(N_STATES):
        s = DiscreteState.from_index(idx)
        comp = s.components()
        table[idx, :7] = np.array(comp[:7], dtype=np.float64) - 1.0
        table[idx, 7] = comp[7]
    return table


_ENCODING: np.ndarray | None = None


def encoding_table() -> np.ndarray:
    """(4374, 8) centered numeric encoding: trits -> {-1,0,1}, lane -> {0,1}."""
    global _ENCODING
    if _ENCODING is None:
        _ENCODING = _build_encoding_table()
    return _ENCODING


def onehot_table() -> np.ndarray:
    """(4374, 23) one-hot encoding: 7 trits x 3 slots + lane x 2 slots."""
    out = np.zeros((N_STATES, 23), dtype=np.float64)
    for idx in range(N_STATES):
        comp = DiscreteState.from_index(idx).components()
        for k in range(7):
            out[idx, 3 * k + comp[k]] = 1.0
        out[idx, 21 + comp[7]] = 1.0
    return out


# ------------------------------------------------------------- telecom math

def weighted_rate(t_ij: float, quota: int, n_s: int, mu: float) -> float:
    """T_q = T_ij / min(Q_j, n_s) * (1 - mu)."""
    if n_s < 1:
        raise ValueError("candidate load n_s must be >= 1")
    return t_ij / min(quota, n_s) * (1.0 - mu)


def handoff_penalty(prev_bs: int | None, candidate_id: int, candidate_kind: str) -> float:
    """mu of Eq-style switch cost: keep 0, switch-to-TBS 0.5, switch-to-RBS 0.1."""
    if prev_bs is not None and candidate_id == prev_bs:
        return MU_KEEP
    if prev_bs is None:
        return MU_KEEP          # first association is not a switch
    return MU_TO_TBS if candidate_kind == "TBS" else MU_TO_RBS


def rank_bs(rates_row: np.ndarray, k: int = 3):
    """Top-k (bs_id, rate) by achievable rate, ties to the lower id."""
    n = rates_row.shape[0]
    if n == 0:
        return []
    order = np.lexsort((np.arange(n), -rates_row))
    return [(int(i), float(rates_row[i])) for i in order[:k]]


def select_bs(telecom: TelecomAction, rates_row: np.ndarray, top3_ids,
              previous_bs: int | None, stations, cand_loads, assoc_counts,
              achieved_row: np.ndarray | None = None):
    """Execute one AV's telecom action against this step's candidate list.

    Candidates are ranked by the mode's metric (HandoffAware: mu-adjusted
    weighted rate; NoHandoffPenalty: weighted rate with mu forced 0;
    MaxRate: raw rate); quota-full BSs are skipped. If every candidate is
    full, the AV keeps its previous BS when that still has room, else it
    goes unserved this step. The achieved T_q always carries the true mu of
    the executed switch.

    rates_row holds the link qualities the decision is made on; achieved_row,
    when given, holds the instantaneous rates the realized T_q is priced
    from (defaults to rates_row).

    Returns:
        (bs_id or None, t_q_achieved, handoff_flag, true_mu)
    """
    if achieved_row is None:
        achieved_row = rates_row
    scored = []
    for bs_id in top3_ids:
        st = stations[bs_id]
        n_s = max(1, int(cand_loads[bs_id]))
        if telecom == TelecomAction.MAX_RATE:
            metric = float(rates_row[bs_id])
        elif telecom == TelecomAction.NO_HANDOFF_PENALTY:
            metric = weighted_rate(float(rates_row[bs_id]), st.quota, n_s, 0.0)
        else:
            mu = handoff_penalty(previous_bs, bs_id, st.kind)
            metric = weighted_rate(float(rates_row[bs_id]), st.quota, n_s, mu)
        scored.append((-metric, bs_id))
    scored.sort()

    for _, bs_id in scored:
        st = stations[bs_id]
        if assoc_counts[bs_id] >= st.quota:
            continue
        true_mu = handoff_penalty(previous_bs, bs_id, st.kind)
        n_s = max(1, int(cand_loads[bs_id]))
        t_q = weighted_rate(float(achieved_row[bs_id]), st.quota, n_s, true_mu)
        handoff = previous_bs is not None and bs_id != previous_bs
        return bs_id, t_q, handoff, true_mu

    # every candidate quota-full: fall back to the incumbent
    if previous_bs is not None and assoc_counts[previous_bs] < stations[previous_bs].quota:
        n_s = max(1, int(cand_loads[previous_bs]))
        t_q = weighted_rate(float(achieved_row[previous_bs]),
                            stations[previous_bs].quota, n_s, MU_KEEP)
        return previous_bs, t_q, False, MU_KEEP
    return None, 0.0, False, MU_KEEP


def nearest_order(world: World, av) -> list:
    """All BS ids by distance from the AV, nearest first, ties to lower id."""
    cfg = world.config
    dists = []
    for st in world.stations:
        dx = road.ring_distance(av.x_m, st.x_m, cfg.corridor_len_m)
        dy = av.y_m - st.y_m
        dists.append((math.hypot(dx, dy), st.id))
    dists.sort()
    return [bs_id for _, bs_id in dists]


# ----------------------------------------------------------------- rewards

def _accel_penalty(action: DrivingAction) -> float:
    if action in (DrivingAction.HARD_ACCEL, DrivingAction.HARD_DECEL):
        return -3.0
    if action in (DrivingAction.MILD_ACCEL, DrivingAction.MILD_DECEL):
        return -1.0
    return 0.0


def _reward_tran_from_view(av, action: DrivingAction, view, weights: RewardWeights,
                           d_c: float, d_f: float) -> float:
    c = -1.0 if av.newly_collided else 0.0
    v = max(-1.0, min(1.0, 0.2 * (av.v_x_mps - weights.v_desired)))
    trit = _dist_trit(view.d_fc, d_c, d_f)
    h = float(trit - 1)          # close -1, mid 0, far +1
    a = _accel_penalty(action)
    l = -1.0 if av.lane_id == LANE_LEFT else 0.0
    return (weights.w1 * c + weights.w2 * v + weights.w3 * h +
            weights.w4 * a + weights.w5 * l)


def reward_tran(world: World, av_id: int, action: DrivingAction,
                weights: RewardWeights) -> float:
    """w1*c + w2*v + w3*h + w4*a + w5*l for one AV at the current world state."""
    cfg = world.config
    view = neighbors(world, av_id)
    return _reward_tran_from_view(world.vehicles[av_id], DrivingAction(action),
                                  view, weights, cfg.d_min_safety_m,
                                  cfg.d_max_safety_m)


def reward_tele(t_q: float, k: float, weights: RewardWeights) -> float:
    """w6 * T_q * (1 - min(1, k)); nonnegative."""
    return weights.w6 * t_q * (1.0 - min(1.0, k))


# -------------------------------------------------------------- environment

class VNetEnv:
    """Multi-AV corridor environment with shared channel and quota contention.

    reset() -> list of state indices (one per AV)
    step(joint action indices) -> (next state indices, rewards, infos)

    All randomness flows from the seed given at construction; replaying the
    same seed and action stream reproduces trajectories bitwise.
    """

    def __init__(self, road_config: RoadConfig | None = None,
                 rf_params: RfParams | None = None,
                 thz_params: ThzParams | None = None,
                 weights: RewardWeights | None = None,
                 seed: int = 0,
                 v_eps: float = 0.5,
                 interference_mode: str = "expected",
                 selection_override: str | None = None,
                 encoding: str = "centered"):
        self.cfg = road_config or RoadConfig()
        self.cfg.validate()
        self.rf = rf_params or RfParams()
        self.thz = thz_params or ThzParams()
        self.weights = weights or RewardWeights(v_desired=self.cfg.v_desired_mps)
        if interference_mode not in ("expected", "sampled"):
            raise ValueError("interference_mode must be 'expected' or 'sampled'")
        if selection_override not in (None, "nearest"):
            raise ValueError("unknown selection_override")
        self.v_eps = v_eps
        self.interference_mode = interference_mode
        self.selection_override = selection_override
        self.rng = np.random.default_rng(seed)
        self.n_states = N_STATES
        self.n_actions = N_ACTIONS
        self.n_agents = self.cfg.num_avs
        self._enc = encoding_table() if encoding == "centered" else onehot_table()
        self.obs_dim = self._enc.shape[1]

        # station layout is drawn once and reused across resets
        self._layout = deploy(self.cfg, self.rng).stations
        self.world: World | None = None
        self.assoc: list[AssociationState] = []
        self._rates = None
        self._last_states = None

    # ------------------------------------------------------------- helpers

    def encode_state(self, idx: int) -> np.ndarray:
        return self._enc[idx]

    def encode_states(self, idxs) -> np.ndarray:
        return self._enc[np.asarray(idxs, dtype=np.intp)]

    def _distance_matrix(self) -> np.ndarray:
        cfg = self.cfg
        bx = np.array([b.x_m for b in self.world.stations])
        by = np.array([b.y_m for b in self.world.stations])
        ax = np.array([v.x_m for v in self.world.vehicles])
        ay = np.array([v.y_m for v in self.world.vehicles])
        dx = np.abs(ax[:, None] - bx[None, :]) % cfg.corridor_len_m
        dx = np.minimum(dx, cfg.corridor_len_m - dx)
        dy = ay[:, None] - by[None, :]
        return np.hypot(dx, dy)

    def _rates_matrices(self):
        """Return (selection, achieved) T_ij matrices for every (AV, BS).

        Selection-plane rates are long-term link qualities (unit-mean fade,
        expected alignment): ranking, load listings, and the connectivity
        state are computed from them so that association changes track
        geometry rather than per-step fading, the way cell reselection
        filters fast fading out. Achieved rates redraw Rayleigh fades (and
        sampled alignments, in that mode) and price the throughput actually
        delivered on whichever link was chosen.
        """
        w = self.world
        n_r = len([b for b in w.stations if b.kind == "RBS"])
        dist = self._distance_matrix()
        m = dist.shape[0]
        sel = np.zeros_like(dist)
        ach = np.zeros_like(dist)
        if n_r > 0:
            rdist = dist[:, :n_r]
            fades = self.rng.exponential(1.0, size=(m, n_r))
            sel[:, :n_r] = self.cfg.w_rbs_hz * np.log2(
                1.0 + rf_sinr_matrix(self.rf, rdist, np.ones((m, n_r))))
            ach[:, :n_r] = self.cfg.w_rbs_hz * np.log2(
                1.0 + rf_sinr_matrix(self.rf, rdist, fades))
        if dist.shape[1] > n_r:
            tdist = dist[:, n_r:]
            sel[:, n_r:] = self.cfg.w_tbs_hz * np.log2(
                1.0 + thz_sinr_matrix(self.thz, tdist, None))
            if self.interference_mode == "sampled":
                aligns = sample_alignment(self.thz, self.rng, size=tdist.shape)
                ach[:, n_r:] = self.cfg.w_tbs_hz * np.log2(
                    1.0 + thz_sinr_matrix(self.thz, tdist, aligns))
            else:
                ach[:, n_r:] = sel[:, n_r:]
        return sel, ach

    def _rank_all(self, rates: np.ndarray):
        top3 = [rank_bs(rates[j]) for j in range(rates.shape[0])]
        loads = np.zeros(rates.shape[1], dtype=np.int64)
        for lst in top3:
            for bs_id, _ in lst:
                loads[bs_id] += 1
        for st in self.world.stations:
            st.current_load = int(loads[st.id])
        return top3, loads

    def _observation(self, av_id: int, view, top3) -> Observation:
        c_count = sum(1 for _, r in top3 if r >= self.weights.r_th)
        av = self.world.vehicles[av_id]
        return Observation(view.d_fc, view.d_ft, view.d_rt,
                           view.v_fc, view.v_ft, view.v_rt,
                           c_count, av.lane_id)

    def _discretize(self, obs: Observation) -> int:
        return discretize(obs, self.cfg.d_min_safety_m, self.cfg.d_max_safety_m,
                          self.v_eps).index

    # ------------------------------------------------------------ main API

    def reset(self) -> list[int]:
        world = deploy(self.cfg, self.rng)
        world.stations = self._layout
        for st in world.stations:
            st.current_load = 0
        self.world = world
        self.assoc = [AssociationState() for _ in range(self.cfg.num_avs)]
        rates_sel, _ = self._rates_matrices()
        top3, _ = self._rank_all(rates_sel)
        states = []
        for av in world.vehicles:
            self.assoc[av.id].top3 = top3[av.id]
            view = neighbors(world, av.id)
            obs = self._observation(av.id, view, top3[av.id])
            states.append(self._discretize(obs))
        self._last_states = states
        return states

    def step(self, actions):
        """Advance one step; returns (next_states, rewards, infos)."""
        w = self.world
        cfg = self.cfg
        if w is None:
            raise RuntimeError("call reset() before step()")
        if len(actions) != len(w.vehicles):
            raise ValueError("need one joint action per AV")

        process_respawns(w)

        executed = []
        for av, a_idx in zip(w.vehicles, actions):
            pair = ActionPair.from_index(int(a_idx))
            drv = pair.driving
            if av.collided:
                drv = DrivingAction.STOP      # forced on wrecked AVs
            apply_driving_action(av, drv, cfg)
            executed.append((pair, drv))

        step_kinematics(w)
        detect_collisions(w)

        rates_sel, rates_ach = self._rates_matrices()
        top3, loads = self._rank_all(rates_sel)

        n_bs = rates_sel.shape[1]
        assoc_counts = np.zeros(n_bs, dtype=np.int64)
        results = []
        for av in w.vehicles:                  # ascending id: contention order
            assoc = self.assoc[av.id]
            assoc.top3 = top3[av.id]
            last_served = assoc.current_bs if assoc.current_bs is not None \
                else assoc.previous_bs
            if n_bs == 0:
                selected, t_q, handoff, mu = None, 0.0, False, MU_KEEP
            elif self.selection_override == "nearest":
                order = nearest_order(w, av)
                selected, t_q, handoff, mu = self._select_nearest(
                    order, rates_ach[av.id], last_served, loads, assoc_counts)
            else:
                telecom = executed[av.id][0].telecom
                selected, t_q, handoff, mu = select_bs(
                    telecom, rates_sel[av.id], [i for i, _ in top3[av.id]],
                    last_served, w.stations, loads, assoc_counts,
                    achieved_row=rates_ach[av.id])

            assoc.steps_elapsed += 1
            if handoff:
                assoc.handoff_count += 1
            assoc.previous_bs = last_served
            assoc.current_bs = selected
            av.serving_bs = selected
            if selected is not None:
                assoc_counts[selected] += 1
            results.append((selected, t_q, handoff, mu))

        next_states, rewards, infos = [], [], []
        for av in w.vehicles:
            pair, drv = executed[av.id]
            selected, t_q, handoff, mu = results[av.id]
            assoc = self.assoc[av.id]
            view = neighbors(w, av.id)
            r_tran = _reward_tran_from_view(av, drv, view, self.weights,
                                            cfg.d_min_safety_m, cfg.d_max_safety_m)
            r_tele = reward_tele(t_q, assoc.handoff_prob, self.weights)
            obs = self._observation(av.id, view, top3[av.id])
            s_next = self._discretize(obs)
            next_states.append(s_next)
            rewards.append(r_tran + r_tele)
            kind = None
            if handoff:
                prev_kind = w.stations[assoc.previous_bs].kind \
                    if assoc.previous_bs is not None else None
                kind = "horizontal" if prev_kind == w.stations[selected].kind \
                    else "vertical"
            infos.append({
                "av_id": av.id,
                "state": self._last_states[av.id],
                "action": pair.index,
                "driving": int(drv),
                "r_tran": r_tran,
                "r_tele": r_tele,
                "t_ij": float(rates_ach[av.id, selected]) if selected is not None else 0.0,
                "t_q": t_q,
                "serving_bs": selected,
                "handoff": handoff,
                "handoff_kind": kind,
                "handoff_prob": assoc.handoff_prob,
                "collision": av.newly_collided,
                "done": av.newly_collided,
                "wrecked": av.collided,
                "v_x": av.v_x_mps,
                "mu": mu,
            })
        self._last_states = next_states
        return next_states, rewards, infos

    def _select_nearest(self, order, rates_row, previous_bs, loads, assoc_counts):
        w = self.world
        for bs_id in order:
            st = w.stations[bs_id]
            if assoc_counts[bs_id] >= st.quota:
                continue
            mu = handoff_penalty(previous_bs, bs_id, st.kind)
            n_s = max(1, int(loads[bs_id]))
            t_q = weighted_rate(float(rates_row[bs_id]), st.quota, n_s, mu)
            handoff = previous_bs is not None and bs_id != previous_bs
            return bs_id, t_q, handoff, mu
        if previous_bs is not None and \
           assoc_counts[previous_bs] < w.stations[previous_bs].quota:
            n_s = max(1, int(loads[previous_bs]))
            t_q = weighted_rate(float(rates_row[previous_bs]),
                                w.stations[previous_bs].quota, n_s, MU_KEEP)
            return previous_bs, t_q, False, MU_KEEP
        return None, 0.0, False, MU_KEEP
