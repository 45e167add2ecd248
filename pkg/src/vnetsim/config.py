"""Flat scenario configuration: file parsing, env overrides, sub-configs.

One dataclass carries every knob a run needs. Config files are plain
key = value lines; unknown keys are rejected by name. Every key can also be
overridden through the environment as VNET_<KEY>.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .channel import RfParams, ThzParams
from .dqn import DqnConfig
from .env import RewardWeights
from .qlearning import LearnConfig
from .road import RoadConfig

ENV_PREFIX = "VNET_"

AGENT_KINDS = ("tabular", "dqn", "nearest_bs", "max_rate",
               "no_handoff_penalty")
AXES = ("none", "desired_velocity", "n_tbs", "n_avs")


@dataclass
class ScenarioConfig:
    # road / deployment
    corridor_len_m: float = 2000.0
    lane_width_m: float = 3.5
    vehicle_len_m: float = 5.0
    lateral_envelope_m: float = 3.0
    dt_s: float = 0.5
    n_rbs: int = 4
    n_tbs: int = 10
    bs_layout: str = "uniform"
    bs_lateral_m: float = 5.0
    quota_rbs: int = 2
    quota_tbs: int = 5
    d_close_m: float = 15.0
    d_far_m: float = 50.0
    v_desired_mps: float = 30.0
    v_adjust_mps: float = 2.0
    v_max_mps: float = 60.0
    num_avs: int = 15
    respawn_delay_steps: int = 10

    # sub-6GHz tier
    rf_power_w: float = 1.0
    rf_tx_gain: float = 1.0
    rf_rx_gain: float = 1.0
    rf_carrier_hz: float = 3.5e9
    rf_pathloss_exp: float = 4.0
    w_rbs_hz: float = 4.0e7

    # THz tier
    thz_power_w: float = 1.0
    thz_main_gain: float = 316.2
    thz_side_gain: float = 0.0
    thz_carrier_hz: float = 1.0e12
    thz_absorption_per_m: float = 0.05
    thz_align_prob: float = 0.1
    w_tbs_hz: float = 5.0e8
    interference_mode: str = "expected"

    # rewards
    w1: float = 1000.0
    w2: float = 5.0
    w3: float = 1.0
    w4: float = 1.0
    w5: float = 1.0
    w6: float = 4.5 * 10.0 ** -6.5
    r_th: float = 1.0e8
    v_eps: float = 0.5

    # learning (both agents)
    alpha: float = 0.1
    gamma: float = 0.9
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay: float = 0.995
    episodes: int = 300
    horizon: int = 500
    shared_policy: bool = True

    # deep agent extras
    dqn_hidden: tuple = (64, 32)
    dqn_lr: float = 1.0e-3
    dqn_batch: int = 32
    dqn_capacity: int = 50_000
    dqn_sync_every: int = 50
    dqn_loss: str = "squared"
    dqn_reward_scale: float = 1.0

    # run orchestration
    agent: str = "tabular"
    axis: str = "none"
    axis_values: tuple = ()
    seeds: tuple = (0, 1, 2, 3, 4)
    eval_episodes: int = 20
    out_dir: str = "runs"
    trace: bool = False
    workers: int = 1

    def validate(self) -> "ScenarioConfig":
        if self.agent not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.agent!r}; "
                             f"expected one of {AGENT_KINDS}")
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; "
                             f"expected one of {AXES}")
        if self.axis != "none" and not self.axis_values:
            raise ValueError("axis_values must be non-empty for a sweep")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if self.episodes < 1 or self.horizon < 1 or self.eval_episodes < 1:
            raise ValueError("episodes, horizon, eval_episodes must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        return self


_INT_TUPLES = {"dqn_hidden", "seeds"}
_FLOAT_TUPLES = {"axis_values"}


def _parse_value(name: str, text: str, target_type):
    text = text.strip()
    if name in _INT_TUPLES:
        return tuple(int(v) for v in text.split(",") if v.strip())
    if name in _FLOAT_TUPLES:
        return tuple(float(v) for v in text.split(",") if v.strip())
    if target_type is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"cannot parse boolean from {text!r} for {name}")
    if target_type is int:
        return int(text)
    if target_type is float:
        return float(text)
    if target_type is tuple:
        return tuple(float(v) for v in text.split(",") if v.strip())
    return text


_FIELD_TYPES = {f.name: type(getattr(ScenarioConfig(), f.name))
                for f in fields(ScenarioConfig)}


def parse_assignments(pairs: dict) -> dict:
    """Validate and type-coerce raw key -> string assignments."""
    out = {}
    for key, raw in pairs.items():
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown config key {key!r}")
        out[key] = _parse_value(key, raw, _FIELD_TYPES[key])
    return out


def load_config(path=None, env=None, overrides=None) -> ScenarioConfig:
    """Build a ScenarioConfig from file, environment, and explicit overrides.

    Precedence, lowest to highest: defaults, file, VNET_* environment
    variables, overrides dict (already-typed values, e.g. from CLI flags).
    """
    assignments = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ValueError(
                        f"{path}:{lineno}: expected key = value, got {line!r}")
                key, _, raw = stripped.partition("=")
                assignments[key.strip()] = raw.strip()
    env = os.environ if env is None else env
    for key in _FIELD_TYPES:
        var = ENV_PREFIX + key.upper()
        if var in env:
            assignments[key] = env[var]
    parsed = parse_assignments(assignments)
    if overrides:
        for key in overrides:
            if key not in _FIELD_TYPES:
                raise ValueError(f"unknown config key {key!r}")
        parsed.update(overrides)
    return ScenarioConfig(**parsed).validate()


def apply_axis(sc: ScenarioConfig, value: float) -> ScenarioConfig:
    """Return a copy with one sweep-axis value substituted in."""
    if sc.axis == "desired_velocity":
        return replace(sc, v_desired_mps=float(value))
    if sc.axis == "n_tbs":
        return replace(sc, n_tbs=int(value))
    if sc.axis == "n_avs":
        return replace(sc, num_avs=int(value))
    if sc.axis == "none":
        return sc
    raise ValueError(f"unknown sweep axis {sc.axis!r}")


# ------------------------------------------------- sub-config constructors

def make_road(sc: ScenarioConfig) -> RoadConfig:
    return RoadConfig(
        corridor_len_m=sc.corridor_len_m, lane_width_m=sc.lane_width_m,
        vehicle_len_m=sc.vehicle_len_m,
        lateral_envelope_m=sc.lateral_envelope_m, dt_s=sc.dt_s,
        n_rbs=sc.n_rbs, n_tbs=sc.n_tbs, bs_layout=sc.bs_layout,
        bs_lateral_m=sc.bs_lateral_m, w_rbs_hz=sc.w_rbs_hz,
        w_tbs_hz=sc.w_tbs_hz, quota_rbs=sc.quota_rbs, quota_tbs=sc.quota_tbs,
        d_min_safety_m=sc.d_close_m, d_max_safety_m=sc.d_far_m,
        v_desired_mps=sc.v_desired_mps, v_at_mps=sc.v_adjust_mps,
        v_max_mps=sc.v_max_mps,
        num_avs=sc.num_avs, respawn_delay_steps=sc.respawn_delay_steps)


def make_rf(sc: ScenarioConfig) -> RfParams:
    return RfParams(tx_power_w=sc.rf_power_w, tx_gain=sc.rf_tx_gain,
                    rx_gain=sc.rf_rx_gain, carrier_hz=sc.rf_carrier_hz,
                    pathloss_exp=sc.rf_pathloss_exp)


def make_thz(sc: ScenarioConfig) -> ThzParams:
    return ThzParams(tx_power_w=sc.thz_power_w,
                     main_gain_tx=sc.thz_main_gain,
                     main_gain_rx=sc.thz_main_gain,
                     side_gain_tx=sc.thz_side_gain,
                     side_gain_rx=sc.thz_side_gain,
                     carrier_hz=sc.thz_carrier_hz,
                     absorption_per_m=sc.thz_absorption_per_m,
                     align_prob_tx=sc.thz_align_prob,
                     align_prob_rx=sc.thz_align_prob)


def make_weights(sc: ScenarioConfig) -> RewardWeights:
    return RewardWeights(w1=sc.w1, w2=sc.w2, w3=sc.w3, w4=sc.w4, w5=sc.w5,
                         w6=sc.w6, v_desired=sc.v_desired_mps, r_th=sc.r_th)


def make_learn(sc: ScenarioConfig) -> LearnConfig:
    return LearnConfig(alpha=sc.alpha, gamma=sc.gamma,
                       eps_start=sc.eps_start, eps_end=sc.eps_end,
                       eps_decay=sc.eps_decay, episodes=sc.episodes,
                       horizon=sc.horizon, shared_policy=sc.shared_policy)


def make_dqn(sc: ScenarioConfig) -> DqnConfig:
    return DqnConfig(hidden=tuple(int(h) for h in sc.dqn_hidden),
                     lr=sc.dqn_lr, gamma=sc.gamma, eps_start=sc.eps_start,
                     eps_end=sc.eps_end, eps_decay=sc.eps_decay,
                     episodes=sc.episodes, horizon=sc.horizon,
                     batch=sc.dqn_batch, capacity=sc.dqn_capacity,
                     sync_every=sc.dqn_sync_every, loss_mode=sc.dqn_loss,
                     reward_scale=sc.dqn_reward_scale,
                     shared_policy=sc.shared_policy)
