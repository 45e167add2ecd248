"""Sweep orchestration: training runs, baselines, evaluation, CSV output.

A sweep point is one (axis value, seed) pair. Learned agents train then get
greedy evaluation episodes; baseline agents are fixed policies that skip
training. Every point derives its RNG streams from SeedSequence([seed,
axis_index]) so results do not depend on execution order or worker count.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dqn, qlearning
from .config import (ScenarioConfig, apply_axis, make_dqn, make_learn,
                     make_rf, make_road, make_thz, make_weights)
from .env import DiscreteState, TelecomAction, VNetEnv
from .road import DrivingAction
from .train_loop import EpisodeMetrics, run_episodes

SUMMARY_COLUMNS = [
    "agent", "axis", "axis_value", "seed", "train_episodes", "eval_episodes",
    "mean_reward_total", "mean_reward_tran", "mean_reward_tele", "mean_tq",
    "mean_tij", "handoff_prob", "collision_rate", "mean_velocity",
]

TRACE_COLUMNS = ["episode", "t", "av_id", "state", "action", "r_tran",
                 "r_tele", "t_ij", "t_q", "serving_bs", "handoff",
                 "collision"]

BASELINES = {
    "nearest_bs": TelecomAction.MAX_RATE,       # selection is overridden
    "max_rate": TelecomAction.MAX_RATE,
    "no_handoff_penalty": TelecomAction.NO_HANDOFF_PENALTY,
}


class SafeDrivingPolicy:
    """Fixed heuristic driver with a fixed telecom mode (baseline agents).

    Maintain unless the front gap is close, then mild decel; switch lanes
    instead when the adjacent-front gap is far.
    """

    def __init__(self, telecom: TelecomAction):
        self.telecom = telecom

    def _drive(self, state_idx: int) -> DrivingAction:
        s = DiscreteState.from_index(state_idx)
        if s.d_fc == 0:
            if s.d_ft == 2:
                return DrivingAction.LANE_SWITCH
            return DrivingAction.MILD_DECEL
        return DrivingAction.MAINTAIN

    def act(self, states, eps, rng):
        return [int(self._drive(s)) * 3 + int(self.telecom) for s in states]

    def learn(self, batch, rng):
        pass

    def episode_end(self, episode):
        pass


def build_env(sc: ScenarioConfig, seed, selection_override=None) -> VNetEnv:
    return VNetEnv(road_config=make_road(sc), rf_params=make_rf(sc),
                   thz_params=make_thz(sc), weights=make_weights(sc),
                   seed=seed, v_eps=sc.v_eps,
                   interference_mode=sc.interference_mode,
                   selection_override=selection_override)


def _policy_from_artifact(path, env):
    with np.load(path, allow_pickle=False) as z:
        kind = str(z["kind"])
    if kind == "qtable":
        tables, meta = qlearning.load_tables(path)
        return qlearning.GreedyTablePolicy(tables, shared=meta["shared"])
    if kind == "dqn":
        net, _ = dqn.load_network(path)
        return dqn.GreedyNetPolicy([net], env, shared=True)
    if kind == "dqn_set":
        nets, _ = dqn.load_network_set(path)
        return dqn.GreedyNetPolicy(nets, env, shared=False)
    raise ValueError(f"unrecognized policy artifact kind {kind!r}")


def _summarize(sc: ScenarioConfig, value, seed, eval_rows) -> dict:
    n = len(eval_rows)
    mean = lambda field: sum(getattr(r, field) for r in eval_rows) / n
    return {
        "agent": sc.agent,
        "axis": sc.axis,
        "axis_value": float(value),
        "seed": int(seed),
        "train_episodes": 0 if sc.agent in BASELINES else sc.episodes,
        "eval_episodes": n,
        "mean_reward_total": mean("reward_total"),
        "mean_reward_tran": mean("reward_tran"),
        "mean_reward_tele": mean("reward_tele"),
        "mean_tq": mean("mean_tq"),
        "mean_tij": mean("mean_tij"),
        "handoff_prob": mean("handoff_prob"),
        "collision_rate": mean("collision_rate"),
        "mean_velocity": mean("mean_velocity"),
    }


def _point_tag(sc: ScenarioConfig, value, seed) -> str:
    vtag = "base" if isinstance(value, float) and math.isnan(value) \
        else f"{value:g}"
    return f"{sc.agent}_{sc.axis}_{vtag}_s{seed}"


def run_point(sc_base: ScenarioConfig, axis_idx: int, value, seed: int) -> dict:
    """Train (if applicable) and evaluate one sweep point; write its files."""
    sc = apply_axis(sc_base, value)
    ss = np.random.SeedSequence([int(seed), int(axis_idx)])
    train_env_seed, agent_seed, eval_env_seed, eval_rng_seed = ss.spawn(4)

    os.makedirs(sc.out_dir, exist_ok=True)
    tag = _point_tag(sc, value, seed)
    artifact_path = None
    train_rows: list[EpisodeMetrics] = []

    override = "nearest" if sc.agent == "nearest_bs" else None
    if sc.agent in BASELINES:
        policy = SafeDrivingPolicy(BASELINES[sc.agent])
    elif sc.agent == "tabular":
        env = build_env(sc, train_env_seed)
        agent, train_rows = qlearning.train(env, make_learn(sc),
                                            seed=agent_seed)
        artifact_path = os.path.join(sc.out_dir, f"policy_{tag}.npz")
        qlearning.save_tables(artifact_path, agent.tables,
                              cfg_hash=qlearning.config_hash(agent.cfg),
                              shared=sc.shared_policy)
        policy = qlearning.GreedyTablePolicy(agent.tables,
                                             shared=sc.shared_policy)
    elif sc.agent == "dqn":
        env = build_env(sc, train_env_seed)
        agent, train_rows = dqn.train(env, make_dqn(sc), seed=agent_seed)
        artifact_path = os.path.join(sc.out_dir, f"policy_{tag}.npz")
        if sc.shared_policy:
            dqn.save_network(artifact_path, agent.nets[0],
                             cfg_hash=qlearning.config_hash(agent.cfg))
        else:
            dqn.save_network_set(artifact_path, agent.nets,
                                 cfg_hash=qlearning.config_hash(agent.cfg))
        policy = None        # rebuilt against the eval env below
    else:
        raise ValueError(f"unknown agent kind {sc.agent!r}")

    eval_env = build_env(sc, eval_env_seed, selection_override=override)
    if sc.agent == "dqn":
        policy = dqn.GreedyNetPolicy(agent.nets, eval_env,
                                     shared=sc.shared_policy)

    trace_rows = []
    on_step = None
    if sc.trace:
        def on_step(ep, t, infos):
            for info in infos:
                trace_rows.append([
                    ep, t, info["av_id"], info["state"], info["action"],
                    info["r_tran"], info["r_tele"], info["t_ij"],
                    info["t_q"],
                    -1 if info["serving_bs"] is None else info["serving_bs"],
                    int(info["handoff"]), int(info["collision"])])

    eval_rows = run_episodes(eval_env, policy, sc.eval_episodes, sc.horizon,
                             np.random.default_rng(eval_rng_seed),
                             learn=False, on_step=on_step)

    episodes_path = os.path.join(sc.out_dir, f"episodes_{tag}.csv")
    with open(episodes_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["phase"] + EpisodeMetrics.columns())
        for row in train_rows:
            w.writerow(["train"] + row.as_row())
        for row in eval_rows:
            w.writerow(["eval"] + row.as_row())

    if sc.trace:
        trace_path = os.path.join(sc.out_dir, f"trace_{tag}.csv")
        with open(trace_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            w.writerows(trace_rows)

    summary = _summarize(sc, value, seed, eval_rows)
    summary["episodes_csv"] = episodes_path
    if artifact_path:
        summary["artifact"] = artifact_path
    return summary


def run_sweep(sc: ScenarioConfig) -> list[dict]:
    """Execute every (axis value, seed) point and write summary files."""
    sc.validate()
    values = list(sc.axis_values) if sc.axis != "none" else [math.nan]
    # Seed streams key on the value's rank among the sorted distinct values,
    # not its list position, so listing or execution order cannot change any
    # per-point result.
    ranks = {v: i for i, v in enumerate(sorted(set(values)))}
    points = [(ranks[value], value, seed)
              for value in values
              for seed in sc.seeds]

    if sc.workers > 1:
        with ProcessPoolExecutor(max_workers=sc.workers) as pool:
            futs = [pool.submit(run_point, sc, ai, v, s)
                    for ai, v, s in points]
            rows = [f.result() for f in futs]
    else:
        rows = [run_point(sc, ai, v, s) for ai, v, s in points]

    rows.sort(key=lambda r: (r["axis_value"], r["seed"]))
    os.makedirs(sc.out_dir, exist_ok=True)
    summary_path = os.path.join(sc.out_dir, "summary.csv")
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for r in rows:
            w.writerow([r[c] for c in SUMMARY_COLUMNS])

    json_path = os.path.join(sc.out_dir, "summary.json")
    clean = []
    for r in rows:
        item = {k: r[k] for k in SUMMARY_COLUMNS}
        if math.isnan(item["axis_value"]):
            item["axis_value"] = None
        clean.append(item)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump({"config": _config_as_dict(sc), "rows": clean}, fh,
                  indent=2)
    return rows


def _config_as_dict(sc: ScenarioConfig) -> dict:
    from dataclasses import asdict
    out = asdict(sc)
    for k, v in out.items():
        if isinstance(v, tuple):
            out[k] = list(v)
    return out


def evaluate(artifact_path, sc: ScenarioConfig, seed: int = 0) -> dict:
    """Greedy rollouts of a stored policy; no learning, artifact untouched."""
    ss = np.random.SeedSequence([int(seed), 0])
    eval_env_seed, eval_rng_seed = ss.spawn(2)
    env = build_env(sc, eval_env_seed)
    policy = _policy_from_artifact(artifact_path, env)
    eval_rows = run_episodes(env, policy, sc.eval_episodes, sc.horizon,
                             np.random.default_rng(eval_rng_seed),
                             learn=False)
    value = {"desired_velocity": sc.v_desired_mps, "n_tbs": sc.n_tbs,
             "n_avs": sc.num_avs}.get(sc.axis, math.nan)
    return _summarize(sc, value, seed, eval_rows)
