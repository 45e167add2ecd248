"""Episode loop shared by the tabular and deep Q agents.

The loop is agnostic to the learner: an agent exposes act/learn/episode_end
and the environment follows the reset/step protocol of VNetEnv. Wrecked AVs
are excluded from learning between their terminal transition and the step
after respawn (their forced no-op phase says nothing about the policy), but
their steps still count toward episode metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields


@dataclass
class EpisodeMetrics:
    episode: int
    epsilon: float
    steps: int
    reward_total: float        # per AV-step means
    reward_tran: float
    reward_tele: float
    mean_tq: float
    mean_tij: float
    handoff_prob: float        # handoff events / AV-steps
    collision_rate: float      # new collisions / AV-steps
    mean_velocity: float

    def as_row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]

    @staticmethod
    def columns() -> list:
        return [f.name for f in fields(EpisodeMetrics)]


def epsilon_schedule(start: float, end: float, decay: float, episode: int) -> float:
    """Exponential anneal, episode 0 returns start; never below end."""
    return max(end, start * decay ** episode)


def run_episodes(env, agent, episodes: int, horizon: int, rng,
                 eps_start: float = 1.0, eps_end: float = 0.05,
                 eps_decay: float = 0.995, learn: bool = True,
                 on_step=None):
    """Run training (or greedy evaluation with learn=False) episodes.

    Returns a list of EpisodeMetrics, one per episode. on_step, when given,
    is called as on_step(episode, t, infos) after every environment step
    (trace emission hooks in here).
    """
    out = []
    for ep in range(episodes):
        eps = epsilon_schedule(eps_start, eps_end, eps_decay, ep) if learn else 0.0
        states = env.reset()
        n = len(states)
        wrecked_prev = [False] * n
        sums = {"r": 0.0, "tran": 0.0, "tele": 0.0, "tq": 0.0, "tij": 0.0,
                "hand": 0, "coll": 0, "v": 0.0}
        count = 0
        for t in range(horizon):
            actions = agent.act(states, eps, rng)
            next_states, rewards, infos = env.step(actions)
            batch = []
            for i, info in enumerate(infos):
                r = float(rewards[i])
                if not math.isfinite(r):
                    raise RuntimeError(
                        f"non-finite reward {r!r} for agent {i} "
                        f"(episode {ep}, step {t}); check config scales")
                wrecked = bool(info.get("wrecked", False))
                done = bool(info.get("done", False))
                respawned = wrecked_prev[i] and not wrecked
                if not ((wrecked and not done) or respawned):
                    batch.append((i, states[i], int(actions[i]), r,
                                  next_states[i], done))
                wrecked_prev[i] = wrecked
                sums["r"] += r
                sums["tran"] += float(info.get("r_tran", r))
                sums["tele"] += float(info.get("r_tele", 0.0))
                sums["tq"] += float(info.get("t_q", 0.0))
                sums["tij"] += float(info.get("t_ij", 0.0))
                sums["hand"] += bool(info.get("handoff", False))
                sums["coll"] += bool(info.get("collision", False))
                sums["v"] += float(info.get("v_x", 0.0))
                count += 1
            if learn and batch:
                agent.learn(batch, rng)
            if on_step is not None:
                on_step(ep, t, infos)
            states = next_states
        if learn:
            agent.episode_end(ep + 1)
        c = max(1, count)
        out.append(EpisodeMetrics(
            episode=ep, epsilon=eps, steps=horizon,
            reward_total=sums["r"] / c, reward_tran=sums["tran"] / c,
            reward_tele=sums["tele"] / c, mean_tq=sums["tq"] / c,
            mean_tij=sums["tij"] / c, handoff_prob=sums["hand"] / c,
            collision_rate=sums["coll"] / c, mean_velocity=sums["v"] / c))
    return out
