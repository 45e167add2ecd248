"""Tabular Q-learning over the discrete joint driving/telecom space."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

import numpy as np

from .train_loop import run_episodes


@dataclass
class LearnConfig:
    alpha: float = 0.1
    gamma: float = 0.9
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay: float = 0.995
    episodes: int = 1000
    horizon: int = 500
    shared_policy: bool = True

    def validate(self) -> "LearnConfig":
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ValueError("need 0 <= eps_end <= eps_start <= 1")
        if not 0.0 < self.eps_decay <= 1.0:
            raise ValueError("eps_decay must be in (0, 1]")
        if self.episodes < 1 or self.horizon < 1:
            raise ValueError("episodes and horizon must be positive")
        return self


def config_hash(cfg) -> str:
    """Stable short hash of a config dataclass, stored in artifacts."""
    blob = json.dumps(asdict(cfg), sort_keys=True).encode()
    return hashlib.md5(blob).hexdigest()[:12]


class QTable:
    """Dense action-value table, zero initialized."""

    def __init__(self, n_states: int, n_actions: int):
        self.q = np.zeros((n_states, n_actions), dtype=np.float64)

    @property
    def n_states(self) -> int:
        return self.q.shape[0]

    @property
    def n_actions(self) -> int:
        return self.q.shape[1]

    def greedy_policy(self) -> np.ndarray:
        return np.argmax(self.q, axis=1)


def select_action(q: QTable, s: int, eps: float, rng) -> int:
    """Epsilon-greedy on the state's row; argmax ties go to the lowest index."""
    if rng.random() < eps:
        return int(rng.integers(0, q.n_actions))
    return int(np.argmax(q.q[s]))


def bellman_update(q: QTable, s: int, a: int, r: float, s_next: int,
                   alpha: float, gamma: float, terminal: bool = False) -> float:
    """One-step Q-learning update; returns the new entry."""
    target = r if terminal else r + gamma * float(np.max(q.q[s_next]))
    q.q[s, a] += alpha * (target - q.q[s, a])
    return float(q.q[s, a])


def save_tables(path, tables, cfg_hash: str = "", shared: bool = True) -> None:
    stack = np.stack([t.q for t in tables])
    np.savez(path, kind="qtable", version=1,
             state_count=stack.shape[1], action_count=stack.shape[2],
             shared=shared, config_hash=cfg_hash, q=stack)


def load_tables(path):
    """Returns (list of QTable, header dict)."""
    with np.load(path, allow_pickle=False) as z:
        if str(z["kind"]) != "qtable":
            raise ValueError(f"not a Q-table artifact: {path}")
        stack = z["q"]
        meta = {
            "version": int(z["version"]),
            "state_count": int(z["state_count"]),
            "action_count": int(z["action_count"]),
            "shared": bool(z["shared"]),
            "config_hash": str(z["config_hash"]),
        }
    tables = []
    for k in range(stack.shape[0]):
        t = QTable(meta["state_count"], meta["action_count"])
        t.q = stack[k].copy()
        tables.append(t)
    return tables, meta


class TabularAgent:
    """Adapter between the episode loop and one-or-many Q-tables.

    shared_policy=True keeps a single table updated from every AV's
    transition in arrival order; False gives each AV its own table.
    """

    def __init__(self, env, cfg: LearnConfig):
        cfg.validate()
        self.cfg = cfg
        n_tables = 1 if cfg.shared_policy else env.n_agents
        self.tables = [QTable(env.n_states, env.n_actions)
                       for _ in range(n_tables)]

    def table_for(self, agent_id: int) -> QTable:
        return self.tables[0] if self.cfg.shared_policy else self.tables[agent_id]

    def act(self, states, eps: float, rng):
        return [select_action(self.table_for(i), s, eps, rng)
                for i, s in enumerate(states)]

    def learn(self, batch, rng) -> None:
        for agent_id, s, a, r, s_next, done in batch:
            bellman_update(self.table_for(agent_id), s, a, r, s_next,
                           self.cfg.alpha, self.cfg.gamma, terminal=done)

    def episode_end(self, episode: int) -> None:
        pass


class GreedyTablePolicy:
    """Evaluation-time agent: pure argmax over a stored table set."""

    def __init__(self, tables, shared: bool = True):
        self.tables = tables
        self.shared = shared

    def act(self, states, eps: float, rng):
        out = []
        for i, s in enumerate(states):
            t = self.tables[0] if self.shared else self.tables[i]
            out.append(int(np.argmax(t.q[s])))
        return out

    def learn(self, batch, rng) -> None:
        pass

    def episode_end(self, episode: int) -> None:
        pass


def train(env, cfg: LearnConfig | None = None, seed: int = 0):
    """Train tabular Q-learning on env; returns (TabularAgent, metrics)."""
    cfg = (cfg or LearnConfig()).validate()
    rng = np.random.default_rng(seed)
    agent = TabularAgent(env, cfg)
    metrics = run_episodes(env, agent, cfg.episodes, cfg.horizon, rng,
                           eps_start=cfg.eps_start, eps_end=cfg.eps_end,
                           eps_decay=cfg.eps_decay, learn=True)
    return agent, metrics
