"""Tabular agent tests: selection, updates, fixture-MDP optimality, artifacts."""

import numpy as np
import pytest

from vnetsim.fixtures import NoisyBandit, TwoStateChain
from vnetsim.qlearning import (
    GreedyTablePolicy, LearnConfig, QTable, TabularAgent, bellman_update,
    config_hash, load_tables, save_tables, select_action, train,
)
from vnetsim.train_loop import epsilon_schedule, run_episodes

from oracles import bf_value_iteration


# ------------------------------------------------------------ action choice

def test_select_action_fully_random_is_uniform():
    q = QTable(4, 21)
    rng = np.random.default_rng(123)
    counts = np.zeros(21, dtype=np.int64)
    for _ in range(1_000_000):
        counts[select_action(q, 0, 1.0, rng)] += 1
    freqs = counts / counts.sum()
    assert np.all(np.abs(freqs - 1 / 21) < 0.01)
    # and well within sampling noise of uniform
    assert np.all(np.abs(freqs - 1 / 21) / (1 / 21) < 0.03)


def test_select_action_greedy_takes_unique_max():
    q = QTable(2, 21)
    q.q[1, 7] = 3.0
    rng = np.random.default_rng(0)
    assert all(select_action(q, 1, 0.0, rng) == 7 for _ in range(50))


def test_select_action_tie_breaks_to_lowest_index():
    q = QTable(1, 21)
    rng = np.random.default_rng(0)
    assert select_action(q, 0, 0.0, rng) == 0
    q.q[0, 5] = 2.0
    q.q[0, 9] = 2.0
    assert select_action(q, 0, 0.0, rng) == 5


# ------------------------------------------------------------------ updates

def test_bellman_update_single_step_arithmetic():
    q = QTable(3, 2)
    new = bellman_update(q, 0, 1, r=1.0, s_next=2, alpha=0.5, gamma=0.9)
    assert new == pytest.approx(0.5)
    assert q.q[0, 1] == pytest.approx(0.5)


def test_bellman_update_zero_alpha_is_identity():
    q = QTable(3, 2)
    q.q[:] = 1.7
    bellman_update(q, 0, 0, r=5.0, s_next=1, alpha=0.0, gamma=0.9)
    assert q.q[0, 0] == pytest.approx(1.7)


def test_bellman_update_fixed_point_is_stationary():
    q = QTable(2, 2)
    q.q[1] = [2.0, 4.0]
    q.q[0, 0] = 1.0 + 0.9 * 4.0     # r + gamma * max Q(s')
    bellman_update(q, 0, 0, r=1.0, s_next=1, alpha=0.3, gamma=0.9)
    assert q.q[0, 0] == pytest.approx(1.0 + 3.6)


def test_bellman_update_terminal_drops_bootstrap():
    q = QTable(2, 2)
    q.q[1] = [100.0, 100.0]
    bellman_update(q, 0, 0, r=-1.0, s_next=1, alpha=1.0, gamma=0.9,
                   terminal=True)
    assert q.q[0, 0] == pytest.approx(-1.0)


# ---------------------------------------------------------------- schedules

def test_epsilon_schedule_anneals_and_floors():
    values = [epsilon_schedule(1.0, 0.05, 0.995, ep) for ep in range(2000)]
    assert values[0] == 1.0
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert values[-1] == 0.05


# -------------------------------------------------------- fixture optimality

def test_chain_training_matches_value_iteration():
    env = TwoStateChain()
    cfg = LearnConfig(episodes=100, horizon=100, alpha=0.1, gamma=0.9)
    agent, metrics = train(env, cfg, seed=7)
    nxt = [[TwoStateChain.next_state(s, a) for a in range(2)] for s in range(2)]
    rew = [[TwoStateChain.reward(s, a) for a in range(2)] for s in range(2)]
    q_star = np.array(bf_value_iteration(2, 2, nxt, rew, 0.9))
    assert q_star[0, 0] == pytest.approx(10.0)
    assert q_star[1, 1] == pytest.approx(10.0)
    got = agent.tables[0].q
    assert np.max(np.abs(got - q_star)) < 1e-6
    assert list(agent.tables[0].greedy_policy()) == [0, 1]
    assert len(metrics) == 100


def test_chain_q_bounded_by_rmax_over_horizon():
    env = TwoStateChain()
    agent, _ = train(env, LearnConfig(episodes=60, horizon=80), seed=3)
    # rewards in [0,1], gamma 0.9: values can never leave [0, 10]
    assert np.all(agent.tables[0].q >= -1e-12)
    assert np.all(agent.tables[0].q <= 10.0 + 1e-9)


def test_zero_discount_learns_expected_immediate_reward():
    env = NoisyBandit(means=(0.3, 0.8), std=0.1, seed=5)
    cfg = LearnConfig(episodes=60, horizon=100, gamma=0.0, eps_end=0.2,
                      eps_decay=0.99)
    agent, _ = train(env, cfg, seed=11)
    q = agent.tables[0].q[0]
    assert q[0] == pytest.approx(0.3, abs=0.1)
    assert q[1] == pytest.approx(0.8, abs=0.1)


def test_same_seed_reproduces_learning_curve():
    def curve(seed):
        agent, metrics = train(TwoStateChain(),
                               LearnConfig(episodes=30, horizon=50), seed=seed)
        return [(m.episode, m.epsilon, m.reward_total) for m in metrics]

    assert curve(9) == curve(9)
    assert curve(9) != curve(10)


# ---------------------------------------------------------------- artifacts

def test_table_artifact_roundtrip(tmp_path):
    env = TwoStateChain()
    agent, _ = train(env, LearnConfig(episodes=10, horizon=20), seed=1)
    path = tmp_path / "table.npz"
    h = config_hash(agent.cfg)
    save_tables(path, agent.tables, cfg_hash=h, shared=True)
    tables, meta = load_tables(path)
    assert meta["state_count"] == 2 and meta["action_count"] == 2
    assert meta["shared"] is True
    assert meta["config_hash"] == h
    assert np.array_equal(tables[0].q, agent.tables[0].q)


def test_artifact_rejects_wrong_kind(tmp_path):
    path = tmp_path / "bogus.npz"
    np.savez(path, kind="other", version=1)
    with pytest.raises(ValueError):
        load_tables(path)


# ----------------------------------------------------- multi-agent behavior

def test_independent_learners_get_their_own_tables():
    from vnetsim.env import VNetEnv
    from vnetsim.road import RoadConfig

    env = VNetEnv(road_config=RoadConfig(num_avs=2), seed=4)
    cfg = LearnConfig(episodes=3, horizon=25, shared_policy=False)
    agent, _ = train(env, cfg, seed=2)
    assert len(agent.tables) == 2
    assert not np.array_equal(agent.tables[0].q, agent.tables[1].q)


def test_shared_policy_uses_one_table():
    from vnetsim.env import VNetEnv
    from vnetsim.road import RoadConfig

    env = VNetEnv(road_config=RoadConfig(num_avs=3), seed=4)
    agent, _ = train(env, LearnConfig(episodes=2, horizon=20), seed=2)
    assert len(agent.tables) == 1
    assert np.any(agent.tables[0].q != 0.0)


# --------------------------------------------------------------- evaluation

def test_greedy_evaluation_is_pure_and_repeatable():
    env = TwoStateChain()
    agent, _ = train(env, LearnConfig(episodes=50, horizon=60), seed=7)
    table = agent.tables[0]
    before = table.q.copy()
    policy = GreedyTablePolicy([table], shared=True)

    def evaluate():
        rng = np.random.default_rng(100)
        return [m.reward_total for m in
                run_episodes(env, policy, episodes=3, horizon=40, rng=rng,
                             learn=False)]

    first = evaluate()
    assert evaluate() == first
    assert np.array_equal(table.q, before)
    # optimal alternation earns the unit reward every step
    assert first[0] == pytest.approx(1.0)


def test_non_finite_reward_aborts_with_diagnostic():
    class BadEnv(TwoStateChain):
        def step(self, actions):
            states, rewards, infos = super().step(actions)
            return states, [float("nan")], infos

    with pytest.raises(RuntimeError, match="non-finite reward"):
        train(BadEnv(), LearnConfig(episodes=1, horizon=5), seed=0)


def test_learn_config_validation():
    with pytest.raises(ValueError):
        LearnConfig(alpha=0.0).validate()
    with pytest.raises(ValueError):
        LearnConfig(gamma=1.5).validate()
    with pytest.raises(ValueError):
        LearnConfig(eps_end=0.5, eps_start=0.1).validate()
    with pytest.raises(ValueError):
        LearnConfig(episodes=0).validate()
