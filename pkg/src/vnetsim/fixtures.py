"""Tiny deterministic MDPs used by agent correctness tests and demos.

Both follow the multi-agent env protocol (reset/step with one agent) so the
same training loop that drives the corridor environment runs here, where
exact optima are computable by hand or by value iteration.
"""

import numpy as np


class TwoStateChain:
    """Ping-pong chain: action 0 pays in state 0, action 1 pays in state 1.

    next(0,0)=1, next(0,1)=0, next(1,0)=1, next(1,1)=0; reward 1 exactly when
    the paying action is taken. With gamma=0.9 the optimal values are
    Q*(s0)=(10,9), Q*(s1)=(9,10): the greedy policy alternates states.
    """

    n_states = 2
    n_actions = 2
    n_agents = 1
    obs_dim = 2

    def __init__(self):
        self.state = 0
        self._enc = np.eye(2, dtype=np.float64)

    @staticmethod
    def next_state(s: int, a: int) -> int:
        return 1 if a == 0 else 0

    @staticmethod
    def reward(s: int, a: int) -> float:
        return 1.0 if s == a else 0.0

    def reset(self):
        self.state = 0
        return [self.state]

    def step(self, actions):
        a = int(actions[0])
        r = self.reward(self.state, a)
        self.state = self.next_state(self.state, a)
        return [self.state], [r], [{"done": False}]

    def encode_state(self, idx: int) -> np.ndarray:
        return self._enc[idx]

    def encode_states(self, idxs) -> np.ndarray:
        return self._enc[np.asarray(idxs, dtype=np.intp)]


class NoisyBandit:
    """One state, Gaussian rewards per arm; expected values are the means."""

    n_states = 1
    n_agents = 1
    obs_dim = 1

    def __init__(self, means=(0.3, 0.8), std=0.1, seed=0):
        self.means = tuple(float(m) for m in means)
        self.std = float(std)
        self.n_actions = len(self.means)
        self.rng = np.random.default_rng(seed)

    def reset(self):
        return [0]

    def step(self, actions):
        a = int(actions[0])
        r = self.rng.normal(self.means[a], self.std)
        return [0], [r], [{"done": False}]

    def encode_state(self, idx: int) -> np.ndarray:
        return np.ones(1)

    def encode_states(self, idxs) -> np.ndarray:
        return np.ones((len(idxs), 1))
