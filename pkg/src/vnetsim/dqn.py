"""Deep Q-learning with a self-contained feed-forward network.

Everything is plain numpy: forward, backprop, plain gradient descent.
Replay holds encoded states so sampling needs no environment handle. The
loss is squared error by default; bce mode squashes prediction and target
through a temperature sigmoid first (binary cross-entropy needs (0,1)
arguments, Q-values are unbounded reals).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .train_loop import run_episodes

_CLAMP = 1e-7


@dataclass
class DqnConfig:
    hidden: tuple = (64, 32)
    lr: float = 1e-3
    gamma: float = 0.9
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay: float = 0.995
    episodes: int = 300
    horizon: int = 500
    batch: int = 32
    capacity: int = 50_000
    sync_every: int = 50
    loss_mode: str = "squared"      # squared | bce
    reward_scale: float = 1.0
    shared_policy: bool = True
    tau_decay: float = 0.99         # bce squash temperature tracking

    def validate(self) -> "DqnConfig":
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.sync_every < 1:
            raise ValueError("sync_every must be >= 1")
        if self.loss_mode not in ("squared", "bce"):
            raise ValueError("loss_mode must be 'squared' or 'bce'")
        if self.capacity < self.batch:
            raise ValueError("capacity must hold at least one batch")
        if self.reward_scale <= 0:
            raise ValueError("reward_scale must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        return self


class Fnn:
    """Fully-connected net; activation tags per layer after the input."""

    def __init__(self, sizes, activations, rng=None):
        sizes = tuple(int(s) for s in sizes)
        activations = tuple(activations)
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation tag per non-input layer")
        for a in activations:
            if a not in ("relu", "sigmoid", "linear"):
                raise ValueError(f"unknown activation {a!r}")
        self.sizes = sizes
        self.activations = activations
        self.weights = []
        self.biases = []
        for l in range(len(sizes) - 1):
            fan_in, fan_out = sizes[l], sizes[l + 1]
            scale = np.sqrt(2.0 / fan_in) if activations[l] == "relu" \
                else np.sqrt(1.0 / fan_in)
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                w = rng.normal(0.0, scale, size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    def copy(self) -> "Fnn":
        out = Fnn(self.sizes, self.activations)
        out.weights = [w.copy() for w in self.weights]
        out.biases = [b.copy() for b in self.biases]
        return out

    def copy_from(self, other: "Fnn") -> None:
        for w, ow in zip(self.weights, other.weights):
            w[:] = ow
        for b, ob in zip(self.biases, other.biases):
            b[:] = ob

    def params_flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def set_params_flat(self, vec: np.ndarray) -> None:
        pos = 0
        for w, b in zip(self.weights, self.biases):
            w[:] = vec[pos:pos + w.size].reshape(w.shape)
            pos += w.size
            b[:] = vec[pos:pos + b.size]
            pos += b.size
        if pos != vec.size:
            raise ValueError("parameter vector length mismatch")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_cached(net: Fnn, x: np.ndarray):
    """Returns (output, list of per-layer activations incl. input)."""
    acts = [x]
    h = x
    for w, b, tag in zip(net.weights, net.biases, net.activations):
        z = h @ w + b
        if tag == "relu":
            h = np.maximum(0.0, z)
        elif tag == "sigmoid":
            h = _sigmoid(z)
        else:
            h = z
        acts.append(h)
    return h, acts


def forward(net: Fnn, x) -> np.ndarray:
    """Action values for one encoded state (1-d) or a batch (2-d)."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    out, _ = _forward_cached(net, x[None, :] if single else x)
    return out[0] if single else out


def loss(pred, target, mode: str = "squared", tau: float = 1.0) -> float:
    """Scalar loss; arrays are averaged. bce squashes both via sigma(x/tau)."""
    pred = np.atleast_1d(np.asarray(pred, dtype=np.float64))
    target = np.atleast_1d(np.asarray(target, dtype=np.float64))
    if mode == "squared":
        return float(np.mean((pred - target) ** 2))
    if mode != "bce":
        raise ValueError(f"unknown loss mode {mode!r}")
    p = np.clip(_sigmoid(pred / tau), _CLAMP, 1.0 - _CLAMP)
    t = _sigmoid(target / tau)
    return float(np.mean(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p))))


def _loss_grad(pred, target, mode: str, tau: float) -> np.ndarray:
    """dL/dpred for the per-sample loss (before batch averaging)."""
    if mode == "squared":
        return 2.0 * (pred - target)
    p = _sigmoid(pred / tau)
    t = _sigmoid(target / tau)
    inside = (p > _CLAMP) & (p < 1.0 - _CLAMP)
    return np.where(inside, (p - t) / tau, 0.0)


def _grad_batch(net: Fnn, x: np.ndarray, actions: np.ndarray,
                targets: np.ndarray, mode: str, tau: float):
    """Gradients of the batch-mean loss; flow only through chosen outputs."""
    m = x.shape[0]
    out, acts = _forward_cached(net, x)
    rows = np.arange(m)
    pred = out[rows, actions]
    batch_loss = loss(pred, targets, mode, tau)
    g = _loss_grad(pred, targets, mode, tau) / m
    out_tag = net.activations[-1]
    if out_tag == "relu":
        g = g * (pred > 0.0)
    elif out_tag == "sigmoid":
        g = g * pred * (1.0 - pred)
    delta = np.zeros_like(out)
    delta[rows, actions] = g

    grads_w = [None] * len(net.weights)
    grads_b = [None] * len(net.biases)
    for l in range(len(net.weights) - 1, -1, -1):
        h_prev = acts[l]
        grads_w[l] = h_prev.T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l == 0:
            break
        back = delta @ net.weights[l].T
        tag = net.activations[l - 1]
        h = acts[l]
        if tag == "relu":
            delta = back * (h > 0.0)
        elif tag == "sigmoid":
            delta = back * h * (1.0 - h)
        else:
            delta = back
    return grads_w, grads_b, batch_loss, pred


def backward(net: Fnn, x, action: int, target: float,
             mode: str = "squared", tau: float = 1.0):
    """Parameter gradients for a single transition."""
    x = np.asarray(x, dtype=np.float64)[None, :]
    gw, gb, _, _ = _grad_batch(net, x, np.array([action]),
                               np.array([float(target)]), mode, tau)
    return gw, gb


class ReplayBuffer:
    """Ring buffer over encoded transitions; uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int):
        self.capacity = int(capacity)
        self.s = np.zeros((capacity, obs_dim))
        self.a = np.zeros(capacity, dtype=np.int64)
        self.r = np.zeros(capacity)
        self.s2 = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.cursor = 0

    def push(self, s_enc, a: int, r: float, s2_enc, done: bool) -> None:
        i = self.cursor
        self.s[i] = s_enc
        self.a[i] = a
        self.r[i] = r
        self.s2[i] = s2_enc
        self.done[i] = done
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng, m: int):
        if self.size < 1:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self.size, size=m)
        return (self.s[idx], self.a[idx], self.r[idx], self.s2[idx],
                self.done[idx])


class TauTracker:
    """Running squash temperature for bce mode: max(1, ema of |target| p95)."""

    def __init__(self, decay: float = 0.99):
        self.decay = decay
        self.ema = 0.0

    def update(self, targets: np.ndarray) -> None:
        p95 = float(np.percentile(np.abs(targets), 95))
        self.ema = self.decay * self.ema + (1.0 - self.decay) * p95

    @property
    def tau(self) -> float:
        return max(1.0, self.ema)


def compute_targets(target_net: Fnn, r: np.ndarray, s2_enc: np.ndarray,
                    done: np.ndarray, gamma: float) -> np.ndarray:
    """r + gamma * max target-Q(s'); terminal transitions keep bare r."""
    q_next = forward(target_net, s2_enc).max(axis=1)
    return r + gamma * q_next * (~done)


def train_step(net: Fnn, target_net: Fnn, buffer: ReplayBuffer,
               cfg: DqnConfig, rng, tau_state: TauTracker | None = None):
    """One sampled mini-batch gradient step; None during warm-up."""
    if buffer.size < cfg.batch:
        return None
    s, a, r, s2, done = buffer.sample(rng, cfg.batch)
    targets = compute_targets(target_net, r, s2, done, cfg.gamma)
    tau = 1.0
    if cfg.loss_mode == "bce":
        if tau_state is not None:
            tau_state.update(targets)
            tau = tau_state.tau
    gw, gb, batch_loss, _ = _grad_batch(net, s, a, targets, cfg.loss_mode, tau)
    for w, g in zip(net.weights, gw):
        w -= cfg.lr * g
    for b, g in zip(net.biases, gb):
        b -= cfg.lr * g
    return batch_loss


def sync_target(net: Fnn, target_net: Fnn, episode: int,
                every: int = 50) -> Fnn:
    """Copy online parameters into the target net on every Nth episode."""
    if episode % every == 0:
        target_net.copy_from(net)
    return target_net


def save_network(path, net: Fnn, cfg_hash: str = "") -> None:
    np.savez(path, kind="dqn", version=1,
             sizes=np.array(net.sizes, dtype=np.int64),
             activations=np.array(net.activations),
             config_hash=cfg_hash,
             params=net.params_flat())


def load_network(path):
    """Returns (Fnn, header dict)."""
    with np.load(path, allow_pickle=False) as z:
        if str(z["kind"]) != "dqn":
            raise ValueError(f"not a network artifact: {path}")
        sizes = tuple(int(s) for s in z["sizes"])
        acts = tuple(str(a) for a in z["activations"])
        meta = {"version": int(z["version"]),
                "config_hash": str(z["config_hash"])}
        net = Fnn(sizes, acts)
        net.set_params_flat(z["params"])
    return net, meta


def save_network_set(path, nets, cfg_hash: str = "") -> None:
    """Checkpoint several same-shaped nets (independent-learner mode)."""
    first = nets[0]
    payload = {f"params_{k}": n.params_flat() for k, n in enumerate(nets)}
    np.savez(path, kind="dqn_set", version=1, count=len(nets),
             sizes=np.array(first.sizes, dtype=np.int64),
             activations=np.array(first.activations),
             config_hash=cfg_hash, **payload)


def load_network_set(path):
    """Returns (list of Fnn, header dict)."""
    with np.load(path, allow_pickle=False) as z:
        if str(z["kind"]) != "dqn_set":
            raise ValueError(f"not a network-set artifact: {path}")
        sizes = tuple(int(s) for s in z["sizes"])
        acts = tuple(str(a) for a in z["activations"])
        meta = {"version": int(z["version"]),
                "config_hash": str(z["config_hash"])}
        nets = []
        for k in range(int(z["count"])):
            net = Fnn(sizes, acts)
            net.set_params_flat(z[f"params_{k}"])
            nets.append(net)
    return nets, meta


class DqnAgent:
    """Adapter between the episode loop and the network(s) + replay."""

    def __init__(self, env, cfg: DqnConfig, rng):
        cfg.validate()
        self.cfg = cfg
        self.env = env
        sizes = (env.obs_dim, *cfg.hidden, env.n_actions)
        acts = self._activation_tags(len(cfg.hidden))
        n_nets = 1 if cfg.shared_policy else env.n_agents
        self.nets = [Fnn(sizes, acts, rng) for _ in range(n_nets)]
        self.targets = [n.copy() for n in self.nets]
        self.buffers = [ReplayBuffer(cfg.capacity, env.obs_dim)
                        for _ in range(n_nets)]
        self.taus = [TauTracker(cfg.tau_decay) for _ in range(n_nets)]
        self.losses: list[float] = []

    @staticmethod
    def _activation_tags(n_hidden: int):
        if n_hidden == 0:
            return ("linear",)
        return ("relu",) + ("sigmoid",) * (n_hidden - 1) + ("linear",)

    def _net_for(self, agent_id: int) -> int:
        return 0 if self.cfg.shared_policy else agent_id

    def act(self, states, eps: float, rng):
        x = self.env.encode_states(states)
        if self.cfg.shared_policy:
            q = forward(self.nets[0], x)
        else:
            q = np.stack([forward(self.nets[i], x[i])
                          for i in range(len(states))])
        greedy = np.argmax(q, axis=1)
        explore = rng.random(len(states)) < eps
        n_rand = int(explore.sum())
        if n_rand:
            greedy[explore] = rng.integers(0, self.env.n_actions, size=n_rand)
        return [int(a) for a in greedy]

    def learn(self, batch, rng) -> None:
        touched = set()
        for agent_id, s, a, r, s2, done in batch:
            k = self._net_for(agent_id)
            self.buffers[k].push(self.env.encode_state(s), a,
                                 r * self.cfg.reward_scale,
                                 self.env.encode_state(s2), done)
            touched.add(k)
        for k in sorted(touched):
            out = train_step(self.nets[k], self.targets[k], self.buffers[k],
                             self.cfg, rng, self.taus[k])
            if out is not None:
                self.losses.append(out)

    def episode_end(self, episode: int) -> None:
        for k in range(len(self.nets)):
            sync_target(self.nets[k], self.targets[k], episode,
                        self.cfg.sync_every)

    def greedy_policy_on(self, state_indices) -> np.ndarray:
        x = self.env.encode_states(state_indices)
        return np.argmax(forward(self.nets[0], x), axis=1)


class GreedyNetPolicy:
    """Evaluation-time agent for stored networks; no learning, no mutation."""

    def __init__(self, nets, env, shared: bool = True):
        self.nets = nets
        self.env = env
        self.shared = shared

    def act(self, states, eps: float, rng):
        x = self.env.encode_states(states)
        if self.shared:
            q = forward(self.nets[0], x)
        else:
            q = np.stack([forward(self.nets[i], x[i])
                          for i in range(len(states))])
        return [int(a) for a in np.argmax(q, axis=1)]

    def learn(self, batch, rng) -> None:
        pass

    def episode_end(self, episode: int) -> None:
        pass


def train(env, cfg: DqnConfig | None = None, seed: int = 0):
    """Train a DQN on env; returns (DqnAgent, metrics)."""
    cfg = (cfg or DqnConfig()).validate()
    rng = np.random.default_rng(seed)
    agent = DqnAgent(env, cfg, rng)
    metrics = run_episodes(env, agent, cfg.episodes, cfg.horizon, rng,
                           eps_start=cfg.eps_start, eps_end=cfg.eps_end,
                           eps_decay=cfg.eps_decay, learn=True)
    return agent, metrics
