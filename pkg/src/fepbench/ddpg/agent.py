"""DDPG agent: replay memory, exploration noise, and the four update rules.

Updates are the standard deterministic-policy-gradient set: TD targets from
the target networks, a half-mean-squared TD-error critic loss, policy ascent
along the critic's action gradient, and slow target blending.  Everything is
driven by one seeded generator so training is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import AgentConfig
from ..errors import ConfigurationError, TrainingDivergedError
from .nets import Actor, AdamState, Critic, sgd_step


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: float
    r: float
    s_next: np.ndarray
    done: bool


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform minibatch sampling."""

    def __init__(self, capacity: int, obs_dim: int = 7):
        if capacity <= 0:
            raise ConfigurationError("replay capacity must be positive")
        self.capacity = int(capacity)
        self.obs_dim = obs_dim
        self._s = np.zeros((self.capacity, obs_dim))
        self._a = np.zeros((self.capacity, 1))
        self._r = np.zeros(self.capacity)
        self._s2 = np.zeros((self.capacity, obs_dim))
        self._done = np.zeros(self.capacity, dtype=bool)
        self._size = 0
        self._head = 0

    def __len__(self) -> int:
        return self._size

    def add(self, s, a: float, r: float, s_next, done: bool) -> None:
        i = self._head
        self._s[i] = s
        self._a[i, 0] = a
        self._r[i] = r
        self._s2[i] = s_next
        self._done[i] = done
        self._head = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform sample without replacement within the minibatch."""
        if self._size == 0:
            raise ConfigurationError("cannot sample from an empty buffer")
        n = min(batch_size, self._size)
        idx = rng.choice(self._size, size=n, replace=False)
        return (self._s[idx], self._a[idx], self._r[idx], self._s2[idx], self._done[idx])

    def state_arrays(self):
        """Raw storage for checkpointing (valid region only)."""
        n = self._size
        return {
            "s": self._s[:n].copy(), "a": self._a[:n].copy(), "r": self._r[:n].copy(),
            "s2": self._s2[:n].copy(), "done": self._done[:n].astype(np.float64),
            "head": np.array([float(self._head)]),
        }

    def restore(self, arrays: dict) -> None:
        n = arrays["s"].shape[0]
        if n > self.capacity:
            raise ConfigurationError("checkpointed buffer larger than configured capacity")
        self._s[:n] = arrays["s"]
        self._a[:n] = arrays["a"]
        self._r[:n] = arrays["r"]
        self._s2[:n] = arrays["s2"]
        self._done[:n] = arrays["done"].astype(bool)
        self._size = n
        self._head = int(arrays["head"][0]) % self.capacity


class GaussianNoise:
    """Zero-mean exploration noise with multiplicatively decaying variance."""

    def __init__(self, variance: float, decay: float):
        if variance < 0.0 or not (0.0 <= decay < 1.0):
            raise ConfigurationError("noise variance must be >= 0 and decay in [0, 1)")
        self.variance = variance
        self.decay = decay

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one noise value, then decay the variance one step."""
        value = rng.normal(0.0, math.sqrt(self.variance)) if self.variance > 0.0 else 0.0
        self.variance *= 1.0 - self.decay
        return value


def td_targets(r: np.ndarray, s_next: np.ndarray, done: np.ndarray, q_now: np.ndarray,
               target_actor: Actor, target_critic: Critic, gamma: float):
    """Bootstrapped targets y = r + gamma Q'(s', pi'(s')) and errors y - Q.

    The bootstrap term is zeroed on terminal transitions.
    """
    if not (0.0 <= gamma < 1.0):
        raise ConfigurationError("gamma must be in [0, 1)")
    a_next = target_actor.forward(s_next)
    q_next = target_critic.forward(s_next, a_next).ravel()
    r = np.asarray(r, dtype=float).ravel()
    mask = 1.0 - np.asarray(done, dtype=float).ravel()
    y = r + gamma * mask * q_next
    delta = y - np.asarray(q_now, dtype=float).ravel()
    return y, delta


def soft_update(target_params: list[np.ndarray], online_params: list[np.ndarray], tau: float) -> None:
    """In-place target blend theta' <- tau theta + (1 - tau) theta'."""
    if not (0.0 <= tau <= 1.0):
        raise ConfigurationError("tau must be in [0, 1]")
    for tp, op in zip(target_params, online_params):
        if tp.shape != op.shape:
            raise ConfigurationError("target/online parameter shapes do not match")
        tp *= 1.0 - tau
        tp += tau * op


class DDPGAgent:
    """Actor-critic pair with target copies and seeded exploration."""

    def __init__(self, cfg: AgentConfig, obs_dim: int = 7, seed: int = 0):
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.rng = np.random.default_rng(seed)
        self.actor = Actor(obs_dim, cfg.actor_hidden, self.rng, cfg.init_scale)
        self.critic = Critic(obs_dim, tuple(cfg.critic_obs_hidden), cfg.critic_action_hidden,
                             self.rng, cfg.init_scale)
        self.target_actor = self.actor.copy()
        self.target_critic = self.critic.copy()
        self.noise = GaussianNoise(cfg.noise_variance, cfg.noise_decay)
        self.buffer = ReplayBuffer(cfg.buffer_capacity, obs_dim)
        if cfg.optimizer == "adam":
            self._actor_opt = AdamState(self.actor.parameters())
            self._critic_opt = AdamState(self.critic.parameters())
        elif cfg.optimizer == "sgd":
            self._actor_opt = None
            self._critic_opt = None
        else:
            raise ConfigurationError(f"unknown optimizer '{cfg.optimizer}'")
        self.train_steps = 0

    def select_action(self, s: np.ndarray, explore: bool = True) -> float:
        """Policy output plus exploration noise, clamped to [-1, 1]."""
        a = float(self.actor.forward(s)[0, 0])
        if explore:
            a += self.noise.sample(self.rng)
        return min(1.0, max(-1.0, a))

    def critic_update(self, s, a, r, s2, done) -> tuple[float, float]:
        """Descend the half-mean-squared TD error; returns (loss, mean Q)."""
        q, cache = self.critic.forward(s, a, with_cache=True)
        y, delta = td_targets(r, s2, done, q.ravel(), self.target_actor,
                              self.target_critic, self.cfg.gamma)
        m = delta.shape[0]
        loss = float(np.sum(delta * delta) / (2.0 * m))
        if not math.isfinite(loss):
            raise TrainingDivergedError(f"critic loss became {loss}")
        grad_q = (-delta / m).reshape(-1, 1)
        grads, _ = self.critic.backward(cache, grad_q)
        self._apply(self.critic.parameters(), grads, self._critic_opt, self.cfg.critic_lr)
        return loss, float(np.mean(q))

    def actor_update(self, s) -> float:
        """Ascend the batch-mean critic value along the policy; returns that mean."""
        a, cache = self.actor.forward(s, with_cache=True)
        q, ccache = self.critic.forward(s, a, with_cache=True)
        m = a.shape[0]
        _, grad_action = self.critic.backward(ccache, np.full_like(q, 1.0 / m))
        if not np.all(np.isfinite(grad_action)):
            raise TrainingDivergedError("actor gradient became non-finite")
        grads = self.actor.backward(cache, grad_action)
        # ascent: negate the objective gradient for the descent-style optimizers
        neg = [-g for g in grads]
        self._apply(self.actor.parameters(), neg, self._actor_opt, self.cfg.actor_lr)
        return float(np.mean(q))

    def _apply(self, params, grads, opt, lr):
        if opt is None:
            sgd_step(params, grads, lr)
        else:
            opt.step(params, grads, lr)

    def update(self) -> dict | None:
        """One training step from the buffer; None until warmup is reached."""
        if len(self.buffer) < max(self.cfg.warmup, self.cfg.batch_size):
            return None
        s, a, r, s2, done = self.buffer.sample(self.cfg.batch_size, self.rng)
        loss, mean_q = self.critic_update(s, a, r, s2, done)
        actor_q = self.actor_update(s)
        soft_update(self.target_actor.parameters(), self.actor.parameters(), self.cfg.tau)
        soft_update(self.target_critic.parameters(), self.critic.parameters(), self.cfg.tau)
        self.train_steps += 1
        return {"critic_loss": loss, "mean_q": mean_q, "actor_q": actor_q,
                "noise_variance": self.noise.variance}

    def parameter_hash(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for p in (self.actor.parameters() + self.critic.parameters()
                  + self.target_actor.parameters() + self.target_critic.parameters()):
            h.update(np.ascontiguousarray(p).tobytes())
        return h.hexdigest()
