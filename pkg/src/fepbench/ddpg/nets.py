"""Dense actor/critic networks with hand-written backpropagation.

The actor is a single-hidden-layer MLP with a tanh output in [-1, 1].
The critic has separate observation (two hidden layers) and action (one
hidden layer) paths whose pre-activations are added, rectified, and read
out by a linear head.  All math is float64 numpy; batches are (M, dim).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


@dataclass
class Layer:
    """One affine layer: y = x @ w.T + b, with an activation tag."""

    w: np.ndarray  # (n_out, n_in)
    b: np.ndarray  # (n_out,)
    activation: str  # "linear" | "relu" | "tanh"

    @classmethod
    def create(cls, n_in: int, n_out: int, activation: str, rng: np.random.Generator,
               scale: float | None = None) -> "Layer":
        if activation not in ("linear", "relu", "tanh"):
            raise ConfigurationError(f"unknown activation '{activation}'")
        limit = scale if scale is not None else 1.0 / math.sqrt(n_in)
        w = rng.uniform(-limit, limit, size=(n_out, n_in))
        b = np.zeros(n_out)
        return cls(w, b, activation)

    def affine(self, x: np.ndarray) -> np.ndarray:
        return x @ self.w.T + self.b

    def activate(self, z: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        if self.activation == "tanh":
            return np.tanh(z)
        return z

    def activation_grad(self, z: np.ndarray, out: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return (z > 0.0).astype(float)
        if self.activation == "tanh":
            return 1.0 - out * out
        return np.ones_like(z)

    def copy(self) -> "Layer":
        return Layer(self.w.copy(), self.b.copy(), self.activation)


def _affine_grads(x: np.ndarray, delta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weight/bias gradients for y = x @ w.T + b given dL/dz = delta."""
    return delta.T @ x, delta.sum(axis=0)


class Actor:
    """Deterministic policy: observation -> action in [-1, 1]."""

    def __init__(self, obs_dim: int, hidden: int, rng: np.random.Generator,
                 init_scale: float | None = None):
        self.obs_dim = obs_dim
        self.hidden_layer = Layer.create(obs_dim, hidden, "relu", rng, init_scale)
        self.out_layer = Layer.create(hidden, 1, "tanh", rng, init_scale)

    def forward(self, s: np.ndarray, with_cache: bool = False):
        s = np.atleast_2d(np.asarray(s, dtype=float))
        if s.shape[1] != self.obs_dim:
            raise ConfigurationError(f"actor expects obs dim {self.obs_dim}, got {s.shape[1]}")
        z1 = self.hidden_layer.affine(s)
        h = self.hidden_layer.activate(z1)
        z2 = self.out_layer.affine(h)
        a = self.out_layer.activate(z2)
        if with_cache:
            return a, (s, z1, h, z2, a)
        return a

    def backward(self, cache, grad_a: np.ndarray) -> list[np.ndarray]:
        """Parameter gradients of sum(grad_a * a); order matches parameters()."""
        s, z1, h, z2, a = cache
        d2 = grad_a * self.out_layer.activation_grad(z2, a)
        dw2, db2 = _affine_grads(h, d2)
        dh = d2 @ self.out_layer.w
        d1 = dh * self.hidden_layer.activation_grad(z1, h)
        dw1, db1 = _affine_grads(s, d1)
        return [dw1, db1, dw2, db2]

    def parameters(self) -> list[np.ndarray]:
        return [self.hidden_layer.w, self.hidden_layer.b, self.out_layer.w, self.out_layer.b]

    def copy(self) -> "Actor":
        other = object.__new__(Actor)
        other.obs_dim = self.obs_dim
        other.hidden_layer = self.hidden_layer.copy()
        other.out_layer = self.out_layer.copy()
        return other


class Critic:
    """Action-value net: observation path + action path merged into a head."""

    def __init__(self, obs_dim: int, obs_hidden: tuple[int, int], action_hidden: int,
                 rng: np.random.Generator, init_scale: float | None = None):
        if obs_hidden[1] != action_hidden:
            raise ConfigurationError("observation and action paths must merge at equal width")
        self.obs_dim = obs_dim
        self.obs1 = Layer.create(obs_dim, obs_hidden[0], "relu", rng, init_scale)
        self.obs2 = Layer.create(obs_hidden[0], obs_hidden[1], "linear", rng, init_scale)
        self.act1 = Layer.create(1, action_hidden, "linear", rng, init_scale)
        self.head = Layer.create(action_hidden, 1, "linear", rng, init_scale)

    def forward(self, s: np.ndarray, a: np.ndarray, with_cache: bool = False):
        s = np.atleast_2d(np.asarray(s, dtype=float))
        a = np.asarray(a, dtype=float).reshape(s.shape[0], 1)
        if s.shape[1] != self.obs_dim:
            raise ConfigurationError(f"critic expects obs dim {self.obs_dim}, got {s.shape[1]}")
        z1 = self.obs1.affine(s)
        h1 = self.obs1.activate(z1)
        z2 = self.obs2.affine(h1)
        za = self.act1.affine(a)
        zm = z2 + za
        m = np.maximum(zm, 0.0)  # merge activation
        q = self.head.affine(m)
        if with_cache:
            return q, (s, a, z1, h1, zm, m)
        return q

    def backward(self, cache, grad_q: np.ndarray):
        """Gradients of sum(grad_q * Q) w.r.t. parameters and the action.

        Returns (param_grads matching parameters(), dQ/da scaled by grad_q).
        """
        s, a, z1, h1, zm, m = cache
        dm = (grad_q @ self.head.w) * (zm > 0.0)
        dwh, dbh = _affine_grads(m, grad_q)
        dwa, dba = _affine_grads(a, dm)
        grad_action = dm @ self.act1.w
        d1 = (dm @ self.obs2.w) * self.obs1.activation_grad(z1, h1)
        dw2, db2 = _affine_grads(h1, dm)
        dw1, db1 = _affine_grads(s, d1)
        return [dw1, db1, dw2, db2, dwa, dba, dwh, dbh], grad_action

    def action_gradient(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        """dQ/da per sample, shape (M, 1)."""
        q, cache = self.forward(s, a, with_cache=True)
        _, grad_a = self.backward(cache, np.ones_like(q))
        return grad_a

    def parameters(self) -> list[np.ndarray]:
        return [self.obs1.w, self.obs1.b, self.obs2.w, self.obs2.b,
                self.act1.w, self.act1.b, self.head.w, self.head.b]

    def copy(self) -> "Critic":
        other = object.__new__(Critic)
        other.obs_dim = self.obs_dim
        other.obs1 = self.obs1.copy()
        other.obs2 = self.obs2.copy()
        other.act1 = self.act1.copy()
        other.head = self.head.copy()
        return other


class AdamState:
    """Per-parameter adaptive moments; plain SGD when disabled."""

    def __init__(self, params: list[np.ndarray], beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray], lr: float) -> None:
        """In-place descent step along grads (negate grads for ascent)."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            m_hat = m / (1.0 - b1 ** self.t)
            v_hat = v / (1.0 - b2 ** self.t)
            p -= lr * m_hat / (np.sqrt(v_hat) + self.eps)


def sgd_step(params: list[np.ndarray], grads: list[np.ndarray], lr: float) -> None:
    for p, g in zip(params, grads):
        p -= lr * g
