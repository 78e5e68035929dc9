"""From-scratch deterministic policy gradient agent (numpy only)."""

from .nets import Actor, Critic, Layer
from .agent import DDPGAgent, GaussianNoise, ReplayBuffer, Transition, soft_update, td_targets
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Actor", "Critic", "Layer", "DDPGAgent", "GaussianNoise", "ReplayBuffer",
    "Transition", "soft_update", "td_targets", "save_checkpoint", "load_checkpoint",
]
