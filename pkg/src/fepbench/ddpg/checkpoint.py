"""Versioned binary checkpoints for the agent.

Layout: 8-byte magic, uint32 format version, uint64 header length, a
canonical JSON header (shapes, activations, hyperparameters, RNG state,
noise variance, observation normalization, array manifest), then the raw
float64 little-endian array blobs in manifest order.  Writing the same
agent twice produces identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..config import AgentConfig, ObservationNormConfig
from ..errors import CheckpointError
from .agent import DDPGAgent

MAGIC = b"FEPDDPG\x00"
FORMAT_VERSION = 1

_NET_NAMES = ("actor", "critic", "target_actor", "target_critic")


def _agent_arrays(agent: DDPGAgent, include_buffer: bool) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    for name, net in zip(_NET_NAMES, (agent.actor, agent.critic,
                                      agent.target_actor, agent.target_critic)):
        for i, p in enumerate(net.parameters()):
            arrays[f"{name}.{i}"] = p
    if agent._actor_opt is not None:
        for i, (m, v) in enumerate(zip(agent._actor_opt.m, agent._actor_opt.v)):
            arrays[f"adam_actor.m{i}"] = m
            arrays[f"adam_actor.v{i}"] = v
        for i, (m, v) in enumerate(zip(agent._critic_opt.m, agent._critic_opt.v)):
            arrays[f"adam_critic.m{i}"] = m
            arrays[f"adam_critic.v{i}"] = v
    if include_buffer:
        for key, arr in agent.buffer.state_arrays().items():
            arrays[f"buffer.{key}"] = arr
    return arrays


def save_checkpoint(agent: DDPGAgent, path: str | Path,
                    obs_norm: ObservationNormConfig | None = None,
                    include_buffer: bool = False, extra: dict | None = None) -> None:
    arrays = _agent_arrays(agent, include_buffer)
    manifest = [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()]
    header = {
        "format_version": FORMAT_VERSION,
        "obs_dim": agent.obs_dim,
        "agent_config": {
            "actor_hidden": agent.cfg.actor_hidden,
            "critic_obs_hidden": list(agent.cfg.critic_obs_hidden),
            "critic_action_hidden": agent.cfg.critic_action_hidden,
            "optimizer": agent.cfg.optimizer,
            "gamma": agent.cfg.gamma,
            "tau": agent.cfg.tau,
            "actor_lr": agent.cfg.actor_lr,
            "critic_lr": agent.cfg.critic_lr,
            "noise_decay": agent.cfg.noise_decay,
        },
        "noise_variance": agent.noise.variance,
        "train_steps": agent.train_steps,
        "adam_t_actor": agent._actor_opt.t if agent._actor_opt is not None else None,
        "adam_t_critic": agent._critic_opt.t if agent._critic_opt is not None else None,
        "rng_state": agent.rng.bit_generator.state,
        "obs_norm": None if obs_norm is None else {
            "centers": list(obs_norm.centers), "half_ranges": list(obs_norm.half_ranges)},
        "includes_buffer": include_buffer,
        "arrays": manifest,
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for k in arrays:
            f.write(np.ascontiguousarray(arrays[k], dtype=np.float64).tobytes())


def load_checkpoint(path: str | Path, cfg: AgentConfig | None = None,
                    seed: int = 0) -> tuple[DDPGAgent, dict]:
    """Rebuild an agent from a checkpoint; returns (agent, header).

    A provided AgentConfig must be architecture-compatible (shape mismatch is
    an error); hyperparameters not stored in the file come from it.
    """
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 12 or raw[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint (bad magic)")
    off = len(MAGIC)
    (version,) = struct.unpack_from("<I", raw, off)
    off += 4
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
    (hlen,) = struct.unpack_from("<Q", raw, off)
    off += 8
    if off + hlen > len(raw):
        raise CheckpointError(f"{path} is truncated (header)")
    try:
        header = json.loads(raw[off:off + hlen].decode())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path} has a corrupt header") from exc
    off += hlen

    stored = header["agent_config"]
    if cfg is None:
        cfg = AgentConfig()
    cfg = AgentConfig(**{**cfg.__dict__,
                         "actor_hidden": stored["actor_hidden"],
                         "critic_obs_hidden": tuple(stored["critic_obs_hidden"]),
                         "critic_action_hidden": stored["critic_action_hidden"],
                         "optimizer": stored["optimizer"]})
    agent = DDPGAgent(cfg, obs_dim=header["obs_dim"], seed=seed)

    arrays = {}
    for spec in header["arrays"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if off + nbytes > len(raw):
            raise CheckpointError(f"{path} is truncated (array {spec['name']})")
        arrays[spec["name"]] = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(shape).copy()
        off += nbytes

    for name, net in zip(_NET_NAMES, (agent.actor, agent.critic,
                                      agent.target_actor, agent.target_critic)):
        for i, p in enumerate(net.parameters()):
            key = f"{name}.{i}"
            if key not in arrays:
                raise CheckpointError(f"checkpoint missing array '{key}'")
            if arrays[key].shape != p.shape:
                raise CheckpointError(
                    f"shape mismatch for '{key}': file {arrays[key].shape} vs model {p.shape}")
            p[...] = arrays[key]
    if agent._actor_opt is not None and "adam_actor.m0" in arrays:
        for i in range(len(agent._actor_opt.m)):
            agent._actor_opt.m[i][...] = arrays[f"adam_actor.m{i}"]
            agent._actor_opt.v[i][...] = arrays[f"adam_actor.v{i}"]
        for i in range(len(agent._critic_opt.m)):
            agent._critic_opt.m[i][...] = arrays[f"adam_critic.m{i}"]
            agent._critic_opt.v[i][...] = arrays[f"adam_critic.v{i}"]
        if header.get("adam_t_actor") is not None:
            agent._actor_opt.t = header["adam_t_actor"]
        if header.get("adam_t_critic") is not None:
            agent._critic_opt.t = header["adam_t_critic"]
    if header.get("includes_buffer"):
        buf = {k.split(".", 1)[1]: v for k, v in arrays.items() if k.startswith("buffer.")}
        agent.buffer.restore(buf)
    agent.noise.variance = header["noise_variance"]
    agent.train_steps = header["train_steps"]
    agent.rng.bit_generator.state = header["rng_state"]
    return agent, header
