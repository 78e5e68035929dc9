"""Training driver: episode loop, metrics, stopping rule, checkpointing."""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aero import build_aero_model
from .config import Config
from .ddpg import DDPGAgent, save_checkpoint
from .envs import ProtectionEnv
from .errors import TrainingDivergedError


@dataclass
class TrainResult:
    checkpoint_path: Path
    metrics_path: Path
    episodes: int
    stop_reason: str
    final_avg_reward: float


METRICS_FIELDS = ["episode", "steps", "reward", "avg_reward", "mean_q", "critic_loss",
                  "actor_q", "noise_variance", "q_cmd_degs", "done_reason",
                  "nz_viol_s", "alpha_viol_s", "q_viol_s"]


def train(cfg: Config, out_dir: str | Path, seed: int = 0, max_episodes: int | None = None,
          update_every: int = 1, progress=None) -> TrainResult:
    """Run seeded DDPG training; returns paths to the checkpoint and metrics.

    The env, agent, and command draws derive from `seed`, so two runs with
    the same seed and config produce identical outputs.  On divergence the
    last good checkpoint is kept and the run aborts with a record.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    aero = build_aero_model(cfg.aero, cfg.geometry)
    env = ProtectionEnv(cfg, aero_model=aero, mode="rl", seed=seed)
    agent = DDPGAgent(cfg.agent, obs_dim=7, seed=seed + 1)
    cap = cfg.training.max_episodes if max_episodes is None else max_episodes
    window: deque[float] = deque(maxlen=cfg.training.window)
    metrics_path = out / "metrics.csv"
    ckpt_path = out / "agent.ckpt"
    last_good: Path | None = None
    stop_reason = "max_episodes"
    avg = float("nan")
    episode = 0

    with open(metrics_path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=METRICS_FIELDS)
        writer.writeheader()
        try:
            for episode in range(1, cap + 1):
                obs = env.reset()
                q_cmd = env.profile(0.0)[1]
                total = 0.0
                steps = 0
                q_means, losses, actor_qs = [], [], []
                done = False
                while not done:
                    action = agent.select_action(obs, explore=True)
                    obs2, reward, done, info = env.step(action)
                    agent.buffer.add(obs, action, reward,
                                     obs2, done and info.terminal_for_bootstrap())
                    obs = obs2
                    total += reward
                    steps += 1
                    if steps % update_every == 0:
                        stats = agent.update()
                        if stats is not None:
                            q_means.append(stats["mean_q"])
                            losses.append(stats["critic_loss"])
                            actor_qs.append(stats["actor_q"])
                window.append(total)
                avg = float(np.mean(window))
                s = env.tracker.summary()
                writer.writerow({
                    "episode": episode, "steps": steps, "reward": repr(total),
                    "avg_reward": repr(avg),
                    "mean_q": repr(float(np.mean(q_means))) if q_means else "",
                    "critic_loss": repr(float(np.mean(losses))) if losses else "",
                    "actor_q": repr(float(np.mean(actor_qs))) if actor_qs else "",
                    "noise_variance": repr(agent.noise.variance),
                    "q_cmd_degs": repr(q_cmd),
                    "done_reason": info.done_reason,
                    "nz_viol_s": repr(s["nz_viol_s"]),
                    "alpha_viol_s": repr(s["alpha_viol_s"]),
                    "q_viol_s": repr(s["q_viol_s"]),
                })
                if progress is not None:
                    progress(episode, total, avg)
                if episode % cfg.training.checkpoint_every == 0:
                    save_checkpoint(agent, ckpt_path, obs_norm=cfg.obs_norm,
                                    extra={"episode": episode, "avg_reward": avg})
                    last_good = ckpt_path
                stop = cfg.training.stop_avg_reward
                if (stop is not None and len(window) == cfg.training.window and avg >= stop):
                    stop_reason = "stop_avg_reward"
                    break
        except TrainingDivergedError as exc:
            stop_reason = f"diverged: {exc}"
            if last_good is None:
                raise
            return TrainResult(last_good, metrics_path, episode, stop_reason, avg)

    save_checkpoint(agent, ckpt_path, obs_norm=cfg.obs_norm,
                    extra={"episode": episode, "avg_reward": avg})
    return TrainResult(ckpt_path, metrics_path, episode, stop_reason, avg)
