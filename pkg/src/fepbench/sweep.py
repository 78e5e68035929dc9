"""Monte Carlo assessment sweeps over constant pitch-rate commands.

The default spec covers -10 to +25 deg/s in 0.5 deg/s increments (71 runs),
optionally with a constant roll-rate command for the coupled assessment.
Runs are independent and can fan out over processes; results are written
sorted by command so the output is identical regardless of worker count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aero import build_aero_model
from .config import Config, SweepConfig
from .ddpg import load_checkpoint
from .envs import CommandProfile
from .errors import FepError
from .scenarios import Scenario, run_scenario, write_episode_csv

RESULT_FIELDS = [
    "q_cmd_degs", "p_cmd_degs", "seed", "passed", "done_reason",
    "alpha_min_deg", "alpha_max_deg", "nz_min", "nz_max", "q_min_degs", "q_max_degs",
    "alpha_viol_s", "nz_viol_s", "q_viol_s", "max_frac", "tracking_rms_degs", "total_reward",
]


def sweep_commands(spec: SweepConfig) -> list[float]:
    n = int(round((spec.q_stop_degs - spec.q_start_degs) / spec.q_step_degs)) + 1
    if n <= 0:
        raise FepError("sweep command range is empty")
    return [spec.q_start_degs + i * spec.q_step_degs for i in range(n)]


@dataclass
class SweepRun:
    q_cmd_degs: float
    p_cmd_degs: float
    seed: int
    passed: bool
    done_reason: str
    stats: dict


def _run_one(args):
    cfg, q_cmd, p_cmd, mode, checkpoint, seed, episode_dir = args
    profile = CommandProfile(p=p_cmd, q=q_cmd)
    scenario = Scenario(f"sweep_q{q_cmd:+.1f}", profile, mode)
    aero = build_aero_model(cfg.aero, cfg.geometry)
    result = run_scenario(cfg, scenario, checkpoint=checkpoint, seed=seed, aero_model=aero)
    rows = result.rows
    total_reward = sum(x.reward for x in rows)
    v = result.violations
    stats = {
        "alpha_min_deg": min(x.alpha_deg for x in rows),
        "alpha_max_deg": max(x.alpha_deg for x in rows),
        "nz_min": min(x.nz for x in rows),
        "nz_max": max(x.nz for x in rows),
        "q_min_degs": min(x.q_degs for x in rows),
        "q_max_degs": max(x.q_degs for x in rows),
        "alpha_viol_s": v["alpha_viol_s"],
        "nz_viol_s": v["nz_viol_s"],
        "q_viol_s": v["q_viol_s"],
        "max_frac": max(v["alpha_max_frac"], v["nz_max_frac"], v["q_max_frac"]),
        "tracking_rms_degs": result.tracking_rms_degs,
        "total_reward": total_reward,
    }
    if episode_dir is not None:
        write_episode_csv(result, Path(episode_dir) / f"q{q_cmd:+06.1f}.csv")
    return SweepRun(q_cmd, p_cmd, seed, not result.failed, result.done_reason, stats)


def run_sweep(cfg: Config, mode: str, checkpoint: str | Path | None = None,
              seed: int = 0, jobs: int = 1, save_episodes: str | Path | None = None,
              p_cmd_degs: float | None = None) -> list[SweepRun]:
    """Execute all sweep runs; per-run failures are recorded, never fatal."""
    if mode == "rl" and checkpoint is None:
        raise FepError("rl mode requires a checkpoint")
    spec = cfg.sweep
    p_cmd = spec.p_cmd_degs if p_cmd_degs is None else float(p_cmd_degs)
    if save_episodes is not None:
        Path(save_episodes).mkdir(parents=True, exist_ok=True)
    commands = sweep_commands(spec)
    tasks = [(cfg, q, p_cmd, mode, checkpoint, seed + i, save_episodes)
             for i, q in enumerate(commands)]
    if jobs > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(jobs) as pool:
            runs = pool.map(_run_one, tasks)
    else:
        runs = [_run_one(t) for t in tasks]
    runs.sort(key=lambda r: r.q_cmd_degs)
    return runs


def write_sweep_csv(runs: list[SweepRun], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(RESULT_FIELDS)
        for r in runs:
            w.writerow([
                repr(r.q_cmd_degs), repr(r.p_cmd_degs), r.seed, int(r.passed), r.done_reason,
                repr(r.stats["alpha_min_deg"]), repr(r.stats["alpha_max_deg"]),
                repr(r.stats["nz_min"]), repr(r.stats["nz_max"]),
                repr(r.stats["q_min_degs"]), repr(r.stats["q_max_degs"]),
                repr(r.stats["alpha_viol_s"]), repr(r.stats["nz_viol_s"]),
                repr(r.stats["q_viol_s"]), repr(r.stats["max_frac"]),
                repr(r.stats["tracking_rms_degs"]), repr(r.stats["total_reward"]),
            ])


def read_sweep_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != RESULT_FIELDS:
            raise FepError(f"{path} is not a sweep results table (unexpected header)")
        rows = []
        for i, row in enumerate(reader, start=2):
            try:
                parsed = dict(row)
                for k in RESULT_FIELDS:
                    if k not in ("done_reason",):
                        parsed[k] = float(row[k])
                rows.append(parsed)
            except ValueError as exc:
                raise FepError(f"{path}:{i}: malformed value ({exc})") from exc
    if not rows:
        raise FepError(f"{path} contains no data rows")
    return rows


def pass_rate(runs: list[SweepRun]) -> float:
    return sum(1 for r in runs if r.passed) / len(runs)
