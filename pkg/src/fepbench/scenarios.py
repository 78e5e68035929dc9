"""Scenario execution: scripted pilot commands through a chosen protection mode.

A scenario is a named command profile plus a mode (none, classical, rl).
Runs produce an episode log (one row per agent step) and a summary with the
pass/fail verdict under the sustained-exceedance failure metric.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aero import build_aero_model
from .config import Config
from .ddpg import load_checkpoint
from .envs import CommandProfile, ProtectionEnv, StepInfo
from .errors import FepError

EPISODE_FIELDS = [
    "t", "alpha_deg", "nz", "p_degs", "q_degs", "r_degs", "phi_deg", "theta_deg",
    "aileron_deg", "htail_deg", "rudder_deg", "q_cmd_degs", "q_total_degs", "q_rest_degs",
    "r_s", "r_t", "r_a", "r_n", "r_q", "r_p", "reward",
    "alpha_over", "nz_over", "q_over", "aero_clamped", "done_reason",
]


@dataclass
class Scenario:
    name: str
    profile: CommandProfile
    mode: str = "classical"

    @classmethod
    def from_config(cls, cfg: Config, name: str, mode: str) -> "Scenario":
        if name not in cfg.scenarios:
            raise FepError(f"unknown scenario '{name}' (configured: {sorted(cfg.scenarios)})")
        return cls(name, CommandProfile.from_spec(cfg.scenarios[name]), mode)


@dataclass
class EpisodeResult:
    scenario: str
    mode: str
    rows: list[StepInfo]
    violations: dict
    failed: bool
    done_reason: str
    tracking_rms_degs: float
    extras: dict = field(default_factory=dict)

    def summary_lines(self) -> list[str]:
        v = self.violations
        rows = self.rows
        return [
            f"scenario={self.scenario} mode={self.mode} "
            f"duration={rows[-1].t:.2f}s end={self.done_reason}",
            f"  max alpha {max(x.alpha_deg for x in rows):+.2f} deg, "
            f"min alpha {min(x.alpha_deg for x in rows):+.2f} deg",
            f"  max nz {max(x.nz for x in rows):+.2f} g, min nz {min(x.nz for x in rows):+.2f} g, "
            f"max |q| {max(abs(x.q_degs) for x in rows):.2f} deg/s",
            f"  exceedance seconds: alpha {v['alpha_viol_s']:.2f}, nz {v['nz_viol_s']:.2f}, "
            f"q {v['q_viol_s']:.2f}",
            f"  tracking rms {self.tracking_rms_degs:.2f} deg/s",
            f"  verdict: {'FAIL' if self.failed else 'PASS'}",
        ]


def run_scenario(cfg: Config, scenario: Scenario, checkpoint: str | Path | None = None,
                 seed: int = 0, aero_model=None, agent=None) -> EpisodeResult:
    """Fly one scenario episode closed loop and collect the log."""
    if scenario.mode == "rl" and agent is None:
        if checkpoint is None:
            raise FepError("rl mode requires a checkpoint")
        agent, _ = load_checkpoint(checkpoint, cfg.agent)
    if aero_model is None:
        aero_model = build_aero_model(cfg.aero, cfg.geometry)
    env = ProtectionEnv(cfg, aero_model=aero_model, mode=scenario.mode, seed=seed)
    obs = env.reset(profile=scenario.profile)
    rows: list[StepInfo] = []
    done = False
    err2 = 0.0
    while not done:
        if scenario.mode == "rl":
            action = agent.select_action(obs, explore=False)
            obs, _, done, info = env.step(action)
        else:
            obs, _, done, info = env.step_qrest(0.0)
        rows.append(info)
        e = info.q_degs - info.q_pilot_degs
        err2 += e * e
    tracker = env.tracker
    return EpisodeResult(
        scenario=scenario.name,
        mode=scenario.mode,
        rows=rows,
        violations=tracker.summary(),
        failed=tracker.failed_sustained(),
        done_reason=rows[-1].done_reason,
        tracking_rms_degs=math.sqrt(err2 / len(rows)),
        extras={"aero_source": aero_model.source},
    )


def write_episode_csv(result: EpisodeResult, path: str | Path) -> None:
    """One row per agent step; floats via repr for bit-stable reproduction."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(EPISODE_FIELDS)
        for x in result.rows:
            w.writerow([
                repr(x.t), repr(x.alpha_deg), repr(x.nz), repr(x.p_degs), repr(x.q_degs),
                repr(x.r_degs), repr(x.phi_deg), repr(x.theta_deg),
                repr(float(x.deflections_deg[0])), repr(float(x.deflections_deg[1])),
                repr(float(x.deflections_deg[2])),
                repr(x.q_pilot_degs), repr(x.q_total_degs), repr(x.q_rest_degs),
                repr(x.terms["r_s"]), repr(x.terms["r_t"]), repr(x.terms["r_a"]),
                repr(x.terms["r_n"]), repr(x.terms["r_q"]), repr(x.terms["r_p"]),
                repr(x.reward),
                int(x.alpha_over), int(x.nz_over), int(x.q_over), int(x.aero_clamped),
                x.done_reason,
            ])


def read_episode_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != EPISODE_FIELDS:
            raise FepError(f"{path} is not an episode log (unexpected header)")
        out = []
        for i, row in enumerate(reader, start=2):
            try:
                out.append({k: (row[k] if k == "done_reason" else float(row[k]))
                            for k in EPISODE_FIELDS})
            except ValueError as exc:
                raise FepError(f"{path}:{i}: malformed value ({exc})") from exc
    if not out:
        raise FepError(f"{path} contains no data rows")
    return out
