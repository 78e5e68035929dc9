"""Run manifests: everything needed to reproduce a CLI run bit-identically.

A manifest embeds the fully resolved configuration, so passing the manifest
file back as --config replays the run.  The config hash, seeds, model
source, and a git describe of the working tree are recorded alongside.
"""

from __future__ import annotations

import hashlib
import subprocess
from datetime import datetime, timezone
from pathlib import Path

import yaml

from .config import Config, config_hash


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.TimeoutExpired):
        pass
    return "unknown"


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(out_dir: str | Path, command: str, cfg: Config, seed: int,
                   extras: dict | None = None, checkpoint: str | Path | None = None) -> Path:
    entry = {
        "fepbench_manifest": 1,
        "command": command,
        "seed": seed,
        "config_hash": config_hash(cfg),
        "git_describe": git_describe(),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "config": cfg.to_dict(),
    }
    if checkpoint is not None:
        entry["checkpoint"] = str(checkpoint)
        entry["checkpoint_sha256"] = file_sha256(checkpoint)
    if extras:
        entry.update(extras)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.yaml"
    path.write_text(yaml.safe_dump(entry, sort_keys=True))
    return path


def read_manifest(path: str | Path) -> dict:
    data = yaml.safe_load(Path(path).read_text())
    if not isinstance(data, dict) or "fepbench_manifest" not in data:
        raise ValueError(f"{path} is not a run manifest")
    return data
