"""SVG plots: scenario time series with red limit lines, sweep overlays."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .config import Config
from .errors import FepError
from .scenarios import read_episode_csv
from .sweep import read_sweep_csv

LIMIT_STYLE = {"color": "red", "linestyle": "--", "linewidth": 1.0}


def _limits(cfg: Config):
    lim = cfg.limits
    return {
        "alpha": (lim.alpha_min_effective_deg, lim.alpha_max_deg),
        "nz": (lim.nz_min_effective, lim.nz_max),
        "q": (lim.q_min_degs, lim.q_max_degs),
    }


def plot_episode(csv_path: str | Path, out_dir: str | Path, cfg: Config | None = None) -> list[Path]:
    """Time-series SVGs {alpha, nz, q, surfaces} for one episode log."""
    cfg = cfg or Config()
    rows = read_episode_csv(csv_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t = [r["t"] for r in rows]
    lims = _limits(cfg)
    made = []

    panels = [
        ("alpha", [("alpha_deg", "alpha")], "angle of attack [deg]", lims["alpha"]),
        ("nz", [("nz", "n_z")], "load factor [g]", lims["nz"]),
        ("q", [("q_degs", "q"), ("q_total_degs", "command")], "pitch rate [deg/s]", lims["q"]),
        ("surfaces", [("aileron_deg", "aileron"), ("htail_deg", "horizontal tail"),
                      ("rudder_deg", "rudder")], "deflection [deg]", None),
    ]
    for name, series, ylabel, limit in panels:
        fig, ax = plt.subplots(figsize=(7, 3.2))
        for key, label in series:
            ax.plot(t, [r[key] for r in rows], label=label, linewidth=1.2)
        if limit is not None:
            for y in limit:
                ax.axhline(y, **LIMIT_STYLE)
        ax.set_xlabel("time [s]")
        ax.set_ylabel(ylabel)
        ax.legend(loc="best", fontsize=8)
        ax.grid(alpha=0.3)
        path = out / f"{name}.svg"
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
        made.append(path)
    return made


def plot_sweep(results_csv: str | Path, out_dir: str | Path, cfg: Config | None = None) -> list[Path]:
    """Sweep overview plus trajectory overlays when episode logs are present."""
    cfg = cfg or Config()
    rows = read_sweep_csv(results_csv)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lims = _limits(cfg)
    made = []

    q_cmd = [r["q_cmd_degs"] for r in rows]
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    for ax, (lo_key, hi_key, lim_key, label) in zip(axes, [
            ("alpha_min_deg", "alpha_max_deg", "alpha", "alpha [deg]"),
            ("nz_min", "nz_max", "nz", "n_z [g]"),
            ("q_min_degs", "q_max_degs", "q", "q [deg/s]")]):
        ax.fill_between(q_cmd, [r[lo_key] for r in rows], [r[hi_key] for r in rows],
                        alpha=0.4, label="reached range")
        for y in lims[lim_key]:
            ax.axhline(y, **LIMIT_STYLE)
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    for r in rows:
        if not r["passed"]:
            for ax in axes:
                ax.axvline(r["q_cmd_degs"], color="red", alpha=0.6, linewidth=1.5)
    axes[-1].set_xlabel("commanded pitch rate [deg/s]")
    axes[0].set_title(f"pass rate {sum(r['passed'] for r in rows)}/{len(rows)}")
    path = out / "sweep_summary.svg"
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    made.append(path)

    episodes = sorted(Path(results_csv).parent.glob("episodes/*.csv"))
    if episodes:
        for name, key, lim_key, ylabel in [("sweep_alpha", "alpha_deg", "alpha", "alpha [deg]"),
                                           ("sweep_nz", "nz", "nz", "n_z [g]"),
                                           ("sweep_q", "q_degs", "q", "q [deg/s]")]:
            fig, ax = plt.subplots(figsize=(7, 3.6))
            for ep in episodes:
                erows = read_episode_csv(ep)
                ax.plot([r["t"] for r in erows], [r[key] for r in erows],
                        linewidth=0.6, alpha=0.5)
            for y in lims[lim_key]:
                ax.axhline(y, **LIMIT_STYLE)
            ax.set_xlabel("time [s]")
            ax.set_ylabel(ylabel)
            ax.grid(alpha=0.3)
            path = out / f"{name}.svg"
            fig.tight_layout()
            fig.savefig(path)
            plt.close(fig)
            made.append(path)
    return made


def plot_any(input_csv: str | Path, out_dir: str | Path, cfg: Config | None = None) -> list[Path]:
    """Dispatch on the CSV header: episode log or sweep results."""
    with open(input_csv, newline="") as f:
        header = f.readline().strip()
    if header.startswith("t,"):
        return plot_episode(input_csv, out_dir, cfg)
    if header.startswith("q_cmd_degs,"):
        return plot_sweep(input_csv, out_dir, cfg)
    raise FepError(f"{input_csv}: unrecognized CSV header")
