"""The protection MDP: observation building, action mapping, reward, termination.

One environment instance owns a plant, a rate controller, and the violation
tracker for the current episode.  Modes select the pitch-command path:

  none       pilot command passes straight to the rate loop
  classical  pilot command is faded/restored by the classical protection
  rl         pilot command plus the agent's restorative rate, clamped

The restorative action is a pitch rate in [-20, +30] deg/s, reached from the
normalized action in [-1, 1] by an affine map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aero import build_aero_model
from .config import Config
from .errors import FepError, KinematicsSingularityError, SimulationIntegrityError
from .indi import RateController
from .protection import effective_alpha_limit, nz_equivalent_alpha, protect_pitch_command
from .rewards import ViolationTracker, reward_total
from .simulation import Plant
from .trim import TrimResult, trim_level_flight
from .aero import cz_alpha as fd_cz_alpha

DEG = math.pi / 180.0

# Restorative pitch-rate action range, deg/s.
Q_REST_MIN = -20.0
Q_REST_MAX = 30.0

MODES = ("none", "classical", "rl")


def map_action(a_normalized: float) -> float:
    """Affine map [-1, 1] -> [Q_REST_MIN, Q_REST_MAX] deg/s, clamping the input."""
    a = min(1.0, max(-1.0, float(a_normalized)))
    return Q_REST_MIN + (a + 1.0) * 0.5 * (Q_REST_MAX - Q_REST_MIN)


class CommandProfile:
    """Pilot command profile (p, q, r) in deg/s over the episode.

    Each channel is a constant or a [[t, value], ...] breakpoint table,
    linear between breakpoints and held outside them.
    """

    def __init__(self, p=0.0, q=0.0, r=0.0):
        self._channels = tuple(self._compile(c) for c in (p, q, r))
        self.spec = {"p": p, "q": q, "r": r}

    @staticmethod
    def _compile(channel):
        if isinstance(channel, (int, float)):
            v = float(channel)
            return None, v
        pts = sorted((float(t), float(v)) for t, v in channel)
        if not pts:
            raise FepError("empty command profile channel")
        ts = np.array([p[0] for p in pts])
        vs = np.array([p[1] for p in pts])
        return (ts, vs), vs[0]

    def __call__(self, t: float) -> tuple[float, float, float]:
        out = []
        for table, const in self._channels:
            if table is None:
                out.append(const)
            else:
                out.append(float(np.interp(t, table[0], table[1])))
        return tuple(out)

    @classmethod
    def from_spec(cls, spec: dict) -> "CommandProfile":
        return cls(p=spec.get("p", 0.0), q=spec.get("q", 0.0), r=spec.get("r", 0.0))


@dataclass
class StepInfo:
    t: float
    alpha_deg: float
    nz: float
    p_degs: float
    q_degs: float
    r_degs: float
    phi_deg: float
    theta_deg: float
    deflections_deg: np.ndarray
    q_pilot_degs: float
    q_total_degs: float
    q_rest_degs: float
    terms: dict
    reward: float
    alpha_over: bool
    nz_over: bool
    q_over: bool
    done_reason: str
    aero_clamped: bool
    airspeed: float
    qbar: float

    def terminal_for_bootstrap(self) -> bool:
        """True when the successor value must not be bootstrapped."""
        return self.done_reason not in ("", "time")


class ProtectionEnv:
    """Sequential per-episode MDP; share the aero model, not the instance."""

    def __init__(self, cfg: Config, aero_model=None, mode: str = "rl", seed: int = 0):
        if mode not in MODES:
            raise FepError(f"unknown mode '{mode}' (expected one of {MODES})")
        self.cfg = cfg
        self.mode = mode
        self.plant = Plant(cfg, aero_model if aero_model is not None else build_aero_model(cfg.aero, cfg.geometry))
        self.controller = RateController(cfg, self.plant)
        self.rng = np.random.default_rng(seed)
        self._trim: TrimResult | None = None
        self._active = False
        self.profile = CommandProfile()

    def seed(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)

    @property
    def trim(self) -> TrimResult:
        if self._trim is None:
            self._trim = trim_level_flight(self.plant)
        return self._trim

    def reset(self, profile: CommandProfile | None = None, q_cmd_degs: float | None = None) -> np.ndarray:
        """Start an episode from trim; draws a random constant pitch command
        for training when no profile is given."""
        trim = self.trim
        if profile is not None:
            self.profile = profile
        else:
            if q_cmd_degs is None:
                lo, hi = self.cfg.training.q_cmd_range_degs
                q_cmd_degs = float(self.rng.uniform(lo, hi))
            self.profile = CommandProfile(q=q_cmd_degs)
        self.state = trim.state
        self.actuators = trim.actuators
        self.thrust_n = trim.thrust_n
        self.t = 0.0
        self.controller.reset()
        self.tracker = ViolationTracker(self.cfg.limits, self.cfg.violations)
        self._outputs = self.plant.outputs(self.state, self.actuators.positions)
        self._active = True
        self.last_info: StepInfo | None = None
        return self._observation()

    def _observation(self) -> np.ndarray:
        out = self._outputs
        st = self.state
        _, q_pilot, _ = self.profile(self.t)
        e_q = q_pilot * DEG - float(st.omega[1])
        raw = np.array([
            out.nz,
            st.alpha,
            float(st.euler[0]),
            float(st.omega[0]),
            float(st.omega[1]),
            e_q,
            out.qbar,
        ])
        n = self.cfg.obs_norm
        return (raw - np.asarray(n.centers)) / np.asarray(n.half_ranges)

    def step(self, action_normalized: float):
        """RL-mode step: normalized action -> restorative rate -> plant."""
        return self.step_qrest(map_action(action_normalized))

    def step_qrest(self, q_rest_degs: float):
        """Advance one agent period with an explicit restorative rate (deg/s)."""
        if not self._active:
            raise FepError("episode is over; call reset()")
        cfg = self.cfg
        lim = cfg.limits
        t0 = self.t
        p_cmd, q_pilot, r_cmd = self.profile(t0)

        if self.mode == "none":
            q_total = q_pilot
            q_rest_degs = 0.0
        elif self.mode == "classical":
            q_total = self._classical_command(q_pilot)
            q_rest_degs = q_total - q_pilot
        else:
            q_total = min(lim.q_max_degs, max(lim.q_min_degs, q_pilot + q_rest_degs))

        rate_cmd = np.array([p_cmd * DEG, q_total * DEG, r_cmd * DEG])
        done_reason = ""
        r_p_error = 0.0
        try:
            cmds = self.controller.command(self.state, self.actuators, rate_cmd,
                                           self.thrust_n, cfg.timing.agent_dt, self._outputs.qbar)
            dt = cfg.timing.physics_dt
            for i in range(cfg.timing.substeps):
                self.state, self.actuators = self.plant.substep(
                    self.state, self.actuators, cmds, self.thrust_n, dt, t0 + i * dt)
        except KinematicsSingularityError:
            done_reason = "singularity"
        except SimulationIntegrityError:
            done_reason = "integrity"
            r_p_error = cfg.violations.excess_penalty

        self.t = t0 + cfg.timing.agent_dt
        self._outputs = self.plant.outputs(self.state, self.actuators.positions)
        out = self._outputs
        st = self.state
        alpha_deg = st.alpha / DEG
        q_rads = float(st.omega[1])

        self.tracker.update(alpha_deg, out.nz, q_rads / DEG, cfg.timing.agent_dt)
        r_p, pen_done, cond = self.tracker.penalty_and_done()
        if done_reason == "":
            done_reason = cond
        r_p += r_p_error

        reward, terms = reward_total(q_rads, q_pilot * DEG, alpha_deg, out.nz,
                                     lim, cfg.rewards, r_p)
        time_up = self.t >= cfg.timing.duration - 1e-9
        done = pen_done or bool(done_reason) or time_up
        if done and not done_reason:
            done_reason = "time"
        if done:
            self._active = False

        info = StepInfo(
            t=self.t,
            alpha_deg=alpha_deg,
            nz=out.nz,
            p_degs=float(st.omega[0]) / DEG,
            q_degs=q_rads / DEG,
            r_degs=float(st.omega[2]) / DEG,
            phi_deg=float(st.euler[0]) / DEG,
            theta_deg=float(st.euler[1]) / DEG,
            deflections_deg=self.actuators.positions.copy(),
            q_pilot_degs=q_pilot,
            q_total_degs=q_total,
            q_rest_degs=q_rest_degs,
            terms=terms,
            reward=reward,
            alpha_over=self.tracker.alpha.out,
            nz_over=self.tracker.nz.out,
            q_over=self.tracker.q.out,
            done_reason=done_reason,
            aero_clamped=out.clamped,
            airspeed=out.airspeed,
            qbar=out.qbar,
        )
        self.last_info = info
        return self._observation(), reward, done, info

    def _classical_command(self, q_pilot_degs: float) -> float:
        """Classical protection path: load-factor-equivalent limit, fade, restore."""
        cfg = self.cfg
        out = self._outputs
        cza, _ = fd_cz_alpha(self.plant.aero, self.state.alpha, self.state.beta,
                             self.state.omega, self.actuators.positions, out.airspeed,
                             cfg.aero.cz_alpha_step_deg)
        weight = self.plant.mass_props.weight
        s = cfg.geometry.wing_area
        alpha_nz = nz_equivalent_alpha(weight, cfg.limits.nz_max, out.qbar, s, cza, cfg.limits)
        pos_limit = effective_alpha_limit(cfg.limits, alpha_nz)
        return protect_pitch_command(q_pilot_degs, self.state.alpha / DEG, pos_limit,
                                     cfg.limits, negative_limit_deg=cfg.limits.alpha_min_effective_deg)
