"""Shaped reward terms and envelope-violation bookkeeping.

The per-step reward is r_s + W_t r_t + W_a r_a + W_n r_n + W_q r_q + r_p.
The tracking term is a nonnegative cost; the three exceedance terms are
nonpositive, zero at their activation thresholds, and quadratic beyond.
The penalty term fires on sustained dual exceedance (-400) or a 50% excess
of any single limit (-600, dominant), both of which terminate the episode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import LimitsConfig, RewardConfig, ViolationConfig

DEG = math.pi / 180.0


def r_tracking(q_rads: float, q_cmd_rads: float, epsilon: float = 1e-6) -> float:
    """Nonnegative tracking cost ((|q| - |q_cmd|) / (|q_cmd| + eps))^2."""
    ratio = (abs(q_rads) - abs(q_cmd_rads)) / (abs(q_cmd_rads) + epsilon)
    return ratio * ratio


def r_alpha(alpha: float, alpha_max: float) -> float:
    """Angle-of-attack exceedance cost; active from 0.9 of the limit.

    Arguments may be in any consistent angular unit.
    """
    threshold = 0.9 * abs(alpha_max)
    if abs(alpha) < threshold:
        return 0.0
    ratio = (abs(alpha) - threshold) / threshold
    return -ratio * ratio


def r_nz(nz: float, nz_max: float) -> float:
    """Load-factor exceedance cost; active at the limit."""
    limit = abs(nz_max)
    if abs(nz) < limit:
        return 0.0
    ratio = (abs(nz) - limit) / limit
    return -ratio * ratio


def r_q(q: float, q_max: float) -> float:
    """Pitch-rate exceedance cost; active at the limit (consistent units)."""
    limit = abs(q_max)
    if abs(q) < limit:
        return 0.0
    ratio = (abs(q) - limit) / limit
    return -ratio * ratio


@dataclass
class VariableViolation:
    """Continuous-exceedance timer and worst excess for one envelope variable.

    The timer starts only beyond a small deadband (numerical chatter while
    riding a limit is not a violation); excess fractions are measured from
    the raw bounds so the 50%-excess condition is unaffected.
    """

    lower: float
    upper: float
    deadband: float = 0.0
    timer: float = 0.0          # s of continuous exceedance up to now
    max_timer: float = 0.0      # worst continuous exceedance this episode
    max_fraction: float = 0.0   # worst excess relative to the violated bound
    out: bool = False

    cumulative: float = 0.0     # total time beyond the limit this episode

    def update(self, value: float, dt: float) -> None:
        if value > self.upper + self.deadband:
            frac = (value - self.upper) / abs(self.upper) if self.upper != 0.0 else math.inf
        elif value < self.lower - self.deadband:
            frac = (self.lower - value) / abs(self.lower) if self.lower != 0.0 else math.inf
        else:
            frac = None
        if frac is None:
            self.timer = 0.0
            self.out = False
        else:
            self.timer += dt
            self.cumulative += dt
            self.out = True
            self.max_timer = max(self.max_timer, self.timer)
            self.max_fraction = max(self.max_fraction, frac)


@dataclass
class ViolationTracker:
    """Per-variable timers for alpha, n_z, q plus the two penalty conditions."""

    limits: LimitsConfig
    rules: ViolationConfig
    alpha: VariableViolation = field(init=False)
    nz: VariableViolation = field(init=False)
    q: VariableViolation = field(init=False)

    def __post_init__(self):
        lim = self.limits
        self.alpha = VariableViolation(lim.alpha_min_effective_deg, lim.alpha_max_deg,
                                       self.rules.deadband_alpha_deg)
        self.nz = VariableViolation(lim.nz_min_effective, lim.nz_max, self.rules.deadband_nz)
        self.q = VariableViolation(lim.q_min_degs, lim.q_max_degs, self.rules.deadband_q_degs)

    def update(self, alpha_deg: float, nz: float, q_degs: float, dt: float) -> None:
        self.alpha.update(alpha_deg, dt)
        self.nz.update(nz, dt)
        self.q.update(q_degs, dt)

    def penalty_and_done(self) -> tuple[float, bool, str]:
        """Penalty reward and termination per the two envelope conditions.

        cond2 (any variable beyond its limit by the excess factor) dominates
        cond1 (two variables simultaneously beyond their limits for the
        sustained window).
        """
        excess = self.rules.excess_factor - 1.0
        if max(self.alpha.max_fraction, self.nz.max_fraction, self.q.max_fraction) >= excess:
            return self.rules.excess_penalty, True, "cond2"
        sustained = sum(
            1 for v in (self.alpha, self.nz, self.q) if v.timer >= self.rules.sustained_seconds
        )
        if sustained >= 2:
            return self.rules.dual_penalty, True, "cond1"
        return 0.0, False, ""

    def failed_sustained(self) -> bool:
        """Failure metric for assessments: any limit exceeded for at least
        the sustained window in total over the episode."""
        return any(
            v.cumulative >= self.rules.sustained_seconds for v in (self.alpha, self.nz, self.q)
        )

    def summary(self) -> dict:
        return {
            "alpha_viol_s": self.alpha.cumulative,
            "nz_viol_s": self.nz.cumulative,
            "q_viol_s": self.q.cumulative,
            "alpha_max_cont_s": self.alpha.max_timer,
            "nz_max_cont_s": self.nz.max_timer,
            "q_max_cont_s": self.q.max_timer,
            "alpha_max_frac": self.alpha.max_fraction,
            "nz_max_frac": self.nz.max_fraction,
            "q_max_frac": self.q.max_fraction,
        }


def two_sided_cost(value: float, lower: float, upper: float, activation: float = 1.0) -> float:
    """Quadratic exceedance cost against asymmetric bounds.

    Zero inside the activation thresholds (activation * bound per side),
    negative and quadratic beyond; reduces exactly to the |value|-based
    single-limit form when the bounds are symmetric.
    """
    up = activation * upper
    lo = activation * lower
    if up > 0.0 and value >= up:
        ratio = (value - up) / up
    elif lo < 0.0 and value <= lo:
        ratio = (lo - value) / -lo
    else:
        return 0.0
    return -ratio * ratio


def reward_total(q_rads: float, q_cmd_rads: float, alpha_deg: float, nz: float,
                 limits: LimitsConfig, weights: RewardConfig, r_p: float = 0.0) -> tuple[float, dict]:
    """Assemble the step reward and its per-term breakdown."""
    rt = r_tracking(q_rads, q_cmd_rads, weights.epsilon)
    if weights.tracking_clip is not None:
        rt = min(rt, weights.tracking_clip)
    ra = two_sided_cost(alpha_deg, limits.alpha_min_effective_deg, limits.alpha_max_deg, 0.9)
    rn = two_sided_cost(nz, limits.nz_min_effective, limits.nz_max)
    rq = two_sided_cost(q_rads, limits.q_min_degs * DEG, limits.q_max_degs * DEG)
    total = (weights.r_s + weights.w_t * rt + weights.w_a * ra
             + weights.w_n * rn + weights.w_q * rq + r_p)
    terms = {"r_s": weights.r_s, "r_t": rt, "r_a": ra, "r_n": rn, "r_q": rq, "r_p": r_p}
    return total, terms
