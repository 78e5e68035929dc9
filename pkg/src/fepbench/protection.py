"""Classical angle-of-attack / load-factor protection.

The load-factor bound is translated into an equivalent angle-of-attack bound,
merged with the static bound, and the pilot pitch-rate command is faded to
zero as alpha approaches the active limit; beyond the limit a restorative
pitch rate proportional to the exceedance takes over.  Negative alpha is
protected by the mirrored law against the configured negative limit.
All quantities at this interface are degrees and deg/s.
"""

from __future__ import annotations

import math

from .config import LimitsConfig

RAD2DEG = 180.0 / math.pi


def nz_equivalent_alpha(weight_n: float, nz_max: float, qbar: float, wing_area: float,
                        cz_alpha_per_rad: float, limits: LimitsConfig) -> float:
    """Angle of attack (deg) at which the load-factor limit is reached.

    W n_z_max / (qbar S |Cz_alpha|), converted to degrees.  |Cz_alpha| makes
    the bound positive with the body-axis sign convention (Cz_alpha < 0).
    Below the dynamic-pressure floor the static alpha limit governs instead.
    """
    if qbar < limits.qbar_floor:
        return limits.alpha_max_deg
    if cz_alpha_per_rad == 0.0:
        return limits.alpha_max_deg
    alpha_rad = weight_n * nz_max / (qbar * wing_area * abs(cz_alpha_per_rad))
    return alpha_rad * RAD2DEG


def effective_alpha_limit(limits: LimitsConfig, alpha_nz_deg: float) -> float:
    """Active positive bound: the tighter of the static and load-factor limits."""
    return min(limits.alpha_max_deg, alpha_nz_deg)


def _fade_factor(gap_deg: float, limit_mag_deg: float, fade_start: float) -> float:
    """1 far from the limit, 0 at it, linear in between."""
    zone = (1.0 - fade_start) * limit_mag_deg
    if zone <= 0.0:
        return 0.0 if gap_deg <= 0.0 else 1.0
    return min(1.0, max(0.0, gap_deg / zone))


def protect_pitch_command(q_pilot_degs: float, alpha_deg: float, effective_limit_deg: float,
                          limits: LimitsConfig, negative_limit_deg: float | None = None) -> float:
    """Faded/restorative pitch-rate command, clamped to [q_min, q_max].

    Nose-up commands fade to zero approaching the positive limit and a
    restorative nose-down rate k_rest per degree of exceedance is added
    beyond it; nose-down commands mirror against the negative limit.
    Commands away from the nearby limit pass unfaded.  The load-factor
    translation feeds only the positive limit; the negative side uses the
    static alpha floor.
    """
    if negative_limit_deg is None:
        negative_limit_deg = limits.alpha_min_effective_deg
    q = q_pilot_degs

    if q > 0.0:
        k = _fade_factor(effective_limit_deg - alpha_deg, abs(effective_limit_deg), limits.fade_start)
        q = q * k
    elif q < 0.0:
        k = _fade_factor(alpha_deg - negative_limit_deg, abs(negative_limit_deg), limits.fade_start)
        q = q * k

    if alpha_deg > effective_limit_deg:
        q += -limits.k_rest * (alpha_deg - effective_limit_deg)
    elif alpha_deg < negative_limit_deg:
        q += limits.k_rest * (negative_limit_deg - alpha_deg)

    return min(limits.q_max_degs, max(limits.q_min_degs, q))
