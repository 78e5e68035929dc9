"""Incremental nonlinear dynamic inversion for the angular-rate loop.

The law computes surface-deflection increments from the gap between the
commanded and measured angular acceleration through the inverse of the
control effectivity, then adds them to the current deflections.  Because
increments are taken from measured positions, saturation does not wind up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import Config
from .errors import ControllerError
from .simulation import Plant

DEG = math.pi / 180.0


@dataclass(frozen=True)
class RateGains:
    kp: float  # 1/s
    kq: float
    kr: float

    def __post_init__(self):
        if min(self.kp, self.kq, self.kr) <= 0.0:
            raise ControllerError("rate gains must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.kp, self.kq, self.kr])


@dataclass(frozen=True)
class ControlEffectivity:
    """Per-radian moment-coefficient derivatives and the assembled g matrix."""

    phi: np.ndarray  # 3x3: d(cl, cm, cn) / d(aileron, htail, rudder), per rad
    g: np.ndarray    # 3x3: angular acceleration per rad of deflection


def effectivity(aero_model, qbar: float, geometry, inverse_inertia: np.ndarray,
                alpha: float, beta: float, rates, deflections_deg, airspeed: float,
                step_deg: float = 0.5) -> ControlEffectivity:
    """Assemble g = J^-1 qbar S diag(b, c, b) Phi at the current condition.

    Phi comes from central finite differences of the moment coefficients
    with respect to each surface deflection.
    """
    if qbar <= 0.0:
        raise ControllerError("effectivity requires positive dynamic pressure")
    phi = np.empty((3, 3))
    base = np.asarray(deflections_deg, dtype=float)
    h_deg = step_deg
    for j in range(3):
        dp = base.copy()
        dm = base.copy()
        dp[j] += h_deg
        dm[j] -= h_deg
        cp = aero_model.coefficients(alpha, beta, rates, dp, airspeed)
        cm_ = aero_model.coefficients(alpha, beta, rates, dm, airspeed)
        scale = 1.0 / (2.0 * h_deg * DEG)
        phi[0, j] = (cp.cl - cm_.cl) * scale
        phi[1, j] = (cp.cm - cm_.cm) * scale
        phi[2, j] = (cp.cn - cm_.cn) * scale
    qs = qbar * geometry.wing_area
    dim = np.array([qs * geometry.span, qs * geometry.chord, qs * geometry.span])
    g = inverse_inertia @ (dim[:, None] * phi)
    if np.linalg.matrix_rank(g) < 3:
        raise ControllerError("control effectivity is rank deficient")
    return ControlEffectivity(phi=phi, g=g)


def virtual_input(rate_cmd: np.ndarray, rate: np.ndarray, gains: RateGains) -> np.ndarray:
    """Commanded angular acceleration K (omega_cmd - omega), rad/s^2."""
    return np.array([
        gains.kp * (float(rate_cmd[0]) - float(rate[0])),
        gains.kq * (float(rate_cmd[1]) - float(rate[1])),
        gains.kr * (float(rate_cmd[2]) - float(rate[2])),
    ])


def indi_law(virtual: np.ndarray, omega_dot_measured: np.ndarray, eff: ControlEffectivity,
             deflections_now_deg: np.ndarray, condition_limit: float = 1e8) -> np.ndarray:
    """Deflection commands, deg: g^-1 (omega_dot_cmd - omega_dot_0) + delta_0."""
    g = eff.g
    cond = float(np.linalg.cond(g))
    if not math.isfinite(cond) or cond > condition_limit:
        raise ControllerError(f"effectivity condition number {cond:.3e} above limit",
                              condition_number=cond)
    increment_rad = np.linalg.solve(g, np.asarray(virtual, float) - np.asarray(omega_dot_measured, float))
    return np.asarray(deflections_now_deg, float) + increment_rad / DEG


class OmegaDotEstimator:
    """Angular-acceleration estimate: backward difference through a low-pass.

    The first sample returns zero; a rate step stays finite (one large
    difference sample, smoothed by the filter).
    """

    def __init__(self, cutoff: float = 50.0):
        self.cutoff = cutoff  # rad/s
        self._last_omega: np.ndarray | None = None
        self._estimate = np.zeros(3)

    def reset(self, omega=None) -> None:
        self._last_omega = None if omega is None else np.asarray(omega, float).copy()
        self._estimate = np.zeros(3)

    def update(self, omega: np.ndarray, dt: float) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        if self._last_omega is None:
            self._last_omega = omega.copy()
            return self._estimate.copy()
        raw = (omega - self._last_omega) / dt
        self._last_omega = omega.copy()
        alpha = 1.0 - math.exp(-self.cutoff * dt)
        self._estimate = self._estimate + alpha * (raw - self._estimate)
        return self._estimate.copy()


class RateController:
    """One INDI loop instance per episode (the derivative filter is stateful)."""

    def __init__(self, cfg: Config, plant: Plant):
        self.cfg = cfg
        self.plant = plant
        self.gains = RateGains(cfg.controller.kp, cfg.controller.kq, cfg.controller.kr)
        self.estimator = OmegaDotEstimator(cfg.controller.omega_dot_cutoff)

    def reset(self) -> None:
        self.estimator.reset()

    def command(self, state, actuators, rate_cmd_rads: np.ndarray, thrust_n: float,
                dt: float, qbar: float) -> np.ndarray:
        """Surface-deflection commands (deg) for one controller period."""
        positions = actuators.positions
        if self.cfg.controller.perfect_omega_dot:
            omega_dot = self.plant.omega_dot(state, positions, thrust_n)
            self.estimator.update(state.omega, dt)  # keep filter state consistent
        else:
            omega_dot = self.estimator.update(state.omega, dt)
        eff = effectivity(
            self.plant.aero, qbar, self.cfg.geometry, self.plant.mass_props.inverse_inertia,
            state.alpha, state.beta, state.omega, positions, state.airspeed,
            step_deg=self.cfg.controller.effectivity_step_deg,
        )
        virt = virtual_input(rate_cmd_rads, state.omega, self.gains)
        return indi_law(virt, omega_dot, eff, positions, self.cfg.controller.condition_limit)
