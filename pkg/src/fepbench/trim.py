"""Level-flight trim: damped Newton on (alpha, horizontal tail, thrust).

Residuals are the body-axis accelerations (u_dot, w_dot, q_dot) in
normalized units at zero flight-path angle, wings level, zero rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aero import ActuatorState, HTAIL
from .config import G0, Config
from .dynamics import AircraftState, isa_atmosphere, make_state, wind_to_body
from .errors import EnvelopeError, TrimError
from .simulation import Plant

DEG = math.pi / 180.0


@dataclass
class TrimResult:
    state: AircraftState
    actuators: ActuatorState
    thrust_setting: float
    thrust_n: float
    residuals: np.ndarray  # normalized (u_dot/g, w_dot/g, q_dot)
    iterations: int
    mach: float
    altitude: float
    airspeed: float
    qbar: float

    @property
    def alpha_deg(self) -> float:
        return self.state.alpha / DEG

    @property
    def htail_deg(self) -> float:
        return float(self.actuators.positions[HTAIL])


def _residuals(plant: Plant, unknowns, airspeed: float, altitude: float) -> np.ndarray:
    alpha, htail_deg, setting = unknowns
    thrust_n = setting * plant.cfg.propulsion.max_thrust
    state = make_state(
        v_body=wind_to_body(airspeed, alpha, 0.0),
        euler=(0.0, alpha, 0.0),  # gamma = 0: theta equals alpha
        position=(0.0, 0.0, -altitude),
    )
    deflections = np.array([0.0, htail_deg, 0.0])
    force, moment, _ = plant.forces_moments(state, deflections, thrust_n)
    from .dynamics import rotational_derivative, translational_derivative

    v_dot = translational_derivative(state, force, plant.mass_props.mass)
    w_dot = rotational_derivative(state.omega, moment, plant.mass_props)
    return np.array([v_dot[0] / G0, v_dot[2] / G0, w_dot[1]])


def trim_level_flight(plant: Plant, mach: float | None = None, altitude: float | None = None) -> TrimResult:
    """Solve wings-level, zero-rate, zero-flight-path-angle equilibrium.

    Raises EnvelopeError outside the configured Mach/altitude validity and
    TrimError (with the residual report) if Newton does not converge.
    """
    cfg = plant.cfg
    mach = cfg.trim.mach if mach is None else float(mach)
    altitude = cfg.trim.altitude if altitude is None else float(altitude)
    m_lo, m_hi = cfg.trim.mach_range
    h_lo, h_hi = cfg.trim.altitude_range
    if not (m_lo <= mach <= m_hi):
        raise EnvelopeError(f"mach {mach} outside model envelope [{m_lo}, {m_hi}]")
    if not (h_lo <= altitude <= h_hi):
        raise EnvelopeError(f"altitude {altitude} m outside model envelope [{h_lo}, {h_hi}]")

    atm = isa_atmosphere(altitude)
    airspeed = mach * atm.speed_of_sound
    qbar = atm.dynamic_pressure(airspeed)

    x = np.array([2.0 * DEG, 0.0, 0.3])  # alpha rad, htail deg, thrust setting
    tol = cfg.trim.tolerance
    res = _residuals(plant, x, airspeed, altitude)
    it = 0
    for it in range(1, cfg.trim.max_iterations + 1):
        if np.max(np.abs(res)) < tol:
            break
        jac = np.zeros((3, 3))
        steps = (1e-6, 1e-4, 1e-6)  # rad, deg, setting
        for j, h in enumerate(steps):
            xp = x.copy()
            xm = x.copy()
            xp[j] += h
            xm[j] -= h
            jac[:, j] = (_residuals(plant, xp, airspeed, altitude)
                         - _residuals(plant, xm, airspeed, altitude)) / (2.0 * h)
        try:
            dx = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise TrimError(f"singular trim Jacobian at iteration {it}", residuals=res) from exc
        # damped update: backtrack until the residual norm decreases
        scale = 1.0
        base = float(np.linalg.norm(res))
        for _ in range(20):
            x_try = x + scale * dx
            res_try = _residuals(plant, x_try, airspeed, altitude)
            if float(np.linalg.norm(res_try)) < base:
                x, res = x_try, res_try
                break
            scale *= 0.5
        else:
            raise TrimError(f"trim line search stalled at iteration {it}", residuals=res)
    if np.max(np.abs(res)) >= tol:
        raise TrimError(
            f"trim did not converge in {cfg.trim.max_iterations} iterations; "
            f"residuals (u_dot/g, w_dot/g, q_dot) = {res}", residuals=res)

    alpha, htail_deg, setting = x
    if not (0.0 <= setting <= 1.0):
        raise TrimError(f"trim thrust setting {setting:.3f} outside [0, 1]", residuals=res)
    if not (plant.aero.alpha_min <= alpha <= plant.aero.alpha_max):
        raise TrimError(f"trim alpha {alpha / DEG:.2f} deg outside the aero envelope", residuals=res)

    state = make_state(
        v_body=wind_to_body(airspeed, alpha, 0.0),
        euler=(0.0, alpha, 0.0),
        position=(0.0, 0.0, -altitude),
    )
    actuators = ActuatorState.at([0.0, htail_deg, 0.0])
    return TrimResult(
        state=state,
        actuators=actuators,
        thrust_setting=float(setting),
        thrust_n=float(setting) * cfg.propulsion.max_thrust,
        residuals=res,
        iterations=it,
        mach=mach,
        altitude=altitude,
        airspeed=airspeed,
        qbar=qbar,
    )
