"""Closed-loop plant: airframe + aero model + actuators + thrust.

Advances physics at the fine step while surface commands are held; the rate
controller and agent run at the coarser agent period on top of this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .aero import ActuatorState, actuator_step, dimensionalize
from .config import G0, Config
from .dynamics import AircraftState, MassProperties, gravity_body, isa_atmosphere


@dataclass
class PlantOutputs:
    """Derived quantities at the current state, for observations and logs."""

    alpha: float      # rad
    beta: float       # rad
    nz: float         # g units, positive = pilot pressed into the seat
    qbar: float       # Pa
    airspeed: float   # m/s
    clamped: bool     # any aero query left the model envelope


class Plant:
    """Value-semantics aircraft plant; one instance is safe to share read-only."""

    def __init__(self, cfg: Config, aero_model):
        self.cfg = cfg
        self.aero = aero_model
        self.mass_props = MassProperties(cfg.mass.mass, cfg.mass.inertia_tensor())
        self.theta_margin = cfg.timing.theta_margin_deg * math.pi / 180.0

    def forces_moments(self, state: AircraftState, deflections_deg, thrust_n: float):
        """Total body force/moment: aero + gravity + body-x thrust."""
        atm = isa_atmosphere(state.altitude)
        vt = state.airspeed
        qbar = atm.dynamic_pressure(vt)
        coeffs = self.aero.coefficients(state.alpha, state.beta, state.omega, deflections_deg, vt)
        force, moment = dimensionalize(coeffs, qbar, self.cfg.geometry)
        force = force + gravity_body(state.euler, self.mass_props.mass)
        force[0] += thrust_n
        return force, moment, coeffs

    def outputs(self, state: AircraftState, deflections_deg, thrust_n: float = 0.0) -> PlantOutputs:
        """Sensor-level quantities; n_z is the pilot-station accelerometer.

        The accelerometer sits accel_station_x ahead of the CG, so its
        reading carries a pitch-acceleration component x*(q_dot - p*r)/g on
        top of the CG load factor.  That term only matters in coupled or
        fast-transient flight and is invisible to an alpha-based limiter.
        """
        atm = isa_atmosphere(state.altitude)
        vt = state.airspeed
        qbar = atm.dynamic_pressure(vt)
        coeffs = self.aero.coefficients(state.alpha, state.beta, state.omega, deflections_deg, vt)
        qs = qbar * self.cfg.geometry.wing_area
        nz_cg = -coeffs.cz * qs / self.mass_props.weight
        _, moment = dimensionalize(coeffs, qbar, self.cfg.geometry)
        omega_dot = dynamics.rotational_derivative(state.omega, moment, self.mass_props)
        x_a = self.cfg.geometry.accel_station_x
        p, r = float(state.omega[0]), float(state.omega[2])
        nz = nz_cg + x_a * (float(omega_dot[1]) - p * r) / G0
        return PlantOutputs(alpha=state.alpha, beta=state.beta, nz=nz, qbar=qbar,
                            airspeed=vt, clamped=coeffs.clamped)

    def omega_dot(self, state: AircraftState, deflections_deg, thrust_n: float) -> np.ndarray:
        """True angular acceleration at the current state (perfect-sensor path)."""
        _, moment, _ = self.forces_moments(state, deflections_deg, thrust_n)
        return dynamics.rotational_derivative(state.omega, moment, self.mass_props)

    def substep(self, state: AircraftState, actuators: ActuatorState, commands_deg,
                thrust_n: float, dt: float, t: float = 0.0):
        """Advance actuators then the rigid body by one physics step.

        Surface positions are updated first and held through the RK4 stages
        of this substep.
        """
        act_next = actuator_step(actuators, commands_deg, dt, self.cfg.actuators)
        positions = act_next.positions

        def combined(ti, si):
            f, m, _ = self.forces_moments(si, positions, thrust_n)
            return f, m

        state_next = dynamics.step(state, combined, None, dt, self.mass_props, t=t,
                                   max_dt=self.cfg.timing.max_physics_dt,
                                   theta_margin=self.theta_margin)
        return state_next, act_next
