"""Rigid-body flight dynamics: equations of motion, Euler kinematics,
ISA atmosphere, and a fixed-step RK4 integrator.

Axes: body (x forward, y right, z down) and NED for position.  All angles
are radians here; degrees appear only at external interfaces.  State
propagation is value-semantics throughout, so independent episodes can run
in parallel without shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import G0
from .errors import ConfigurationError, KinematicsSingularityError, SimulationIntegrityError

_STATE_FIELDS = ("u", "v", "w", "p", "q", "r", "phi", "theta", "psi", "pn", "pe", "pd")


@dataclass(frozen=True)
class AircraftState:
    """Twelve-state rigid-body record.

    v_body: (u, v, w) m/s, omega: (p, q, r) rad/s, euler: (phi, theta, psi)
    rad, position: NED m.  Altitude is -position_down.
    """

    v_body: np.ndarray
    omega: np.ndarray
    euler: np.ndarray
    position: np.ndarray

    @property
    def altitude(self) -> float:
        return -float(self.position[2])

    @property
    def airspeed(self) -> float:
        u, v, w = self.v_body
        return math.sqrt(u * u + v * v + w * w)

    @property
    def alpha(self) -> float:
        """Angle of attack, rad."""
        return math.atan2(self.v_body[2], self.v_body[0])

    @property
    def beta(self) -> float:
        """Sideslip angle, rad."""
        vt = self.airspeed
        if vt < 1e-9:
            return 0.0
        return math.asin(max(-1.0, min(1.0, float(self.v_body[1]) / vt)))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.v_body, self.omega, self.euler, self.position])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "AircraftState":
        x = np.asarray(x, dtype=float)
        return cls(x[0:3].copy(), x[3:6].copy(), x[6:9].copy(), x[9:12].copy())

    @classmethod
    def _view(cls, x: np.ndarray) -> "AircraftState":
        # integrator-internal: shares memory with x, callers must not mutate
        return cls(x[0:3], x[3:6], x[6:9], x[9:12])

    def validate(self) -> None:
        x = self.as_vector()
        if not np.all(np.isfinite(x)):
            bad = int(np.argmax(~np.isfinite(x)))
            raise SimulationIntegrityError(_STATE_FIELDS[bad])


@dataclass(frozen=True)
class MassProperties:
    mass: float          # kg
    inertia: np.ndarray  # 3x3, kg m^2

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ConfigurationError("mass must be positive")
        j = np.asarray(self.inertia, dtype=float)
        if j.shape != (3, 3):
            raise ConfigurationError("inertia must be 3x3")
        if not np.allclose(j, j.T, rtol=0.0, atol=1e-9 * max(1.0, float(np.abs(j).max()))):
            raise ConfigurationError("inertia must be symmetric")
        eig = np.linalg.eigvalsh(j)
        if np.any(eig <= 0.0):
            raise ConfigurationError("inertia must be positive definite")
        p1, p2, p3 = np.sort(eig)
        if p1 + p2 < p3 * (1.0 - 1e-9):
            raise ConfigurationError("principal moments violate the triangle inequality")
        object.__setattr__(self, "inertia", j)
        object.__setattr__(self, "_inv_inertia", np.linalg.inv(j))

    @property
    def inverse_inertia(self) -> np.ndarray:
        return self._inv_inertia

    @property
    def weight(self) -> float:
        return self.mass * G0


@dataclass(frozen=True)
class Atmosphere:
    density: float          # kg/m^3
    speed_of_sound: float   # m/s
    temperature: float      # K
    pressure: float         # Pa

    def dynamic_pressure(self, airspeed: float) -> float:
        return 0.5 * self.density * airspeed * airspeed


# ISA constants
_T0 = 288.15
_P0 = 101325.0
_LAPSE = 0.0065
_R_AIR = 287.05287
_GAMMA_AIR = 1.4
_TROPOPAUSE = 11000.0


def isa_atmosphere(altitude: float) -> Atmosphere:
    """International Standard Atmosphere up into the lower stratosphere."""
    h = max(0.0, float(altitude))
    if h <= _TROPOPAUSE:
        t = _T0 - _LAPSE * h
        p = _P0 * (t / _T0) ** (G0 / (_LAPSE * _R_AIR))
    else:
        t11 = _T0 - _LAPSE * _TROPOPAUSE
        p11 = _P0 * (t11 / _T0) ** (G0 / (_LAPSE * _R_AIR))
        t = t11
        p = p11 * math.exp(-G0 * (h - _TROPOPAUSE) / (_R_AIR * t11))
    rho = p / (_R_AIR * t)
    a = math.sqrt(_GAMMA_AIR * _R_AIR * t)
    return Atmosphere(density=rho, speed_of_sound=a, temperature=t, pressure=p)


def gravity_body(euler: np.ndarray, mass: float) -> np.ndarray:
    """Weight vector rotated into body axes, N."""
    phi, theta = float(euler[0]), float(euler[1])
    g = mass * G0
    return np.array(
        [-g * math.sin(theta), g * math.sin(phi) * math.cos(theta), g * math.cos(phi) * math.cos(theta)]
    )


def body_to_ned(euler: np.ndarray) -> np.ndarray:
    """Direction cosine matrix taking body-axis vectors to NED."""
    phi, theta, psi = float(euler[0]), float(euler[1]), float(euler[2])
    cph, sph = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cps, sps = math.cos(psi), math.sin(psi)
    return np.array(
        [
            [cth * cps, sph * sth * cps - cph * sps, cph * sth * cps + sph * sps],
            [cth * sps, sph * sth * sps + cph * cps, cph * sth * sps - sph * cps],
            [-sth, sph * cth, cph * cth],
        ]
    )


def _matvec3(m: np.ndarray, x0: float, x1: float, x2: float) -> tuple[float, float, float]:
    return (
        m[0, 0] * x0 + m[0, 1] * x1 + m[0, 2] * x2,
        m[1, 0] * x0 + m[1, 1] * x1 + m[1, 2] * x2,
        m[2, 0] * x0 + m[2, 1] * x1 + m[2, 2] * x2,
    )


def translational_derivative(state: AircraftState, force_body: np.ndarray, mass: float) -> np.ndarray:
    """Body-axis acceleration m^-1 F - omega x V, m/s^2."""
    if mass <= 0.0:
        raise ConfigurationError("mass must be positive")
    f = force_body
    u, v, w = float(state.v_body[0]), float(state.v_body[1]), float(state.v_body[2])
    p, q, r = float(state.omega[0]), float(state.omega[1]), float(state.omega[2])
    fx, fy, fz = float(f[0]), float(f[1]), float(f[2])
    if not math.isfinite(fx + fy + fz + u + v + w + p + q + r):
        raise SimulationIntegrityError("force/state", "non-finite input to translational dynamics")
    inv_m = 1.0 / mass
    return np.array([
        fx * inv_m - (q * w - r * v),
        fy * inv_m - (r * u - p * w),
        fz * inv_m - (p * v - q * u),
    ])


def rotational_derivative(omega: np.ndarray, moment: np.ndarray, mass_props: MassProperties) -> np.ndarray:
    """Angular acceleration J^-1 [M - omega x J omega], rad/s^2."""
    p, q, r = float(omega[0]), float(omega[1]), float(omega[2])
    hx, hy, hz = _matvec3(mass_props.inertia, p, q, r)
    gx = float(moment[0]) - (q * hz - r * hy)
    gy = float(moment[1]) - (r * hx - p * hz)
    gz = float(moment[2]) - (p * hy - q * hx)
    return np.array(_matvec3(mass_props.inverse_inertia, gx, gy, gz))


def euler_kinematics(omega: np.ndarray, euler: np.ndarray, theta_margin: float = 0.0) -> np.ndarray:
    """Euler-angle rates from body rates; singular as |theta| -> pi/2."""
    phi, theta = float(euler[0]), float(euler[1])
    if abs(theta) >= math.pi / 2.0 - theta_margin:
        raise KinematicsSingularityError(theta)
    p, q, r = float(omega[0]), float(omega[1]), float(omega[2])
    sph, cph = math.sin(phi), math.cos(phi)
    tth = math.tan(theta)
    sec = 1.0 / math.cos(theta)
    return np.array(
        [
            p + sph * tth * q + cph * tth * r,
            cph * q - sph * r,
            sph * sec * q + cph * sec * r,
        ]
    )


def _state_derivative(state: AircraftState, force: np.ndarray, moment: np.ndarray,
                      mass_props: MassProperties, theta_margin: float) -> np.ndarray:
    v_dot = translational_derivative(state, force, mass_props.mass)
    w_dot = rotational_derivative(state.omega, moment, mass_props)
    e_dot = euler_kinematics(state.omega, state.euler, theta_margin)
    p_dot = _matvec3(body_to_ned(state.euler),
                     float(state.v_body[0]), float(state.v_body[1]), float(state.v_body[2]))
    out = np.empty(12)
    out[0:3] = v_dot
    out[3:6] = w_dot
    out[6:9] = e_dot
    out[9:12] = p_dot
    return out


def step(state: AircraftState, forces, moments, dt: float, mass_props: MassProperties,
         t: float = 0.0, max_dt: float = 0.005, theta_margin: float = 0.0) -> AircraftState:
    """Advance the full state one fixed RK4 step.

    `forces`/`moments` are body-axis 3-vectors held constant over the step,
    or callables (t, state) -> 3-vector evaluated at each RK4 stage.  Passing
    moments=None makes `forces` a combined callable returning (F, M), which
    saves one model evaluation per stage.  Deterministic: identical inputs
    give bit-identical output.
    """
    if not (0.0 < dt <= max_dt):
        raise ConfigurationError(f"dt={dt} outside (0, {max_dt}]")
    if moments is None:
        if not callable(forces):
            raise ConfigurationError("moments=None requires a combined (t, state) -> (F, M) callable")
        combined = forces
    else:
        force_fn = forces if callable(forces) else (lambda _t, _s, _f=np.asarray(forces, float): _f)
        moment_fn = moments if callable(moments) else (lambda _t, _s, _m=np.asarray(moments, float): _m)
        combined = lambda ti, si: (force_fn(ti, si), moment_fn(ti, si))

    def deriv(ti, xi):
        si = AircraftState._view(xi)
        f, m = combined(ti, si)
        return _state_derivative(si, f, m, mass_props, theta_margin)

    x0 = state.as_vector()
    k1 = deriv(t, x0)
    k2 = deriv(t + 0.5 * dt, x0 + 0.5 * dt * k1)
    k3 = deriv(t + 0.5 * dt, x0 + 0.5 * dt * k2)
    k4 = deriv(t + dt, x0 + dt * k3)
    x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x1)):
        bad = int(np.argmax(~np.isfinite(x1)))
        raise SimulationIntegrityError(_STATE_FIELDS[bad])
    return AircraftState.from_vector(x1)


def make_state(v_body=(0.0, 0.0, 0.0), omega=(0.0, 0.0, 0.0), euler=(0.0, 0.0, 0.0),
               position=(0.0, 0.0, 0.0)) -> AircraftState:
    return AircraftState(
        np.asarray(v_body, dtype=float).copy(),
        np.asarray(omega, dtype=float).copy(),
        np.asarray(euler, dtype=float).copy(),
        np.asarray(position, dtype=float).copy(),
    )


def wind_to_body(airspeed: float, alpha: float, beta: float) -> np.ndarray:
    """Body velocity components for given airspeed and flow angles."""
    return airspeed * np.array(
        [math.cos(alpha) * math.cos(beta), math.sin(beta), math.sin(alpha) * math.cos(beta)]
    )
