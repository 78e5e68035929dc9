"""Aerodynamic coefficient models, dimensionalization, actuators, thrust.

Two coefficient sources share one interface: a bundled smooth surrogate with
qualitatively correct signs, and a CSV table set with multilinear
interpolation for users who have wind-tunnel data.  Queries outside the
model envelope are clamped and flagged, never extrapolated silently.

Surface order everywhere: aileron, horizontal tail, rudder.  Deflections are
degrees at this interface (converted to radians against the per-radian
derivatives internally).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .config import ActuatorConfig, AeroConfig, GeometryConfig, SurrogateCoefficients
from .errors import ConfigurationError, EnvelopeError

log = logging.getLogger(__name__)

DEG = math.pi / 180.0

AILERON, HTAIL, RUDDER = 0, 1, 2
SURFACE_NAMES = ("aileron", "htail", "rudder")


class Coefficients(NamedTuple):
    cx: float
    cy: float
    cz: float
    cl: float
    cm: float
    cn: float
    clamped: bool = False


class SurrogateAeroModel:
    """Analytic coefficient model built from lift/drag plus moment derivatives.

    Lift and drag are formed in wind-ish axes (lift softening cubically with
    alpha, parabolic induced drag) and rotated into body x/z, which keeps
    energy bleed and load factor physically consistent during hard maneuvers.
    """

    source = "surrogate"

    def __init__(self, coeffs: SurrogateCoefficients, geometry: GeometryConfig,
                 alpha_min_deg: float = -35.0, alpha_max_deg: float = 50.0,
                 beta_limit_deg: float = 30.0):
        self.c = coeffs
        self.geometry = geometry
        self.alpha_min = alpha_min_deg * DEG
        self.alpha_max = alpha_max_deg * DEG
        self.beta_limit = beta_limit_deg * DEG
        self._clamp_count = 0

    def coefficients(self, alpha: float, beta: float, rates, deflections_deg, airspeed: float) -> Coefficients:
        """Six body-axis coefficients at the given flow state.

        alpha/beta rad, rates (p, q, r) rad/s, deflections deg, airspeed m/s.
        """
        clamped = False
        if not (self.alpha_min <= alpha <= self.alpha_max):
            alpha = min(max(alpha, self.alpha_min), self.alpha_max)
            clamped = True
        if abs(beta) > self.beta_limit:
            beta = math.copysign(self.beta_limit, beta)
            clamped = True
        if clamped:
            self._note_clamp(alpha, beta)

        c = self.c
        g = self.geometry
        vt = max(float(airspeed), 1.0)
        p, q, r = float(rates[0]), float(rates[1]), float(rates[2])
        p_hat = p * g.span / (2.0 * vt)
        q_hat = q * g.chord / (2.0 * vt)
        r_hat = r * g.span / (2.0 * vt)
        da = float(deflections_deg[AILERON]) * DEG
        de = float(deflections_deg[HTAIL]) * DEG
        dr = float(deflections_deg[RUDDER]) * DEG

        lift = (c.lift_zero + c.lift_alpha * alpha + c.lift_alpha_cubic * alpha ** 3
                + c.lift_elevator * de + c.lift_pitch_rate * q_hat)
        drag = c.drag_zero + c.drag_induced * lift * lift
        ca, sa = math.cos(alpha), math.sin(alpha)
        cx = lift * sa - drag * ca
        cz = -lift * ca - drag * sa
        cy = c.side_beta * beta + c.side_aileron * da + c.side_rudder * dr + c.side_yaw_rate * r_hat
        cl = (c.roll_beta * beta + c.roll_aileron * da + c.roll_rudder * dr
              + c.roll_rate_damping * p_hat + c.roll_yaw_rate * r_hat)
        cm = c.pitch_zero + c.pitch_alpha * alpha + c.pitch_elevator * de + c.pitch_rate_damping * q_hat
        cn = (c.yaw_beta * beta + c.yaw_aileron * da + c.yaw_rudder * dr
              + c.yaw_roll_rate * p_hat + c.yaw_rate_damping * r_hat)
        return Coefficients(cx, cy, cz, cl, cm, cn, clamped)

    def _note_clamp(self, alpha, beta):
        self._clamp_count += 1
        if self._clamp_count <= 3:
            log.warning("aero query clamped to envelope (alpha=%.1f deg, beta=%.1f deg)",
                        alpha / DEG, beta / DEG)

    @property
    def clamp_count(self) -> int:
        return self._clamp_count


# CSV table axis names recognized by the loader, mapping to query variables.
_AXIS_NAMES = ("alpha_deg", "beta_deg", "aileron_deg", "htail_deg", "rudder_deg")
_COEF_FILES = {"cx": "cx.csv", "cy": "cy.csv", "cz": "cz.csv",
               "cl": "cl.csv", "cm": "cm.csv", "cn": "cn.csv"}


class CoefficientTable:
    """One N-dimensional coefficient grid with multilinear interpolation."""

    def __init__(self, axis_names: list[str], breakpoints: list[np.ndarray], values: np.ndarray):
        for name in axis_names:
            if name not in _AXIS_NAMES:
                raise ConfigurationError(f"unknown table axis '{name}' (expected one of {_AXIS_NAMES})")
        for name, bp in zip(axis_names, breakpoints):
            if len(bp) < 2 or np.any(np.diff(bp) <= 0.0):
                raise ConfigurationError(f"axis '{name}' breakpoints must be strictly increasing")
        shape = tuple(len(bp) for bp in breakpoints)
        if values.shape != shape:
            raise ConfigurationError(f"value grid shape {values.shape} does not match axes {shape}")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("table contains non-finite values")
        self.axis_names = axis_names
        self.breakpoints = breakpoints
        self.values = values

    def evaluate(self, query: dict[str, float]) -> tuple[float, bool]:
        """Multilinear interpolation; clamps outside the grid and flags it."""
        idx = []
        frac = []
        clamped = False
        for name, bp in zip(self.axis_names, self.breakpoints):
            x = query[name]
            if x < bp[0]:
                x, clamped = bp[0], True
            elif x > bp[-1]:
                x, clamped = bp[-1], True
            i = int(np.searchsorted(bp, x, side="right")) - 1
            i = min(max(i, 0), len(bp) - 2)
            t = (x - bp[i]) / (bp[i + 1] - bp[i])
            idx.append(i)
            frac.append(t)
        n = len(idx)
        total = 0.0
        for corner in range(1 << n):
            weight = 1.0
            pos = []
            for d in range(n):
                if corner >> d & 1:
                    weight *= frac[d]
                    pos.append(idx[d] + 1)
                else:
                    weight *= 1.0 - frac[d]
                    pos.append(idx[d])
            if weight != 0.0:
                total += weight * float(self.values[tuple(pos)])
        return total, clamped

    @classmethod
    def from_csv(cls, path: Path) -> "CoefficientTable":
        lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].lower().startswith("axes"):
            raise ConfigurationError(f"{path}: first row must be 'axes,<name>,...'")
        axis_names = [s.strip() for s in lines[0].split(",")[1:] if s.strip()]
        if not axis_names:
            raise ConfigurationError(f"{path}: no axes declared")
        breakpoints = []
        row = 1
        for name in axis_names:
            parts = [s.strip() for s in lines[row].split(",")]
            if parts[0] != name:
                raise ConfigurationError(f"{path}: expected breakpoints for '{name}', got '{parts[0]}'")
            breakpoints.append(np.array([float(v) for v in parts[1:] if v]))
            row += 1
        if lines[row].lower() != "values":
            raise ConfigurationError(f"{path}: expected 'values' marker after axis rows")
        numbers = []
        for ln in lines[row + 1:]:
            numbers.extend(float(v) for v in ln.replace(",", " ").split())
        shape = tuple(len(bp) for bp in breakpoints)
        expected = int(np.prod(shape))
        if len(numbers) != expected:
            raise ConfigurationError(f"{path}: expected {expected} values for shape {shape}, got {len(numbers)}")
        values = np.array(numbers).reshape(shape)  # row-major, last axis fastest
        return cls(axis_names, breakpoints, values)


class TableAeroModel:
    """Coefficient model backed by one CSV grid per coefficient.

    Static wind-tunnel grids carry no rate damping; optional per-coefficient
    damping derivatives (same meaning as the surrogate's) can be supplied.
    """

    source = "tables"

    def __init__(self, tables: dict[str, CoefficientTable], geometry: GeometryConfig,
                 damping: SurrogateCoefficients | None = None):
        missing = sorted(set(_COEF_FILES) - set(tables))
        if missing:
            raise ConfigurationError(f"missing coefficient table(s): {', '.join(missing)}")
        self.tables = tables
        self.geometry = geometry
        self.damping = damping
        self._clamp_count = 0
        alpha_axes = [t.breakpoints[t.axis_names.index("alpha_deg")]
                      for t in tables.values() if "alpha_deg" in t.axis_names]
        self.alpha_min = (max(bp[0] for bp in alpha_axes) if alpha_axes else -90.0) * DEG
        self.alpha_max = (min(bp[-1] for bp in alpha_axes) if alpha_axes else 90.0) * DEG

    @classmethod
    def from_directory(cls, table_dir: str | Path, geometry: GeometryConfig,
                       damping: SurrogateCoefficients | None = None) -> "TableAeroModel":
        d = Path(table_dir)
        tables = {}
        for key, fname in _COEF_FILES.items():
            f = d / fname
            if not f.exists():
                raise ConfigurationError(f"aero table directory {d} is missing {fname}")
            tables[key] = CoefficientTable.from_csv(f)
        return cls(tables, geometry, damping)

    def coefficients(self, alpha: float, beta: float, rates, deflections_deg, airspeed: float) -> Coefficients:
        query = {
            "alpha_deg": alpha / DEG,
            "beta_deg": beta / DEG,
            "aileron_deg": float(deflections_deg[AILERON]),
            "htail_deg": float(deflections_deg[HTAIL]),
            "rudder_deg": float(deflections_deg[RUDDER]),
        }
        out = {}
        clamped = False
        for key, table in self.tables.items():
            val, cl = table.evaluate(query)
            out[key] = val
            clamped = clamped or cl
        if clamped:
            self._clamp_count += 1
            if self._clamp_count <= 3:
                log.warning("table query clamped to grid (alpha=%.1f deg)", query["alpha_deg"])
        if self.damping is not None:
            g = self.geometry
            vt = max(float(airspeed), 1.0)
            p_hat = float(rates[0]) * g.span / (2.0 * vt)
            q_hat = float(rates[1]) * g.chord / (2.0 * vt)
            r_hat = float(rates[2]) * g.span / (2.0 * vt)
            d = self.damping
            out["cz"] += -d.lift_pitch_rate * q_hat
            out["cm"] += d.pitch_rate_damping * q_hat
            out["cl"] += d.roll_rate_damping * p_hat + d.roll_yaw_rate * r_hat
            out["cn"] += d.yaw_roll_rate * p_hat + d.yaw_rate_damping * r_hat
            out["cy"] += d.side_yaw_rate * r_hat
        return Coefficients(out["cx"], out["cy"], out["cz"], out["cl"], out["cm"], out["cn"], clamped)

    @property
    def clamp_count(self) -> int:
        return self._clamp_count


def build_aero_model(cfg: AeroConfig, geometry: GeometryConfig):
    if cfg.model == "surrogate":
        return SurrogateAeroModel(cfg.surrogate, geometry, cfg.alpha_min_deg,
                                  cfg.alpha_max_deg, cfg.beta_limit_deg)
    if cfg.model == "tables":
        if not cfg.table_dir:
            raise ConfigurationError("aero.model is 'tables' but aero.table_dir is not set")
        return TableAeroModel.from_directory(cfg.table_dir, geometry, cfg.surrogate)
    raise ConfigurationError(f"unknown aero model '{cfg.model}'")


def dimensionalize(coeffs: Coefficients, qbar: float, geometry: GeometryConfig):
    """Forces qbar*S*(cx,cy,cz) N and moments qbar*S*(b*cl, c*cm, b*cn) N m."""
    if qbar < 0.0:
        raise ConfigurationError("dynamic pressure must be nonnegative")
    qs = qbar * geometry.wing_area
    force = np.array([qs * coeffs.cx, qs * coeffs.cy, qs * coeffs.cz])
    moment = np.array([qs * geometry.span * coeffs.cl,
                       qs * geometry.chord * coeffs.cm,
                       qs * geometry.span * coeffs.cn])
    return force, moment


def cz_alpha(model, alpha: float, beta: float, rates, deflections_deg, airspeed: float,
             step_deg: float = 0.5) -> tuple[float, bool]:
    """d(Cz)/d(alpha) per rad by central finite difference.

    Falls back to a one-sided difference at the envelope edge and flags it.
    """
    h = step_deg * DEG
    lo, hi = model.alpha_min, model.alpha_max
    one_sided = False
    a_plus, a_minus = alpha + h, alpha - h
    if a_plus > hi:
        a_plus, a_minus, one_sided = alpha, alpha - h, True
    elif a_minus < lo:
        a_plus, a_minus, one_sided = alpha + h, alpha, True
    cz_p = model.coefficients(a_plus, beta, rates, deflections_deg, airspeed).cz
    cz_m = model.coefficients(a_minus, beta, rates, deflections_deg, airspeed).cz
    return (cz_p - cz_m) / (a_plus - a_minus), one_sided


@dataclass(frozen=True)
class ActuatorState:
    """Per-surface positions and last commands, degrees."""

    positions: np.ndarray
    commands: np.ndarray

    @classmethod
    def at(cls, positions) -> "ActuatorState":
        p = np.asarray(positions, dtype=float).copy()
        return cls(p, p.copy())


def actuator_step(state: ActuatorState, commands_deg, dt: float, cfg: ActuatorConfig) -> ActuatorState:
    """First-order lag toward the command, then rate clamp, then position clamp.

    The lag uses its exact discretization so the unsaturated response is
    step-size independent; saturations are applied per step.
    """
    if dt <= 0.0:
        raise ConfigurationError("actuator dt must be positive")
    decay = math.exp(-dt / cfg.time_constant)
    new_pos = np.empty(3)
    cmd_arr = np.empty(3)
    for i in range(3):
        c = float(commands_deg[i])
        p = float(state.positions[i])
        rate = ((c + (p - c) * decay) - p) / dt
        rl = cfg.rate_limits_degs[i]
        if rate > rl:
            rate = rl
        elif rate < -rl:
            rate = -rl
        pos = p + rate * dt
        pl = cfg.position_limits_deg[i]
        if pos > pl:
            pos = pl
        elif pos < -pl:
            pos = -pl
        new_pos[i] = pos
        cmd_arr[i] = c
    return ActuatorState(new_pos, cmd_arr)


def thrust_force(setting: float, max_thrust: float) -> tuple[float, bool]:
    """Body-x thrust, N: affine in the [0, 1] setting; out-of-range clamps."""
    clamped = not (0.0 <= setting <= 1.0)
    s = min(max(float(setting), 0.0), 1.0)
    if clamped:
        log.warning("thrust setting %.3f clamped to [0, 1]", setting)
    return s * max_thrust, clamped
