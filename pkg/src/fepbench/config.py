"""Workbench configuration: defaults, YAML loading, hashing.

One nested dataclass tree covers physics, limits, controller gains, reward
weights, agent hyperparameters, and scenario/sweep definitions.  A YAML file
overrides any subset of fields; unknown keys are rejected so typos fail loudly.
Angles are degrees in the file and at every CLI surface, radians internally.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigurationError

DEG = math.pi / 180.0
G0 = 9.80665  # m/s^2


@dataclass
class GeometryConfig:
    wing_area: float = 27.87  # m^2
    span: float = 9.144       # m
    chord: float = 3.45       # m, mean aerodynamic
    accel_station_x: float = 4.57  # m ahead of CG; pilot-station accelerometer arm


@dataclass
class MassConfig:
    # Nominal light-fighter values; configuration data, not asserted truth.
    mass: float = 5900.0  # kg
    ixx: float = 12875.0  # kg m^2
    iyy: float = 75674.0
    izz: float = 85552.0
    ixz: float = 1331.0

    def inertia_tensor(self):
        import numpy as np

        return np.array(
            [
                [self.ixx, 0.0, -self.ixz],
                [0.0, self.iyy, 0.0],
                [-self.ixz, 0.0, self.izz],
            ]
        )

    @property
    def weight(self) -> float:
        return self.mass * G0


@dataclass
class SurrogateCoefficients:
    """Smooth analytic coefficient model, per-radian derivatives.

    Signs are qualitatively correct for a statically stable fighter:
    lift grows then softens with alpha, pitching moment opposes alpha and
    pitch rate, the horizontal tail pushes the nose down for positive
    deflection.  Rate terms multiply the usual nondimensional rates
    p*b/2V, q*c/2V, r*b/2V.
    """

    # Mild cubic hardening keeps CL/alpha nondecreasing, so the tangent-slope
    # translation of the load-factor bound into alpha is conservative.
    lift_zero: float = 0.0
    lift_alpha: float = 5.0
    lift_alpha_cubic: float = 0.8
    lift_elevator: float = 0.44
    lift_pitch_rate: float = 25.0
    drag_zero: float = 0.020
    drag_induced: float = 0.06
    pitch_zero: float = 0.0
    pitch_alpha: float = -0.05  # relaxed static stability
    pitch_rate_damping: float = -6.0
    pitch_elevator: float = -0.55
    side_beta: float = -1.15
    side_aileron: float = 0.06
    side_rudder: float = 0.164
    side_yaw_rate: float = 0.8
    roll_beta: float = -0.09
    roll_aileron: float = -0.115
    roll_rudder: float = 0.019
    roll_rate_damping: float = -0.38
    roll_yaw_rate: float = 0.11
    yaw_beta: float = 0.25
    yaw_aileron: float = 0.008
    yaw_rudder: float = -0.086
    yaw_roll_rate: float = 0.03
    yaw_rate_damping: float = -0.25


@dataclass
class AeroConfig:
    model: str = "surrogate"  # "surrogate" | "tables"
    table_dir: str | None = None
    surrogate: SurrogateCoefficients = field(default_factory=SurrogateCoefficients)
    alpha_min_deg: float = -35.0
    alpha_max_deg: float = 50.0
    beta_limit_deg: float = 30.0
    cz_alpha_step_deg: float = 0.5  # finite-difference step for d(Cz)/d(alpha)


@dataclass
class ActuatorConfig:
    # Surface order everywhere: aileron, horizontal tail, rudder.
    time_constant: float = 0.0495  # s, all surfaces
    rate_limits_degs: tuple[float, float, float] = (80.0, 60.0, 120.0)
    position_limits_deg: tuple[float, float, float] = (21.5, 25.0, 30.0)


@dataclass
class PropulsionConfig:
    max_thrust: float = 76000.0  # N, body-x


@dataclass
class ControllerConfig:
    kp: float = 4.0  # 1/s
    kq: float = 4.0
    kr: float = 4.0
    omega_dot_cutoff: float = 50.0  # rad/s low-pass on the rate derivative
    perfect_omega_dot: bool = False  # test-only: read true derivative
    condition_limit: float = 1e8
    effectivity_step_deg: float = 0.5


@dataclass
class LimitsConfig:
    alpha_max_deg: float = 25.0
    alpha_min_deg: float | None = None  # default: -alpha_max
    nz_max: float = 9.0
    nz_min: float | None = -4.1  # asymmetric placard, tighter than -nz_max
    q_max_degs: float = 30.0
    q_min_degs: float = -10.0
    fade_start: float = 0.9
    k_rest: float = 2.0  # (deg/s) restorative per deg of exceedance
    qbar_floor: float = 100.0  # Pa, below which the load-factor bound defers

    @property
    def alpha_min_effective_deg(self) -> float:
        return -self.alpha_max_deg if self.alpha_min_deg is None else self.alpha_min_deg

    @property
    def nz_min_effective(self) -> float:
        return -self.nz_max if self.nz_min is None else self.nz_min


@dataclass
class RewardConfig:
    w_t: float = -1.0
    w_a: float = 10.0
    w_n: float = 10.0
    w_q: float = 10.0
    r_s: float = 0.1
    epsilon: float = 1e-6  # rad/s, zero-division guard in the tracking cost
    tracking_clip: float | None = None  # optional cap on the raw tracking cost


@dataclass
class ViolationConfig:
    sustained_seconds: float = 2.0   # continuous exceedance that counts as failure
    dual_penalty: float = -400.0     # two variables out for sustained_seconds
    excess_factor: float = 1.5       # 50% beyond a limit
    excess_penalty: float = -600.0
    # Deadbands separate boundary-tracking chatter from real exceedance;
    # excess fractions are still measured from the raw bounds.
    deadband_alpha_deg: float = 0.25
    deadband_nz: float = 0.05
    deadband_q_degs: float = 0.25


@dataclass
class TimingConfig:
    physics_dt: float = 0.002
    agent_dt: float = 0.01
    duration: float = 10.0
    max_physics_dt: float = 0.005
    theta_margin_deg: float = 2.0  # kinematic singularity guard around +/-90

    @property
    def substeps(self) -> int:
        n = round(self.agent_dt / self.physics_dt)
        if abs(n * self.physics_dt - self.agent_dt) > 1e-12:
            raise ConfigurationError("agent_dt must be an integer multiple of physics_dt")
        return n


@dataclass
class ObservationNormConfig:
    """Fixed affine scaling of the 7-element observation to roughly [-1, 1].

    Order: n_z [g], alpha [rad], phi [rad], p [rad/s], q [rad/s],
    e_q [rad/s], qbar [Pa].
    """

    centers: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 20000.0)
    half_ranges: tuple[float, ...] = (13.5, 0.6545, math.pi, 2.0944, 0.7854, 0.7854, 20000.0)


@dataclass
class AgentConfig:
    actor_hidden: int = 40
    critic_obs_hidden: tuple[int, int] = (80, 40)
    critic_action_hidden: int = 40
    actor_lr: float = 1e-5
    critic_lr: float = 1e-4
    gamma: float = 0.99
    tau: float = 0.001
    noise_variance: float = 0.001
    noise_decay: float = 1e-9  # fractional variance decay per step
    buffer_capacity: int = 1_000_000
    batch_size: int = 64
    warmup: int = 1000
    optimizer: str = "adam"  # "adam" | "sgd"
    init_scale: float | None = None  # None: 1/sqrt(fan_in) uniform


@dataclass
class TrainingConfig:
    max_episodes: int = 2000
    window: int = 150
    stop_avg_reward: float | None = 85.0
    checkpoint_every: int = 250
    q_cmd_range_degs: tuple[float, float] = (-10.0, 25.0)
    action_hold: int = 1  # agent periods each action is held for


@dataclass
class TrimConfig:
    mach: float = 0.6
    altitude: float = 500.0  # m
    mach_range: tuple[float, float] = (0.15, 1.2)
    altitude_range: tuple[float, float] = (0.0, 15000.0)
    max_iterations: int = 50
    tolerance: float = 1e-10  # normalized residual


@dataclass
class SweepConfig:
    q_start_degs: float = -10.0
    q_stop_degs: float = 25.0
    q_step_degs: float = 0.5
    p_cmd_degs: float = 0.0


# A command profile is either a constant or [[t, value], ...] breakpoints
# (linear between, held outside).
DEFAULT_SCENARIOS: dict[str, dict] = {
    "scenario1": {"p": 0.0, "q": 25.0, "r": 0.0},
    "scenario2": {"p": 0.0, "q": -10.0, "r": 0.0},
    "scenario3": {
        "p": 60.0,
        "q": [[0.0, 25.0], [5.5, 25.0], [6.0, -10.0], [10.0, -10.0]],
        "r": 0.0,
    },
}


@dataclass
class Config:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    mass: MassConfig = field(default_factory=MassConfig)
    aero: AeroConfig = field(default_factory=AeroConfig)
    actuators: ActuatorConfig = field(default_factory=ActuatorConfig)
    propulsion: PropulsionConfig = field(default_factory=PropulsionConfig)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    limits: LimitsConfig = field(default_factory=LimitsConfig)
    rewards: RewardConfig = field(default_factory=RewardConfig)
    violations: ViolationConfig = field(default_factory=ViolationConfig)
    timing: TimingConfig = field(default_factory=TimingConfig)
    obs_norm: ObservationNormConfig = field(default_factory=ObservationNormConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    trim: TrimConfig = field(default_factory=TrimConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    scenarios: dict = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_SCENARIOS)))

    def to_dict(self) -> dict:
        return _asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        return _from_dict(cls, data, path="")


def _asdict(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _asdict(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, tuple):
        return [_asdict(v) for v in obj]
    if isinstance(obj, list):
        return [_asdict(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _asdict(v) for k, v in obj.items()}
    return obj


def _from_dict(cls, data, path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"expected a mapping at '{path or 'top level'}', got {type(data).__name__}")
    field_map = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(field_map))
    if unknown:
        raise ConfigurationError(f"unknown config key(s) at '{path or 'top level'}': {', '.join(unknown)}")
    kwargs = {}
    for name, f in field_map.items():
        if name not in data:
            continue
        value = data[name]
        sub = f.type if isinstance(f.type, type) else None
        # dataclass fields declared with from __future__ annotations are strings
        resolved = _resolve_field_type(cls, name)
        if dataclasses.is_dataclass(resolved):
            kwargs[name] = _from_dict(resolved, value, f"{path}.{name}" if path else name)
        elif resolved is tuple or (getattr(resolved, "__origin__", None) is tuple):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    base = cls()
    for name, val in kwargs.items():
        setattr(base, name, val)
    return base


def _resolve_field_type(cls, name):
    import typing

    hints = typing.get_type_hints(cls)
    t = hints.get(name)
    origin = typing.get_origin(t)
    if origin is not None and origin is not tuple:
        # Optional[float] and friends: treat as plain value
        args = [a for a in typing.get_args(t) if a is not type(None)]
        if len(args) == 1:
            t = args[0]
            origin = typing.get_origin(t)
    if origin is tuple:
        return t
    return t


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> Config:
    """Build a Config from defaults, an optional YAML file, and overrides.

    The file may also be a run manifest (detected by a 'config' key), in
    which case its embedded resolved config is used; this is what makes a
    logged run reproducible from its manifest alone.
    """
    data: dict = {}
    if path is not None:
        raw = Path(path).read_text()
        loaded = yaml.safe_load(raw) or {}
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"config file {path} does not contain a mapping")
        if "config" in loaded and "fepbench_manifest" in loaded:
            loaded = loaded["config"]
        data = loaded
    if overrides:
        data = _deep_merge(data, overrides)
    return Config.from_dict(data)


def _deep_merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


def config_hash(cfg: Config) -> str:
    """Stable sha256 of the fully resolved configuration."""
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
