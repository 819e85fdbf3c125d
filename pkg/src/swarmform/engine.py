"""The simulated world: scenario configuration, deterministic sensing,
the per-step control loop wired across all followers, trace recording,
and the convergence / scalability statistics.

A run is fully determined by its ScenarioConfig (including the seed):
placement, every BSO draw, and the trace bytes are reproducible.
"""

from __future__ import annotations

import csv
import math
import os
import statistics
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .bso import BsoConfig, OnlineTuner, with_max_iter
from .formation import (
    FormationMode,
    FormationSpec,
    Role,
    Side,
    assign_roles,
    collision_override,
    flocking_reference,
    select_target_detection,
)
from .kernels import rollout_fitness
from .kinematics import (
    ZERO_ERROR,
    Detection,
    Pose,
    TrackingError,
    Twist,
    desired_pose,
    global_error,
    step_unicycle,
    to_follower_frame,
    wrap_angle,
)
from .pid import (
    ZERO_GAINS,
    ErrorWindow,
    GainVector,
    SpeedLimits,
    error_norm,
    incremental_pid,
    saturate,
)


class ConfigError(ValueError):
    """Raised when a scenario configuration violates an invariant."""


# ---------------------------------------------------------------------------
# Leader paths


class StraightPath:
    def __init__(self, start: tuple[float, float], end: tuple[float, float]):
        self.start = start
        self.end = end
        dx, dy = end[0] - start[0], end[1] - start[1]
        self.length = math.hypot(dx, dy)
        if self.length <= 0.0:
            raise ConfigError("leader_path: start and end coincide")
        self.heading = math.atan2(dy, dx)

    def pose_at(self, s: float) -> Pose:
        s = min(max(s, 0.0), self.length)
        f = s / self.length
        return Pose(self.start[0] + f * (self.end[0] - self.start[0]),
                    self.start[1] + f * (self.end[1] - self.start[1]),
                    self.heading)

    def arc_interval(self) -> Optional[tuple[float, float]]:
        return None


class UTurnPath:
    """Straight leg, semicircular arc, straight leg back."""

    def __init__(self, start: tuple[float, float], heading: float = math.pi / 2.0,
                 leg: float = 10.0, radius: float = 3.0, direction: str = "right"):
        if leg <= 0.0 or radius <= 0.0:
            raise ConfigError("leader_path: leg and radius must be > 0")
        if direction not in ("left", "right"):
            raise ConfigError(f"leader_path.direction must be left|right, got {direction!r}")
        self.start = start
        self.heading = wrap_angle(heading)
        self.leg = leg
        self.radius = radius
        self.sign = 1.0 if direction == "left" else -1.0
        self.length = 2.0 * leg + math.pi * radius
        c, s = math.cos(self.heading), math.sin(self.heading)
        self._p1 = (start[0] + leg * c, start[1] + leg * s)
        # Arc center sits one radius to the turning side of the first leg end.
        side = self.heading + self.sign * math.pi / 2.0
        self._center = (self._p1[0] + radius * math.cos(side),
                        self._p1[1] + radius * math.sin(side))

    def pose_at(self, s: float) -> Pose:
        s = min(max(s, 0.0), self.length)
        c, si = math.cos(self.heading), math.sin(self.heading)
        if s <= self.leg:
            return Pose(self.start[0] + s * c, self.start[1] + s * si, self.heading)
        arc_len = math.pi * self.radius
        if s <= self.leg + arc_len:
            phi = (s - self.leg) / self.radius
            base = math.atan2(self._p1[1] - self._center[1],
                              self._p1[0] - self._center[0])
            a = base + self.sign * phi
            return Pose(self._center[0] + self.radius * math.cos(a),
                        self._center[1] + self.radius * math.sin(a),
                        wrap_angle(self.heading + self.sign * phi))
        back = s - self.leg - arc_len
        h2 = wrap_angle(self.heading + self.sign * math.pi)
        p2 = (2.0 * self._center[0] - self._p1[0], 2.0 * self._center[1] - self._p1[1])
        return Pose(p2[0] + back * math.cos(h2), p2[1] + back * math.sin(h2), h2)

    def arc_interval(self) -> Optional[tuple[float, float]]:
        return (self.leg, self.leg + math.pi * self.radius)


class WaypointPath:
    def __init__(self, points: Sequence[tuple[float, float]]):
        if len(points) < 2:
            raise ConfigError("leader_path: waypoints need at least 2 points")
        self.points = [(float(x), float(y)) for x, y in points]
        self._cum = [0.0]
        for (x0, y0), (x1, y1) in zip(self.points, self.points[1:]):
            seg = math.hypot(x1 - x0, y1 - y0)
            if seg <= 0.0:
                raise ConfigError("leader_path: duplicate consecutive waypoints")
            self._cum.append(self._cum[-1] + seg)
        self.length = self._cum[-1]

    def pose_at(self, s: float) -> Pose:
        s = min(max(s, 0.0), self.length)
        for i in range(len(self.points) - 1):
            if s <= self._cum[i + 1] or i == len(self.points) - 2:
                (x0, y0), (x1, y1) = self.points[i], self.points[i + 1]
                seg = self._cum[i + 1] - self._cum[i]
                f = (s - self._cum[i]) / seg
                return Pose(x0 + f * (x1 - x0), y0 + f * (y1 - y0),
                            math.atan2(y1 - y0, x1 - x0))
        raise AssertionError("unreachable")

    def arc_interval(self) -> Optional[tuple[float, float]]:
        return None


@dataclass(frozen=True)
class LeaderPathConfig:
    """Declarative leader path; ``start=None`` means the leader spawn point."""

    type: str = "straight"
    start: Optional[tuple[float, float]] = None
    end: Optional[tuple[float, float]] = None
    heading: float = math.pi / 2.0
    leg: float = 10.0
    radius: float = 3.0
    direction: str = "right"
    points: Optional[tuple[tuple[float, float], ...]] = None

    def build(self, leader_spawn: tuple[float, float]):
        start = self.start if self.start is not None else leader_spawn
        if self.type == "straight":
            end = self.end if self.end is not None else (start[0], start[1] + 20.0)
            return StraightPath(start, end)
        if self.type == "u_turn":
            return UTurnPath(start, self.heading, self.leg, self.radius, self.direction)
        if self.type == "waypoints":
            if self.points is None:
                raise ConfigError("leader_path.points is required for type=waypoints")
            return WaypointPath(self.points)
        raise ConfigError(f"leader_path.type must be straight|u_turn|waypoints, "
                          f"got {self.type!r}")


@dataclass(frozen=True)
class EarlyStopConfig:
    enabled: bool = False
    threshold: float = 0.1
    dwell: int = 100


# ---------------------------------------------------------------------------
# Scenario configuration


@dataclass(frozen=True)
class ScenarioConfig:
    n_robots: int = 11
    area_side: float = 30.0
    sensor_range: float = 10.0
    d_s: float = 0.5
    formation: FormationSpec = field(default_factory=FormationSpec)
    speed_limits: SpeedLimits = field(default_factory=lambda: SpeedLimits(2.0, math.pi))
    dt: float = 0.1
    max_steps: int = 1000
    leader_path: LeaderPathConfig = field(default_factory=LeaderPathConfig)
    bso: BsoConfig = field(default_factory=BsoConfig)
    seed: int = 0
    leader_speed: float = 0.5
    w_theta: float = 1.0
    rollout_horizon: int = 5
    reeval_period: int = 10
    speed_penalty: float = 10.0
    early_stop: EarlyStopConfig = field(default_factory=EarlyStopConfig)

    def validate(self) -> None:
        if self.n_robots < 3 or self.n_robots % 2 == 0:
            raise ConfigError(f"n_robots must be odd and >= 3, got {self.n_robots}")
        if self.area_side <= 0.0:
            raise ConfigError(f"area_side must be > 0, got {self.area_side}")
        if not self.sensor_range > self.formation.l_d > self.d_s > 0.0:
            raise ConfigError(
                "must satisfy sensor_range > formation.l_d > d_s > 0, got "
                f"sensor_range={self.sensor_range}, l_d={self.formation.l_d}, "
                f"d_s={self.d_s}")
        if self.dt <= 0.0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.leader_speed <= 0.0:
            raise ConfigError(f"leader_speed must be > 0, got {self.leader_speed}")
        if self.rollout_horizon < 1:
            raise ConfigError(f"rollout_horizon must be >= 1, got {self.rollout_horizon}")
        if self.reeval_period < 1:
            raise ConfigError(f"reeval_period must be >= 1, got {self.reeval_period}")
        if self.w_theta < 0.0:
            raise ConfigError(f"w_theta must be >= 0, got {self.w_theta}")
        if self.early_stop.dwell < 1:
            raise ConfigError(f"early_stop.dwell must be >= 1, got {self.early_stop.dwell}")
        if self.early_stop.threshold <= 0.0:
            raise ConfigError(
                f"early_stop.threshold must be > 0, got {self.early_stop.threshold}")

    def leader_spawn(self) -> tuple[float, float]:
        half = (self.n_robots - 1) / 2.0
        return (half, half)

    def to_dict(self) -> dict:
        lp = self.leader_path
        return {
            "n_robots": self.n_robots,
            "area_side": self.area_side,
            "sensor_range": self.sensor_range,
            "d_s": self.d_s,
            "formation": {
                "l_d": self.formation.l_d,
                "phi_left": self.formation.phi_left,
                "phi_right": self.formation.phi_right,
                "mode": self.formation.mode.value,
            },
            "speed_limits": {
                "v_max": self.speed_limits.v_max,
                "omega_max": self.speed_limits.omega_max,
            },
            "dt": self.dt,
            "max_steps": self.max_steps,
            "leader_path": {
                "type": lp.type,
                "start": list(lp.start) if lp.start is not None else None,
                "end": list(lp.end) if lp.end is not None else None,
                "heading": lp.heading,
                "leg": lp.leg,
                "radius": lp.radius,
                "direction": lp.direction,
                "points": [list(p) for p in lp.points] if lp.points is not None else None,
            },
            "bso": {
                "population_size": self.bso.population_size,
                "perc_e": self.bso.perc_e,
                "p_e": self.bso.p_e,
                "p_one": self.bso.p_one,
                "slope_k": self.bso.slope_k,
                "disruption_prob": self.bso.disruption_prob,
                "gain_min": self.bso.lower[0],
                "gain_max": self.bso.upper[0],
                "update_inside_loop": self.bso.update_inside_loop,
            },
            "seed": self.seed,
            "leader_speed": self.leader_speed,
            "w_theta": self.w_theta,
            "rollout_horizon": self.rollout_horizon,
            "reeval_period": self.reeval_period,
            "speed_penalty": self.speed_penalty,
            "early_stop": {
                "enabled": self.early_stop.enabled,
                "threshold": self.early_stop.threshold,
                "dwell": self.early_stop.dwell,
            },
        }


def _pop_typed(d: dict, key: str, default, conv, ctx: str):
    if key not in d:
        return default
    raw = d.pop(key)
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {ctx}{key}: {raw!r}") from exc


def _reject_unknown(d: dict, ctx: str) -> None:
    if d:
        key = sorted(d)[0]
        raise ConfigError(f"unknown configuration key: {ctx}{key}")


def _opt_point(raw, ctx):
    if raw is None:
        return None
    if not (isinstance(raw, (list, tuple)) and len(raw) == 2):
        raise ConfigError(f"{ctx} must be a 2-element [x, y] list")
    return (float(raw[0]), float(raw[1]))


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a plain dict (e.g. parsed
    JSON). Unknown keys are rejected with the offending dotted path."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    d = dict(data)

    fdict = dict(d.pop("formation", {}) or {})
    mode_raw = _pop_typed(fdict, "mode", FormationMode.V_SHAPE.value, str, "formation.")
    try:
        mode = FormationMode(mode_raw)
    except ValueError:
        raise ConfigError(f"invalid value for formation.mode: {mode_raw!r}") from None
    formation = FormationSpec(
        l_d=_pop_typed(fdict, "l_d", 1.0, float, "formation."),
        phi_left=_pop_typed(fdict, "phi_left", FormationSpec().phi_left, float, "formation."),
        phi_right=_pop_typed(fdict, "phi_right", FormationSpec().phi_right, float, "formation."),
        mode=mode,
    )
    _reject_unknown(fdict, "formation.")

    sdict = dict(d.pop("speed_limits", {}) or {})
    try:
        speed_limits = SpeedLimits(
            v_max=_pop_typed(sdict, "v_max", 2.0, float, "speed_limits."),
            omega_max=_pop_typed(sdict, "omega_max", math.pi, float, "speed_limits."),
        )
    except ValueError as exc:
        raise ConfigError(f"speed_limits: {exc}") from None
    _reject_unknown(sdict, "speed_limits.")

    pdict = dict(d.pop("leader_path", {}) or {})
    points = pdict.pop("points", None)
    if points is not None:
        points = tuple(_opt_point(p, "leader_path.points[i]") for p in points)
    leader_path = LeaderPathConfig(
        type=_pop_typed(pdict, "type", "straight", str, "leader_path."),
        start=_opt_point(pdict.pop("start", None), "leader_path.start"),
        end=_opt_point(pdict.pop("end", None), "leader_path.end"),
        heading=_pop_typed(pdict, "heading", math.pi / 2.0, float, "leader_path."),
        leg=_pop_typed(pdict, "leg", 10.0, float, "leader_path."),
        radius=_pop_typed(pdict, "radius", 3.0, float, "leader_path."),
        direction=_pop_typed(pdict, "direction", "right", str, "leader_path."),
        points=points,
    )
    _reject_unknown(pdict, "leader_path.")
    if leader_path.type not in ("straight", "u_turn", "waypoints"):
        raise ConfigError(f"leader_path.type must be straight|u_turn|waypoints, "
                          f"got {leader_path.type!r}")

    bdict = dict(d.pop("bso", {}) or {})
    gain_min = _pop_typed(bdict, "gain_min", 0.0, float, "bso.")
    gain_max = _pop_typed(bdict, "gain_max", 10.0, float, "bso.")
    if gain_min >= gain_max:
        raise ConfigError(f"bso.gain_min must be < bso.gain_max, got "
                          f"{gain_min} >= {gain_max}")
    try:
        bso = BsoConfig(
            population_size=_pop_typed(bdict, "population_size", 20, int, "bso."),
            perc_e=_pop_typed(bdict, "perc_e", 20.0, float, "bso."),
            p_e=_pop_typed(bdict, "p_e", 0.2, float, "bso."),
            p_one=_pop_typed(bdict, "p_one", 0.8, float, "bso."),
            slope_k=_pop_typed(bdict, "slope_k", 20.0, float, "bso."),
            disruption_prob=_pop_typed(bdict, "disruption_prob", 0.2, float, "bso."),
            lower=(gain_min,) * 9,
            upper=(gain_max,) * 9,
            update_inside_loop=_pop_typed(bdict, "update_inside_loop", True, bool, "bso."),
        )
    except ValueError as exc:
        raise ConfigError(f"bso: {exc}") from None
    _reject_unknown(bdict, "bso.")

    edict = dict(d.pop("early_stop", {}) or {})
    early_stop = EarlyStopConfig(
        enabled=_pop_typed(edict, "enabled", False, bool, "early_stop."),
        threshold=_pop_typed(edict, "threshold", 0.1, float, "early_stop."),
        dwell=_pop_typed(edict, "dwell", 100, int, "early_stop."),
    )
    _reject_unknown(edict, "early_stop.")

    cfg = ScenarioConfig(
        n_robots=_pop_typed(d, "n_robots", 11, int, ""),
        area_side=_pop_typed(d, "area_side", 30.0, float, ""),
        sensor_range=_pop_typed(d, "sensor_range", 10.0, float, ""),
        d_s=_pop_typed(d, "d_s", 0.5, float, ""),
        formation=formation,
        speed_limits=speed_limits,
        dt=_pop_typed(d, "dt", 0.1, float, ""),
        max_steps=_pop_typed(d, "max_steps", 1000, int, ""),
        leader_path=leader_path,
        bso=bso,
        seed=_pop_typed(d, "seed", 0, int, ""),
        leader_speed=_pop_typed(d, "leader_speed", 0.5, float, ""),
        w_theta=_pop_typed(d, "w_theta", 1.0, float, ""),
        rollout_horizon=_pop_typed(d, "rollout_horizon", 5, int, ""),
        reeval_period=_pop_typed(d, "reeval_period", 10, int, ""),
        speed_penalty=_pop_typed(d, "speed_penalty", 10.0, float, ""),
        early_stop=early_stop,
    )
    _reject_unknown(d, "")
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# World state and stepping


@dataclass
class RobotState:
    pose: Pose
    twist: Twist = field(default_factory=lambda: Twist(0.0, 0.0))
    role: Role = field(default_factory=lambda: Role(Side.UNASSIGNED))
    window: ErrorWindow = field(default_factory=ErrorWindow)
    tuner: Optional[OnlineTuner] = None
    gains: GainVector = ZERO_GAINS
    # None while the robot has no tracking reference (recorded as NaN).
    error: Optional[TrackingError] = ZERO_ERROR
    best_fitness: float = 0.0


@dataclass
class WorldState:
    step: int
    leader_id: int
    robots: dict[int, RobotState]
    path: object
    leader_s: float = 0.0

    def follower_ids(self) -> list[int]:
        return sorted(r for r in self.robots if r != self.leader_id)


TRACE_COLUMNS = (
    "step", "robot_id", "x", "y", "theta", "v", "omega",
    "e_x", "e_y", "e_theta", "err_norm",
    "kx_p", "kx_i", "kx_d", "ky_p", "ky_i", "ky_d", "kth_p", "kth_i", "kth_d",
    "best_fitness",
)


class TraceRecord(NamedTuple):
    step: int
    robot_id: int
    x: float
    y: float
    theta: float
    v: float
    omega: float
    e_x: float
    e_y: float
    e_theta: float
    err_norm: float
    kx_p: float
    kx_i: float
    kx_d: float
    ky_p: float
    ky_i: float
    ky_d: float
    kth_p: float
    kth_i: float
    kth_d: float
    best_fitness: float


@dataclass
class Trace:
    config: ScenarioConfig
    records: list[TraceRecord]

    @property
    def n_steps(self) -> int:
        return self.records[-1].step + 1 if self.records else 0

    def robot_records(self, robot_id: int) -> list[TraceRecord]:
        return [r for r in self.records if r.robot_id == robot_id]

    def follower_norms(self) -> dict[int, np.ndarray]:
        """Per-follower err_norm series, indexed by step."""
        lid = 0
        out: dict[int, list[float]] = {}
        for r in self.records:
            if r.robot_id != lid:
                out.setdefault(r.robot_id, []).append(r.err_norm)
        return {rid: np.asarray(v) for rid, v in out.items()}

    def final_poses(self) -> dict[int, Pose]:
        last = self.n_steps - 1
        return {r.robot_id: Pose(r.x, r.y, r.theta)
                for r in self.records if r.step == last}


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def write_trace_csv(trace: Trace, path: str) -> None:
    lines = [",".join(TRACE_COLUMNS)]
    for r in trace.records:
        lines.append(f"{r.step},{r.robot_id}," +
                     ",".join(_fmt(v) for v in r[2:]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trace_csv(path: str) -> list[TraceRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header in {path}")
        return [TraceRecord(int(row[0]), int(row[1]), *map(float, row[2:]))
                for row in reader]


def sense(poses: dict[int, Pose], robot_id: int, sensor_range: float,
          ) -> list[Detection]:
    """Exact range/bearing detections of every other robot in range,
    with its broadcast heading, sorted by ascending range (ties by id)."""
    me = poses[robot_id]
    out = []
    for rid, p in poses.items():
        if rid == robot_id:
            continue
        dx, dy = p.x - me.x, p.y - me.y
        rng = math.hypot(dx, dy)
        if rng <= sensor_range:
            bearing = wrap_angle(math.atan2(dy, dx) - me.theta)
            out.append(Detection(rng, bearing, p.theta, rid))
    out.sort(key=lambda d: (d.range, d.id))
    return out


def make_rollout_evaluator(window: ErrorWindow, prev: Twist, cfg: ScenarioConfig):
    """Model-based fitness for a gain candidate: roll the follower's error
    dynamics forward ``rollout_horizon`` steps under the candidate and
    score the horizon error norm plus speed-limit penalties.

    The target's per-step drift is estimated by propagating the previous
    error sample under the twist actually applied in that interval and
    taking the residual against the current sample; the estimate is
    clamped to one step of the speed limits so a target switch (which
    jumps the error discontinuously) cannot poison the rollout."""
    k, p, pp = window.e_k, window.e_km1, window.e_km2
    c = math.cos(prev.omega * cfg.dt)
    s = math.sin(prev.omega * cfg.dt)
    rx = p.e_x - prev.v * cfg.dt
    dx_t = k.e_x - (c * rx + s * p.e_y)
    dy_t = k.e_y - (-s * rx + c * p.e_y)
    dth_t = wrap_angle(k.e_theta - wrap_angle(p.e_theta - prev.omega * cfg.dt))
    lim_xy = cfg.speed_limits.v_max * cfg.dt
    lim_th = cfg.speed_limits.omega_max * cfg.dt
    dx_t = min(lim_xy, max(-lim_xy, dx_t))
    dy_t = min(lim_xy, max(-lim_xy, dy_t))
    dth_t = min(lim_th, max(-lim_th, dth_t))
    tail = (
        k.e_x, p.e_x, pp.e_x,
        k.e_y, p.e_y, pp.e_y,
        k.e_theta, p.e_theta, pp.e_theta,
        prev.v, prev.omega, dx_t, dy_t, dth_t, cfg.dt, cfg.rollout_horizon,
        cfg.speed_limits.v_max, cfg.speed_limits.omega_max,
        cfg.w_theta, cfg.speed_penalty,
    )

    def evaluator(position) -> float:
        return rollout_fitness(
            position[0], position[1], position[2],
            position[3], position[4], position[5],
            position[6], position[7], position[8],
            *tail)

    return evaluator


def _reference(state_pose: Pose, role: Role, dets: list[Detection],
               cfg: ScenarioConfig, leader_heading: float,
               own_id: int | None = None,
               hops: dict[int, int | None] | None = None):
    """The (target pose, l_d, phi_d) this follower tracks, or None.

    Wing sides are evaluated in the relayed leader-heading frame;
    eligibility follows the relay-depth ordering when hops are given."""
    if cfg.formation.mode is FormationMode.FLOCKING:
        return flocking_reference(state_pose, dets)
    if role.side not in (Side.LEFT, Side.RIGHT):
        return None
    sel = select_target_detection(role, dets, cfg.formation,
                                  state_pose.theta, leader_heading, own_id,
                                  hops)
    if sel is None:
        return None
    det, phi_d = sel
    a = state_pose.theta + det.bearing
    target = Pose(state_pose.x + det.range * math.cos(a),
                  state_pose.y + det.range * math.sin(a),
                  det.heading)
    return target, cfg.formation.l_d, phi_d


def init_scenario(cfg: ScenarioConfig) -> WorldState:
    """Place the swarm and warm up every follower's tuner archive."""
    cfg.validate()
    ss = np.random.SeedSequence(cfg.seed)
    streams = ss.spawn(cfg.n_robots)
    placement_rng = np.random.default_rng(streams[0])

    leader_id = 0
    spawn = cfg.leader_spawn()
    path = cfg.leader_path.build(spawn)
    leader_pose = path.pose_at(0.0)

    placed = [(leader_pose.x, leader_pose.y)]
    poses: dict[int, Pose] = {leader_id: leader_pose}
    attempts = 0
    for rid in range(1, cfg.n_robots):
        while True:
            attempts += 1
            if attempts > 100_000:
                raise ConfigError(
                    "could not place robots with the required separation; "
                    "area_side too small for n_robots and d_s")
            x = placement_rng.uniform(0.0, cfg.area_side)
            y = placement_rng.uniform(0.0, cfg.area_side)
            if all(math.hypot(x - px, y - py) >= cfg.d_s for px, py in placed):
                break
        theta = placement_rng.uniform(-math.pi, math.pi)
        placed.append((x, y))
        poses[rid] = Pose(x, y, theta)

    robots = {rid: RobotState(pose=p) for rid, p in poses.items()}
    world = WorldState(step=0, leader_id=leader_id, robots=robots, path=path)

    # Evaluate each follower's random starting archive against its
    # initial error state.
    dets = {rid: sense(poses, rid, cfg.sensor_range) for rid in poses}
    follower_dets = {rid: dets[rid] for rid in poses if rid != leader_id}
    headings = {rid: p.theta for rid, p in poses.items()}
    roles = assign_roles(follower_dets, headings, leader_id)
    tuner_cfg = with_max_iter(cfg.bso, cfg.max_steps)
    for rid in world.follower_ids():
        st = robots[rid]
        st.role = roles[rid]
        ref = _reference(st.pose, st.role, dets[rid], cfg, leader_pose.theta)
        if ref is None:
            e0 = ZERO_ERROR
        else:
            target, l_d, phi_d = ref
            des = desired_pose(target, l_d, phi_d)
            e0 = to_follower_frame(global_error(des, st.pose), st.pose.theta)
        window0 = ErrorWindow().advance(e0, cfg.dt)
        tuner = OnlineTuner(tuner_cfg, np.random.default_rng(streams[rid]),
                            reeval_period=cfg.reeval_period)
        tuner.initialize(make_rollout_evaluator(window0, Twist(0.0, 0.0), cfg))
        st.tuner = tuner
        st.gains = tuner.best_gains()
        st.best_fitness = tuner.best_fitness()
    return world


def tick(world: WorldState, cfg: ScenarioConfig) -> list[TraceRecord]:
    """One simulation step: phase 1 reads only the previous poses and
    decides every robot's twist; phase 2 integrates all poses."""
    t = world.step
    lid = world.leader_id
    prev = {rid: st.pose for rid, st in world.robots.items()}

    s_new = min(world.path.length, world.leader_s + cfg.leader_speed * cfg.dt)
    leader_pose = world.path.pose_at(s_new)
    leader_twist = Twist((s_new - world.leader_s) / cfg.dt,
                         wrap_angle(leader_pose.theta - prev[lid].theta) / cfg.dt)

    dets = {rid: sense(prev, rid, cfg.sensor_range) for rid in prev}
    follower_dets = {rid: dets[rid] for rid in prev if rid != lid}
    headings = {rid: p.theta for rid, p in prev.items()}
    roles = assign_roles(follower_dets, headings, lid)
    hops = {rid: role.hop for rid, role in roles.items()}

    decisions: dict[int, Twist] = {}
    for rid in world.follower_ids():
        st = world.robots[rid]
        st.role = roles[rid]
        ref = _reference(prev[rid], st.role, dets[rid], cfg, prev[lid].theta,
                         rid, hops)
        if ref is None:
            # No reference this step: hold position, keep current gains.
            st.window = st.window.advance(ZERO_ERROR, cfg.dt)
            st.error = None
            st.gains = st.tuner.best_gains()
            st.best_fitness = st.tuner.best_fitness()
            decisions[rid] = Twist(0.0, 0.0)
            continue
        target, l_d, phi_d = ref
        des = desired_pose(target, l_d, phi_d)
        e = to_follower_frame(global_error(des, prev[rid]), prev[rid].theta)
        st.window = st.window.advance(e, cfg.dt)
        st.error = e
        evaluator = make_rollout_evaluator(st.window, st.twist, cfg)
        st.gains = st.tuner.step(evaluator, t)
        st.best_fitness = st.tuner.best_fitness()
        twist = saturate(incremental_pid(st.window, st.gains, st.twist),
                         cfg.speed_limits)
        decisions[rid] = collision_override(twist, dets[rid], cfg.d_s,
                                            cfg.speed_limits.omega_max,
                                            0.5 * cfg.speed_limits.v_max)

    # Phase 2: apply all writes.
    world.leader_s = s_new
    world.robots[lid].pose = leader_pose
    world.robots[lid].twist = leader_twist
    for rid, twist in decisions.items():
        st = world.robots[rid]
        st.twist = twist
        st.pose = step_unicycle(prev[rid], twist, cfg.dt)
    world.step = t + 1

    records = []
    for rid in sorted(world.robots):
        st = world.robots[rid]
        if st.error is None:
            err = (math.nan, math.nan, math.nan, math.nan)
        else:
            err = (st.error.e_x, st.error.e_y, st.error.e_theta,
                   error_norm(st.error, cfg.w_theta))
        records.append(TraceRecord(
            t, rid, st.pose.x, st.pose.y, st.pose.theta,
            st.twist.v, st.twist.omega, *err,
            *st.gains.as_tuple(), st.best_fitness))
    return records


def run(cfg: ScenarioConfig) -> Trace:
    """init_scenario + tick until the horizon (or early convergence)."""
    world = init_scenario(cfg)
    records: list[TraceRecord] = []
    consec = 0
    for _ in range(cfg.max_steps):
        step_records = tick(world, cfg)
        records.extend(step_records)
        if cfg.early_stop.enabled:
            ok = all(r.err_norm < cfg.early_stop.threshold
                     for r in step_records if r.robot_id != world.leader_id)
            consec = consec + 1 if ok else 0
            if consec >= cfg.early_stop.dwell:
                break
    return Trace(cfg, records)


# ---------------------------------------------------------------------------
# Statistics


def convergence_time(trace: Trace, threshold: float, dwell: int):
    """First step from which every follower's error norm stays below the
    threshold for ``dwell`` consecutive steps; None if never."""
    if threshold <= 0.0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    if dwell < 1:
        raise ValueError(f"dwell must be >= 1, got {dwell}")
    norms = trace.follower_norms()
    n_steps = trace.n_steps
    run_start = None
    for step in range(n_steps):
        ok = all(series[step] < threshold for series in norms.values())
        if ok:
            if run_start is None:
                run_start = step
            if step - run_start + 1 >= dwell:
                return run_start
        else:
            run_start = None
    return None


class FormationPair(NamedTuple):
    follower_id: int
    target_id: int
    range: float
    bearing: float
    phi_d: float


def final_formation(trace: Trace, cfg: ScenarioConfig) -> list[FormationPair]:
    """Recompute each follower's target from the final poses and report
    the achieved range and bearing (in the target's heading frame)."""
    poses = trace.final_poses()
    lid = 0
    dets = {rid: sense(poses, rid, cfg.sensor_range) for rid in poses}
    follower_dets = {rid: dets[rid] for rid in poses if rid != lid}
    headings = {rid: p.theta for rid, p in poses.items()}
    roles = assign_roles(follower_dets, headings, lid)
    hops = {rid: role.hop for rid, role in roles.items()}
    pairs = []
    for rid in sorted(poses):
        if rid == lid:
            continue
        role = roles[rid]
        if role.side not in (Side.LEFT, Side.RIGHT):
            continue
        sel = select_target_detection(role, dets[rid], cfg.formation,
                                      poses[rid].theta, poses[lid].theta,
                                      rid, hops)
        if sel is None:
            continue
        det, phi_d = sel
        me, tgt = poses[rid], poses[det.id]
        rng = math.hypot(tgt.x - me.x, tgt.y - me.y)
        bearing = wrap_angle(math.atan2(tgt.y - me.y, tgt.x - me.x) - tgt.theta)
        pairs.append(FormationPair(rid, det.id, rng, bearing, phi_d))
    return pairs


# ---------------------------------------------------------------------------
# Scalability batch


SUMMARY_COLUMNS = (
    "population", "runs", "mean_convergence_steps", "std_convergence_steps",
    "mean_post_error", "std_post_error", "n_not_converged",
)


@dataclass
class SummaryRow:
    population: int
    runs: int
    mean_convergence_steps: float
    std_convergence_steps: float
    mean_post_error: float
    std_post_error: float
    n_not_converged: int


def derive_seed(base_seed: int, population: int, run_index: int) -> int:
    """Independent, reproducible per-run RNG stream key."""
    return int(np.random.SeedSequence(
        [base_seed, population, run_index]).generate_state(1)[0])


def _batch_worker(cfg: ScenarioConfig):
    trace = run(cfg)
    ct = convergence_time(trace, cfg.early_stop.threshold, cfg.early_stop.dwell)
    if ct is None:
        return None, None, trace
    norms = trace.follower_norms()
    post = float(np.mean([series[ct:] for series in norms.values()]))
    return ct, post, trace


def batch_threads() -> int:
    raw = os.environ.get("SWARMFORM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def scalability_batch(populations: Sequence[int], runs_per: int,
                      base_cfg: ScenarioConfig, on_trace=None,
                      ) -> list[SummaryRow]:
    """Run ``runs_per`` seeded runs per population size and aggregate the
    convergence time and post-convergence error (the scalability table).

    ``on_trace(population, run_index, trace)`` is invoked for each
    completed run, in deterministic (population, run) order.
    """
    for p in populations:
        if p < 3 or p % 2 == 0:
            raise ConfigError(f"populations must be odd and >= 3, got {p}")
    if runs_per < 1:
        raise ConfigError(f"runs must be >= 1, got {runs_per}")

    jobs = []
    for pop in populations:
        for ri in range(runs_per):
            jobs.append((pop, ri, replace(
                base_cfg, n_robots=pop, seed=derive_seed(base_cfg.seed, pop, ri))))

    results: dict[tuple[int, int], tuple] = {}
    workers = batch_threads()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = {(pop, ri): pool.submit(_batch_worker, cfg)
                    for pop, ri, cfg in jobs}
        for key, fut in futs.items():
            try:
                results[key] = fut.result()
            except Exception:
                results[key] = (None, None, None)
    else:
        for pop, ri, cfg in jobs:
            try:
                results[(pop, ri)] = _batch_worker(cfg)
            except Exception:
                results[(pop, ri)] = (None, None, None)

    rows = []
    for pop in populations:
        cts, posts, failed = [], [], 0
        for ri in range(runs_per):
            ct, post, trace = results[(pop, ri)]
            if on_trace is not None and trace is not None:
                on_trace(pop, ri, trace)
            if ct is None:
                failed += 1
            else:
                cts.append(ct)
                posts.append(post)
        rows.append(SummaryRow(
            population=pop,
            runs=runs_per,
            mean_convergence_steps=statistics.fmean(cts) if cts else math.nan,
            std_convergence_steps=statistics.pstdev(cts) if cts else math.nan,
            mean_post_error=statistics.fmean(posts) if posts else math.nan,
            std_post_error=statistics.pstdev(posts) if posts else math.nan,
            n_not_converged=failed,
        ))
    return rows


def write_summary_csv(rows: Sequence[SummaryRow], path: str) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for r in rows:
        lines.append(",".join([
            str(r.population), str(r.runs),
            _fmt(r.mean_convergence_steps), _fmt(r.std_convergence_steps),
            _fmt(r.mean_post_error), _fmt(r.std_post_error),
            str(r.n_not_converged),
        ]))
    atomic_write_text(path, "\n".join(lines) + "\n")
