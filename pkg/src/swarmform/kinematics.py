"""Planar unicycle kinematics and error-frame geometry.

All functions are pure. Headings are radians in (-pi, pi]; every
heading-valued result is wrapped before it is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .kernels import step_unicycle as _step_unicycle
from .kernels import wrap_angle as _wrap_angle


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]. Rejects non-finite input."""
    if not math.isfinite(a):
        raise ValueError(f"cannot wrap non-finite angle {a!r}")
    return _wrap_angle(a)


@dataclass(frozen=True)
class Pose:
    """Planar position plus heading. Heading is normalized on construction."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class Twist:
    """Control input: forward speed v (m/s) and turning speed omega (rad/s)."""

    v: float
    omega: float


@dataclass(frozen=True)
class Detection:
    """Range/bearing observation of another robot, in the detector's frame.

    ``heading`` is the detected robot's broadcast heading (world frame).
    """

    range: float
    bearing: float
    heading: float
    id: int

    def __post_init__(self):
        if self.range < 0.0:
            raise ValueError(f"detection range must be >= 0, got {self.range}")
        object.__setattr__(self, "bearing", wrap_angle(self.bearing))


@dataclass(frozen=True)
class TrackingError:
    """Follower-frame tracking error (e_x longitudinal, e_y lateral, e_theta)."""

    e_x: float
    e_y: float
    e_theta: float

    def __post_init__(self):
        object.__setattr__(self, "e_theta", wrap_angle(self.e_theta))


ZERO_ERROR = TrackingError(0.0, 0.0, 0.0)


def step_unicycle(pose: Pose, twist: Twist, dt: float) -> Pose:
    """First-order Euler step of the unicycle model.

    Uses the heading at the start of the step:
    x' = x + v cos(theta) dt, y' = y + v sin(theta) dt,
    theta' = wrap(theta + omega dt).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    x, y, theta = _step_unicycle(pose.x, pose.y, pose.theta, twist.v, twist.omega, dt)
    return Pose(x, y, theta)


def detection_to_relative(d: Detection) -> tuple[float, float]:
    """Convert a range/bearing detection to (x, y) in the detector's frame."""
    return d.range * math.cos(d.bearing), d.range * math.sin(d.bearing)


def desired_pose(leader: Pose, l_d: float, phi_d: float) -> Pose:
    """Desired follower pose at distance l_d / bearing phi_d behind a target.

    x_d = x_l - l_d cos(theta_l + phi_d), y_d = y_l - l_d sin(theta_l + phi_d),
    theta_d = theta_l.
    """
    if l_d < 0.0:
        raise ValueError(f"l_d must be >= 0, got {l_d}")
    a = leader.theta + phi_d
    return Pose(leader.x - l_d * math.cos(a), leader.y - l_d * math.sin(a), leader.theta)


def global_error(desired: Pose, follower: Pose) -> tuple[float, float, float]:
    """Componentwise pose error desired - follower, heading wrapped."""
    return (
        desired.x - follower.x,
        desired.y - follower.y,
        wrap_angle(desired.theta - follower.theta),
    )


def to_follower_frame(delta: tuple[float, float, float], theta_f: float) -> TrackingError:
    """Rotate a world-frame error into the follower's body frame."""
    dx, dy, dth = delta
    c = math.cos(theta_f)
    s = math.sin(theta_f)
    return TrackingError(c * dx + s * dy, -s * dx + c * dy, wrap_angle(dth))
