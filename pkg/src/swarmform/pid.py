"""Tracking control laws: positional and incremental PID, plus the
speed-limited tracking objective.

The incremental form is what the simulator runs; the positional form is
its algebraic reference (the cumulative sum of increments reproduces it
when one sample equals one time slot, i.e. dt = 1) and is used in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .kernels import pid_increment as _pid_increment
from .kinematics import ZERO_ERROR, TrackingError, Twist

GAIN_NAMES = (
    "kx_p", "kx_i", "kx_d",
    "ky_p", "ky_i", "ky_d",
    "kth_p", "kth_i", "kth_d",
)


@dataclass(frozen=True)
class GainVector:
    """The nine PID gains: (p, i, d) for each of the x, y, theta channels."""

    kx_p: float
    kx_i: float
    kx_d: float
    ky_p: float
    ky_i: float
    ky_d: float
    kth_p: float
    kth_i: float
    kth_d: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.kx_p, self.kx_i, self.kx_d,
                self.ky_p, self.ky_i, self.ky_d,
                self.kth_p, self.kth_i, self.kth_d)

    @classmethod
    def from_sequence(cls, values) -> "GainVector":
        vals = [float(v) for v in values]
        if len(vals) != 9:
            raise ValueError(f"expected 9 gains, got {len(vals)}")
        return cls(*vals)


ZERO_GAINS = GainVector(*([0.0] * 9))


@dataclass(frozen=True)
class SpeedLimits:
    """Symmetric forward/turning speed bounds, both strictly positive."""

    v_max: float
    omega_max: float

    def __post_init__(self):
        if self.v_max <= 0.0 or self.omega_max <= 0.0:
            raise ValueError(
                f"speed limits must be > 0, got v_max={self.v_max}, "
                f"omega_max={self.omega_max}")


@dataclass(frozen=True)
class ErrorWindow:
    """The last three tracking errors plus the running integral per axis.

    ``e_k`` is the newest sample. The integral is carried only for the
    positional reference law; the incremental law never reads it.
    """

    e_k: TrackingError = ZERO_ERROR
    e_km1: TrackingError = ZERO_ERROR
    e_km2: TrackingError = ZERO_ERROR
    integral: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def advance(self, e: TrackingError, dt: float = 1.0) -> "ErrorWindow":
        """Shift the window by one sample, accumulating the integral."""
        ix, iy, ith = self.integral
        return ErrorWindow(
            e_k=e,
            e_km1=self.e_k,
            e_km2=self.e_km1,
            integral=(ix + e.e_x * dt, iy + e.e_y * dt, ith + e.e_theta * dt),
        )


def positional_pid(window: ErrorWindow, gains: GainVector, dt: float) -> Twist:
    """Positional PID: v from the x channel, omega from the y and theta
    channels. Integral by rectangle rule, derivative by backward difference.

    Reference oracle for ``incremental_pid``; not used in the control loop.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e, p, i = window.e_k, window.e_km1, window.integral
    v = (gains.kx_p * e.e_x
         + gains.kx_i * i[0]
         + gains.kx_d * (e.e_x - p.e_x) / dt)
    omega = (gains.ky_p * e.e_y
             + gains.ky_i * i[1]
             + gains.ky_d * (e.e_y - p.e_y) / dt
             + gains.kth_p * e.e_theta
             + gains.kth_i * i[2]
             + gains.kth_d * (e.e_theta - p.e_theta) / dt)
    return Twist(v, omega)


def incremental_pid(window: ErrorWindow, gains: GainVector, prev: Twist) -> Twist:
    """Incremental PID over the last three errors, added to the previous twist.

    Output is unsaturated; apply ``saturate`` afterwards.
    """
    k, p, pp = window.e_k, window.e_km1, window.e_km2
    dv, domega = _pid_increment(
        k.e_x, p.e_x, pp.e_x,
        k.e_y, p.e_y, pp.e_y,
        k.e_theta, p.e_theta, pp.e_theta,
        *gains.as_tuple(),
    )
    return Twist(prev.v + dv, prev.omega + domega)


def saturate(t: Twist, limits: SpeedLimits) -> Twist:
    """Clamp each twist component to its symmetric bound."""
    return Twist(
        min(limits.v_max, max(-limits.v_max, t.v)),
        min(limits.omega_max, max(-limits.omega_max, t.omega)),
    )


def error_norm(e: TrackingError, w_theta: float = 1.0) -> float:
    """Weighted tracking-error norm sqrt(e_x^2 + e_y^2 + w_theta e_theta^2)."""
    if w_theta < 0.0:
        raise ValueError(f"w_theta must be >= 0, got {w_theta}")
    return math.sqrt(e.e_x ** 2 + e.e_y ** 2 + w_theta * e.e_theta ** 2)
