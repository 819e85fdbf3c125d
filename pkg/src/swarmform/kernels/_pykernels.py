"""Pure-Python twin of the compiled kernels.

Every function here mirrors the operation sequence of ``_ckernels.pyx``
exactly, so both backends produce bit-identical doubles (both defer to
libm for cos/sin/fmod).
"""

import math

BACKEND = "python"

_PI = math.pi
_TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Wrap a finite angle into (-pi, pi]."""
    r = math.fmod(a, _TWO_PI)
    if r <= -_PI:
        r += _TWO_PI
    elif r > _PI:
        r -= _TWO_PI
    return r


def step_unicycle(x, y, theta, v, omega, dt):
    """One Euler step of the unicycle model, heading taken at step start."""
    nx = x + v * math.cos(theta) * dt
    ny = y + v * math.sin(theta) * dt
    nth = wrap_angle(theta + omega * dt)
    return nx, ny, nth


def pid_increment(ex0, ex1, ex2, ey0, ey1, ey2, et0, et1, et2,
                  kxp, kxi, kxd, kyp, kyi, kyd, ktp, kti, ktd):
    """Incremental PID: (dv, dw) from the last three errors per axis.

    Index 0 is the newest sample. The forward-speed increment uses only
    the x axis; the turn increment sums the y and theta axes.
    """
    dv = kxp * (ex0 - ex1) + kxi * ex0 + kxd * (ex0 - 2.0 * ex1 + ex2)
    dw = (kyp * (ey0 - ey1) + kyi * ey0 + kyd * (ey0 - 2.0 * ey1 + ey2)
          + ktp * (et0 - et1) + kti * et0 + ktd * (et0 - 2.0 * et1 + et2))
    return dv, dw


def rollout_fitness(kxp, kxi, kxd, kyp, kyi, kyd, ktp, kti, ktd,
                    ex0, ex1, ex2, ey0, ey1, ey2, et0, et1, et2,
                    prev_v, prev_w, dx_t, dy_t, dth_t, dt, horizon,
                    v_max, w_max, w_theta, penalty):
    """Score a gain candidate by rolling the error dynamics forward.

    Simulates ``horizon`` control steps: incremental PID on the error
    window, speed-limit penalty on the unsaturated command, saturation,
    then error propagation under the unicycle model. (dx_t, dy_t, dth_t)
    is the target's observed per-step drift, carried along with the
    rotating follower frame and added every step. Returns the weighted
    error norm at the horizon plus the accumulated penalty.
    """
    pen = 0.0
    for _ in range(horizon):
        dv = kxp * (ex0 - ex1) + kxi * ex0 + kxd * (ex0 - 2.0 * ex1 + ex2)
        dw = (kyp * (ey0 - ey1) + kyi * ey0 + kyd * (ey0 - 2.0 * ey1 + ey2)
              + ktp * (et0 - et1) + kti * et0 + ktd * (et0 - 2.0 * et1 + et2))
        v = prev_v + dv
        w = prev_w + dw
        if v > v_max or v < -v_max or w > w_max or w < -w_max:
            pen += penalty
        if v > v_max:
            v = v_max
        elif v < -v_max:
            v = -v_max
        if w > w_max:
            w = w_max
        elif w < -w_max:
            w = -w_max
        # Follower advances (v*dt, 0) and rotates w*dt in its own frame;
        # re-express the target in the new follower frame, then apply the
        # target's own drift (rotated into that frame as well).
        c = math.cos(w * dt)
        s = math.sin(w * dt)
        rx = ex0 - v * dt
        nex = c * rx + s * ey0
        ney = -s * rx + c * ey0
        net = wrap_angle(et0 - w * dt + dth_t)
        ndx = c * dx_t + s * dy_t
        ndy = -s * dx_t + c * dy_t
        dx_t = ndx
        dy_t = ndy
        nex += dx_t
        ney += dy_t
        ex2 = ex1
        ex1 = ex0
        ex0 = nex
        ey2 = ey1
        ey1 = ey0
        ey0 = ney
        et2 = et1
        et1 = et0
        et0 = net
        prev_v = v
        prev_w = w
    return math.sqrt(ex0 * ex0 + ey0 * ey0 + w_theta * et0 * et0) + pen
