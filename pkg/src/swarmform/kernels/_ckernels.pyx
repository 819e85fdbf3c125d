# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the simulator's hot inner loops.

Operation-for-operation identical to ``_pykernels.py`` so the two
backends return bit-identical doubles.
"""

from libc.math cimport cos, sin, sqrt, fmod, M_PI

BACKEND = "cython"

cdef double _TWO_PI = 2.0 * M_PI


cdef inline double _wrap(double a) nogil:
    cdef double r = fmod(a, _TWO_PI)
    if r <= -M_PI:
        r += _TWO_PI
    elif r > M_PI:
        r -= _TWO_PI
    return r


def wrap_angle(double a):
    """Wrap a finite angle into (-pi, pi]."""
    return _wrap(a)


def step_unicycle(double x, double y, double theta,
                  double v, double omega, double dt):
    """One Euler step of the unicycle model, heading taken at step start."""
    cdef double nx = x + v * cos(theta) * dt
    cdef double ny = y + v * sin(theta) * dt
    cdef double nth = _wrap(theta + omega * dt)
    return nx, ny, nth


def pid_increment(double ex0, double ex1, double ex2,
                  double ey0, double ey1, double ey2,
                  double et0, double et1, double et2,
                  double kxp, double kxi, double kxd,
                  double kyp, double kyi, double kyd,
                  double ktp, double kti, double ktd):
    """Incremental PID: (dv, dw) from the last three errors per axis."""
    cdef double dv = kxp * (ex0 - ex1) + kxi * ex0 + kxd * (ex0 - 2.0 * ex1 + ex2)
    cdef double dw = (kyp * (ey0 - ey1) + kyi * ey0 + kyd * (ey0 - 2.0 * ey1 + ey2)
                      + ktp * (et0 - et1) + kti * et0 + ktd * (et0 - 2.0 * et1 + et2))
    return dv, dw


def rollout_fitness(double kxp, double kxi, double kxd,
                    double kyp, double kyi, double kyd,
                    double ktp, double kti, double ktd,
                    double ex0, double ex1, double ex2,
                    double ey0, double ey1, double ey2,
                    double et0, double et1, double et2,
                    double prev_v, double prev_w,
                    double dx_t, double dy_t, double dth_t,
                    double dt, int horizon,
                    double v_max, double w_max, double w_theta, double penalty):
    """Score a gain candidate by rolling the error dynamics forward."""
    cdef double pen = 0.0
    cdef double dv, dw, v, w, c, s, rx, nex, ney, net, ndx, ndy
    cdef int i
    for i in range(horizon):
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
        c = cos(w * dt)
        s = sin(w * dt)
        rx = ex0 - v * dt
        nex = c * rx + s * ey0
        ney = -s * rx + c * ey0
        net = _wrap(et0 - w * dt + dth_t)
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
    return sqrt(ex0 * ex0 + ey0 * ey0 + w_theta * et0 * et0) + pen
