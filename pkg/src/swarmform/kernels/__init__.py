"""Numeric kernel backend selection.

The compiled Cython extension is used when available; the pure-Python
twin is the fallback. Set ``SWARMFORM_PURE_PYTHON=1`` to force the
fallback (used by the backend-parity tests and the benchmark).
"""

import os

if os.environ.get("SWARMFORM_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND

wrap_angle = _impl.wrap_angle
step_unicycle = _impl.step_unicycle
pid_increment = _impl.pid_increment
rollout_fitness = _impl.rollout_fitness

__all__ = [
    "BACKEND",
    "wrap_angle",
    "step_unicycle",
    "pid_increment",
    "rollout_fitness",
]
