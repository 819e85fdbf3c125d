"""Leader-follower formation control simulator with online BSO-tuned
incremental PID controllers."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
