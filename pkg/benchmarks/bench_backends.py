"""Compare the compiled kernels against the pure-Python fallback.

Times the hot kernel entry points directly (both backends are imported
side by side) and then a short end-to-end scenario run per backend via
subprocess, since the backend is chosen at import time.

Usage: python3 benchmarks/bench_backends.py
"""

import math
import os
import subprocess
import sys
import time

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from swarmform.kernels import _pykernels  # noqa: E402

try:
    from swarmform.kernels import _ckernels
except ImportError:
    _ckernels = None


def time_calls(fn, args_list, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return len(args_list) / best


def kernel_args(n=20_000):
    rng = np.random.default_rng(0)
    rollout = []
    pid = []
    for _ in range(n):
        gains = rng.uniform(0.0, 10.0, size=9)
        errors = rng.uniform(-2.0, 2.0, size=9)
        pid.append((*errors, *gains))
        rollout.append((*gains, *errors,
                        rng.uniform(-2, 2), rng.uniform(-2, 2),
                        *rng.uniform(-0.2, 0.2, size=3),
                        0.1, 40, 2.0, math.pi, 0.5, 10.0))
    return pid, rollout


def bench_kernels():
    pid_args, rollout_args = kernel_args()
    rows = []
    for name, fn_args in (("pid_increment", pid_args),
                          ("rollout_fitness(h=40)", rollout_args)):
        py = time_calls(getattr(_pykernels, name.split("(")[0]), fn_args)
        row = [name, f"{py:12.0f}"]
        if _ckernels is not None:
            cy = time_calls(getattr(_ckernels, name.split("(")[0]), fn_args)
            row += [f"{cy:12.0f}", f"{cy / py:8.1f}x"]
        rows.append(row)
    header = ["kernel", "python c/s"]
    if _ckernels is not None:
        header += ["cython c/s", "speedup"]
    print("  ".join(f"{h:>22}" for h in header))
    for row in rows:
        print("  ".join(f"{c:>22}" for c in row))


def bench_end_to_end():
    config = os.path.join(ROOT, "scenarios", "straight.json")
    print("\nend-to-end (straight scenario, 200 steps):")
    for label, env_val in (("cython", None), ("python", "1")):
        if label == "cython" and _ckernels is None:
            continue
        env = dict(os.environ)
        env.pop("SWARMFORM_PURE_PYTHON", None)
        if env_val:
            env["SWARMFORM_PURE_PYTHON"] = env_val
        code = (
            "import time, sys; sys.path.insert(0, r'%s');"
            "from swarmform.cli import parse_config;"
            "from swarmform.engine import run;"
            "cfg = parse_config(r'%s', {'max_steps': 200});"
            "t0 = time.perf_counter(); run(cfg);"
            "print('%%0.2f' %% (time.perf_counter() - t0))"
            % (os.path.join(ROOT, "src"), config))
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        print(f"  {label:>7}: {out.stdout.strip()}s")


if __name__ == "__main__":
    if _ckernels is None:
        print("compiled kernels not available; timing the fallback only\n")
    bench_kernels()
    bench_end_to_end()
