"""Regenerate the golden artifacts under golden/.

Runs the three shipped scenarios and writes:
  golden/straight_trace.csv      straight-line scenario, its file seed
  golden/uturn_trace.csv         u-turn scenario, its file seed
  golden/scalability_summary.csv batch over populations {5,7,9,11} x 10

Set SWARMFORM_THREADS to parallelize the batch. Output is byte-stable
for a given package version; regenerate only when the simulator's
numeric behavior intentionally changes.
"""

import json
import os
import sys
import time

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from swarmform.cli import parse_config  # noqa: E402
from swarmform.engine import (  # noqa: E402
    atomic_write_text,
    run,
    scalability_batch,
    write_summary_csv,
    write_trace_csv,
)

GOLDEN = os.path.join(ROOT, "golden")


def main() -> int:
    os.makedirs(GOLDEN, exist_ok=True)

    for name, out in (("straight", "straight_trace.csv"),
                      ("uturn", "uturn_trace.csv")):
        cfg = parse_config(os.path.join(ROOT, "scenarios", f"{name}.json"))
        t0 = time.perf_counter()
        trace = run(cfg)
        write_trace_csv(trace, os.path.join(GOLDEN, out))
        atomic_write_text(
            os.path.join(GOLDEN, f"{name}_config.json"),
            json.dumps(cfg.to_dict(), indent=2) + "\n")
        print(f"{out}: {trace.n_steps} steps in "
              f"{time.perf_counter() - t0:.1f}s")

    cfg = parse_config(os.path.join(ROOT, "scenarios", "scalability.json"))
    t0 = time.perf_counter()
    rows = scalability_batch([5, 7, 9, 11], 10, cfg)
    write_summary_csv(rows, os.path.join(GOLDEN, "scalability_summary.csv"))
    print(f"scalability_summary.csv: {len(rows)} rows in "
          f"{time.perf_counter() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
