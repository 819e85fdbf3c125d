"""Command-line front end: run single scenarios, scalability batches,
and validate configuration files.

Precedence for every setting: --set override > config file > default.
No output is written unless the configuration validates. Partial
outputs are removed when a command fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .engine import (
    ConfigError,
    ScenarioConfig,
    atomic_write_text,
    config_from_dict,
    run,
    scalability_batch,
    write_summary_csv,
    write_trace_csv,
)


def _set_dotted(d: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    cur = d
    for p in parts[:-1]:
        nxt = cur.get(p)
        if not isinstance(nxt, dict):
            nxt = {}
            cur[p] = nxt
        cur = nxt
    cur[parts[-1]] = value


def _parse_override(raw: str) -> tuple[str, object]:
    if "=" not in raw:
        raise ConfigError(f"--set expects KEY=VALUE, got {raw!r}")
    key, text = raw.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"--set expects KEY=VALUE, got {raw!r}")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key, value


def parse_config(path: str, overrides: dict[str, object] | None = None,
                 ) -> ScenarioConfig:
    """Load a JSON scenario file, apply dotted-path overrides, validate."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    # Nulls mean "use the default" so overrides can target nested keys.
    data = {k: v for k, v in data.items() if v is not None}
    for key, value in (overrides or {}).items():
        _set_dotted(data, key, value)
    return config_from_dict(data)


def _collect_overrides(args) -> dict[str, object]:
    overrides: dict[str, object] = {}
    for raw in args.set or []:
        key, value = _parse_override(raw)
        overrides[key] = value
    if args.seed is not None:
        overrides["seed"] = args.seed
    return overrides


def _cmd_run(args) -> int:
    cfg = parse_config(args.config, _collect_overrides(args))
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    trace_path = os.path.join(out_dir, "trace.csv")
    config_path = os.path.join(out_dir, "config.json")
    try:
        trace = run(cfg)
        write_trace_csv(trace, trace_path)
        atomic_write_text(config_path, json.dumps(cfg.to_dict(), indent=2) + "\n")
    except BaseException:
        for p in (trace_path, config_path):
            if os.path.exists(p):
                os.unlink(p)
        raise
    last = trace.n_steps - 1
    print(f"wrote {trace_path} ({trace.n_steps} steps)")
    print("final error norms:")
    for rec in trace.records:
        if rec.step == last and rec.robot_id != 0:
            print(f"  robot {rec.robot_id}: {rec.err_norm:.6f}")
    return 0


def _cmd_batch(args) -> int:
    cfg = parse_config(args.config, _collect_overrides(args))
    try:
        populations = [int(p) for p in args.populations.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(
            f"--populations expects a comma-separated list of integers, "
            f"got {args.populations!r}") from None
    if not populations:
        raise ConfigError("--populations list is empty")
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def on_trace(pop, run_index, trace):
        run_dir = os.path.join(out_dir, f"pop{pop:03d}_run{run_index:02d}")
        os.makedirs(run_dir, exist_ok=True)
        path = os.path.join(run_dir, "trace.csv")
        write_trace_csv(trace, path)
        written.append(path)

    summary_path = os.path.join(out_dir, "summary.csv")
    try:
        rows = scalability_batch(populations, args.runs, cfg, on_trace=on_trace)
        write_summary_csv(rows, summary_path)
    except BaseException:
        for p in written + [summary_path]:
            if os.path.exists(p):
                os.unlink(p)
        raise
    print(f"wrote {summary_path} ({len(rows)} rows)")
    return 0


def _cmd_validate(args) -> int:
    cfg = parse_config(args.config, _collect_overrides(args))
    print(f"ok: {args.config} (n_robots={cfg.n_robots}, seed={cfg.seed})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmform",
        description="Leader-follower formation simulator with online "
                    "BSO-tuned incremental PID control.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="dotted-path config override (repeatable)")

    p_run = sub.add_parser("run", help="run one scenario and write its trace")
    common(p_run)
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_batch = sub.add_parser("batch", help="run a scalability batch")
    common(p_batch)
    p_batch.add_argument("--out", default="out", help="output directory")
    p_batch.add_argument("--populations", default="5,7,9,11",
                         help="comma-separated odd population sizes")
    p_batch.add_argument("--runs", type=int, default=10,
                         help="seeded runs per population")
    p_batch.set_defaults(func=_cmd_batch)

    p_val = sub.add_parser("validate", help="validate a scenario file")
    common(p_val)
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
