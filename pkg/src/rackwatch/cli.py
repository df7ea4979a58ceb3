"""Command line entry points: serve, sim, query, bench."""

from __future__ import annotations

import argparse
import json
import sys
import time
import urllib.error
import urllib.request
from pathlib import Path

from .bench import run_bench
from .httpd import serve
from .lineproto import parse_batch
from .query import QueryEvalError, QueryParseError, eval_query, format_table, parse_query, rows_to_json, _rfc3339_ns
from .sim import ScenarioError, Simulator, TopologyError, build_topology, load_scenarios
from .store import TimeSeriesStore


def _post(url: str, body: str) -> dict:
    req = urllib.request.Request(url, data=body.encode(), method="POST")
    with urllib.request.urlopen(req, timeout=10) as resp:
        return json.loads(resp.read())


def cmd_serve(args) -> int:
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as err:
        print(f"cannot read config: {err}", file=sys.stderr)
        return 1
    if args.listen:
        config["listen"] = args.listen
    try:
        handle = serve(config, config_path=args.config)
    except (OSError, ValueError) as err:
        print(f"startup failed: {err}", file=sys.stderr)
        return 1
    print(f"serving on {handle.url} (cadence {handle.cadence_s}s)", file=sys.stderr)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        handle.stop()
    return 0


def cmd_sim(args) -> int:
    try:
        topology = build_topology(args.racks, args.nodes_per_rack, args.profile, args.seed)
    except TopologyError as err:
        print(f"bad topology: {err}", file=sys.stderr)
        return 1
    base = time.time_ns() if args.base_time == "now" else int(args.base_time)
    sim = Simulator(topology, seed=args.seed, tick_seconds=args.tick_seconds, base_time_ns=base, jobs=args.jobs)
    if args.scenario:
        try:
            for sc in load_scenarios(Path(args.scenario).read_text()):
                sim.inject(sc)
        except (OSError, ScenarioError, KeyError, json.JSONDecodeError) as err:
            print(f"bad scenario file: {err}", file=sys.stderr)
            return 1
    to_stdout = args.target == "stdout"
    interval = 1.0 / args.rate if args.rate > 0 else 0.0
    tick = 0
    try:
        while args.ticks == 0 or tick < args.ticks:
            started = time.perf_counter()
            batch = sim.step(tick)
            if to_stdout:
                sys.stdout.write(batch.text)
                sys.stdout.write("\n")
                for ev in batch.job_events:
                    sys.stdout.write(f"# job {ev}\n")
                sys.stdout.flush()
            else:
                try:
                    _post(args.target.rstrip("/") + "/ingest", batch.text)
                    if batch.job_events:
                        _post(args.target.rstrip("/") + "/jobs", "\n".join(batch.job_events))
                except urllib.error.URLError as err:
                    print(f"post failed: {err}", file=sys.stderr)
                    return 1
            tick += 1
            if interval:
                remaining = interval - (time.perf_counter() - started)
                if remaining > 0:
                    time.sleep(remaining)
    except KeyboardInterrupt:
        pass
    return 0


def _parse_now(text: str | None) -> int:
    if not text or text == "now":
        return time.time_ns()
    try:
        return int(text)
    except ValueError:
        return _rfc3339_ns(text)


def cmd_query(args) -> int:
    store = TimeSeriesStore()
    receipt = time.time_ns()
    if args.file:
        try:
            text = Path(args.file).read_text()
        except OSError as err:
            print(f"cannot read {args.file}: {err}", file=sys.stderr)
            return 1
        samples, errors = parse_batch(text, receipt)
        store.insert_many(samples)
        if errors:
            print(f"warning: {len(errors)} unparseable lines (first: line {errors[0][0]}: {errors[0][1]})", file=sys.stderr)
    now_ns = _parse_now(args.now)
    try:
        ast = parse_query(args.query)
        rows = eval_query(store, ast, now_ns)
    except (QueryParseError, QueryEvalError) as err:
        print(str(err), file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps(rows_to_json(rows), indent=2))
    else:
        print(format_table(rows, ast.source_measurement()))
    return 0


def cmd_bench(args) -> int:
    report = run_bench(samples=args.samples, include_e2e=args.e2e)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rackwatch", description="Real-time cluster monitoring stack")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the monitoring service")
    p.add_argument("--config", required=True, help="JSON config (listen, thresholds, topology)")
    p.add_argument("--listen", help="override listen address host:port")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("sim", help="emit synthetic cluster telemetry")
    p.add_argument("--racks", type=int, default=2)
    p.add_argument("--nodes-per-rack", type=int, default=24)
    p.add_argument("--profile", action="append", default=None, help="node profile (repeatable for a mix)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--rate", type=float, default=1.0, help="ticks per wall second; 0 = flat out")
    p.add_argument("--ticks", type=int, default=0, help="tick count; 0 = run until interrupted")
    p.add_argument("--tick-seconds", type=float, default=30.0, help="simulated seconds per tick")
    p.add_argument("--jobs", type=int, default=0, help="baseline job mix size")
    p.add_argument("--base-time", default="now", help="'now' or epoch nanoseconds for the first tick")
    p.add_argument("--scenario", help="JSON scenario file")
    p.add_argument("--target", default="stdout", help="'stdout' or service base URL")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("query", help="run a query against a line-protocol file")
    p.add_argument("query", help="query text")
    p.add_argument("--file", help="line-protocol file to load")
    p.add_argument("--now", help="'now', epoch ns, or RFC3339 evaluation time")
    p.add_argument("--json", action="store_true", help="print JSON rows instead of the table")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="measure parse+insert throughput")
    p.add_argument("--samples", type=lambda s: int(float(s)), default=200_000)
    p.add_argument("--e2e", action="store_true", help="also measure fault-to-snapshot latency")
    p.add_argument("--out", help="write the JSON report here too")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sim" and args.profile is None:
        args.profile = ["xeon-p8260"]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
