#!/usr/bin/env python3
"""Record a 96-node scenario session for the console test fixtures.

Talks to the monitoring service exclusively over its public HTTP surface:
simulator batches go to POST /ingest and /jobs, the delta stream is read
from GET /stream, and the reference final state from GET /snapshot. The
recording is self-checked (replaying the deltas must reproduce the final
snapshot byte-identically) before it is written.

Usage: python scripts/record_session.py [out.json]
"""

from __future__ import annotations

import json
import sys
import threading
import time
import urllib.request
from pathlib import Path

from rackwatch.httpd import serve
from rackwatch.service import apply_events, canonical_json
from rackwatch.sim import Scenario, Simulator

BASE_NS = 1_623_339_000 * 10**9
CADENCE = 0.05

CONFIG = {
    "listen": "127.0.0.1:0",
    "cadence_seconds": CADENCE,
    "retention_hours": 1e6,
    # wall-clock heartbeat timeout scaled to the recording pace so the
    # node-down scenario actually turns its target red in the fixture
    "thresholds": {"heartbeat_timeout_s": 0.3},
    "topology": {"racks": 2, "nodes_per_rack": 48, "profiles": ["xeon-p8260", "gaia-v100"], "seed": 96},
}

SCENARIOS = [
    Scenario("metadata-storm", ["n0003", "n0004"], 2, 10_000, magnitude=893817.0, job_id="23159087"),
    Scenario("node-down", ["n0011"], 2, 10_000),
    Scenario("overheat", ["n0017"], 3, 10_000, magnitude=86.0),
    Scenario("oom", ["n0021"], 3, 10_000),
    Scenario("mount-loss", ["n0030"], 4, 10_000),
    Scenario("gpu-hog", ["n0049"], 4, 10_000),
    Scenario("power-spike", ["n0052"], 5, 10_000),
    Scenario("version-drift", ["n0040"], 5, 10_000),
]

TICKS = 10


def post(url: str, body: str) -> dict:
    req = urllib.request.Request(url, data=body.encode(), method="POST")
    with urllib.request.urlopen(req, timeout=10) as resp:
        return json.loads(resp.read())


def main() -> int:
    out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent.parent / "test/fixtures/session96.json"
    handle = serve(CONFIG)
    lines: list[str] = []
    stop = threading.Event()

    def read_stream():
        req = urllib.request.Request(handle.url + "/stream")
        with urllib.request.urlopen(req, timeout=30) as resp:
            while not stop.is_set():
                line = resp.readline()
                if not line:
                    break
                lines.append(line.decode())

    reader = threading.Thread(target=read_stream, daemon=True)
    try:
        reader.start()
        time.sleep(3 * CADENCE)
        sim = Simulator(handle.core.topology, seed=96, tick_seconds=30.0, base_time_ns=BASE_NS, jobs=3)
        for sc in SCENARIOS:
            sim.inject(sc)
        for tick in range(TICKS):
            batch = sim.step(tick)
            post(handle.url + "/ingest", batch.text)
            if batch.job_events:
                post(handle.url + "/jobs", "\n".join(batch.job_events))
            time.sleep(CADENCE * 1.5)
        time.sleep(4 * CADENCE)
        with urllib.request.urlopen(handle.url + "/snapshot", timeout=10) as resp:
            final = json.loads(resp.read())
        deadline = time.time() + 5
        while time.time() < deadline:
            events = [json.loads(l) for l in lines if l.strip()]
            done = any(e["kind"] == "rollup" and e["seq"] >= final["seq"] for e in events)
            if done:
                break
            time.sleep(CADENCE)
        stop.set()
    finally:
        handle.stop()

    events = [json.loads(l) for l in lines if l.strip()]
    assert events and events[0]["kind"] == "snapshot", "stream must open with a snapshot"
    initial = events[0]["payload"]
    deltas = [
        e
        for e in events[1:]
        if e["kind"] != "heartbeat" and initial["seq"] < e["seq"] <= final["seq"]
    ]
    reconstructed = apply_events(initial, deltas)
    assert canonical_json(reconstructed) == canonical_json(final), "recording failed self-check"

    fixture = {
        "meta": {
            "nodes": len(final["nodes"]),
            "initial_seq": initial["seq"],
            "final_seq": final["seq"],
            "scenarios": [s.to_dict() for s in SCENARIOS],
        },
        "initial": initial,
        "events": deltas,
        "final": final,
    }
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(fixture) + "\n")
    print(f"wrote {out_path} ({out_path.stat().st_size / 1024:.0f} KiB, "
          f"{len(deltas)} events, seq {initial['seq']} -> {final['seq']})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
