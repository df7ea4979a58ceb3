from __future__ import annotations

import json
import random

import pytest
import requests

from rackwatch.httpd import serve
from rackwatch.query import eval_query, parse_query, rows_to_json
from rackwatch.service import apply_events, canonical_json
from rackwatch.sim import Scenario, Simulator, build_topology

from conftest import BASE_NS, NOW_NS, STORM_JOBS, STORM_QUERY, core_for, drive, storm_simulator

NS = 10**9


# -- core ingestion -----------------------------------------------------------


def test_ingest_counts_all_valid():
    core = core_for(build_topology(1, 2, "xeon-p8260", seed=1))
    out = core.apply_ingest("cpu,host=n0001 load1=1 1\ncpu,host=n0001 load1=2 2\ncpu,host=n0001 load1=3 3")
    assert out == {"accepted": 3, "rejected": 0, "first_errors": []}


def test_ingest_mixed_counts_and_errors():
    core = core_for(build_topology(1, 2, "xeon-p8260", seed=1))
    out = core.apply_ingest("cpu,host=n0001 load1=1 1\nbad line=\ncpu,host=n0001 load1=3 3")
    assert out["accepted"] == 2
    assert out["rejected"] == 1
    assert "line 2" in out["first_errors"][0]


def test_replayed_simulator_day_point_count_matches_emitted():
    topo = build_topology(1, 4, "xeon-p8260", seed=2)
    sim = Simulator(topo, seed=2, tick_seconds=300.0, base_time_ns=BASE_NS)
    core = core_for(topo)
    emitted = 0
    for tick in range(288):  # one simulated day at 5-minute ticks
        batch = sim.step(tick)
        emitted += batch.field_count
        out = core.apply_ingest(batch.text, receipt_ns=sim.tick_time_ns(tick))
        assert out["rejected"] == 0
    assert core.store.ingested_points == emitted


def test_cold_start_snapshot_all_offline():
    topo = build_topology(2, 3, "xeon-p8260", seed=3)
    core = core_for(topo)
    snapshot, _ = core.evaluation_tick(NOW_NS)
    assert snapshot["seq"] == 1
    assert len(snapshot["nodes"]) == len(topo.monitored_nodes())
    assert all(n["state"] == "offline" for n in snapshot["nodes"])
    assert all(n["last_seen"] is None for n in snapshot["nodes"])


def test_quiescent_tick_emits_no_node_events_but_advances_seq():
    topo = build_topology(1, 3, "xeon-p8260", seed=4)
    sim = Simulator(topo, seed=4, tick_seconds=30.0, base_time_ns=BASE_NS)
    core = core_for(topo)
    drive(core, sim, 2)
    now = sim.tick_time_ns(2)
    snap_a, _ = core.evaluation_tick(now)
    snap_b, events = core.evaluation_tick(now + NS)  # nothing ingested between
    assert snap_b["seq"] == snap_a["seq"] + 1
    assert [e for e in events if e["kind"] == "node_status"] == []
    assert [e["kind"] for e in events] == ["rollup"]


def test_single_crossing_node_emits_single_event():
    topo = build_topology(1, 3, "xeon-p8260", seed=5)
    sim = Simulator(topo, seed=5, tick_seconds=30.0, base_time_ns=BASE_NS)
    core = core_for(topo)
    drive(core, sim, 2)
    now = sim.tick_time_ns(2)
    core.evaluation_tick(now)
    core.apply_ingest("env,host=n0002,rack=r01 temp_c=99.0,power_w=400.0,fan_rpm=5000 " + str(now), receipt_ns=now)
    _, events = core.evaluation_tick(now + NS)
    node_events = [e for e in events if e["kind"] == "node_status"]
    assert len(node_events) == 1
    assert node_events[0]["payload"]["node_id"] == "n0002"
    assert node_events[0]["payload"]["state"] == "crit"


def test_jobs_lifecycle_reaches_snapshot_and_nodes():
    topo = build_topology(1, 3, "xeon-p8260", seed=6)
    sim = Simulator(topo, seed=6, tick_seconds=30.0, base_time_ns=BASE_NS)
    core = core_for(topo)
    drive(core, sim, 2)
    core.apply_job_text('{"job_id":"j1","user":"u9","nodes":["n0002"],"event":"start","ts_ns":5}')
    snapshot, events = core.evaluation_tick(sim.tick_time_ns(2))
    assert snapshot["jobs"] == [{"job_id": "j1", "user": "u9", "nodes": ["n0002"], "started_ns": 5}]
    assert any(e["kind"] == "job" for e in events)
    by_id = {n["node_id"]: n for n in snapshot["nodes"]}
    assert by_id["n0002"]["jobs"] == [["j1", "u9"]]
    assert "job_occupancy" in by_id["n0002"]["alerts"]
    core.apply_job_text('{"job_id":"j1","user":"u9","nodes":[],"event":"end","ts_ns":9}')
    snapshot, _ = core.evaluation_tick(sim.tick_time_ns(2) + NS)
    assert snapshot["jobs"] == []


def test_final_snapshot_equals_recompute_from_scratch():
    topo = build_topology(2, 4, ["xeon-p8260", "gaia-v100"], seed=7)
    rng = random.Random(71)
    script = [
        Scenario("overheat", ["n0002"], 3, 9, magnitude=86.0),
        Scenario("node-down", ["n0005"], 2, 10_000),
        Scenario("metadata-storm", ["n0001"], 4, 10_000, job_id="stormy"),
        Scenario("oom", ["n0007"], 5, 10_000),
    ]

    def run(ticks):
        sim = Simulator(topo, seed=7, tick_seconds=30.0, base_time_ns=BASE_NS)
        for sc in script:
            sim.inject(Scenario(**sc.to_dict()))
        core = core_for(topo)
        history = drive(core, sim, ticks)
        return sim, core, history

    _, core, history = run(12)
    final_snapshot = history[-1][1]
    final_now = history[-1][0] * 30 * NS + BASE_NS

    # replay the same raw batches into a fresh core, evaluate exactly once
    sim2, fresh, _ = run(0), None, None
    sim2, fresh = sim2[0], core_for(topo)
    for tick in range(12):
        batch = sim2.step(tick)
        fresh.apply_ingest(batch.text, receipt_ns=sim2.tick_time_ns(tick))
        if batch.job_events:
            fresh.apply_job_text("\n".join(batch.job_events))
    recomputed, _ = fresh.evaluation_tick(final_now)
    for key in ("nodes", "rollup", "jobs", "sensors", "topology_digest", "generated_at"):
        assert canonical_json(recomputed[key]) == canonical_json(final_snapshot[key])


def test_snapshot_stream_coherence_over_random_script():
    topo = build_topology(2, 4, ["xeon-p8260", "gaia-v100"], seed=8)
    sim = Simulator(topo, seed=8, tick_seconds=30.0, base_time_ns=BASE_NS, jobs=2)
    rng = random.Random(81)
    kinds = ["overheat", "oom", "cpu-hog", "disk-fill", "power-spike", "version-drift", "mount-loss", "hw-fault"]
    nodes = [n for _, ns_ in topo.racks for n in ns_]
    for _ in range(5):
        start = rng.randrange(1, 20)
        sim.inject(
            Scenario(rng.choice(kinds), [rng.choice(nodes)], start, start + rng.randrange(2, 12))
        )
    core = core_for(topo)
    sub, _ = core.subscribe(maxsize=100_000)
    snapshots = {}
    for tick, snapshot, _ in drive(core, sim, 25):
        snapshots[snapshot["seq"]] = snapshot
    events = []
    while not sub.queue.empty():
        events.append(sub.queue.get_nowait())
    seqs = sorted(snapshots)
    for _ in range(12):
        k = rng.choice(seqs[:-1])
        m = rng.choice([s for s in seqs if s > k])
        window = [e for e in events if k < e["seq"] <= m]
        reconstructed = apply_events(snapshots[k], window)
        assert canonical_json(reconstructed) == canonical_json(snapshots[m])


def test_replay_invariant_holds_from_initial_snapshot():
    topo = build_topology(1, 3, "xeon-p8260", seed=9)
    sim = Simulator(topo, seed=9, tick_seconds=30.0, base_time_ns=BASE_NS)
    core = core_for(topo)
    sub, initial = core.subscribe(maxsize=100_000)
    history = drive(core, sim, 6)
    events = []
    while not sub.queue.empty():
        events.append(sub.queue.get_nowait())
    reconstructed = apply_events(initial, events)
    assert canonical_json(reconstructed) == canonical_json(history[-1][1])


def test_slow_subscriber_marked_dead_not_blocking():
    topo = build_topology(1, 2, "xeon-p8260", seed=10)
    core = core_for(topo)
    sub, _ = core.subscribe(maxsize=2)
    for i in range(5):
        core.evaluation_tick(BASE_NS + i * NS)
    assert sub.dead
    assert core.snapshot["seq"] == 5  # evaluation never stalled


# -- HTTP service ----------------------------------------------------------------


@pytest.fixture()
def service():
    config = {
        "listen": "127.0.0.1:0",
        "cadence_seconds": 0.05,
        "retention_hours": 1e6,
        "topology": {"racks": 1, "nodes_per_rack": 4, "profiles": ["xeon-p8260"], "seed": 13},
    }
    handle = serve(config)
    try:
        yield handle
    finally:
        handle.stop()


def test_http_ingest_and_snapshot(service):
    url = service.url
    out = requests.post(f"{url}/ingest", data="cpu,host=n0001 load1=1 1\ncpu,host=n0001 load1=2 2\ncpu,host=n0001 load1=3 3").json()
    assert out["accepted"] == 3
    snap = requests.get(f"{url}/snapshot").json()
    assert {n["node_id"] for n in snap["nodes"]} == set(service.core.topology.monitored_nodes())


def test_http_cold_start_all_offline(service):
    snap = requests.get(f"{service.url}/snapshot").json()
    assert all(n["state"] == "offline" for n in snap["nodes"])


def test_http_fully_bad_ingest_is_400_and_service_survives(service):
    r = requests.post(f"{service.url}/ingest", data="complete nonsense\nmore garbage=")
    assert r.status_code == 400
    assert r.json()["rejected"] == 2
    assert requests.get(f"{service.url}/healthz").json()["status"] == "ok"


def test_http_mixed_ingest_partial_success(service):
    r = requests.post(f"{service.url}/ingest", data="cpu,host=n0001 load1=1 1\nbad=")
    assert r.status_code == 200
    assert r.json() == {"accepted": 1, "rejected": 1, "first_errors": r.json()["first_errors"]}


def test_http_query_online_equals_offline(service):
    sim = storm_simulator(seed=5)
    for tick in range(31):
        requests.post(f"{service.url}/ingest", data=sim.step(tick).text)
    body = json.dumps({"q": STORM_QUERY, "now_ns": NOW_NS})
    out = requests.post(f"{service.url}/query", data=body).json()
    offline_rows = eval_query(service.core.store, parse_query(STORM_QUERY), NOW_NS)
    assert out["rows"] == json.loads(json.dumps(rows_to_json(offline_rows)))
    assert [(r["values"]["jobid"], r["values"]["opens_last_10m"]) for r in out["rows"]] == STORM_JOBS
    assert out["table"].startswith("name: lustre")


def test_http_query_parse_error_reports_position(service):
    r = requests.post(f"{service.url}/query", data='SELECT MEAN("x") FROM')
    assert r.status_code == 400
    assert "position" in r.json()


def test_http_jobs_endpoint(service):
    r = requests.post(
        f"{service.url}/jobs",
        data='{"job_id":"23159087","user":"u42","nodes":["n0001","n0002"],"event":"start","ts_ns":0}',
    )
    assert r.json()["accepted"] == 1
    deadline = 50
    while deadline:
        snap = requests.get(f"{service.url}/snapshot").json()
        if snap["jobs"]:
            break
        deadline -= 1
    assert snap["jobs"][0]["job_id"] == "23159087"


def test_http_reload_thresholds_and_validation(service):
    sim = Simulator(service.core.topology, seed=13, tick_seconds=30.0, base_time_ns=BASE_NS)
    import time as _time

    requests.post(f"{service.url}/ingest", data=sim.step(0).text)
    bad = requests.post(f"{service.url}/reload", data='{"temp_warn_c": 95, "temp_crit_c": 90}')
    assert bad.status_code == 400
    assert any("warn < crit" in v for v in bad.json()["errors"])
    ok = requests.post(f"{service.url}/reload", data='{"temp_warn_c": 1, "temp_crit_c": 2}')
    assert ok.status_code == 200
    assert service.core.thresholds.temp_warn_c == 1.0
    _time.sleep(0.2)  # a couple of cadences
    snap = requests.get(f"{service.url}/snapshot").json()
    by_id = {n["node_id"]: n for n in snap["nodes"]}
    assert "temperature" in by_id["n0001"]["alerts"]


def test_http_reload_empty_body_rereads_config(tmp_path):
    cfg = tmp_path / "svc.json"
    cfg.write_text(
        json.dumps(
            {
                "listen": "127.0.0.1:0",
                "cadence_seconds": 0.05,
                "thresholds": {"temp_crit_c": 90},
                "topology": {"racks": 1, "nodes_per_rack": 2, "profiles": ["xeon-p8260"], "seed": 1},
            }
        )
    )
    handle = serve(json.loads(cfg.read_text()), config_path=str(cfg))
    try:
        cfg.write_text(json.dumps({"thresholds": {"temp_crit_c": 99}}))
        out = requests.post(f"{handle.url}/reload", data="").json()
        assert out["thresholds"]["temp_crit_c"] == 99.0
        assert handle.core.thresholds.temp_crit_c == 99.0
    finally:
        handle.stop()


def test_http_stream_snapshot_then_deltas_dual_channel(service):
    url = service.url
    sim = Simulator(service.core.topology, seed=13, tick_seconds=30.0, base_time_ns=BASE_NS)
    requests.post(f"{url}/ingest", data=sim.step(0).text)

    with requests.get(f"{url}/stream", stream=True, timeout=10) as stream:
        lines = stream.iter_lines()
        first = json.loads(next(lines))
        assert first["kind"] == "snapshot"
        state = first["payload"]
        requests.post(f"{url}/ingest", data=sim.step(1).text)
        # grab a second channel's full snapshot, then read the delta stream
        # until the tick that snapshot belongs to is complete (its rollup
        # event is always the last event of a tick)
        with requests.get(f"{url}/stream", stream=True, timeout=10) as stream2:
            second = json.loads(next(stream2.iter_lines()))
        target_seq = second["payload"]["seq"]
        assert target_seq >= state["seq"]
        collected = []
        for raw in lines:
            ev = json.loads(raw)
            if ev["kind"] == "heartbeat":
                continue
            collected.append(ev)
            if ev["kind"] == "rollup" and ev["seq"] >= target_seq:
                break
        window = [e for e in collected if e["seq"] <= target_seq]
        reconstructed = apply_events(state, window)
        assert canonical_json(reconstructed) == canonical_json(second["payload"])


def test_http_unknown_path_404(service):
    assert requests.get(f"{service.url}/nope").status_code == 404
    assert requests.post(f"{service.url}/nope").status_code == 404


def test_http_cors_headers_for_console(service):
    r = requests.get(f"{service.url}/snapshot")
    assert r.headers["Access-Control-Allow-Origin"] == "*"
    r = requests.options(f"{service.url}/reload")
    assert r.status_code == 204
    assert "POST" in r.headers["Access-Control-Allow-Methods"]


def test_concurrent_ingest_query_and_ticks_stay_consistent():
    import threading

    topo = build_topology(1, 4, "xeon-p8260", seed=17)
    core = core_for(topo)
    sims = [Simulator(topo, seed=17 + i, tick_seconds=30.0, base_time_ns=BASE_NS) for i in range(3)]
    errors: list[Exception] = []
    batches_per_thread = 30

    def ingest(sim):
        try:
            for tick in range(batches_per_thread):
                out = core.apply_ingest(sim.step(tick).text, receipt_ns=sim.tick_time_ns(tick))
                assert out["rejected"] == 0
        except Exception as err:  # surface across the thread boundary
            errors.append(err)

    def query_loop():
        try:
            ast = parse_query(
                'SELECT MEAN("load1") FROM "cpu" WHERE time >= 0 AND time <= 4000000000000000000 '
                "GROUP BY host, time(30s)"
            )
            for _ in range(50):
                rows = eval_query(core.store, ast, NOW_NS)
                for r in rows:
                    assert 0.0 <= r.values["mean"] <= 48.0
        except Exception as err:
            errors.append(err)

    def tick_loop():
        try:
            for i in range(20):
                core.evaluation_tick(BASE_NS + i * NS)
        except Exception as err:
            errors.append(err)

    threads = [threading.Thread(target=ingest, args=(s,)) for s in sims]
    threads += [threading.Thread(target=query_loop), threading.Thread(target=tick_loop)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=60)
    assert errors == []
    # all three sims write the same series at the same timestamps: every
    # field write is counted, but duplicates collapse to one stored point
    probe = Simulator(topo, seed=17, tick_seconds=30.0, base_time_ns=BASE_NS)
    per_tick = probe.step(0).field_count
    monitored = len(topo.monitored_nodes())
    numeric_per_tick = per_tick - 2 * monitored  # stack_version and mounts are latest-only
    assert core.store.ingested_points == 3 * batches_per_thread * per_tick
    assert core.store.point_count() == batches_per_thread * numeric_per_tick
    assert core.snapshot["seq"] == 20


def test_noop_threshold_reload_causes_no_status_churn():
    topo = build_topology(1, 3, "xeon-p8260", seed=15)
    sim = Simulator(topo, seed=15, tick_seconds=30.0, base_time_ns=BASE_NS)
    core = core_for(topo)
    drive(core, sim, 2)
    now = sim.tick_time_ns(2)
    core.evaluation_tick(now)
    core.swap_thresholds(core.thresholds)  # save without changes
    _, events = core.evaluation_tick(now + NS)
    assert [e["kind"] for e in events] == ["rollup"]
