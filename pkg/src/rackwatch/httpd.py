"""HTTP surface of the state service.

Endpoints: POST /ingest (line protocol), POST /jobs (job-event JSON lines),
GET /snapshot, GET /stream (NDJSON: full snapshot first, then deltas,
heartbeat every 10 s), POST /query, POST /reload, GET /healthz.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .alerts import ThresholdError, load_thresholds
from .query import QueryEvalError, QueryParseError, eval_query, format_table, parse_query, rows_to_json
from .service import MonitorCore
from .sim import build_topology

HEARTBEAT_INTERVAL_S = 10.0


def core_from_config(config: dict) -> MonitorCore:
    topo_cfg = config.get("topology", {})
    topology = build_topology(
        racks=int(topo_cfg.get("racks", 2)),
        nodes_per_rack=int(topo_cfg.get("nodes_per_rack", 24)),
        profile_mix=topo_cfg.get("profiles", ["xeon-p8260"]),
        seed=int(topo_cfg.get("seed", 0)),
    )
    thresholds = load_thresholds(json.dumps(config.get("thresholds", {})))
    retention_s = float(config.get("retention_hours", 24.0)) * 3600.0
    return MonitorCore(topology, thresholds, retention_s=retention_s)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "MonitorServer"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _send_json(self, code: int, obj) -> None:
        payload = json.dumps(obj).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        core = self.server.core
        if self.path == "/snapshot":
            self._send_json(200, core.snapshot)
        elif self.path == "/healthz":
            uptime = (time.time_ns() - core.started_ns) / 1e9
            self._send_json(200, {"status": "ok", "seq": core.snapshot["seq"], "uptime_s": uptime})
        elif self.path == "/stream":
            self._stream()
        else:
            self._send_json(404, {"error": f"no such path {self.path}"})

    def do_POST(self):
        core = self.server.core
        body = self._body()
        if self.path == "/ingest":
            result = core.apply_ingest(body.decode("utf-8", errors="replace"))
            if result["accepted"] == 0 and result["rejected"] > 0:
                self._send_json(400, result)
            else:
                self._send_json(200, result)
        elif self.path == "/jobs":
            result = core.apply_job_text(body.decode("utf-8", errors="replace"))
            code = 400 if result["accepted"] == 0 and result["rejected"] > 0 else 200
            self._send_json(code, result)
        elif self.path == "/query":
            self._query(body)
        elif self.path == "/reload":
            self._reload(body)
        else:
            self._send_json(404, {"error": f"no such path {self.path}"})

    def _query(self, body: bytes) -> None:
        core = self.server.core
        text = body.decode("utf-8", errors="replace")
        now_ns = time.time_ns()
        try:
            doc = json.loads(text)
            if isinstance(doc, dict) and "q" in doc:
                text = doc["q"]
                now_ns = int(doc.get("now_ns", now_ns))
        except json.JSONDecodeError:
            pass  # plain query text
        try:
            ast = parse_query(text)
            rows = eval_query(core.store, ast, now_ns)
        except QueryParseError as err:
            self._send_json(400, {"error": str(err), "position": err.pos})
            return
        except QueryEvalError as err:
            self._send_json(400, {"error": str(err)})
            return
        self._send_json(
            200, {"rows": rows_to_json(rows), "table": format_table(rows, ast.source_measurement())}
        )

    def _reload(self, body: bytes) -> None:
        text = body.decode("utf-8", errors="replace").strip()
        if not text:
            path = self.server.config_path
            if path is None:
                self._send_json(400, {"errors": ["no config file to re-read and empty body"]})
                return
            try:
                doc = json.loads(Path(path).read_text())
                text = json.dumps(doc.get("thresholds", {}))
            except (OSError, json.JSONDecodeError) as err:
                self._send_json(400, {"errors": [f"cannot re-read config: {err}"]})
                return
        try:
            th = load_thresholds(text)
        except ThresholdError as err:
            self._send_json(400, {"errors": err.violations})
            return
        self.server.core.swap_thresholds(th)
        self._send_json(200, {"ok": True, "thresholds": th.to_dict()})

    def _stream(self) -> None:
        core = self.server.core
        sub, snapshot = core.subscribe()
        self.close_connection = True
        try:
            self.send_response(200)
            self.send_header("Content-Type", "application/x-ndjson")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            first = {"seq": snapshot["seq"], "kind": "snapshot", "payload": snapshot}
            self.wfile.write((json.dumps(first) + "\n").encode())
            self.wfile.flush()
            last_write = time.monotonic()
            while not self.server.stopping and not sub.dead:
                try:
                    ev = sub.queue.get(timeout=0.25)
                except queue.Empty:
                    if time.monotonic() - last_write >= HEARTBEAT_INTERVAL_S:
                        hb = {
                            "seq": core.snapshot["seq"],
                            "kind": "heartbeat",
                            "payload": {"ts": time.time_ns()},
                        }
                        self.wfile.write((json.dumps(hb) + "\n").encode())
                        self.wfile.flush()
                        last_write = time.monotonic()
                    continue
                self.wfile.write((json.dumps(ev) + "\n").encode())
                self.wfile.flush()
                last_write = time.monotonic()
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            core.unsubscribe(sub)


class MonitorServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, addr, core: MonitorCore, config_path: Optional[str] = None):
        super().__init__(addr, _Handler)
        self.core = core
        self.config_path = config_path
        self.stopping = False


class ServiceHandle:
    """A running service: HTTP server plus the evaluation loop."""

    def __init__(self, server: MonitorServer, core: MonitorCore, cadence_s: float):
        self.server = server
        self.core = core
        self.cadence_s = cadence_s
        self._stop = threading.Event()
        self._loop = threading.Thread(target=self._run_loop, name="evaluation-loop", daemon=True)
        self._http = threading.Thread(target=server.serve_forever, name="http", daemon=True)

    @property
    def port(self) -> int:
        return self.server.server_address[1]

    @property
    def url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "ServiceHandle":
        self.core.evaluation_tick()  # snapshot valid before first request
        self._loop.start()
        self._http.start()
        return self

    def _run_loop(self) -> None:
        while not self._stop.wait(self.cadence_s):
            self.core.evaluation_tick()

    def stop(self) -> None:
        self.server.stopping = True
        self._stop.set()
        self.server.shutdown()
        self.server.server_close()
        self._loop.join(timeout=5)


def serve(config: dict, config_path: Optional[str] = None) -> ServiceHandle:
    """Build a core from config and start serving; raises on bind failure."""
    core = core_from_config(config)
    listen = config.get("listen", "127.0.0.1:8080")
    host, _, port = listen.rpartition(":")
    server = MonitorServer((host or "127.0.0.1", int(port)), core, config_path)
    cadence = float(config.get("cadence_seconds", 1.0))
    return ServiceHandle(server, core, cadence).start()
