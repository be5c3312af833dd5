"""HTTP face of the player: a small JSON API plus the console's assets.

Endpoints:

    GET  /api/state      player state and a per-eye pixel snapshot
    GET  /api/catalog    luceme ids with glosses, plus the gaze detents
    POST /api/mode       {"type": "active"|"ocular"|"functional"|"idle", ...}
    POST /api/sequence   {"ids": [...], "dwell_ms": N, "randomize": B, "seed": N}
    GET  /api/frames     emitted frames as server-sent events

The frame stream never blocks the player: each client gets a bounded
queue and loses the oldest frames first if it cannot keep up.  Everything
else is plain request/response on a threading HTTP server.
"""

from __future__ import annotations

import json
import mimetypes
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .catalog import ACTIVE_GLOSSES, ACTIVE_IDS, CatalogError, OCULAR_GLOSSES
from .driver import DriverSim
from .frames import PaletteError
from .gaze import GAZE_ANGLES
from .player import Mode, Player, PlayerError


class ServiceError(ValueError):
    pass


def _eye_dict(sim: DriverSim, eye_id: int) -> dict[str, object]:
    snap = sim.snapshot(eye_id)
    return {
        "eye_id": eye_id,
        "sequence": snap.sequence,
        "updated_at_ms": snap.updated_at_ms,
        "calibration_offset_deg": snap.calibration_offset_deg,
        "pixels": [[p.r, p.g, p.b, p.a] for p in snap.frame.pixels],
    }


def mode_from_json(body: dict) -> Mode:
    """Translate an /api/mode body into a Mode; errors become PlayerError."""
    if not isinstance(body, dict) or "type" not in body:
        raise PlayerError("body must be an object with a 'type' field")
    kind = body["type"]
    if kind == "idle":
        return Mode.idle()
    if kind == "active":
        if "id" not in body:
            raise PlayerError("active mode needs 'id'")
        level = body.get("level")
        if level is not None and not isinstance(level, (int, float)):
            raise PlayerError("'level' must be a number")
        return Mode.active(str(body["id"]), level=level)
    if kind == "ocular":
        if "angle" in body and body["angle"] is not None:
            angle = body["angle"]
            if not isinstance(angle, int) or isinstance(angle, bool):
                raise PlayerError("'angle' must be an integer of degrees")
            return Mode.ocular(gaze_deg=angle)
        if "id" not in body:
            raise PlayerError("ocular mode needs 'id' or 'angle'")
        return Mode.ocular(luceme_id=str(body["id"]))
    if kind == "functional":
        if "color" not in body or "intensity" not in body:
            raise PlayerError("functional mode needs 'color' and 'intensity'")
        intensity = body["intensity"]
        if not isinstance(intensity, (int, float)) or isinstance(intensity, bool):
            raise PlayerError("'intensity' must be a number")
        return Mode.functional(str(body["color"]), float(intensity))
    raise PlayerError(f"unknown mode type {kind!r}")


class PlayerService:
    """Owns the player, its simulator, the pacing thread and the server."""

    def __init__(
        self,
        player: Player,
        sim: DriverSim,
        assets_dir: str | Path | None = None,
    ):
        self.player = player
        self.sim = sim
        self.assets_dir = Path(assets_dir).resolve() if assets_dir else None
        self._httpd: ThreadingHTTPServer | None = None
        self._pacer: threading.Thread | None = None
        self._stop = threading.Event()

    # -- lifecycle ----------------------------------------------------------

    def start(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        """Bind, start serving and start the pacing clock; returns (host, port)."""
        service = self

        class Handler(_Handler):
            svc = service

        self._httpd = ThreadingHTTPServer((host, port), Handler)
        self._httpd.daemon_threads = True
        threading.Thread(target=self._httpd.serve_forever, daemon=True).start()
        self._pacer = threading.Thread(target=self._pace, daemon=True)
        self._pacer.start()
        return self._httpd.server_address[0], self._httpd.server_address[1]

    def stop(self) -> None:
        self._stop.set()
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        if self._pacer is not None:
            self._pacer.join(timeout=2.0)

    def _pace(self) -> None:
        """Wall clock gates emission; frame content comes from the logical clock."""
        period = 1.0 / self.player.fps
        next_due = time.monotonic()
        while not self._stop.is_set():
            now = time.monotonic()
            if now < next_due:
                self._stop.wait(min(next_due - now, 0.05))
                continue
            if self.player.session_started:
                self.player.tick()
            next_due += period
            if next_due < now - 1.0:
                next_due = now  # fell far behind; skip instead of bursting

    # -- request handling ---------------------------------------------------

    def state_dict(self) -> dict[str, object]:
        state = self.player.state()
        state["eyes"] = {str(i): _eye_dict(self.sim, i) for i in (0, 1)}
        return state

    def catalog_dict(self) -> dict[str, object]:
        return {
            "active": [{"id": i, "gloss": ACTIVE_GLOSSES[i]} for i in ACTIVE_IDS],
            "ocular": [
                {"id": i, "gloss": OCULAR_GLOSSES[i]} for i in OCULAR_GLOSSES
            ],
            "gaze_angles": list(GAZE_ANGLES),
        }


class _Handler(BaseHTTPRequestHandler):
    svc: PlayerService  # bound by PlayerService.start
    protocol_version = "HTTP/1.1"

    # quiet: route errors through JSON, not stderr noise
    def log_message(self, fmt, *args):
        pass

    def _send_json(self, code: int, obj: object) -> None:
        payload = json.dumps(obj).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise PlayerError("empty request body")
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise PlayerError(f"bad JSON: {exc}") from None

    def do_GET(self) -> None:
        try:
            if self.path == "/api/state":
                self._send_json(200, self.svc.state_dict())
            elif self.path == "/api/catalog":
                self._send_json(200, self.svc.catalog_dict())
            elif self.path == "/api/frames":
                self._stream_frames()
            else:
                self._serve_static()
        except (BrokenPipeError, ConnectionResetError):
            pass

    def do_POST(self) -> None:
        try:
            if self.path == "/api/mode":
                body = self._read_body()
                mode = mode_from_json(body)
                state = self.svc.player.set_mode(mode)
                self._send_json(200, {"ok": True, "state": state})
            elif self.path == "/api/sequence":
                body = self._read_body()
                if not isinstance(body, dict):
                    raise PlayerError("body must be an object")
                ids = body.get("ids")
                if ids is not None and (
                    not isinstance(ids, list)
                    or not all(isinstance(i, str) for i in ids)
                ):
                    raise PlayerError("'ids' must be a list of luceme ids")
                dwell = body.get("dwell_ms", 2000)
                if not isinstance(dwell, int) or isinstance(dwell, bool):
                    raise PlayerError("'dwell_ms' must be an integer")
                seed = body.get("seed")
                if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
                    raise PlayerError("'seed' must be an integer")
                order = self.svc.player.play_sequence(
                    ids=ids,
                    dwell_ms=dwell,
                    randomize=bool(body.get("randomize", False)),
                    seed=seed,
                )
                self._send_json(200, {"order": order, "dwell_ms": dwell})
            else:
                self._send_json(404, {"error": f"no such endpoint {self.path}"})
        except CatalogError as exc:
            self._send_json(404, {"error": str(exc)})
        except (PlayerError, PaletteError, ValueError) as exc:
            self._send_json(400, {"error": str(exc)})
        except (BrokenPipeError, ConnectionResetError):
            pass

    def _stream_frames(self) -> None:
        sub = self.svc.player.subscribe()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            while not self.svc._stop.is_set():
                try:
                    ts_ms, msg = sub.queue.get(timeout=1.0)
                except Exception:
                    self.wfile.write(b": keepalive\n\n")
                    self.wfile.flush()
                    continue
                event = {
                    "eye_id": msg.eye_id,
                    "sequence": msg.sequence,
                    "t_ms": ts_ms,
                    "pixels": [[p.r, p.g, p.b, p.a] for p in msg.frame.pixels],
                }
                self.wfile.write(b"data: " + json.dumps(event).encode() + b"\n\n")
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.svc.player.unsubscribe(sub)

    def _serve_static(self) -> None:
        root = self.svc.assets_dir
        if root is None:
            if self.path in ("/", "/index.html"):
                body = (b"<!doctype html><title>eye player</title>"
                        b"<p>API is up. Console assets were not configured; "
                        b"start with --assets DIR to serve the web console.")
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
            else:
                self._send_json(404, {"error": "not found"})
            return
        rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if root not in target.parents and target != root:
            self._send_json(404, {"error": "not found"})
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def build_service(
    fps: int = 30,
    assets_dir: str | Path | None = None,
    catalog=None,
    record: bool = False,
    calibration: dict[int, float] | None = None,
) -> PlayerService:
    """Wire a player to an embedded simulator, ready to start()."""
    sim = DriverSim(calibration=calibration)
    player = Player(endpoint=sim, fps=fps, catalog=catalog, record=record)
    return PlayerService(player, sim, assets_dir=assets_dir)
