"""HTTP layer: JSON endpoints, error mapping, the frame stream, static files."""

import http.client
import json
import random
import time
import urllib.error
import urllib.request

import pytest

from lumeye.catalog import ACTIVE_IDS
from lumeye.player import Mode, PlayerError
from lumeye.service import build_service, mode_from_json


@pytest.fixture
def service(tmp_path):
    started = []

    def start(**kw):
        svc = build_service(fps=30, **kw)
        host, port = svc.start(port=0)
        started.append(svc)
        return svc, f"http://{host}:{port}"

    yield start
    for svc in started:
        svc.stop()


def get(url):
    try:
        with urllib.request.urlopen(url, timeout=5) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def post(url, obj):
    req = urllib.request.Request(
        url, data=json.dumps(obj).encode(),
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req, timeout=5) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


class TestModeFromJson:
    def test_accepted_shapes(self):
        assert mode_from_json({"type": "idle"}) == Mode.idle()
        assert mode_from_json({"type": "active", "id": "Danger"}) == Mode.active("Danger")
        assert mode_from_json(
            {"type": "active", "id": "BatteryLevel", "level": 0.5}
        ) == Mode.active("BatteryLevel", level=0.5)
        assert mode_from_json({"type": "ocular", "angle": 90}) == Mode.ocular(gaze_deg=90)
        assert mode_from_json({"type": "ocular", "id": "Blink"}) == Mode.ocular("Blink")
        assert mode_from_json(
            {"type": "functional", "color": "Affirm-Green", "intensity": 1}
        ) == Mode.functional("Affirm-Green", 1.0)

    @pytest.mark.parametrize("body", [
        {},
        {"type": "nap"},
        {"type": "active"},
        {"type": "active", "id": "Danger", "level": "high"},
        {"type": "ocular"},
        {"type": "ocular", "angle": True},
        {"type": "ocular", "angle": 90.0},
        {"type": "functional", "color": "Affirm-Green"},
        {"type": "functional", "color": "Affirm-Green", "intensity": True},
        "idle",
    ])
    def test_rejected_shapes(self, body):
        with pytest.raises(PlayerError):
            mode_from_json(body)


class TestApi:
    def test_state_shape(self, service):
        _, base = service()
        status, state = get(base + "/api/state")
        assert status == 200
        assert state["session_started"] is False
        assert state["fps"] == 30
        for eye in ("0", "1"):
            info = state["eyes"][eye]
            assert info["sequence"] is None
            assert len(info["pixels"]) == 40
            assert all(p == [0, 0, 0, 0] for p in info["pixels"])

    def test_catalog_listing(self, service):
        _, base = service()
        status, cat = get(base + "/api/catalog")
        assert status == 200
        assert [e["id"] for e in cat["active"]] == list(ACTIVE_IDS)
        assert all(e["gloss"] for e in cat["active"] + cat["ocular"])
        assert "Gaze" in [e["id"] for e in cat["ocular"]]
        assert cat["gaze_angles"] == list(range(0, 360, 30))

    def test_mode_roundtrip_reaches_sim(self, service):
        svc, base = service()
        status, reply = post(base + "/api/mode", {"type": "active", "id": "Stay"})
        assert status == 200
        assert reply["ok"] is True
        assert reply["state"]["pending_mode"] == {"type": "active", "id": "Stay"}
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline:
            _, state = get(base + "/api/state")
            if state["eyes"]["0"]["sequence"] is not None:
                break
            time.sleep(0.02)
        else:
            pytest.fail("pacer never delivered a frame")
        assert state["mode"] == {"type": "active", "id": "Stay"}
        assert any(p != [0, 0, 0, 0] for p in state["eyes"]["0"]["pixels"])

    def test_error_taxonomy(self, service):
        _, base = service()
        status, body = post(base + "/api/mode", {"type": "active", "id": "Shrug"})
        assert status == 404 and "Shrug" in body["error"]
        status, body = post(base + "/api/mode", {"type": "ocular", "angle": 37})
        assert status == 400 and "37" in body["error"]
        status, body = post(base + "/api/mode", {"type": "functional",
                                                 "color": "Mauve", "intensity": 1})
        assert status == 400
        status, _ = post(base + "/api/mode", {})
        assert status == 400
        status, _ = post(base + "/api/nothing", {"type": "idle"})
        assert status == 404

    def test_malformed_json_is_400(self, service):
        _, base = service()
        req = urllib.request.Request(
            base + "/api/mode", data=b"{not json", method="POST"
        )
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(req, timeout=5)
        assert exc.value.code == 400

    def test_sequence_is_seed_deterministic(self, service):
        svc, base = service()
        ids = ["Stay", "Danger", "GoLeft", "GoRight", "ComeHere"]
        body = {"ids": ids, "dwell_ms": 500, "randomize": True, "seed": 7}
        status, reply = post(base + "/api/sequence", body)
        assert status == 200
        assert reply["dwell_ms"] == 500
        assert reply["order"] == random.Random(7).sample(ids, len(ids))
        _, again = post(base + "/api/sequence", body)
        assert again["order"] == reply["order"]

    def test_sequence_validation_over_http(self, service):
        _, base = service()
        status, _ = post(base + "/api/sequence", {"ids": ["Shrug"]})
        assert status == 404
        status, _ = post(base + "/api/sequence", {"ids": [1, 2]})
        assert status == 400
        status, _ = post(base + "/api/sequence", {"dwell_ms": True})
        assert status == 400
        status, _ = post(base + "/api/sequence", {"seed": "lucky"})
        assert status == 400

    def test_calibration_visible_in_state(self, service):
        _, base = service(calibration={0: 45.0})
        _, state = get(base + "/api/state")
        assert state["eyes"]["0"]["calibration_offset_deg"] == 45.0
        assert state["eyes"]["1"]["calibration_offset_deg"] == 0.0


class TestFrameStream:
    def test_events_flow_once_session_starts(self, service):
        svc, base = service()
        host, port = base[len("http://"):].rsplit(":", 1)
        conn = http.client.HTTPConnection(host, int(port), timeout=5)
        conn.request("GET", "/api/frames")
        resp = conn.getresponse()
        assert resp.status == 200
        assert resp.getheader("Content-Type") == "text/event-stream"

        post(base + "/api/mode", {"type": "active", "id": "Danger"})
        events = []
        while len(events) < 4:
            line = resp.readline()
            if line.startswith(b"data: "):
                events.append(json.loads(line[len(b"data: "):]))
        conn.close()

        assert {e["eye_id"] for e in events} == {0, 1}
        for e in events:
            assert len(e["pixels"]) == 40
            assert isinstance(e["t_ms"], int) and isinstance(e["sequence"], int)
        pair = [e for e in events if e["t_ms"] == events[0]["t_ms"]]
        assert len(pair) >= 2  # both eyes share each timestamp


class TestStatic:
    def test_placeholder_page_without_assets(self, service):
        _, base = service()
        with urllib.request.urlopen(base + "/", timeout=5) as resp:
            assert resp.status == 200
            assert b"API is up" in resp.read()

    def test_serves_configured_assets(self, service, tmp_path):
        root = tmp_path / "assets"
        (root / "sub").mkdir(parents=True)
        (root / "index.html").write_text("<h1>console</h1>")
        (root / "sub" / "app.js").write_text("export const x = 1;")
        _, base = service(assets_dir=root)
        with urllib.request.urlopen(base + "/", timeout=5) as resp:
            assert b"console" in resp.read()
        with urllib.request.urlopen(base + "/sub/app.js", timeout=5) as resp:
            assert b"const x" in resp.read()
        status, _ = get(base + "/missing.css")
        assert status == 404

    def test_traversal_is_refused(self, service, tmp_path):
        root = tmp_path / "assets"
        root.mkdir()
        (root / "index.html").write_text("ok")
        (tmp_path / "secret.txt").write_text("keep out")
        _, base = service(assets_dir=root)
        host, port = base[len("http://"):].rsplit(":", 1)
        conn = http.client.HTTPConnection(host, int(port), timeout=5)
        conn.request("GET", "/../secret.txt")
        resp = conn.getresponse()
        assert resp.status == 404
        conn.close()
