"""Control server endpoints, sessions, and the telemetry stream."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from roman.device_codec import decode_profile, encode_profile
from roman.profile import make_template, profile_from_json, profile_to_json
from roman.registry import Registry
from roman.server import create_app
from roman.testbed import builtin_catalog

CUTTER = "1a2b3c01"
SANITIZER = "1a2b3c02"
WHISK = "1a2b3c04"


@pytest.fixture
def client(tmp_path):
    app = create_app(builtin_catalog(), Registry(tmp_path / "registry"))
    with TestClient(app) as c:
        yield c


@pytest.fixture
def fast_client(tmp_path):
    # Same sim semantics, scheduler ticking 10x real time for quick tests.
    app = create_app(builtin_catalog(), Registry(tmp_path / "registry"), tick=0.002)
    with TestClient(app) as c:
        yield c


def one_way_body():
    return profile_to_json(make_template("one_way"))


# --- plain endpoints ---------------------------------------------------------


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json()["ok"] is True


def test_objects_lists_the_scenario(client):
    listed = client.get("/api/objects").json()
    assert len(listed) == 5
    by_tag = {o["tag_id"]: o for o in listed}
    assert by_tag[CUTTER]["name"] == "wire cutter"
    assert by_tag[CUTTER]["category"] == "Squeeze/BiDirectional"
    assert len(by_tag[CUTTER]["pose"]) == 3


def test_templates_endpoint_returns_all_four(client):
    templates = client.get("/api/templates").json()
    assert len(templates) == 4
    parsed = [profile_from_json(doc) for doc in templates]
    names = [p.name for p in parsed]
    assert names == ["endless_rotation", "periodic", "one_way", "two_way"]
    by_name = dict(zip(names, parsed))
    assert by_name["endless_rotation"].continuous is True


# --- profile CRUD ------------------------------------------------------------


def test_put_then_get_profile_roundtrips(client):
    body = one_way_body()
    response = client.put(f"/api/profiles/{CUTTER}", json=body)
    assert response.status_code == 204
    fetched = client.get(f"/api/profiles/{CUTTER}")
    assert fetched.status_code == 200
    assert profile_from_json(fetched.json()) == profile_from_json(body)


def test_get_profile_unknown_tag_404(client):
    assert client.get("/api/profiles/ffffffff").status_code == 404


def test_put_profile_schema_violation_400(client):
    body = one_way_body()
    body["keypoints"][0]["u"] = 2.0
    response = client.put(f"/api/profiles/{CUTTER}", json=body)
    assert response.status_code == 400
    assert "u must be in" in response.json()["detail"]


def test_put_profile_invalid_tag_400(client):
    response = client.put("/api/profiles/nothex!!", json=one_way_body())
    assert response.status_code == 400


def test_put_profile_malformed_json_400(client):
    response = client.put(
        f"/api/profiles/{CUTTER}", content=b"{ nope", headers={"content-type": "application/json"}
    )
    assert response.status_code == 400


def test_last_writer_wins(client):
    first = one_way_body()
    second = profile_to_json(make_template("two_way"))
    client.put(f"/api/profiles/{CUTTER}", json=first)
    client.put(f"/api/profiles/{CUTTER}", json=second)
    fetched = client.get(f"/api/profiles/{CUTTER}").json()
    assert profile_from_json(fetched) == profile_from_json(second)


# --- device fetch ------------------------------------------------------------


def test_device_profile_matches_registry(client):
    body = one_way_body()
    client.put(f"/api/profiles/{CUTTER}", json=body)
    response = client.get(f"/device/profile/{CUTTER}")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/octet-stream")
    assert response.content == encode_profile(profile_from_json(body))
    assert decode_profile(response.content, name="one_way") == profile_from_json(body)


def test_device_profile_unknown_tag_404(client):
    assert client.get("/device/profile/ffffffff").status_code == 404


def test_device_encoding_smaller_than_json(client):
    body = one_way_body()
    client.put(f"/api/profiles/{CUTTER}", json=body)
    binary = client.get(f"/device/profile/{CUTTER}").content
    full = client.get(f"/api/profiles/{CUTTER}").content
    assert len(binary) < len(full)


# --- sessions ----------------------------------------------------------------


def start(client, tag, profile_body, continuous=False):
    return client.post(
        "/api/test/start", json={"tag_id": tag, "profile": profile_body, "continuous": continuous}
    )


def test_start_unknown_tag_404(client):
    assert start(client, "ffffffff", one_way_body()).status_code == 404


def test_start_bad_profile_400(client):
    body = one_way_body()
    body.pop("keypoints")
    assert start(client, CUTTER, body).status_code == 400


def test_duplicate_start_conflicts(client):
    first = start(client, CUTTER, one_way_body())
    assert first.status_code == 200
    second = start(client, CUTTER, one_way_body())
    assert second.status_code == 409
    # A different object is free to run concurrently.
    other = start(client, SANITIZER, one_way_body())
    assert other.status_code == 200
    for sid in (first.json()["session_id"], other.json()["session_id"]):
        client.post("/api/test/stop", json={"session_id": sid})


def test_stop_unknown_session_404(client):
    response = client.post("/api/test/stop", json={"session_id": "s9999"})
    assert response.status_code == 404


def test_stop_after_completion_reports_outcome(fast_client):
    sid = start(fast_client, SANITIZER, one_way_body()).json()["session_id"]
    deadline = time.monotonic() + 5.0
    summary = None
    while time.monotonic() < deadline:
        time.sleep(0.05)
        with fast_client.websocket_connect(f"/api/test/{sid}/stream") as ws:
            if ws.receive_json()["completed"]:
                break
    summary = fast_client.post("/api/test/stop", json={"session_id": sid}).json()
    assert summary["completed"] is True
    assert summary["t_complete"] == pytest.approx(0.46, abs=0.05)
    assert summary["state"] == "Stopped"


def test_restart_after_stop_gets_fresh_session(fast_client):
    sid = start(fast_client, SANITIZER, one_way_body()).json()["session_id"]
    fast_client.post("/api/test/stop", json={"session_id": sid})
    again = start(fast_client, SANITIZER, one_way_body())
    assert again.status_code == 200
    assert again.json()["session_id"] != sid
    fast_client.post("/api/test/stop", json={"session_id": again.json()["session_id"]})


# --- telemetry stream --------------------------------------------------------


def test_stream_monotone_time_and_fields(fast_client):
    sid = start(fast_client, SANITIZER, one_way_body()).json()["session_id"]
    with fast_client.websocket_connect(f"/api/test/{sid}/stream") as ws:
        messages = [ws.receive_json() for _ in range(20)]
    fast_client.post("/api/test/stop", json={"session_id": sid})
    times = [m["t"] for m in messages]
    assert all(b > a for a, b in zip(times, times[1:]))
    for message in messages:
        assert set(message) == {"t", "u", "motor_theta", "output_coord", "load", "completed"}


def test_completion_latches_once_and_persists(fast_client):
    sid = start(fast_client, SANITIZER, one_way_body()).json()["session_id"]
    flags = []
    with fast_client.websocket_connect(f"/api/test/{sid}/stream") as ws:
        for _ in range(60):
            message = ws.receive_json()
            flags.append(message["completed"])
            if len(flags) > 40 and flags[-1]:
                break
    fast_client.post("/api/test/stop", json={"session_id": sid})
    assert True in flags
    first = flags.index(True)
    assert all(flags[first:])
    assert not any(flags[:first])


def test_hot_swap_to_zero_halts_motion(client):
    # Default real-time tick so the two-tick bound is meaningful.
    body = profile_to_json(make_template("endless_rotation"))
    sid = start(client, WHISK, body, continuous=True).json()["session_id"]
    zero = profile_to_json(make_template("endless_rotation"))
    for kp in zero["keypoints"]:
        kp["u"] = 0.0
    with client.websocket_connect(f"/api/test/{sid}/stream") as ws:
        for _ in range(5):
            ws.receive_json()
        ws.send_text(json.dumps({"type": "update_profile", "profile": zero}))
        after = [ws.receive_json() for _ in range(8)]
    client.post("/api/test/stop", json={"session_id": sid})
    swapped = [i for i, m in enumerate(after) if m["u"] == 0.0]
    assert swapped, "swap never took effect"
    assert swapped[0] <= 3  # applied within a couple of ticks of the send
    outputs = [m["output_coord"] for m in after[swapped[0] :]]
    assert len(set(outputs)) == 1


def test_update_with_invalid_profile_reports_error(fast_client):
    sid = start(fast_client, WHISK, one_way_body()).json()["session_id"]
    with fast_client.websocket_connect(f"/api/test/{sid}/stream") as ws:
        ws.send_text(json.dumps({"type": "update_profile", "profile": {"name": "x"}}))
        deadline = time.monotonic() + 2.0
        saw_error = False
        while time.monotonic() < deadline:
            message = ws.receive_json()
            if message.get("type") == "error":
                saw_error = True
                break
        assert saw_error
        assert "missing field" in message["detail"]
    fast_client.post("/api/test/stop", json={"session_id": sid})


def test_stream_closes_on_stop(fast_client):
    sid = start(fast_client, WHISK, one_way_body()).json()["session_id"]
    with fast_client.websocket_connect(f"/api/test/{sid}/stream") as ws:
        ws.receive_json()
        fast_client.post("/api/test/stop", json={"session_id": sid})
        closed = False
        for _ in range(100):
            try:
                ws.receive_json()
            except Exception:
                closed = True
                break
        assert closed


def test_stream_unknown_session_rejected(fast_client):
    with pytest.raises(Exception):
        with fast_client.websocket_connect("/api/test/s9999/stream") as ws:
            ws.receive_json()


def test_tick_rate_near_fifty_hertz(client):
    body = profile_to_json(make_template("endless_rotation"))
    sid = start(client, WHISK, body, continuous=True).json()["session_id"]
    with client.websocket_connect(f"/api/test/{sid}/stream") as ws:
        ws.receive_json()  # align to the stream
        count = 0
        t0 = time.monotonic()
        while time.monotonic() - t0 < 1.0:
            ws.receive_json()
            count += 1
    client.post("/api/test/stop", json={"session_id": sid})
    assert 40 <= count <= 60
