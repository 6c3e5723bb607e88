"""HTTP/WebSocket control server.

Exposes profile CRUD backed by the registry, the four starting templates,
the compact device-fetch endpoint, and live test sessions that tick a
simulation at 50 Hz, stream telemetry over WebSocket, and accept profile
hot-swaps mid-run.
"""

from __future__ import annotations

import asyncio
import itertools
import json
from contextlib import asynccontextmanager
from typing import Sequence

from fastapi import FastAPI, Request, Response, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .device_codec import encode_profile
from .errors import RomanError, ValidationError
from .profile import TICK, TEMPLATE_KINDS, MotionProfile, make_template, profile_from_json, profile_to_json
from .registry import ObjectRecord, Registry
from .testbed import TaskSimulator, VirtualObject
from .kinematics import MotorSpec

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 7070


class LiveSession:
    """One running simulation, ticked on the event loop at the tick rate."""

    def __init__(self, session_id: str, sim: TaskSimulator, tick: float):
        self.session_id = session_id
        self.sim = sim
        self.tick = tick
        self.state = "Running"
        self._pending_profile: MotionProfile | None = None
        self._stop = asyncio.Event()
        self._subscribers: set[asyncio.Queue] = set()
        self.task: asyncio.Task | None = None

    def subscribe(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue()
        self._subscribers.add(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        self._subscribers.discard(queue)

    def request_swap(self, profile: MotionProfile) -> None:
        self._pending_profile = profile

    def telemetry(self) -> dict:
        sample = self.sim.samples[-1]
        return {
            "t": sample.t,
            "u": sample.u,
            "motor_theta": sample.theta,
            "output_coord": sample.output,
            "load": sample.load,
            "completed": self.sim.completed,
        }

    def summary(self) -> dict:
        return {
            "session_id": self.session_id,
            "state": self.state,
            "completed": self.sim.completed,
            "t_complete": self.sim.t_complete,
            "t_end": self.sim.t,
            "fault": self.sim.fault,
        }

    async def run(self) -> None:
        loop = asyncio.get_running_loop()
        deadline = loop.time() + self.tick
        while not self._stop.is_set():
            delay = deadline - loop.time()
            if delay > 0:
                try:
                    await asyncio.wait_for(self._stop.wait(), timeout=delay)
                    break
                except asyncio.TimeoutError:
                    pass
            deadline += self.tick
            if self._pending_profile is not None:
                self.sim.set_profile(self._pending_profile)
                self._pending_profile = None
            self.sim.advance_ticks(1)
            self._publish(self.telemetry())
            if self.sim.fault is not None:
                break
        self.state = "Stopped"
        self._publish(None)

    def _publish(self, item: dict | None) -> None:
        for queue in list(self._subscribers):
            queue.put_nowait(item)

    async def stop(self) -> None:
        self._stop.set()
        if self.task is not None:
            await self.task


def create_app(
    objects: Sequence[VirtualObject],
    registry: Registry,
    motor: MotorSpec | None = None,
    tick: float = TICK,
) -> FastAPI:
    """Build the application around a testbed scenario and a registry."""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        for session in list(app.state.sessions.values()):
            await session.stop()

    app = FastAPI(lifespan=lifespan)
    # The browser editor is served from its own origin (any static file
    # server); this is a local tool, so allow all origins.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.objects = {obj.tag_id: obj for obj in objects}
    app.state.registry = registry
    app.state.motor = motor if motor is not None else MotorSpec()
    app.state.tick = tick
    app.state.sessions = {}
    app.state.running_by_tag = {}
    app.state.session_ids = itertools.count(1)

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"detail": message})

    async def read_json(request: Request) -> object:
        try:
            return json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ValidationError(f"request body is not valid JSON: {exc}") from exc

    @app.get("/api/health")
    def health() -> dict:
        return {
            "ok": True,
            "objects": len(app.state.objects),
            "sessions_running": len(app.state.running_by_tag),
        }

    @app.get("/api/objects")
    def list_objects() -> list[dict]:
        return [
            {"tag_id": o.tag_id, "name": o.name, "category": o.category, "pose": list(o.pose)}
            for o in app.state.objects.values()
        ]

    @app.get("/api/templates")
    def templates() -> list[dict]:
        return [profile_to_json(make_template(kind)) for kind in TEMPLATE_KINDS]

    @app.get("/api/profiles/{tag_id}")
    def get_profile(tag_id: str):
        record = app.state.registry.get_record(tag_id)
        if record is None:
            return error(404, f"no profile saved for tag {tag_id!r}")
        return profile_to_json(record.profile)

    @app.put("/api/profiles/{tag_id}")
    async def put_profile(tag_id: str, request: Request):
        try:
            profile = profile_from_json(await read_json(request))
            obj = app.state.objects.get(tag_id.lower())
            record = ObjectRecord(
                tag_id=tag_id,
                object_name=obj.name if obj else profile.name,
                category=obj.category if obj else "uncataloged",
                profile=profile,
            )
            app.state.registry.put_record(record)
        except (ValidationError, RomanError) as exc:
            return error(400, str(exc))
        return Response(status_code=204)

    @app.get("/device/profile/{tag_id}")
    def device_profile(tag_id: str):
        record = app.state.registry.get_record(tag_id)
        if record is None:
            return error(404, f"no profile saved for tag {tag_id!r}")
        return Response(content=encode_profile(record.profile), media_type="application/octet-stream")

    @app.post("/api/test/start")
    async def start_test(request: Request):
        try:
            body = await read_json(request)
            if not isinstance(body, dict):
                raise ValidationError("start body must be an object")
            for field in ("tag_id", "profile"):
                if field not in body:
                    raise ValidationError(f"start body is missing field {field!r}")
            profile = profile_from_json(body["profile"])
            continuous = body.get("continuous", profile.continuous)
            if not isinstance(continuous, bool):
                raise ValidationError("continuous must be a boolean")
            tag = str(body["tag_id"]).lower()
        except RomanError as exc:
            return error(400, str(exc))
        obj = app.state.objects.get(tag)
        if obj is None:
            return error(404, f"tag {tag!r} is not in the active testbed")
        if tag in app.state.running_by_tag:
            return error(409, f"a session is already running for tag {tag!r}")
        session_id = f"s{next(app.state.session_ids):04d}"
        sim = TaskSimulator(obj, profile, motor=app.state.motor, continuous=continuous)
        session = LiveSession(session_id, sim, app.state.tick)
        app.state.sessions[session_id] = session
        app.state.running_by_tag[tag] = session_id
        session.task = asyncio.create_task(session.run())
        session.task.add_done_callback(lambda _t, tag=tag, sid=session_id: _release_tag(tag, sid))
        return {"session_id": session_id}

    def _release_tag(tag: str, session_id: str) -> None:
        if app.state.running_by_tag.get(tag) == session_id:
            del app.state.running_by_tag[tag]

    @app.post("/api/test/stop")
    async def stop_test(request: Request):
        try:
            body = await read_json(request)
            if not isinstance(body, dict) or "session_id" not in body:
                raise ValidationError("stop body must be an object with 'session_id'")
        except RomanError as exc:
            return error(400, str(exc))
        session = app.state.sessions.get(body["session_id"])
        if session is None:
            return error(404, f"unknown session {body['session_id']!r}")
        await session.stop()
        return session.summary()

    @app.websocket("/api/test/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        session = app.state.sessions.get(session_id)
        if session is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        if session.state != "Running":
            await ws.close(code=1000, reason="session stopped")
            return
        queue = session.subscribe()

        async def send_loop() -> None:
            while True:
                item = await queue.get()
                if item is None:
                    await ws.close(code=1000, reason="session stopped")
                    return
                await ws.send_json(item)

        sender = asyncio.create_task(send_loop())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict) or msg.get("type") != "update_profile":
                        raise ValidationError("expected {type: 'update_profile', profile: ...}")
                    session.request_swap(profile_from_json(msg.get("profile")))
                except RomanError as exc:
                    await ws.send_json({"type": "error", "detail": str(exc)})
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            sender.cancel()
            session.unsubscribe(queue)

    return app
