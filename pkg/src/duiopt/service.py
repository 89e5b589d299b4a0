"""Network service: broadcast session state and solutions to clients.

Transports: a websocket endpoint (one JSON message per frame) for browser
clients plus a newline-delimited JSON mode over a plain TCP stream for
headless test clients. Both speak the same message schema.

Client to server:
    {"type": "hello", "client_id": str, "user_id"?: str}
    {"type": "event", "kind": str, "payload": {...}}
    {"type": "get_state"}
Server to client:
    {"type": "state", "instance": {...}, "seq": int, "warnings": [str]}
    {"type": "solution", "assignment": [[0/1]], "sizes": [[px2]],
     "per_user_completeness": [float], "r_min": float, "objective": float,
     "gap": float | null, "solve_ms": int, "seq": int, "stale": bool,
     "status": str, "availability": [[0/1]], "diff": {...}}
    {"type": "error", "code": "bad_message" | "rejected", "detail": str}

Every client receives the full state and the latest solution on connect.
Solutions reach each client in strictly increasing seq order. A client that
stops draining its outbox is disconnected rather than slowing the rest.
"""
from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .model import ProblemInstance, Solution, instance_to_dict, solution_to_dict
from .session import (
    AssignmentDiff, EventRejected, LiveSession, Session,
)
from .solver import SolveOptions

log = logging.getLogger("duiopt.service")

OUTBOX_LIMIT = 256


@dataclass(eq=False)
class _Client:
    outbox: asyncio.Queue
    client_id: str = ""
    user_id: str = ""
    closed: bool = False


def solution_message(instance: ProblemInstance, solution: Solution,
                     diff: AssignmentDiff) -> dict[str, Any]:
    body = solution_to_dict(instance, solution)
    return {
        "type": "solution",
        "assignment": body["assignment"],
        "sizes": body["sizes"],
        "availability": body["availability"],
        "per_user_completeness": body["per_user_completeness"],
        "r_min": body["r_min"],
        "objective": body["objective"],
        "gap": body["gap"],
        "solve_ms": body["solve_millis"],
        "status": body["status"],
        "seq": diff.seq,
        "stale": diff.stale,
        "diff": {
            "added": [list(t) for t in diff.added],
            "removed": [list(t) for t in diff.removed],
            "resized": [list(t) for t in diff.resized],
        },
        "elements": body["elements"],
        "devices": body["devices"],
        "users": body["users"],
    }


class Hub:
    """Fan-out point between one LiveSession and any number of client
    transports. All hub methods run on the event loop thread; the
    *_from_worker methods are the only entry points for the solver worker."""

    def __init__(self, live: LiveSession, loop: asyncio.AbstractEventLoop,
                 outbox_limit: int = OUTBOX_LIMIT):
        self.live = live
        self.loop = loop
        self.outbox_limit = outbox_limit
        self.clients: set[_Client] = set()
        self.last_solution_message: dict[str, Any] | None = None

    # -- worker-thread entry points -----------------------------------------

    def solution_from_worker(self, solution: Solution, diff: AssignmentDiff) -> None:
        instance = self.live.session.instance
        message = solution_message(instance, solution, diff)
        self.loop.call_soon_threadsafe(self._broadcast_solution, message)

    def error_from_worker(self, detail: str) -> None:
        message = {"type": "error", "code": "rejected", "detail": detail}
        self.loop.call_soon_threadsafe(self.broadcast, message)

    # -- loop-side machinery --------------------------------------------------

    def _broadcast_solution(self, message: dict[str, Any]) -> None:
        self.last_solution_message = message
        self.broadcast(message)

    def broadcast(self, message: dict[str, Any]) -> None:
        text = json.dumps(message)
        for client in list(self.clients):
            self._push(client, text)

    def send(self, client: _Client, message: dict[str, Any]) -> None:
        self._push(client, json.dumps(message))

    def _push(self, client: _Client, text: str) -> None:
        try:
            client.outbox.put_nowait(text)
        except asyncio.QueueFull:
            log.warning("dropping client %s: outbox full", client.client_id or "?")
            self.drop(client)

    def drop(self, client: _Client) -> None:
        client.closed = True
        self.clients.discard(client)
        # wake the writer so it notices the close flag
        try:
            client.outbox.put_nowait(None)
        except asyncio.QueueFull:
            pass

    def state_message(self) -> dict[str, Any]:
        instance, seq, _ = self.live.snapshot()
        return {
            "type": "state",
            "instance": instance_to_dict(instance),
            "seq": seq,
            "warnings": list(self.live.session.last_warnings),
        }

    def register(self) -> _Client:
        client = _Client(outbox=asyncio.Queue(maxsize=self.outbox_limit))
        self.clients.add(client)
        self.send(client, self.state_message())
        if self.last_solution_message is not None:
            self.send(client, self.last_solution_message)
        return client

    def handle_text(self, client: _Client, raw: str) -> None:
        try:
            message = json.loads(raw)
            if not isinstance(message, dict):
                raise ValueError("message must be a JSON object")
        except ValueError as exc:
            self.send(client, {"type": "error", "code": "bad_message",
                               "detail": f"unparseable message: {exc}"})
            return
        self.handle(client, message)

    def handle(self, client: _Client, message: dict[str, Any]) -> None:
        mtype = message.get("type")
        if mtype == "hello":
            if "client_id" not in message:
                self.send(client, {"type": "error", "code": "bad_message",
                                   "detail": "hello requires client_id"})
                return
            client.client_id = str(message["client_id"])
            client.user_id = str(message.get("user_id", ""))
            return
        if mtype == "get_state":
            self.send(client, self.state_message())
            if self.last_solution_message is not None:
                self.send(client, self.last_solution_message)
            return
        if mtype == "event":
            kind = message.get("kind")
            payload = message.get("payload", {})
            if not isinstance(kind, str) or not isinstance(payload, dict):
                self.send(client, {"type": "error", "code": "bad_message",
                                   "detail": "event requires kind and a payload object"})
                return
            try:
                self.live.submit(kind, payload)
            except EventRejected as exc:
                self.send(client, {"type": "error", "code": "rejected",
                                   "detail": exc.detail})
                return
            self.broadcast(self.state_message())
            return
        self.send(client, {"type": "error", "code": "bad_message",
                           "detail": f"unknown message type {mtype!r}"})


async def _stream_writer(client: _Client, writer: asyncio.StreamWriter) -> None:
    while not client.closed:
        text = await client.outbox.get()
        if text is None or client.closed:
            break
        writer.write(text.encode() + b"\n")
        await writer.drain()
    writer.close()


async def handle_stream(hub: Hub, reader: asyncio.StreamReader,
                        writer: asyncio.StreamWriter) -> None:
    """One NDJSON TCP client: JSON per line in, JSON per line out."""
    client = hub.register()
    pump = asyncio.ensure_future(_stream_writer(client, writer))
    try:
        while True:
            line = await reader.readline()
            if not line:
                break
            text = line.decode(errors="replace").strip()
            if text:
                hub.handle_text(client, text)
    except ConnectionError:
        pass
    finally:
        hub.drop(client)
        pump.cancel()


def create_app(hub: Hub, ui_dir: str | None = None) -> FastAPI:
    """FastAPI app exposing /ws plus the optional static UI bundle."""
    app = FastAPI()

    @app.websocket("/ws")
    async def websocket_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        client = hub.register()

        async def pump() -> None:
            while not client.closed:
                text = await client.outbox.get()
                if text is None or client.closed:
                    break
                await ws.send_text(text)

        task = asyncio.ensure_future(pump())
        try:
            while True:
                raw = await ws.receive_text()
                hub.handle_text(client, raw)
        except WebSocketDisconnect:
            pass
        finally:
            hub.drop(client)
            task.cancel()

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


@dataclass
class ServiceRunner:
    """Handles for a started service; tests use the ephemeral stream port."""

    hub: Hub
    live: LiveSession
    stream_port: int | None
    _stream_server: Any = None
    _uvicorn: Any = None
    _uvicorn_task: Any = None
    tasks: list = field(default_factory=list)

    async def stop(self) -> None:
        if self._stream_server is not None:
            self._stream_server.close()
            await self._stream_server.wait_closed()
        if self._uvicorn is not None:
            self._uvicorn.should_exit = True
            if self._uvicorn_task is not None:
                await self._uvicorn_task
        await asyncio.get_running_loop().run_in_executor(None, self.live.stop)


async def start_service(instance: ProblemInstance,
                        host: str = "127.0.0.1",
                        port: int | None = 8765,
                        stream_port: int | None = 0,
                        ui_dir: str | None = None,
                        options: SolveOptions | None = None,
                        debounce: float = 0.05) -> ServiceRunner:
    """Start the live session plus the requested transports. ``port`` is the
    websocket/HTTP port, ``stream_port`` the NDJSON one; None disables either,
    0 picks an ephemeral port (reported on the returned runner)."""
    loop = asyncio.get_running_loop()
    session = Session(instance, options)
    live = LiveSession(session, debounce=debounce)
    hub = Hub(live, loop)
    live.on_solution = hub.solution_from_worker
    live.on_error = hub.error_from_worker
    live.start()

    runner = ServiceRunner(hub=hub, live=live, stream_port=None)
    if stream_port is not None:
        server = await asyncio.start_server(
            lambda r, w: handle_stream(hub, r, w), host, stream_port)
        runner._stream_server = server
        runner.stream_port = server.sockets[0].getsockname()[1]
        log.info("stream listening on %s:%d", host, runner.stream_port)

    if port is not None:
        import uvicorn

        config = uvicorn.Config(create_app(hub, ui_dir), host=host, port=port,
                                log_level="warning", lifespan="off")
        runner._uvicorn = uvicorn.Server(config)
        runner._uvicorn_task = asyncio.ensure_future(runner._uvicorn.serve())
        log.info("websocket listening on ws://%s:%d/ws", host, port)
    return runner


async def serve_forever(instance: ProblemInstance, **kwargs) -> None:
    runner = await start_service(instance, **kwargs)
    try:
        await asyncio.Event().wait()
    finally:
        await runner.stop()
