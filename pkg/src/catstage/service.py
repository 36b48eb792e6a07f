"""Live session service: WebSocket protocol plus static costume assets.

Protocol (text frames, one JSON message per frame, protocol_version 1):

* server greets with ``{"type":"hello","protocol_version":1,"projects":[...]}``
* client: ``{"type":"load","project_name"}``, ``{"type":"start","seed"}``,
  ``{"type":"tap","x","y"}``, ``{"type":"stop"}``, ``{"type":"save_log"}``
* server: ``loaded`` (digest, stage, costume list), one ``frame`` per tick,
  ``event`` per emitted output, ``ended`` when the session stops, ``log``
  with the play log text, and ``error`` for protocol violations (the
  connection stays open).

Each connection owns at most one live session, stepped at the project's
tick rate against the wall clock. Logical ticks are never skipped or
duplicated: if the server falls behind it runs ticks back to back until
caught up. Taps are stamped with the next logical tick on injection, so
the saved play log replays to exactly the streamed frame sequence.

Costume files are served at ``/assets/<sprite>/<costume_id>`` so clients
can render frames themselves; the server never rasterizes live frames.
"""

from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from .frames import load_costume_sizes, outputs_to_jsonable, scene_to_jsonable
from .model import Project
from .projectio import ParseError, parse_project, project_digest
from .replay import Recorder, playlog_to_jsonl
from .runtime import Stop, Tap

PROTOCOL_VERSION = 1
PROJECT_SUFFIX = ".catproj.json"


class TickPacer:
    """Maps the wall clock to a gapless logical tick sequence.

    Tick k becomes due once (k + 1) tick durations have elapsed since
    start, so ``due(now)`` is the number of ticks that should have
    completed by ``now``. Catching up after a stall is the caller's loop:
    run ticks while completed < due.
    """

    def __init__(self, tick_rate: int, start_time: float):
        self.tick_rate = tick_rate
        self.start_time = start_time

    def due(self, now: float) -> int:
        if now <= self.start_time:
            return 0
        return int((now - self.start_time) * self.tick_rate)

    def next_deadline(self, completed_ticks: int) -> float:
        return self.start_time + (completed_ticks + 1) / self.tick_rate


def discover_projects(project_dir: Path) -> dict[str, Path]:
    """Project name -> document path for every project file in a directory."""
    out: dict[str, Path] = {}
    for path in sorted(project_dir.glob(f"*{PROJECT_SUFFIX}")):
        out[path.name.removesuffix(PROJECT_SUFFIX)] = path
    return out


def build_asset_registry(
    project_dir: Path, projects: dict[str, Path]
) -> dict[tuple[str, str], Path]:
    """(sprite, costume_id) -> asset path, unioned over all served projects.

    Later project files win on collisions; iteration order is the sorted
    file order from discovery, so the registry is deterministic.
    """
    registry: dict[tuple[str, str], Path] = {}
    root = project_dir.resolve()
    for path in projects.values():
        try:
            project = parse_project(path.read_bytes())
        except (OSError, ParseError):
            continue
        for sprite in project.sprites:
            for costume in sprite.costumes:
                asset = (path.parent / costume.file).resolve()
                if root in asset.parents or asset == root:
                    registry[(sprite.name, costume.id)] = asset
    return registry


@dataclass
class _Connection:
    project: Optional[Project] = None
    project_path: Optional[Path] = None
    costume_sizes: dict = field(default_factory=dict)
    recorder: Optional[Recorder] = None
    pacer: Optional[TickPacer] = None
    running: bool = False


def create_app(
    project_dir: Path | str,
    clock: Callable[[], float] = time.monotonic,
    player_dir: Path | str | None = None,
) -> FastAPI:
    project_dir = Path(project_dir)
    projects = discover_projects(project_dir)
    assets = build_asset_registry(project_dir, projects)
    app = FastAPI(title="catstage session service")

    @app.get("/assets/{sprite}/{costume_id}")
    def get_asset(sprite: str, costume_id: str):
        path = assets.get((sprite, costume_id))
        if path is None or not path.is_file():
            from fastapi import HTTPException

            raise HTTPException(status_code=404, detail="unknown asset")
        return FileResponse(path)

    async def send(ws: WebSocket, payload: dict) -> None:
        await ws.send_text(json.dumps(payload, ensure_ascii=False, separators=(",", ":")))

    async def send_error(ws: WebSocket, message: str) -> None:
        await send(ws, {"type": "error", "message": message})

    async def run_due_ticks(conn: _Connection, ws: WebSocket) -> None:
        due = conn.pacer.due(clock())
        session = conn.recorder.session
        while conn.running and session.tick < due:
            outputs = conn.recorder.step()
            scene = session.scene()
            await send(
                ws,
                {"type": "frame", "tick": outputs.tick, "scene": scene_to_jsonable(scene)},
            )
            for event in outputs_to_jsonable(outputs):
                kind = event.pop("kind")
                await send(
                    ws,
                    {"type": "event", "tick": outputs.tick, "kind": kind, "payload": event},
                )
            if session.stopped:
                await send(ws, {"type": "ended", "tick": outputs.tick})
                conn.running = False

    async def handle_message(conn: _Connection, ws: WebSocket, text: str) -> None:
        try:
            msg = json.loads(text)
        except ValueError:
            await send_error(ws, "malformed JSON message")
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            await send_error(ws, "message must be an object with a string 'type'")
            return
        kind = msg["type"]

        if kind == "load":
            if conn.running:
                await send_error(ws, "cannot load while a session is running")
                return
            name = msg.get("project_name")
            path = projects.get(name) if isinstance(name, str) else None
            if path is None:
                await send_error(ws, f"unknown project {name!r}")
                return
            try:
                project = parse_project(path.read_bytes())
            except (OSError, ParseError) as exc:
                await send_error(ws, f"cannot load project: {exc}")
                return
            conn.project = project
            conn.project_path = path
            conn.costume_sizes = load_costume_sizes(project, path.parent)
            conn.recorder = None
            await send(
                ws,
                {
                    "type": "loaded",
                    "project_digest": project_digest(project),
                    "stage": {
                        "w": project.stage.width,
                        "h": project.stage.height,
                        "tick_rate": project.stage.tick_rate,
                    },
                    "costumes": [
                        {"sprite": sprite.name, "costume_id": c.id, "file": c.file}
                        for sprite in project.sprites
                        for c in sprite.costumes
                    ],
                },
            )
        elif kind == "start":
            if conn.project is None:
                await send_error(ws, "load a project before starting")
                return
            if conn.running:
                await send_error(ws, "a session is already running")
                return
            seed = msg.get("seed")
            if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < (1 << 64):
                await send_error(ws, "start requires an unsigned 64-bit integer 'seed'")
                return
            conn.recorder = Recorder(conn.project, seed, costume_sizes=conn.costume_sizes)
            conn.pacer = TickPacer(conn.recorder.session.tick_rate, clock())
            conn.running = True
        elif kind == "tap":
            if not conn.running or conn.recorder is None:
                await send_error(ws, "tap requires a running session")
                return
            x, y = msg.get("x"), msg.get("y")
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in (x, y)):
                await send_error(ws, "tap requires numeric 'x' and 'y'")
                return
            conn.recorder.inject(Tap(x=float(x), y=float(y)))
        elif kind == "stop":
            if not conn.running or conn.recorder is None:
                await send_error(ws, "stop requires a running session")
                return
            conn.recorder.inject(Stop())
        elif kind == "save_log":
            if conn.recorder is None:
                await send_error(ws, "save_log requires a started session")
                return
            if conn.recorder.session.tick == 0:
                await send_error(ws, "no ticks executed yet; nothing to save")
                return
            text_log = playlog_to_jsonl(conn.recorder.playlog()).decode("utf-8")
            await send(ws, {"type": "log", "playlog": text_log})
        else:
            await send_error(ws, f"unknown message type {kind!r}")

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        await send(
            ws,
            {
                "type": "hello",
                "protocol_version": PROTOCOL_VERSION,
                "projects": sorted(projects),
            },
        )
        conn = _Connection()
        try:
            while True:
                if conn.running:
                    await run_due_ticks(conn, ws)
                    if not conn.running:
                        continue
                    timeout = max(
                        conn.pacer.next_deadline(conn.recorder.session.tick) - clock(),
                        0.001,
                    )
                    try:
                        text = await asyncio.wait_for(ws.receive_text(), timeout=timeout)
                    except asyncio.TimeoutError:
                        continue
                else:
                    text = await ws.receive_text()
                await handle_message(conn, ws, text)
        except WebSocketDisconnect:
            return

    if player_dir is not None:
        app.mount("/", StaticFiles(directory=str(player_dir), html=True), name="player")

    return app
