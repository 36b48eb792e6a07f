"""Play logs, traces, and bit-exact replay.

A play log is everything needed to re-run a session identically: the
project digest it was recorded against, the RNG seed, the tick rate, the
last executed tick, and the tick-stamped input events. The trace is the
normative recording: per tick, the canonical scene bytes and canonical
outputs bytes. Its SHA-256 is the trace digest; digest equality certifies
a bit-identical replay.

Play log file format (``.catplay.jsonl``): UTF-8, LF line endings, one
JSON object per line. Line 1 is the header
``{"version":1,"project_digest":...,"seed":...,"tick_rate":...,"end_tick":...}``;
each following line is ``{"tick":N,"type":"tap","x":X,"y":Y}`` or
``{"tick":N,"type":"stop"}``. Events are sorted by tick (stable within a
tick) and never exceed end_tick; a stop event must sit at end_tick, since
the session stops once the stop's tick has executed.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .frames import canonical_outputs_bytes, canonical_scene_bytes
from .model import Project
from .projectio import ParseError, project_digest
from .runtime import CostumeSizes, EventIn, Scene, Session, Stop, Tap, TickOutputs

_HEX64 = re.compile(r"^[0-9a-f]{64}$")


class DigestMismatchError(ValueError):
    """The play log was recorded against a different project."""


@dataclass(frozen=True, slots=True)
class TimedEvent:
    tick: int
    event: EventIn


@dataclass(frozen=True)
class PlayLog:
    project_digest: str
    seed: int
    tick_rate: int
    end_tick: int
    events: tuple[TimedEvent, ...] = ()
    version: int = 1

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))


def validate_playlog(log: PlayLog) -> None:
    """Raise ValueError if the log violates its invariants."""
    if log.version != 1:
        raise ValueError(f"unsupported play log version {log.version}")
    if not _HEX64.match(log.project_digest):
        raise ValueError("project_digest must be 64 lowercase hex characters")
    if not 0 <= log.seed < (1 << 64):
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    if not 1 <= log.tick_rate <= 240:
        raise ValueError("tick_rate must be in [1, 240]")
    if log.end_tick < 0:
        raise ValueError("end_tick must be non-negative")
    prev = 0
    for te in log.events:
        if te.tick < prev:
            raise ValueError("events must be sorted by tick")
        prev = te.tick
        if te.tick > log.end_tick:
            raise ValueError(f"event tick {te.tick} exceeds end_tick {log.end_tick}")
        if isinstance(te.event, Stop) and te.tick != log.end_tick:
            raise ValueError("a stop event must sit at end_tick")


@dataclass(frozen=True, slots=True)
class TraceRecord:
    tick: int
    scene_bytes: bytes
    outputs_bytes: bytes


@dataclass(frozen=True)
class Trace:
    """Per-tick canonical records for ticks 0..end_tick inclusive."""

    records: tuple[TraceRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)


def trace_digest(trace: Trace) -> str:
    """SHA-256 over scene bytes then outputs bytes, in tick order."""
    h = hashlib.sha256()
    for record in trace.records:
        h.update(record.scene_bytes)
        h.update(record.outputs_bytes)
    return h.hexdigest()


def make_record(scene: Scene, outputs: TickOutputs) -> TraceRecord:
    return TraceRecord(
        tick=outputs.tick,
        scene_bytes=canonical_scene_bytes(scene),
        outputs_bytes=canonical_outputs_bytes(outputs),
    )


# ---------------------------------------------------------------------------
# Recording
# ---------------------------------------------------------------------------


class Recorder:
    """Wraps a live session, capturing injected events and the trace.

    The resulting play log replays to exactly the trace this recorder saw;
    that equality is the whole point of the design.
    """

    def __init__(
        self,
        project: Project,
        seed: int,
        tick_rate_override: Optional[int] = None,
        costume_sizes: Optional[CostumeSizes] = None,
    ):
        self.project_digest = project_digest(project)
        self.session = Session(project, seed, tick_rate_override, costume_sizes)
        self._events: list[TimedEvent] = []
        self._records: list[TraceRecord] = []

    def inject(self, event: EventIn) -> None:
        """Forward an event to the session, logging the tick it lands on."""
        if self.session.stopped:
            return
        self._events.append(TimedEvent(tick=self.session.tick, event=event))
        self.session.inject(event)

    def step(self) -> TickOutputs:
        outputs = self.session.step()
        self._records.append(make_record(self.session.scene(), outputs))
        return outputs

    def run_until(self, until_tick: int) -> None:
        """Step through tick ``until_tick`` inclusive (or until stopped)."""
        while not self.session.stopped and self.session.tick <= until_tick:
            self.step()

    def playlog(self) -> PlayLog:
        if self.session.tick == 0:
            raise ValueError("no ticks executed yet; nothing to record")
        return PlayLog(
            project_digest=self.project_digest,
            seed=self.session.seed,
            tick_rate=self.session.tick_rate,
            end_tick=self.session.tick - 1,
            events=tuple(self._events),
        )

    def trace(self) -> Trace:
        return Trace(records=tuple(self._records))

    def digest(self) -> str:
        return trace_digest(self.trace())


def record(recorder: Recorder, until_tick: int) -> PlayLog:
    """Run a recorder through ``until_tick`` and return its play log."""
    recorder.run_until(until_tick)
    return recorder.playlog()


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


def iter_replay(
    project: Project,
    log: PlayLog,
    costume_sizes: Optional[CostumeSizes] = None,
) -> Iterator[tuple[Scene, TickOutputs]]:
    """Re-run a play log, yielding (scene, outputs) per tick 0..end_tick.

    Rejects the log before any execution if its digest does not match the
    project.
    """
    actual = project_digest(project)
    if actual != log.project_digest:
        raise DigestMismatchError(
            f"play log was recorded against project digest {log.project_digest}, "
            f"but this project has digest {actual}"
        )
    validate_playlog(log)
    session = Session(project, log.seed, log.tick_rate, costume_sizes)
    by_tick: dict[int, list[EventIn]] = {}
    for te in log.events:
        by_tick.setdefault(te.tick, []).append(te.event)
    for tick in range(log.end_tick + 1):
        for event in by_tick.get(tick, ()):
            session.inject(event)
        outputs = session.step()
        yield session.scene(), outputs


def replay(
    project: Project,
    log: PlayLog,
    costume_sizes: Optional[CostumeSizes] = None,
) -> Trace:
    """Replay a play log into its full trace."""
    return Trace(
        records=tuple(
            make_record(scene, outputs)
            for scene, outputs in iter_replay(project, log, costume_sizes)
        )
    )


def verify(
    project: Project,
    log: PlayLog,
    expected_digest: str,
    costume_sizes: Optional[CostumeSizes] = None,
) -> bool:
    """Replay and compare the trace digest against an expected value."""
    return trace_digest(replay(project, log, costume_sizes)) == expected_digest


# ---------------------------------------------------------------------------
# Play log file format
# ---------------------------------------------------------------------------


def playlog_to_jsonl(log: PlayLog) -> bytes:
    validate_playlog(log)
    lines = [
        json.dumps(
            {
                "version": log.version,
                "project_digest": log.project_digest,
                "seed": log.seed,
                "tick_rate": log.tick_rate,
                "end_tick": log.end_tick,
            },
            separators=(",", ":"),
        )
    ]
    for te in log.events:
        if isinstance(te.event, Tap):
            lines.append(
                json.dumps(
                    {"tick": te.tick, "type": "tap", "x": te.event.x, "y": te.event.y},
                    separators=(",", ":"),
                )
            )
        else:
            lines.append(json.dumps({"tick": te.tick, "type": "stop"}, separators=(",", ":")))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _require_number(obj, key: str, path: str) -> Union[int, float]:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}.{key}", f"expected a number for {key!r}")
    return value


def _require_int(obj, key: str, path: str) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{path}.{key}", f"expected an integer for {key!r}")
    return value


def _line_obj(raw: str, path: str) -> dict:
    try:
        obj = json.loads(raw)
    except ValueError as exc:
        raise ParseError(path, f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(path, "expected a JSON object")
    return obj


def playlog_from_jsonl(data: bytes | str) -> PlayLog:
    """Strictly parse a ``.catplay.jsonl`` document."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("", f"not valid UTF-8: {exc}") from exc
    else:
        text = data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("", "empty play log")
    header = _line_obj(lines[0], "line 1")
    expected_keys = {"version", "project_digest", "seed", "tick_rate", "end_tick"}
    if set(header) != expected_keys:
        raise ParseError("line 1", f"header fields must be exactly {sorted(expected_keys)}")
    version = _require_int(header, "version", "line 1")
    if version != 1:
        raise ParseError("line 1.version", f"unsupported play log version {version}")
    digest = header.get("project_digest")
    if not isinstance(digest, str):
        raise ParseError("line 1.project_digest", "expected a string")
    events = []
    for idx, raw in enumerate(lines[1:], start=2):
        path = f"line {idx}"
        if raw == "":
            raise ParseError(path, "blank line in play log")
        obj = _line_obj(raw, path)
        kind = obj.get("type")
        if kind == "tap":
            if set(obj) != {"tick", "type", "x", "y"}:
                raise ParseError(path, "tap fields must be exactly ['tick','type','x','y']")
            events.append(
                TimedEvent(
                    tick=_require_int(obj, "tick", path),
                    event=Tap(
                        x=float(_require_number(obj, "x", path)),
                        y=float(_require_number(obj, "y", path)),
                    ),
                )
            )
        elif kind == "stop":
            if set(obj) != {"tick", "type"}:
                raise ParseError(path, "stop fields must be exactly ['tick','type']")
            events.append(TimedEvent(tick=_require_int(obj, "tick", path), event=Stop()))
        else:
            raise ParseError(f"{path}.type", f"unknown event type {kind!r}")
        if events[-1].tick < 0:
            raise ParseError(f"{path}.tick", "event tick must be non-negative")
    log = PlayLog(
        project_digest=digest,
        seed=_require_int(header, "seed", "line 1"),
        tick_rate=_require_int(header, "tick_rate", "line 1"),
        end_tick=_require_int(header, "end_tick", "line 1"),
        events=tuple(events),
    )
    try:
        validate_playlog(log)
    except ValueError as exc:
        raise ParseError("", str(exc)) from exc
    return log
