"""catstage: a deterministic desk-scale runtime for a block-based sprite language.

Projects are trees of sprites, scripts, and bricks. A session interprets
all scripts cooperatively on a logical tick clock; any interactive play is
captured as a compact play log (seed + tick-stamped inputs) that replays
bit-identically, certified by a SHA-256 trace digest.

Brick and trigger types live in :mod:`catstage.model`; runtime events and
scenes in :mod:`catstage.runtime` (note ``model.Speak`` is the brick,
``runtime.Speak`` the emitted event).
"""

from .model import (
    Brick,
    Broadcast,
    BroadcastAndWait,
    ChangeXBy,
    ChangeYBy,
    ComeToFront,
    Costume,
    Forever,
    GlideTo,
    Hide,
    NextCostume,
    PlaceAt,
    PlaceAtRandom,
    PlaySound,
    Project,
    Repeat,
    Script,
    SetCostume,
    SetSize,
    Show,
    Sound,
    Speak,
    Sprite,
    StageConfig,
    Trigger,
    Violation,
    Wait,
    WhenIReceive,
    WhenProgramStarts,
    WhenTapped,
    validate,
)
from .projectio import ParseError, parse_project, project_digest, serialize_project
from .replay import (
    DigestMismatchError,
    PlayLog,
    Recorder,
    TimedEvent,
    Trace,
    TraceRecord,
    iter_replay,
    playlog_from_jsonl,
    playlog_to_jsonl,
    record,
    replay,
    trace_digest,
    verify,
)
from .runtime import (
    Scene,
    SceneEntry,
    Session,
    Stop,
    Tap,
    TickOutputs,
    create_session,
    hit_test,
)

__version__ = "0.1.0"

__all__ = [
    "Brick",
    "Broadcast",
    "BroadcastAndWait",
    "ChangeXBy",
    "ChangeYBy",
    "ComeToFront",
    "Costume",
    "DigestMismatchError",
    "Forever",
    "GlideTo",
    "Hide",
    "NextCostume",
    "ParseError",
    "PlaceAt",
    "PlaceAtRandom",
    "PlayLog",
    "PlaySound",
    "Project",
    "Recorder",
    "Repeat",
    "Scene",
    "SceneEntry",
    "Script",
    "Session",
    "SetCostume",
    "SetSize",
    "Show",
    "Sound",
    "Speak",
    "Sprite",
    "StageConfig",
    "Stop",
    "Tap",
    "TickOutputs",
    "TimedEvent",
    "Trace",
    "TraceRecord",
    "Trigger",
    "Violation",
    "Wait",
    "WhenIReceive",
    "WhenProgramStarts",
    "WhenTapped",
    "create_session",
    "hit_test",
    "iter_replay",
    "parse_project",
    "playlog_from_jsonl",
    "playlog_to_jsonl",
    "project_digest",
    "record",
    "replay",
    "serialize_project",
    "trace_digest",
    "validate",
    "verify",
]
