"""Static program model: stage, sprites, scripts, triggers, and bricks.

A project is a pure value. Everything here is immutable after construction
and safe to share across threads; the interpreter keeps all mutable state
in its own session objects.

Bricks carry literal parameters only. There are no variables, formulas, or
expressions in this language version, and every numeric brick parameter is
an integer. Loop bodies are structurally nested brick lists rather than
begin/end marker bricks, which removes unbalanced-marker errors by
construction.

``validate`` walks a project in document order and returns one
:class:`Violation` per broken invariant. Paths use the document's own
shape, e.g. ``sprites[1].scripts[0].bricks[2]`` with ``.body[k]`` segments
for nested loop bodies. Violations for a single bad field point at the
field; dangling asset references and bad ranges point at the brick.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from typing import Union

MAX_NESTING_DEPTH = 64
MIN_TICK_RATE = 1
MAX_TICK_RATE = 240

_PATH_SEP = re.compile(r"[/\\]")


@dataclass(frozen=True, slots=True)
class Violation:
    """One broken invariant, located by a document path."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


# ---------------------------------------------------------------------------
# Triggers
# ---------------------------------------------------------------------------


class TriggerBase:
    """Base for script triggers; concrete variants below."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class WhenProgramStarts(TriggerBase):
    pass


@dataclass(frozen=True, slots=True)
class WhenTapped(TriggerBase):
    pass


@dataclass(frozen=True, slots=True)
class WhenIReceive(TriggerBase):
    message: str


Trigger = Union[WhenProgramStarts, WhenTapped, WhenIReceive]


# ---------------------------------------------------------------------------
# Bricks
# ---------------------------------------------------------------------------


class BrickBase:
    """Base for all bricks. Field order doubles as the document field order."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Wait(BrickBase):
    millis: int


@dataclass(frozen=True, slots=True)
class Broadcast(BrickBase):
    message: str


@dataclass(frozen=True, slots=True)
class BroadcastAndWait(BrickBase):
    message: str


@dataclass(frozen=True, slots=True)
class PlaceAt(BrickBase):
    x: int
    y: int


@dataclass(frozen=True, slots=True)
class GlideTo(BrickBase):
    x: int
    y: int
    millis: int


@dataclass(frozen=True, slots=True)
class ChangeXBy(BrickBase):
    dx: int


@dataclass(frozen=True, slots=True)
class ChangeYBy(BrickBase):
    dy: int


@dataclass(frozen=True, slots=True)
class PlaceAtRandom(BrickBase):
    xmin: int
    xmax: int
    ymin: int
    ymax: int


@dataclass(frozen=True, slots=True)
class SetCostume(BrickBase):
    costume_id: str


@dataclass(frozen=True, slots=True)
class NextCostume(BrickBase):
    pass


@dataclass(frozen=True, slots=True)
class Show(BrickBase):
    pass


@dataclass(frozen=True, slots=True)
class Hide(BrickBase):
    pass


@dataclass(frozen=True, slots=True)
class SetSize(BrickBase):
    percent: int


@dataclass(frozen=True, slots=True)
class ComeToFront(BrickBase):
    pass


@dataclass(frozen=True, slots=True)
class PlaySound(BrickBase):
    sound_id: str


@dataclass(frozen=True, slots=True)
class Speak(BrickBase):
    text: str


@dataclass(frozen=True)
class Repeat(BrickBase):
    count: int
    body: tuple["Brick", ...]

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))


@dataclass(frozen=True)
class Forever(BrickBase):
    body: tuple["Brick", ...]

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))


Brick = Union[
    Wait,
    Broadcast,
    BroadcastAndWait,
    PlaceAt,
    GlideTo,
    ChangeXBy,
    ChangeYBy,
    PlaceAtRandom,
    SetCostume,
    NextCostume,
    Show,
    Hide,
    SetSize,
    ComeToFront,
    PlaySound,
    Speak,
    Repeat,
    Forever,
]

LOOP_BRICKS = (Repeat, Forever)

#: Document type name -> brick class, in a stable order.
BRICK_TYPES: dict[str, type] = {
    cls.__name__: cls
    for cls in (
        Wait,
        Broadcast,
        BroadcastAndWait,
        PlaceAt,
        GlideTo,
        ChangeXBy,
        ChangeYBy,
        PlaceAtRandom,
        SetCostume,
        NextCostume,
        Show,
        Hide,
        SetSize,
        ComeToFront,
        PlaySound,
        Speak,
        Repeat,
        Forever,
    )
}

TRIGGER_TYPES: dict[str, type] = {
    cls.__name__: cls for cls in (WhenProgramStarts, WhenTapped, WhenIReceive)
}


def brick_param_fields(cls: type) -> list[str]:
    """Scalar parameter field names of a brick class, excluding loop bodies."""
    return [f.name for f in fields(cls) if f.name != "body"]


# ---------------------------------------------------------------------------
# Project structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Costume:
    id: str
    file: str


@dataclass(frozen=True, slots=True)
class Sound:
    id: str
    file: str


@dataclass(frozen=True)
class Script:
    trigger: Trigger
    bricks: tuple[Brick, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "bricks", tuple(self.bricks))


@dataclass(frozen=True)
class Sprite:
    name: str
    costumes: tuple[Costume, ...] = ()
    sounds: tuple[Sound, ...] = ()
    scripts: tuple[Script, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "costumes", tuple(self.costumes))
        object.__setattr__(self, "sounds", tuple(self.sounds))
        object.__setattr__(self, "scripts", tuple(self.scripts))

    def costume_ids(self) -> list[str]:
        return [c.id for c in self.costumes]

    def sound_ids(self) -> list[str]:
        return [s.id for s in self.sounds]


@dataclass(frozen=True, slots=True)
class StageConfig:
    width: int
    height: int
    tick_rate: int


@dataclass(frozen=True)
class Project:
    name: str
    stage: StageConfig
    sprites: tuple[Sprite, ...] = ()
    format_version: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sprites", tuple(self.sprites))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _path_has_parent_component(path: str) -> bool:
    parts = [p for p in _PATH_SEP.split(path) if p]
    return ".." in parts or path.startswith(("/", "\\"))


def _walk_bricks(bricks: tuple[Brick, ...], base: str):
    """Yield (brick, path, depth) in document order without recursion.

    Bodies one level past the nesting cap are still yielded (so the cap
    violation can be reported) but never descended into further.
    """
    stack = [
        (brick, f"{base}[{i}]", 1) for i, brick in reversed(list(enumerate(bricks)))
    ]
    while stack:
        brick, path, depth = stack.pop()
        yield brick, path, depth
        if isinstance(brick, LOOP_BRICKS) and depth <= MAX_NESTING_DEPTH:
            for i, child in reversed(list(enumerate(brick.body))):
                stack.append((child, f"{path}.body[{i}]", depth + 1))


def _check_brick(
    brick: Brick,
    path: str,
    depth: int,
    costume_ids: set[str],
    sound_ids: set[str],
    out: list[Violation],
) -> None:
    if depth > MAX_NESTING_DEPTH:
        out.append(
            Violation(path, f"brick nesting exceeds the depth cap of {MAX_NESTING_DEPTH}")
        )
        return
    if isinstance(brick, Wait) and brick.millis < 0:
        out.append(Violation(f"{path}.millis", "Wait millis must be >= 0"))
    elif isinstance(brick, GlideTo) and brick.millis < 1:
        out.append(Violation(f"{path}.millis", "GlideTo millis must be >= 1"))
    elif isinstance(brick, SetSize) and brick.percent < 1:
        out.append(Violation(f"{path}.percent", "SetSize percent must be >= 1"))
    elif isinstance(brick, Repeat) and brick.count < 0:
        out.append(Violation(f"{path}.count", "Repeat count must be >= 0"))
    elif isinstance(brick, PlaceAtRandom):
        if brick.xmin > brick.xmax:
            out.append(Violation(path, "PlaceAtRandom requires xmin <= xmax"))
        if brick.ymin > brick.ymax:
            out.append(Violation(path, "PlaceAtRandom requires ymin <= ymax"))
    elif isinstance(brick, SetCostume) and brick.costume_id not in costume_ids:
        out.append(
            Violation(path, f"SetCostume references unknown costume id {brick.costume_id!r}")
        )
    elif isinstance(brick, PlaySound) and brick.sound_id not in sound_ids:
        out.append(
            Violation(path, f"PlaySound references unknown sound id {brick.sound_id!r}")
        )


def _validate_asset(
    kind: str, items, path_base: str, out: list[Violation]
) -> None:
    seen: set[str] = set()
    for j, item in enumerate(items):
        if not item.id:
            out.append(Violation(f"{path_base}[{j}].id", f"{kind} id must be nonempty"))
        elif item.id in seen:
            out.append(Violation(f"{path_base}[{j}].id", f"duplicate {kind} id {item.id!r}"))
        seen.add(item.id)
        if _path_has_parent_component(item.file):
            out.append(
                Violation(
                    f"{path_base}[{j}].file",
                    "asset path must be relative with no parent-directory components",
                )
            )


def validate(project: Project) -> list[Violation]:
    """Return every invariant violation in document order; empty means valid.

    Pure: equal projects produce identical violation lists.
    """
    out: list[Violation] = []
    if project.format_version != 1:
        out.append(Violation("format_version", "format_version must be 1"))
    if project.stage.width < 1:
        out.append(Violation("stage.width", "stage width must be >= 1"))
    if project.stage.height < 1:
        out.append(Violation("stage.height", "stage height must be >= 1"))
    if not MIN_TICK_RATE <= project.stage.tick_rate <= MAX_TICK_RATE:
        out.append(
            Violation(
                "stage.tick_rate",
                f"tick_rate must be in [{MIN_TICK_RATE}, {MAX_TICK_RATE}]",
            )
        )
    if not project.sprites:
        out.append(Violation("sprites", "a project needs at least one sprite"))

    seen_names: set[str] = set()
    for i, sprite in enumerate(project.sprites):
        if sprite.name in seen_names:
            out.append(Violation(f"sprites[{i}].name", f"duplicate sprite name {sprite.name!r}"))
        seen_names.add(sprite.name)
        _validate_asset("costume", sprite.costumes, f"sprites[{i}].costumes", out)
        _validate_asset("sound", sprite.sounds, f"sprites[{i}].sounds", out)
        costume_ids = set(sprite.costume_ids())
        sound_ids = set(sprite.sound_ids())
        for j, script in enumerate(sprite.scripts):
            trig = script.trigger
            if isinstance(trig, WhenIReceive) and not trig.message:
                out.append(
                    Violation(
                        f"sprites[{i}].scripts[{j}].trigger.message",
                        "WhenIReceive message must be nonempty",
                    )
                )
            base = f"sprites[{i}].scripts[{j}].bricks"
            for brick, path, depth in _walk_bricks(script.bricks, base):
                _check_brick(brick, path, depth, costume_ids, sound_ids, out)
    return out
