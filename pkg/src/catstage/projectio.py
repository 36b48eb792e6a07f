"""Project document parsing, canonical serialization, and the project digest.

Document format (``.catproj.json``): UTF-8 JSON, no BOM. Top level is
exactly ``{"format_version", "name", "stage", "sprites"}`` with
``stage = {"width", "height", "tick_rate"}``,
``sprite = {"name", "costumes", "sounds", "scripts"}``,
``script = {"trigger", "bricks"}``,
``trigger = {"type": "WhenProgramStarts" | "WhenTapped" | "WhenIReceive", "message"?}``
and ``brick = {"type": <variant name>, ...params, "body"? for loops}``.

Parsing is strict: unknown top-level fields, unknown brick or trigger type
names, wrong parameter types, duplicate JSON keys, and any validity
violation are all errors. The one tolerated extra is an ignored "comment"
field on brick objects.

Serialization is canonical: fixed field order, compact separators, raw
UTF-8, integers only (non-integer numeric parameters are not permitted in
format_version 1), no trailing newline. Two equal projects always
serialize to identical bytes, and the project digest is the SHA-256 of
exactly those bytes.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from . import model
from .model import (
    Brick,
    Costume,
    Project,
    Script,
    Sound,
    Sprite,
    StageConfig,
    Trigger,
    WhenIReceive,
    validate,
)


class ParseError(ValueError):
    """A document failed to parse; ``path`` names the deepest failing node."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path or '<document>'}: {message}")


def _reject_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise ParseError("", f"duplicate JSON key {key!r}")
        seen.add(key)
    return dict(pairs)


def _require_object(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(path, f"expected an object, got {type(value).__name__}")
    return value


def _require_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise ParseError(path, f"expected a list, got {type(value).__name__}")
    return value


def _require_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ParseError(path, f"expected a string, got {type(value).__name__}")
    return value


def _require_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _take(obj: dict, path: str, keys: tuple[str, ...], optional: tuple[str, ...] = (),
          ignored: tuple[str, ...] = ()) -> None:
    """Enforce an exact key set on one document object."""
    for key in keys:
        if key not in obj:
            raise ParseError(path, f"missing required field {key!r}")
    allowed = set(keys) | set(optional) | set(ignored)
    for key in obj:
        if key not in allowed:
            raise ParseError(f"{path}.{key}" if path else key, f"unknown field {key!r}")


def _parse_trigger(value: Any, path: str) -> Trigger:
    obj = _require_object(value, path)
    if "type" not in obj:
        raise ParseError(path, "missing required field 'type'")
    name = _require_str(obj["type"], f"{path}.type")
    cls = model.TRIGGER_TYPES.get(name)
    if cls is None:
        raise ParseError(f"{path}.type", f"unknown trigger type {name!r}")
    if cls is WhenIReceive:
        _take(obj, path, ("type", "message"))
        return WhenIReceive(message=_require_str(obj["message"], f"{path}.message"))
    _take(obj, path, ("type",))
    return cls()


def _parse_brick(value: Any, path: str, depth: int) -> Brick:
    if depth > model.MAX_NESTING_DEPTH + 1:
        raise ParseError(path, "brick nesting too deep")
    obj = _require_object(value, path)
    if "type" not in obj:
        raise ParseError(path, "missing required field 'type'")
    name = _require_str(obj["type"], f"{path}.type")
    cls = model.BRICK_TYPES.get(name)
    if cls is None:
        raise ParseError(f"{path}.type", f"unknown brick type {name!r}")
    params = model.brick_param_fields(cls)
    has_body = cls in model.LOOP_BRICKS
    keys = ("type", *params) + (("body",) if has_body else ())
    _take(obj, path, keys, ignored=("comment",))
    kwargs: dict[str, Any] = {}
    for fld in params:
        raw = obj[fld]
        field_path = f"{path}.{fld}"
        if fld in ("message", "costume_id", "sound_id", "text"):
            kwargs[fld] = _require_str(raw, field_path)
        else:
            kwargs[fld] = _require_int(raw, field_path)
    if has_body:
        body_raw = _require_list(obj["body"], f"{path}.body")
        kwargs["body"] = tuple(
            _parse_brick(item, f"{path}.body[{i}]", depth + 1)
            for i, item in enumerate(body_raw)
        )
    return cls(**kwargs)


def _parse_script(value: Any, path: str) -> Script:
    obj = _require_object(value, path)
    _take(obj, path, ("trigger", "bricks"))
    trigger = _parse_trigger(obj["trigger"], f"{path}.trigger")
    bricks_raw = _require_list(obj["bricks"], f"{path}.bricks")
    bricks = tuple(
        _parse_brick(item, f"{path}.bricks[{i}]", 1) for i, item in enumerate(bricks_raw)
    )
    return Script(trigger=trigger, bricks=bricks)


def _parse_asset(value: Any, path: str, cls) -> Any:
    obj = _require_object(value, path)
    _take(obj, path, ("id", "file"))
    return cls(
        id=_require_str(obj["id"], f"{path}.id"),
        file=_require_str(obj["file"], f"{path}.file"),
    )


def _parse_sprite(value: Any, path: str) -> Sprite:
    obj = _require_object(value, path)
    _take(obj, path, ("name", "costumes", "sounds", "scripts"))
    name = _require_str(obj["name"], f"{path}.name")
    costumes = tuple(
        _parse_asset(item, f"{path}.costumes[{i}]", Costume)
        for i, item in enumerate(_require_list(obj["costumes"], f"{path}.costumes"))
    )
    sounds = tuple(
        _parse_asset(item, f"{path}.sounds[{i}]", Sound)
        for i, item in enumerate(_require_list(obj["sounds"], f"{path}.sounds"))
    )
    scripts = tuple(
        _parse_script(item, f"{path}.scripts[{i}]")
        for i, item in enumerate(_require_list(obj["scripts"], f"{path}.scripts"))
    )
    return Sprite(name=name, costumes=costumes, sounds=sounds, scripts=scripts)


def parse_project(data: bytes | str, *, check: bool = True) -> Project:
    """Parse a project document; raises :class:`ParseError` on any problem.

    With ``check=True`` (the default) the parsed project must also pass
    ``validate``; the first violation is reported as a parse error. With
    ``check=False`` only structure and types are enforced, which lets
    callers report the full violation list themselves.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("", f"not valid UTF-8: {exc}") from exc
    else:
        text = data
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except ParseError:
        raise
    except RecursionError as exc:
        raise ParseError("", "document nesting too deep") from exc
    except ValueError as exc:
        raise ParseError("", f"malformed JSON: {exc}") from exc

    try:
        obj = _require_object(doc, "")
        _take(obj, "", ("format_version", "name", "stage", "sprites"))
        version = _require_int(obj["format_version"], "format_version")
        if version != 1:
            raise ParseError("format_version", f"unsupported format_version {version}")
        name = _require_str(obj["name"], "name")
        stage_obj = _require_object(obj["stage"], "stage")
        _take(stage_obj, "stage", ("width", "height", "tick_rate"))
        stage = StageConfig(
            width=_require_int(stage_obj["width"], "stage.width"),
            height=_require_int(stage_obj["height"], "stage.height"),
            tick_rate=_require_int(stage_obj["tick_rate"], "stage.tick_rate"),
        )
        sprites = tuple(
            _parse_sprite(item, f"sprites[{i}]")
            for i, item in enumerate(_require_list(obj["sprites"], "sprites"))
        )
    except RecursionError as exc:
        raise ParseError("", "document nesting too deep") from exc
    project = Project(name=name, stage=stage, sprites=sprites, format_version=version)
    if check:
        violations = validate(project)
        if violations:
            first = violations[0]
            raise ParseError(first.path, first.message)
    return project


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------


def _trigger_doc(trigger: Trigger) -> dict:
    doc: dict[str, Any] = {"type": type(trigger).__name__}
    if isinstance(trigger, WhenIReceive):
        doc["message"] = trigger.message
    return doc


def _brick_doc(brick: Brick) -> dict:
    doc: dict[str, Any] = {"type": type(brick).__name__}
    for fld in model.brick_param_fields(type(brick)):
        doc[fld] = getattr(brick, fld)
    if isinstance(brick, model.LOOP_BRICKS):
        doc["body"] = [_brick_doc(b) for b in brick.body]
    return doc


def project_to_doc(project: Project) -> dict:
    """Plain-dict rendering of a project in canonical field order."""
    return {
        "format_version": project.format_version,
        "name": project.name,
        "stage": {
            "width": project.stage.width,
            "height": project.stage.height,
            "tick_rate": project.stage.tick_rate,
        },
        "sprites": [
            {
                "name": sprite.name,
                "costumes": [{"id": c.id, "file": c.file} for c in sprite.costumes],
                "sounds": [{"id": s.id, "file": s.file} for s in sprite.sounds],
                "scripts": [
                    {
                        "trigger": _trigger_doc(script.trigger),
                        "bricks": [_brick_doc(b) for b in script.bricks],
                    }
                    for script in sprite.scripts
                ],
            }
            for sprite in project.sprites
        ],
    }


def serialize_project(project: Project) -> bytes:
    """Canonical bytes for a valid project; rejects invalid ones."""
    violations = validate(project)
    if violations:
        raise ValueError(f"cannot serialize invalid project: {violations[0]}")
    doc = project_to_doc(project)
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def project_digest(project: Project) -> str:
    """SHA-256 hex digest of the canonical project bytes.

    Pins replay to the exact program. Asset file contents are deliberately
    not covered; the digest is about program logic.
    """
    return hashlib.sha256(serialize_project(project)).hexdigest()
