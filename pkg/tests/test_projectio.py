"""Document parsing, canonical serialization, and digest tests."""

from __future__ import annotations

import hashlib
import json
import random
import subprocess

import pytest

from conftest import gen_project, make_project

from catstage.model import (
    ChangeXBy,
    WhenProgramStarts,
    Repeat,
    Script,
    SetCostume,
    Speak,
    Sprite,
    validate,
)
from catstage.projectio import (
    ParseError,
    parse_project,
    project_digest,
    serialize_project,
)

HELLO_DOC = """
{
  "format_version": 1,
  "name": "hello",
  "stage": {"width": 480, "height": 800, "tick_rate": 30},
  "sprites": [
    {
      "name": "Background",
      "costumes": [{"id": "bg0", "file": "assets/bg0.png"}],
      "sounds": [],
      "scripts": [
        {
          "trigger": {"type": "WhenProgramStarts"},
          "bricks": [
            {"type": "SetCostume", "costume_id": "bg0"},
            {"type": "Speak", "text": "Hello world!"}
          ]
        }
      ]
    }
  ]
}
"""


def test_parse_hello_document():
    project = parse_project(HELLO_DOC)
    assert project.name == "hello"
    assert len(project.sprites) == 1
    sprite = project.sprites[0]
    assert sprite.name == "Background"
    assert sprite.scripts[0].bricks == (
        SetCostume(costume_id="bg0"),
        Speak(text="Hello world!"),
    )
    assert validate(project) == []


def test_wrong_format_version():
    doc = json.loads(HELLO_DOC)
    doc["format_version"] = 2
    with pytest.raises(ParseError) as exc:
        parse_project(json.dumps(doc))
    assert exc.value.path == "format_version"


def test_wrong_parameter_type():
    doc = json.loads(HELLO_DOC)
    doc["sprites"][0]["scripts"][0]["bricks"] = [{"type": "Repeat", "count": "three", "body": []}]
    with pytest.raises(ParseError) as exc:
        parse_project(json.dumps(doc))
    assert exc.value.path == "sprites[0].scripts[0].bricks[0].count"


def test_float_parameter_rejected():
    doc = json.loads(HELLO_DOC)
    doc["sprites"][0]["scripts"][0]["bricks"] = [{"type": "Wait", "millis": 1.5}]
    with pytest.raises(ParseError):
        parse_project(json.dumps(doc))


def test_bool_is_not_an_integer():
    doc = json.loads(HELLO_DOC)
    doc["sprites"][0]["scripts"][0]["bricks"] = [{"type": "Wait", "millis": True}]
    with pytest.raises(ParseError):
        parse_project(json.dumps(doc))


def test_unknown_brick_type():
    doc = json.loads(HELLO_DOC)
    doc["sprites"][0]["scripts"][0]["bricks"] = [{"type": "Twirl"}]
    with pytest.raises(ParseError) as exc:
        parse_project(json.dumps(doc))
    assert "Twirl" in str(exc.value)


def test_unknown_top_level_field():
    doc = json.loads(HELLO_DOC)
    doc["author"] = "me"
    with pytest.raises(ParseError) as exc:
        parse_project(json.dumps(doc))
    assert "author" in str(exc.value)


def test_unknown_brick_field_rejected_but_comment_ignored():
    doc = json.loads(HELLO_DOC)
    doc["sprites"][0]["scripts"][0]["bricks"][0]["comment"] = "background goes first"
    parse_project(json.dumps(doc))
    doc["sprites"][0]["scripts"][0]["bricks"][0]["speed"] = 3
    with pytest.raises(ParseError):
        parse_project(json.dumps(doc))


def test_duplicate_json_keys_rejected():
    raw = HELLO_DOC.replace('"name": "hello",', '"name": "hello", "name": "again",', 1)
    with pytest.raises(ParseError) as exc:
        parse_project(raw)
    assert "duplicate" in str(exc.value)


def test_validity_gate_on_parse():
    doc = json.loads(HELLO_DOC)
    doc["sprites"].append(json.loads(json.dumps(doc["sprites"][0])))
    with pytest.raises(ParseError) as exc:
        parse_project(json.dumps(doc))
    assert exc.value.path == "sprites[1].name"
    parsed = parse_project(json.dumps(doc), check=False)
    assert len(validate(parsed)) == 1


def test_malformed_json():
    with pytest.raises(ParseError):
        parse_project(b"{not json")
    with pytest.raises(ParseError):
        parse_project(b"\xff\xfe")
    with pytest.raises(ParseError):
        parse_project(b"[1, 2]")


def test_roundtrip_generated_projects():
    rng = random.Random(11)
    for _ in range(200):
        project = gen_project(rng)
        assert parse_project(serialize_project(project)) == project


def test_canonicality_equal_values_identical_bytes():
    rng1, rng2 = random.Random(5), random.Random(5)
    p1, p2 = gen_project(rng1), gen_project(rng2)
    assert p1 == p2
    assert serialize_project(p1) == serialize_project(p2)


def test_serialize_rejects_invalid_project():
    project = make_project(Sprite(name="a"), Sprite(name="a"))
    with pytest.raises(ValueError):
        serialize_project(project)


def test_nested_loop_body_fixture():
    project = make_project(
        Sprite(
            name="a",
            scripts=(
                Script(
                    trigger=WhenProgramStarts(),
                    bricks=(Repeat(count=3, body=(ChangeXBy(dx=10),)),),
                ),
            ),
        ),
        width=100,
        height=100,
        tick_rate=30,
        name="loops",
    )
    expected = (
        '{"format_version":1,"name":"loops",'
        '"stage":{"width":100,"height":100,"tick_rate":30},'
        '"sprites":[{"name":"a","costumes":[],"sounds":[],'
        '"scripts":[{"trigger":{"type":"WhenProgramStarts"},'
        '"bricks":[{"type":"Repeat","count":3,'
        '"body":[{"type":"ChangeXBy","dx":10}]}]}]}]}'
    )
    assert serialize_project(project) == expected.encode("utf-8")


def test_digest_determinism_and_sensitivity():
    rng = random.Random(3)
    project = gen_project(rng)
    assert project_digest(project) == project_digest(project)
    other = make_project(
        Sprite(name="a", scripts=(Script(trigger=WhenProgramStarts(), bricks=(ChangeXBy(dx=1),)),))
    )
    changed = make_project(
        Sprite(name="a", scripts=(Script(trigger=WhenProgramStarts(), bricks=(ChangeXBy(dx=2),)),))
    )
    assert project_digest(other) != project_digest(changed)


def test_digest_matches_external_hashing_tool(tmp_path):
    project = parse_project(HELLO_DOC)
    data = serialize_project(project)
    path = tmp_path / "hello.catproj.json"
    path.write_bytes(data)
    out = subprocess.run(
        ["sha256sum", str(path)], check=True, capture_output=True, text=True
    ).stdout.split()[0]
    assert project_digest(project) == out
    assert project_digest(project) == hashlib.sha256(data).hexdigest()


def test_single_byte_flips_never_parse_to_same_value():
    project = parse_project(HELLO_DOC)
    data = serialize_project(project)
    rng = random.Random(13)
    for _ in range(200):
        pos = rng.randrange(len(data))
        flipped = bytes([b if i != pos else (b + rng.randint(1, 255)) % 256 for i, b in enumerate(data)])
        if flipped == data:
            continue
        try:
            reparsed = parse_project(flipped)
        except ParseError:
            continue
        assert reparsed != project


def test_deep_nesting_parses_up_to_cap_then_errors():
    def nested(depth):
        brick = {"type": "Wait", "millis": 1}
        for _ in range(depth - 1):
            brick = {"type": "Repeat", "count": 1, "body": [brick]}
        return json.dumps(
            {
                "format_version": 1,
                "name": "deep",
                "stage": {"width": 10, "height": 10, "tick_rate": 30},
                "sprites": [
                    {
                        "name": "a",
                        "costumes": [],
                        "sounds": [],
                        "scripts": [
                            {"trigger": {"type": "WhenProgramStarts"}, "bricks": [brick]}
                        ],
                    }
                ],
            }
        )

    parse_project(nested(64))  # at the cap: fine
    with pytest.raises(ParseError):
        parse_project(nested(65))  # flagged by the validity gate
    with pytest.raises(ParseError):
        parse_project(nested(300))  # cut off structurally, never crashes


def test_mutated_documents_never_crash():
    rng = random.Random(17)
    base = serialize_project(gen_project(rng))
    for _ in range(300):
        data = bytearray(base)
        for _ in range(rng.randint(1, 8)):
            op = rng.randint(0, 2)
            if op == 0 and data:
                data[rng.randrange(len(data))] = rng.randrange(256)
            elif op == 1 and data:
                del data[rng.randrange(len(data))]
            else:
                data.insert(rng.randrange(len(data) + 1), rng.randrange(256))
        try:
            parse_project(bytes(data))
        except ParseError:
            pass
