"""Validity rules: every invariant surfaces as a located violation."""

from __future__ import annotations

import random

from conftest import gen_project, make_project

from catstage.model import (
    Costume,
    GlideTo,
    PlaceAtRandom,
    PlaySound,
    Project,
    Repeat,
    Script,
    SetCostume,
    SetSize,
    Sound,
    Sprite,
    StageConfig,
    Wait,
    WhenIReceive,
    WhenProgramStarts,
    validate,
)


def script(*bricks, trigger=None):
    return Script(trigger=trigger or WhenProgramStarts(), bricks=bricks)


def test_minimal_project_is_valid():
    project = make_project(Sprite(name="a", scripts=(script(),)))
    assert validate(project) == []


def test_validate_is_pure():
    project = make_project(Sprite(name="a"), Sprite(name="a"))
    assert validate(project) == validate(project)


def test_duplicate_sprite_names_flagged_at_later_occurrence():
    project = make_project(Sprite(name="cat"), Sprite(name="cat"))
    violations = validate(project)
    assert [v.path for v in violations] == ["sprites[1].name"]


def test_no_sprites():
    project = Project(name="x", stage=StageConfig(480, 800, 30), sprites=())
    assert [v.path for v in validate(project)] == ["sprites"]


def test_format_version_must_be_one():
    project = Project(
        name="x", stage=StageConfig(480, 800, 30), sprites=(Sprite(name="a"),), format_version=2
    )
    assert [v.path for v in validate(project)] == ["format_version"]


def test_stage_bounds():
    project = Project(name="x", stage=StageConfig(0, -3, 241), sprites=(Sprite(name="a"),))
    assert [v.path for v in validate(project)] == [
        "stage.width",
        "stage.height",
        "stage.tick_rate",
    ]


def test_dangling_costume_reference_at_brick_path():
    project = make_project(
        Sprite(name="a", scripts=(script(SetCostume(costume_id="missing")),))
    )
    violations = validate(project)
    assert [v.path for v in violations] == ["sprites[0].scripts[0].bricks[0]"]
    assert "missing" in violations[0].message


def test_dangling_sound_reference():
    project = make_project(Sprite(name="a", scripts=(script(PlaySound(sound_id="nope")),)))
    assert [v.path for v in validate(project)] == ["sprites[0].scripts[0].bricks[0]"]


def test_reference_resolves_within_own_sprite_only():
    project = make_project(
        Sprite(name="a", costumes=(Costume(id="c", file="c.png"),)),
        Sprite(name="b", scripts=(script(SetCostume(costume_id="c")),)),
    )
    assert [v.path for v in validate(project)] == ["sprites[1].scripts[0].bricks[0]"]


def test_duplicate_and_empty_asset_ids():
    project = make_project(
        Sprite(
            name="a",
            costumes=(Costume(id="c", file="c.png"), Costume(id="c", file="d.png")),
            sounds=(Sound(id="", file="s.ogg"),),
        )
    )
    assert [v.path for v in validate(project)] == [
        "sprites[0].costumes[1].id",
        "sprites[0].sounds[0].id",
    ]


def test_parent_directory_paths_rejected():
    project = make_project(
        Sprite(name="a", costumes=(Costume(id="c", file="../secret.png"),))
    )
    assert [v.path for v in validate(project)] == ["sprites[0].costumes[0].file"]
    project = make_project(
        Sprite(name="a", costumes=(Costume(id="c", file="/abs/path.png"),))
    )
    assert [v.path for v in validate(project)] == ["sprites[0].costumes[0].file"]


def test_empty_receive_message():
    project = make_project(
        Sprite(name="a", scripts=(script(trigger=WhenIReceive(message="")),))
    )
    assert [v.path for v in validate(project)] == ["sprites[0].scripts[0].trigger.message"]


def test_brick_parameter_domains():
    project = make_project(
        Sprite(
            name="a",
            scripts=(
                script(
                    Wait(millis=-1),
                    GlideTo(x=0, y=0, millis=0),
                    SetSize(percent=0),
                    Repeat(count=-2, body=()),
                    PlaceAtRandom(xmin=5, xmax=4, ymin=0, ymax=0),
                ),
            ),
        )
    )
    assert [v.path for v in validate(project)] == [
        "sprites[0].scripts[0].bricks[0].millis",
        "sprites[0].scripts[0].bricks[1].millis",
        "sprites[0].scripts[0].bricks[2].percent",
        "sprites[0].scripts[0].bricks[3].count",
        "sprites[0].scripts[0].bricks[4]",
    ]


def test_nested_body_paths():
    project = make_project(
        Sprite(
            name="a",
            scripts=(script(Repeat(count=2, body=(Wait(millis=-5),))),),
        )
    )
    assert [v.path for v in validate(project)] == [
        "sprites[0].scripts[0].bricks[0].body[0].millis"
    ]


def test_nesting_depth_cap():
    brick = Wait(millis=0)
    for _ in range(70):
        brick = Repeat(count=1, body=(brick,))
    project = make_project(Sprite(name="a", scripts=(script(brick),)))
    violations = validate(project)
    assert len(violations) == 1
    assert "depth" in violations[0].message
    # 64 levels of nesting are fine
    brick = Wait(millis=0)
    for _ in range(63):
        brick = Repeat(count=1, body=(brick,))
    project = make_project(Sprite(name="a", scripts=(script(brick),)))
    assert validate(project) == []


def test_generated_projects_are_valid():
    rng = random.Random(7)
    for _ in range(100):
        assert validate(gen_project(rng)) == []


def _walk_doc_bricks(doc):
    """Yield (path, brick_doc) over a project document, loops included."""
    for i, sprite in enumerate(doc["sprites"]):
        for j, script_doc in enumerate(sprite["scripts"]):
            stack = [
                (f"sprites[{i}].scripts[{j}].bricks[{k}]", b)
                for k, b in enumerate(script_doc["bricks"])
            ]
            while stack:
                path, brick = stack.pop(0)
                yield path, brick
                for k, child in enumerate(brick.get("body", ())):
                    stack.append((f"{path}.body[{k}]", child))


def test_randomly_broken_fields_are_each_named_and_fixable():
    import json

    from catstage.projectio import parse_project, project_to_doc

    rng = random.Random(55)
    checked = 0
    for _ in range(40):
        project = gen_project(rng)
        doc = project_to_doc(project)
        breakages = {}  # path -> (apply, undo)
        waits = [(p, b) for p, b in _walk_doc_bricks(doc) if b["type"] == "Wait"]
        if waits and rng.random() < 0.8:
            path, brick = rng.choice(waits)
            breakages[f"{path}.millis"] = (brick, "millis", brick["millis"], -1)
        sizes = [(p, b) for p, b in _walk_doc_bricks(doc) if b["type"] == "SetSize"]
        if sizes and rng.random() < 0.8:
            path, brick = rng.choice(sizes)
            breakages[f"{path}.percent"] = (brick, "percent", brick["percent"], 0)
        if len(doc["sprites"]) >= 2 and rng.random() < 0.5:
            doc["sprites"][1]["name"] = doc["sprites"][0]["name"]
            breakages["sprites[1].name"] = (doc["sprites"][1], "name", "sprite1", None)
        if not breakages:
            continue
        for obj, key, _good, bad in breakages.values():
            if bad is not None:
                obj[key] = bad
        broken = parse_project(json.dumps(doc), check=False)
        assert {v.path for v in validate(broken)} == set(breakages)
        for obj, key, good, _bad in breakages.values():
            obj[key] = good
        assert validate(parse_project(json.dumps(doc), check=False)) == []
        checked += 1
    assert checked >= 10


def test_fixing_named_fields_yields_valid_project():
    # break independent fields, check each produces its own violation, fix all
    project = make_project(
        Sprite(
            name="a",
            costumes=(Costume(id="c", file="../x.png"),),
            scripts=(script(Wait(millis=-1), SetCostume(costume_id="gone")),),
        ),
        Sprite(name="a"),
    )
    paths = {v.path for v in validate(project)}
    assert paths == {
        "sprites[0].costumes[0].file",
        "sprites[0].scripts[0].bricks[0].millis",
        "sprites[0].scripts[0].bricks[1]",
        "sprites[1].name",
    }
    fixed = make_project(
        Sprite(
            name="a",
            costumes=(Costume(id="c", file="x.png"),),
            scripts=(script(Wait(millis=1), SetCostume(costume_id="c")),),
        ),
        Sprite(name="b"),
    )
    assert validate(fixed) == []
