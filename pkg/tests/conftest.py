"""Shared builders: quick projects, random valid projects, event schedules."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from catstage.model import (
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
    Wait,
    WhenIReceive,
    WhenProgramStarts,
    WhenTapped,
)
from catstage.runtime import Stop, Tap

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

MESSAGES = ("m0", "m1", "m2")


def make_project(*sprites: Sprite, width=480, height=800, tick_rate=30, name="test") -> Project:
    return Project(
        name=name,
        stage=StageConfig(width=width, height=height, tick_rate=tick_rate),
        sprites=sprites,
    )


def one_script_project(*bricks, trigger=None, **kwargs) -> Project:
    trigger = trigger if trigger is not None else WhenProgramStarts()
    return make_project(
        Sprite(name="solo", scripts=(Script(trigger=trigger, bricks=bricks),)),
        **kwargs,
    )


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# ---------------------------------------------------------------------------
# Random valid projects (seeded, deterministic)
# ---------------------------------------------------------------------------


def _gen_bricks(rng: random.Random, sprite_ctx: dict, budget: list[int], depth: int) -> tuple:
    bricks = []
    for _ in range(rng.randint(0, 4)):
        if budget[0] <= 0:
            break
        budget[0] -= 1
        kind = rng.randint(0, 15)
        if kind == 0:
            bricks.append(Wait(millis=rng.randint(0, 400)))
        elif kind == 1 and sprite_ctx["broadcasts_left"] > 0:
            sprite_ctx["broadcasts_left"] -= 1
            cls = Broadcast if rng.random() < 0.7 else BroadcastAndWait
            bricks.append(cls(message=rng.choice(MESSAGES)))
        elif kind == 2:
            bricks.append(PlaceAt(x=rng.randint(-60, 60), y=rng.randint(-60, 60)))
        elif kind == 3:
            bricks.append(
                GlideTo(x=rng.randint(-60, 60), y=rng.randint(-60, 60), millis=rng.randint(1, 400))
            )
        elif kind == 4:
            bricks.append(ChangeXBy(dx=rng.randint(-20, 20)))
        elif kind == 5:
            bricks.append(ChangeYBy(dy=rng.randint(-20, 20)))
        elif kind == 6:
            xa, xb = sorted((rng.randint(-60, 60), rng.randint(-60, 60)))
            ya, yb = sorted((rng.randint(-60, 60), rng.randint(-60, 60)))
            bricks.append(PlaceAtRandom(xmin=xa, xmax=xb, ymin=ya, ymax=yb))
        elif kind == 7 and sprite_ctx["costumes"]:
            bricks.append(SetCostume(costume_id=rng.choice(sprite_ctx["costumes"])))
        elif kind == 8:
            bricks.append(NextCostume())
        elif kind == 9:
            bricks.append(Show() if rng.random() < 0.5 else Hide())
        elif kind == 10:
            bricks.append(SetSize(percent=rng.randint(25, 300)))
        elif kind == 11:
            bricks.append(ComeToFront())
        elif kind == 12 and sprite_ctx["sounds"]:
            bricks.append(PlaySound(sound_id=rng.choice(sprite_ctx["sounds"])))
        elif kind == 13:
            bricks.append(Speak(text=rng.choice(("hi", "héllo ☺", "..."))))
        elif kind == 14 and depth < 3:
            bricks.append(
                Repeat(count=rng.randint(0, 3), body=_gen_bricks(rng, sprite_ctx, budget, depth + 1))
            )
        elif kind == 15 and depth < 2 and not sprite_ctx["has_forever"]:
            sprite_ctx["has_forever"] = True
            bricks.append(Forever(body=_gen_bricks(rng, sprite_ctx, budget, depth + 1)))
        else:
            bricks.append(ChangeXBy(dx=rng.randint(-5, 5)))
    return tuple(bricks)


def gen_project(rng: random.Random) -> Project:
    """A random valid project: <= 5 sprites, <= 20 bricks total."""
    budget = [20]
    sprites = []
    for i in range(rng.randint(1, 5)):
        name = f"sprite{i}"
        costumes = tuple(
            Costume(id=f"c{j}", file=f"assets/{name}_c{j}.png") for j in range(rng.randint(0, 3))
        )
        sounds = tuple(
            Sound(id=f"s{j}", file=f"assets/{name}_s{j}.ogg") for j in range(rng.randint(0, 2))
        )
        ctx = {
            "costumes": [c.id for c in costumes],
            "sounds": [s.id for s in sounds],
            "broadcasts_left": 2,
            "has_forever": False,
        }
        scripts = []
        for _ in range(rng.randint(0, 3)):
            roll = rng.random()
            if roll < 0.5:
                trigger = WhenProgramStarts()
            elif roll < 0.75:
                trigger = WhenTapped()
            else:
                trigger = WhenIReceive(message=rng.choice(MESSAGES))
            scripts.append(Script(trigger=trigger, bricks=_gen_bricks(rng, ctx, budget, 1)))
        sprites.append(Sprite(name=name, costumes=costumes, sounds=sounds, scripts=tuple(scripts)))
    return Project(
        name=f"fuzz-{rng.randint(0, 99999)}",
        stage=StageConfig(
            width=rng.randint(60, 480),
            height=rng.randint(60, 480),
            tick_rate=rng.choice((5, 10, 30, 60)),
        ),
        sprites=tuple(sprites),
    )


def gen_costume_sizes(rng: random.Random, project: Project) -> dict:
    return {
        (sprite.name, costume.id): (rng.randint(8, 128), rng.randint(8, 128))
        for sprite in project.sprites
        for costume in sprite.costumes
    }


def gen_schedule(rng: random.Random, project: Project, max_tick: int) -> list:
    """Sorted (tick, event) pairs, taps plus at most one stop.

    A recorder driven by this schedule simply never reaches events after a
    stop's tick, so they are harmless to keep.
    """
    events = []
    for _ in range(rng.randint(0, 6)):
        tick = rng.randint(0, max_tick)
        x = rng.uniform(-project.stage.width / 2, project.stage.width / 2)
        y = rng.uniform(-project.stage.height / 2, project.stage.height / 2)
        if rng.random() < 0.5:
            x, y = float(int(x)), float(int(y))
        events.append((tick, Tap(x=x, y=y)))
    if rng.random() < 0.3:
        events.append((rng.randint(0, max_tick), Stop()))
    events.sort(key=lambda te: te[0])
    return events


def drive_recorder(recorder, schedule, until_tick: int) -> None:
    """Inject schedule events at their ticks while stepping to until_tick."""
    i = 0
    while not recorder.session.stopped and recorder.session.tick <= until_tick:
        tick = recorder.session.tick
        while i < len(schedule) and schedule[i][0] == tick:
            recorder.inject(schedule[i][1])
            i += 1
        recorder.step()
