#!/usr/bin/env python3
"""Regenerate the fixture projects, assets, play log, and golden digest.

Run from the repo root: python scripts/make_fixtures.py
The demo play log taps the cat sprite at whatever position it holds when
the tap is injected, so the recorded log always hits.
"""

from __future__ import annotations

from pathlib import Path

from PIL import Image as PILImage

from catstage.frames import load_costume_sizes
from catstage.model import (
    Broadcast,
    Costume,
    GlideTo,
    NextCostume,
    PlaceAt,
    PlaceAtRandom,
    PlaySound,
    Project,
    Script,
    SetCostume,
    Sound,
    Speak,
    Sprite,
    StageConfig,
    WhenIReceive,
    WhenProgramStarts,
    WhenTapped,
)
from catstage.projectio import serialize_project
from catstage.replay import Recorder, playlog_to_jsonl, trace_digest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
ASSETS = FIXTURES / "assets"


def write_png(path: Path, width: int, height: int, rgba, transparent_corner=False):
    img = PILImage.new("RGBA", (width, height), rgba)
    if transparent_corner:
        for y in range(height // 4):
            for x in range(width // 4):
                img.putpixel((x, y), (0, 0, 0, 0))
    path.parent.mkdir(parents=True, exist_ok=True)
    img.save(path)


def hello_world_project() -> Project:
    return Project(
        name="hello_world",
        stage=StageConfig(width=480, height=800, tick_rate=30),
        sprites=(
            Sprite(
                name="Background",
                costumes=(Costume(id="bg0", file="assets/hello_bg0.png"),),
                scripts=(
                    Script(
                        trigger=WhenProgramStarts(),
                        bricks=(SetCostume(costume_id="bg0"), Speak(text="Hello world!")),
                    ),
                ),
            ),
        ),
    )


def demo_project() -> Project:
    backdrop = Sprite(
        name="Backdrop",
        costumes=(
            Costume(id="bg0", file="assets/demo_bg0.png"),
            Costume(id="bg1", file="assets/demo_bg1.png"),
        ),
        sounds=(Sound(id="tune", file="assets/demo_tune.ogg"),),
        scripts=(
            Script(
                trigger=WhenProgramStarts(),
                bricks=(
                    SetCostume(costume_id="bg0"),
                    PlaySound(sound_id="tune"),
                    Speak(text="ready"),
                ),
            ),
            Script(trigger=WhenIReceive(message="meow"), bricks=(NextCostume(),)),
        ),
    )
    cat = Sprite(
        name="Cat",
        costumes=(Costume(id="cat", file="assets/demo_cat.png"),),
        scripts=(
            Script(
                trigger=WhenProgramStarts(),
                bricks=(PlaceAt(x=0, y=-30), GlideTo(x=20, y=-30, millis=200)),
            ),
            Script(
                trigger=WhenTapped(),
                bricks=(
                    Broadcast(message="meow"),
                    PlaceAtRandom(xmin=-40, xmax=40, ymin=-60, ymax=60),
                ),
            ),
        ),
    )
    return Project(
        name="demo",
        stage=StageConfig(width=120, height=160, tick_rate=30),
        sprites=(backdrop, cat),
    )


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    write_png(ASSETS / "hello_bg0.png", 8, 8, (70, 130, 220, 255))
    write_png(ASSETS / "demo_bg0.png", 120, 160, (200, 226, 255, 255))
    write_png(ASSETS / "demo_bg1.png", 120, 160, (208, 255, 200, 255))
    write_png(ASSETS / "demo_cat.png", 16, 16, (240, 150, 40, 255), transparent_corner=True)

    hello = hello_world_project()
    (FIXTURES / "hello_world.catproj.json").write_bytes(serialize_project(hello))

    demo = demo_project()
    (FIXTURES / "demo.catproj.json").write_bytes(serialize_project(demo))

    sizes = load_costume_sizes(demo, FIXTURES)
    recorder = Recorder(demo, seed=7, costume_sizes=sizes)

    def tap_cat():
        scene = recorder.session.scene()
        cat = next(e for e in scene.entries if e.sprite_name == "Cat")
        from catstage.runtime import Tap

        recorder.inject(Tap(x=cat.x, y=cat.y))

    recorder.run_until(2)
    tap_cat()
    recorder.run_until(6)
    tap_cat()
    recorder.run_until(10)

    (FIXTURES / "demo.catplay.jsonl").write_bytes(playlog_to_jsonl(recorder.playlog()))
    digest = trace_digest(recorder.trace())
    (FIXTURES / "demo.trace.sha256").write_text(digest + "\n", encoding="utf-8")
    print("demo trace digest:", digest)


if __name__ == "__main__":
    main()
