"""Canonical byte encodings for trace records, plus frame rasterization.

The canonical encodings are the digest substrate, so they are specified
byte-for-byte:

Scene record::

    scene tick=<int> n=<entry count>\\n
    entry name=<lp> x=<hex16> y=<hex16> visible=<0|1> size=<hex16> layer=<int> costume=<lp or ->\\n

Outputs record::

    outputs tick=<int> n=<event count>\\n
    event speak sprite=<lp> text=<lp>\\n
    event sound sprite=<lp> sound=<lp>\\n
    event broadcast message=<lp>\\n
    event program_ended\\n

where ``<lp>`` is a length-prefixed UTF-8 string (``<byte length>:<bytes>``,
unambiguous for any string content), ``<hex16>`` is the 16-hex-digit
big-endian IEEE-754 bit pattern of the double value (no decimal formatting
ambiguity), and an absent costume is the single byte ``-``. Entries appear
in painter order, events in emission order.

Rasterization composites costumes onto an opaque white stage-sized canvas
in painter order with nearest-neighbor scaling and source-over blending,
all in integer arithmetic so pixel output is bit-stable everywhere. Stage
origin maps to the canvas center with y pointing up; positions round half
away from zero.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from PIL import Image as PILImage

from .model import Project
from .runtime import (
    BroadcastSent,
    ProgramEnded,
    Scene,
    SoundStart,
    Speak,
    TickOutputs,
)


class MissingAssetError(ValueError):
    """A visible sprite's costume image was not supplied."""

    def __init__(self, sprite_name: str, costume_id: str):
        self.sprite_name = sprite_name
        self.costume_id = costume_id
        super().__init__(f"missing costume asset for sprite {sprite_name!r}, costume {costume_id!r}")


# ---------------------------------------------------------------------------
# Canonical bytes
# ---------------------------------------------------------------------------


def float_bits_hex(value: float) -> str:
    """16-hex-digit big-endian IEEE-754 bit pattern of a double."""
    return struct.pack(">d", value).hex()


def _lp(text: str) -> bytes:
    raw = text.encode("utf-8")
    return b"%d:%s" % (len(raw), raw)


def canonical_scene_bytes(scene: Scene) -> bytes:
    out = [b"scene tick=%d n=%d\n" % (scene.tick, len(scene.entries))]
    for e in scene.entries:
        costume = _lp(e.costume_id) if e.costume_id is not None else b"-"
        out.append(
            b"entry name=%s x=%s y=%s visible=%d size=%s layer=%d costume=%s\n"
            % (
                _lp(e.sprite_name),
                float_bits_hex(e.x).encode("ascii"),
                float_bits_hex(e.y).encode("ascii"),
                1 if e.visible else 0,
                float_bits_hex(e.size_percent).encode("ascii"),
                e.layer,
                costume,
            )
        )
    return b"".join(out)


def canonical_outputs_bytes(outputs: TickOutputs) -> bytes:
    out = [b"outputs tick=%d n=%d\n" % (outputs.tick, len(outputs.emitted))]
    for ev in outputs.emitted:
        if isinstance(ev, Speak):
            out.append(b"event speak sprite=%s text=%s\n" % (_lp(ev.sprite_name), _lp(ev.text)))
        elif isinstance(ev, SoundStart):
            out.append(b"event sound sprite=%s sound=%s\n" % (_lp(ev.sprite_name), _lp(ev.sound_id)))
        elif isinstance(ev, BroadcastSent):
            out.append(b"event broadcast message=%s\n" % _lp(ev.message))
        elif isinstance(ev, ProgramEnded):
            out.append(b"event program_ended\n")
        else:
            raise AssertionError(f"unhandled output event {ev!r}")
    return b"".join(out)


# ---------------------------------------------------------------------------
# JSON-friendly renderings (protocol frames and scene dumps)
# ---------------------------------------------------------------------------


def scene_to_jsonable(scene: Scene) -> list[dict]:
    return [
        {
            "sprite": e.sprite_name,
            "x": e.x,
            "y": e.y,
            "visible": e.visible,
            "size_percent": e.size_percent,
            "layer": e.layer,
            "costume": e.costume_id,
        }
        for e in scene.entries
    ]


def outputs_to_jsonable(outputs: TickOutputs) -> list[dict]:
    events = []
    for ev in outputs.emitted:
        if isinstance(ev, Speak):
            events.append({"kind": "speak", "sprite": ev.sprite_name, "text": ev.text})
        elif isinstance(ev, SoundStart):
            events.append({"kind": "sound", "sprite": ev.sprite_name, "sound": ev.sound_id})
        elif isinstance(ev, BroadcastSent):
            events.append({"kind": "broadcast", "message": ev.message})
        elif isinstance(ev, ProgramEnded):
            events.append({"kind": "program_ended"})
    return events


# ---------------------------------------------------------------------------
# Images
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Image:
    """Row-major RGBA pixel buffer."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if len(self.pixels) != self.width * self.height * 4:
            raise ValueError(
                f"pixel buffer has {len(self.pixels)} bytes, "
                f"expected {self.width * self.height * 4}"
            )


def round_half_away(value: float) -> int:
    """Round to the nearest integer with ties away from zero."""
    if value >= 0:
        return math.floor(value + 0.5)
    return math.ceil(value - 0.5)


def rasterize(
    scene: Scene,
    assets: Mapping[tuple[str, str], Image],
    width: int,
    height: int,
) -> Image:
    """Composite a scene onto an opaque white stage canvas.

    ``assets`` maps (sprite_name, costume_id) to the costume image. Every
    visible entry with a costume must have its asset present; hidden
    sprites and costume-less sprites are skipped.
    """
    canvas = bytearray(b"\xff\xff\xff\xff" * (width * height))
    for entry in scene.entries:
        if not entry.visible or entry.costume_id is None:
            continue
        key = (entry.sprite_name, entry.costume_id)
        img = assets.get(key)
        if img is None:
            raise MissingAssetError(entry.sprite_name, entry.costume_id)
        sw = round_half_away(img.width * entry.size_percent / 100.0)
        sh = round_half_away(img.height * entry.size_percent / 100.0)
        if sw <= 0 or sh <= 0:
            continue
        cx = width / 2.0 + entry.x
        cy = height / 2.0 - entry.y
        x0 = round_half_away(cx - sw / 2.0)
        y0 = round_half_away(cy - sh / 2.0)
        src = img.pixels
        for ty in range(max(0, y0), min(height, y0 + sh)):
            sv = ((2 * (ty - y0) + 1) * img.height) // (2 * sh)
            src_row = sv * img.width
            dst_row = ty * width
            for tx in range(max(0, x0), min(width, x0 + sw)):
                su = ((2 * (tx - x0) + 1) * img.width) // (2 * sw)
                s = (src_row + su) * 4
                a = src[s + 3]
                if a == 0:
                    continue
                d = (dst_row + tx) * 4
                if a == 255:
                    canvas[d : d + 4] = src[s : s + 4]
                else:
                    inv = 255 - a
                    canvas[d] = (src[s] * a + canvas[d] * inv + 127) // 255
                    canvas[d + 1] = (src[s + 1] * a + canvas[d + 1] * inv + 127) // 255
                    canvas[d + 2] = (src[s + 2] * a + canvas[d + 2] * inv + 127) // 255
                    canvas[d + 3] = (255 * a + canvas[d + 3] * inv + 127) // 255
    return Image(width=width, height=height, pixels=bytes(canvas))


def write_ppm(image: Image) -> bytes:
    """Binary P6 bytes, maxval 255, alpha pre-composited against white."""
    header = b"P6\n%d %d\n255\n" % (image.width, image.height)
    src = image.pixels
    rgb = bytearray(image.width * image.height * 3)
    j = 0
    for i in range(0, len(src), 4):
        a = src[i + 3]
        if a == 255:
            rgb[j] = src[i]
            rgb[j + 1] = src[i + 1]
            rgb[j + 2] = src[i + 2]
        else:
            inv = 255 - a
            white = 255 * inv
            rgb[j] = (src[i] * a + white + 127) // 255
            rgb[j + 1] = (src[i + 1] * a + white + 127) // 255
            rgb[j + 2] = (src[i + 2] * a + white + 127) // 255
        j += 3
    return header + bytes(rgb)


# ---------------------------------------------------------------------------
# Costume asset loading
# ---------------------------------------------------------------------------


def load_png(path: Path) -> Image:
    """Decode a PNG file into an RGBA Image."""
    with PILImage.open(path) as im:
        rgba = im.convert("RGBA")
        return Image(width=rgba.width, height=rgba.height, pixels=rgba.tobytes())


def png_size(path: Path) -> tuple[int, int]:
    """Pixel dimensions from the PNG header, without decoding pixel data."""
    with PILImage.open(path) as im:
        return im.size


def load_costume_sizes(project: Project, base_dir: Path) -> dict[tuple[str, str], tuple[int, int]]:
    """Resolve (sprite, costume) -> pixel size for every asset that exists.

    Costumes whose files are absent are simply omitted, which makes the
    corresponding sprites untappable rather than failing headless runs.
    """
    sizes: dict[tuple[str, str], tuple[int, int]] = {}
    for sprite in project.sprites:
        for costume in sprite.costumes:
            path = Path(base_dir) / costume.file
            if path.is_file():
                sizes[(sprite.name, costume.id)] = png_size(path)
    return sizes


def load_costume_images(
    project: Project, base_dir: Path
) -> tuple[dict[tuple[str, str], Image], Optional[Path]]:
    """Load every costume image; returns (images, first missing path or None)."""
    images: dict[tuple[str, str], Image] = {}
    for sprite in project.sprites:
        for costume in sprite.costumes:
            path = Path(base_dir) / costume.file
            if not path.is_file():
                return images, path
            images[(sprite.name, costume.id)] = load_png(path)
    return images, None
