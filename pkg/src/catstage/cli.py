"""Command-line interface.

Subcommands: ``validate``, ``run``, ``replay``, ``export``, ``serve``.
Standard output carries machine-readable results only (the trace digest
for run/replay/export, violation lines for validate); everything else
goes to standard error. Exit codes are a stable contract: 0 success,
1 verification or validation failure, 2 usage/IO/parse error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import socket
import sys
from pathlib import Path

from .frames import (
    load_costume_images,
    load_costume_sizes,
    outputs_to_jsonable,
    rasterize,
    scene_to_jsonable,
    write_ppm,
)
from .model import Project, validate
from .projectio import ParseError, parse_project, project_digest
from .replay import (
    DigestMismatchError,
    PlayLog,
    iter_replay,
    make_record,
    playlog_from_jsonl,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_ERROR = 2


def _err(message: str) -> None:
    print(f"catstage: {message}", file=sys.stderr)


def _load_project(path: Path) -> Project:
    return parse_project(path.read_bytes())


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.project)
    try:
        project = parse_project(path.read_bytes(), check=False)
    except OSError as exc:
        _err(f"cannot read {path}: {exc}")
        return EXIT_ERROR
    except ParseError as exc:
        _err(f"cannot parse {path}: {exc}")
        return EXIT_ERROR
    violations = validate(project)
    for violation in violations:
        print(f"{violation.path}: {violation.message}")
    return EXIT_FAILURE if violations else EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    path = Path(args.project)
    try:
        project = _load_project(path)
    except OSError as exc:
        _err(f"cannot read {path}: {exc}")
        return EXIT_ERROR
    except ParseError as exc:
        _err(f"cannot parse {path}: {exc}")
        return EXIT_ERROR
    sizes = load_costume_sizes(project, path.parent)

    if args.events is not None:
        if args.ticks is not None or args.seed is not None:
            _err("--ticks/--seed cannot be combined with --events; the log pins them")
            return EXIT_ERROR
        try:
            log = playlog_from_jsonl(Path(args.events).read_bytes())
        except OSError as exc:
            _err(f"cannot read {args.events}: {exc}")
            return EXIT_ERROR
        except ParseError as exc:
            _err(f"cannot parse {args.events}: {exc}")
            return EXIT_ERROR
    else:
        if args.ticks is None:
            _err("--ticks is required without --events")
            return EXIT_ERROR
        if args.ticks < 1:
            _err("--ticks must be at least 1")
            return EXIT_ERROR
        seed = args.seed if args.seed is not None else 0
        log = PlayLog(
            project_digest=project_digest(project),
            seed=seed,
            tick_rate=project.stage.tick_rate,
            end_tick=args.ticks - 1,
        )

    digest = hashlib.sha256()
    trace_stream = bytearray() if args.trace else None
    try:
        for scene, outputs in iter_replay(project, log, sizes):
            record = make_record(scene, outputs)
            digest.update(record.scene_bytes)
            digest.update(record.outputs_bytes)
            if trace_stream is not None:
                trace_stream += record.scene_bytes
                trace_stream += record.outputs_bytes
    except DigestMismatchError as exc:
        _err(str(exc))
        return EXIT_FAILURE
    if trace_stream is not None:
        Path(args.trace).write_bytes(bytes(trace_stream))
    print(digest.hexdigest())
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    path = Path(args.project)
    try:
        project = _load_project(path)
        log = playlog_from_jsonl(Path(args.playlog).read_bytes())
    except OSError as exc:
        _err(f"cannot read input: {exc}")
        return EXIT_ERROR
    except ParseError as exc:
        _err(f"cannot parse input: {exc}")
        return EXIT_ERROR
    sizes = load_costume_sizes(project, path.parent)
    digest = hashlib.sha256()
    try:
        for scene, outputs in iter_replay(project, log, sizes):
            record = make_record(scene, outputs)
            digest.update(record.scene_bytes)
            digest.update(record.outputs_bytes)
    except DigestMismatchError as exc:
        _err(str(exc))
        return EXIT_FAILURE
    computed = digest.hexdigest()
    print(computed)
    if args.expect is not None and computed != args.expect:
        _err(f"digest mismatch: expected {args.expect}, got {computed}")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    path = Path(args.project)
    try:
        project = _load_project(path)
        log = playlog_from_jsonl(Path(args.playlog).read_bytes())
    except OSError as exc:
        _err(f"cannot read input: {exc}")
        return EXIT_ERROR
    except ParseError as exc:
        _err(f"cannot parse input: {exc}")
        return EXIT_ERROR
    sizes = load_costume_sizes(project, path.parent)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    images = None
    if args.format == "ppm":
        images, missing = load_costume_images(project, path.parent)
        if missing is not None:
            _err(f"missing costume asset: {missing}")
            return EXIT_ERROR

    digest = hashlib.sha256()
    try:
        for scene, outputs in iter_replay(project, log, sizes):
            record = make_record(scene, outputs)
            digest.update(record.scene_bytes)
            digest.update(record.outputs_bytes)
            if args.format == "scene":
                doc = {
                    "tick": outputs.tick,
                    "entries": scene_to_jsonable(scene),
                    "outputs": outputs_to_jsonable(outputs),
                }
                out_path = out_dir / f"frame_{outputs.tick:06d}.scene.json"
                out_path.write_text(
                    json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n",
                    encoding="utf-8",
                )
            else:
                image = rasterize(
                    scene, images, project.stage.width, project.stage.height
                )
                out_path = out_dir / f"frame_{outputs.tick:06d}.ppm"
                out_path.write_bytes(write_ppm(image))
    except DigestMismatchError as exc:
        _err(str(exc))
        return EXIT_FAILURE
    print(digest.hexdigest())
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    project_dir = Path(args.project_dir)
    if not project_dir.is_dir():
        _err(f"not a directory: {project_dir}")
        return EXIT_ERROR
    if args.player is not None and not Path(args.player).is_dir():
        _err(f"player directory not found: {args.player}")
        return EXIT_ERROR
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as exc:
        _err(f"cannot bind {args.host}:{args.port}: {exc}")
        return EXIT_ERROR

    import uvicorn

    from .service import create_app

    app = create_app(project_dir, player_dir=args.player)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catstage",
        description="Validate, run, replay, export, and serve .catproj programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a project document, listing violations")
    p.add_argument("project")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run headlessly and print the trace digest")
    p.add_argument("project")
    p.add_argument("--ticks", type=int, default=None, help="number of ticks to run")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    p.add_argument("--events", default=None, help="play log to replay instead of a fresh run")
    p.add_argument("--trace", default=None, help="dump the canonical trace byte stream here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="replay a play log and print the trace digest")
    p.add_argument("project")
    p.add_argument("playlog")
    p.add_argument("--expect", default=None, help="fail unless the digest equals this value")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("export", help="replay and write per-tick frame files")
    p.add_argument("project")
    p.add_argument("playlog")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("ppm", "scene"), default="scene")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="serve live sessions for the stage player")
    p.add_argument("project_dir")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--player", default=None, help="static player UI directory to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
