"""Cooperative deterministic interpreter for project sessions.

A session advances one logical tick at a time. Within a tick, every script
instance gets a turn in a deterministic order and executes consecutive
bricks until it yields. Yield points:

* ``Wait`` sleeps ``max(1, ceil(millis * tick_rate / 1000))`` ticks.
* ``GlideTo`` yields on every tick of the glide; position follows
  ``start + (target - start) * elapsed / duration`` and the final glide
  tick assigns the literal target exactly, so no interpolation error can
  accumulate.
* ``BroadcastAndWait`` suspends the sender until every receiver instance
  it started is done (senders with no receivers continue immediately).
* The end of every ``Repeat``/``Forever`` iteration yields, so one loop
  iteration executes per tick.
* A hard per-instance budget of ``BRICK_BUDGET_PER_TICK`` bricks per tick
  forces a yield and records a diagnostic on ``Session.diagnostics``; a
  runaway tight loop degrades instead of hanging the session.

Broadcasts dispatch within the sending tick: every matching receiver
across all sprites is (re)started in (sprite, script) order and appended
to the tick's run queue after the current position, and a plain
``Broadcast`` does not yield the sender. Retriggering a script (broadcast
or tap) restarts its existing instance, keeping at most one live instance
per (sprite, script) pair.

Input events are queued by ``inject`` and take effect at the start of the
next tick; tap hit-testing uses the scene as of the end of the previous
tick. A ``Stop`` event lets its tick finish and then stops the session.

All randomness flows through one seeded SplitMix64 stream in brick
execution order, which is what makes a (seed, event schedule) pair fully
deterministic to replay.

Sessions are single-threaded: calls on one session must be externally
serialized. Independent sessions share nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from . import model
from .model import Project, WhenIReceive, WhenProgramStarts, WhenTapped, validate
from .rng import SplitMix64

BRICK_BUDGET_PER_TICK = 1000

#: (sprite_name, costume_id) -> (width, height) in pixels; tap targets only.
CostumeSizes = Mapping[tuple[str, str], tuple[int, int]]


# ---------------------------------------------------------------------------
# Input events
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Tap:
    x: float
    y: float


@dataclass(frozen=True, slots=True)
class Stop:
    pass


EventIn = Union[Tap, Stop]


# ---------------------------------------------------------------------------
# Emitted outputs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Speak:
    sprite_name: str
    text: str


@dataclass(frozen=True, slots=True)
class SoundStart:
    sprite_name: str
    sound_id: str


@dataclass(frozen=True, slots=True)
class BroadcastSent:
    message: str


@dataclass(frozen=True, slots=True)
class ProgramEnded:
    pass


OutputEvent = Union[Speak, SoundStart, BroadcastSent, ProgramEnded]


@dataclass(frozen=True, slots=True)
class TickOutputs:
    """Events emitted during one tick, in execution order."""

    tick: int
    emitted: tuple[OutputEvent, ...]


@dataclass(frozen=True, slots=True)
class BudgetExceeded:
    """Diagnostic: an instance hit the per-tick brick budget and was parked."""

    tick: int
    sprite_index: int
    script_index: int


# ---------------------------------------------------------------------------
# Scene snapshots
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SceneEntry:
    sprite_name: str
    x: float
    y: float
    visible: bool
    size_percent: float
    layer: int
    costume_id: Optional[str]


@dataclass(frozen=True, slots=True)
class Scene:
    """Render snapshot of every sprite, in painter order (layer, sprite index).

    ``tick`` is the most recently completed tick (0 for a fresh session).
    """

    tick: int
    entries: tuple[SceneEntry, ...]


def hit_test(
    scene: Scene, x: float, y: float, costume_sizes: CostumeSizes
) -> Optional[str]:
    """Topmost visible sprite whose bounding box contains (x, y), else None.

    The box is the costume's pixel dimensions scaled by size_percent,
    centered on the sprite position, edges inclusive. Entries without a
    costume or without a known costume size are not tappable.
    """
    for entry in reversed(scene.entries):
        if not entry.visible or entry.costume_id is None:
            continue
        size = costume_sizes.get((entry.sprite_name, entry.costume_id))
        if size is None:
            continue
        half_w = size[0] * entry.size_percent / 200.0
        half_h = size[1] * entry.size_percent / 200.0
        if abs(x - entry.x) <= half_w and abs(y - entry.y) <= half_h:
            return entry.sprite_name
    return None


# ---------------------------------------------------------------------------
# Interpreter state
# ---------------------------------------------------------------------------


@dataclass
class SpriteState:
    sprite_index: int
    x: float = 0.0
    y: float = 0.0
    visible: bool = True
    size_percent: float = 100.0
    layer: int = 0
    costume_index: int = 0


_TOP = "top"
_REPEAT = "repeat"
_FOREVER = "forever"


@dataclass
class _Frame:
    bricks: tuple[model.Brick, ...]
    kind: str
    pos: int = 0
    remaining: int = 0  # Repeat countdown; unused for top/forever frames


@dataclass(frozen=True, slots=True)
class Runnable:
    pass


@dataclass(frozen=True, slots=True)
class Sleeping:
    until_tick: int


@dataclass(frozen=True, slots=True)
class Gliding:
    start_tick: int
    end_tick: int
    start_x: float
    start_y: float
    target_x: int
    target_y: int


@dataclass(frozen=True, slots=True)
class WaitingOnBroadcast:
    waited: tuple["ScriptInstance", ...]

    @property
    def instance_ids(self) -> frozenset[int]:
        return frozenset(inst.instance_id for inst in self.waited)


@dataclass(frozen=True, slots=True)
class Done:
    pass


Status = Union[Runnable, Sleeping, Gliding, WaitingOnBroadcast, Done]


@dataclass(eq=False)
class ScriptInstance:
    """One live execution of a script, cooperatively scheduled.

    Retriggering reuses the same instance (reset frame stack, bumped
    generation); stale run-queue entries from before a restart are
    recognized by their generation and skipped.
    """

    sprite_index: int
    script_index: int
    instance_id: int
    frames: list[_Frame] = field(default_factory=list)
    status: Status = Runnable()
    generation: int = 0
    budget_tick: int = -1
    budget_used: int = 0
    budget_tripped: bool = False

    @property
    def done(self) -> bool:
        return isinstance(self.status, Done)


class Session:
    """Live interpreter state for one project run. Not thread-safe."""

    def __init__(
        self,
        project: Project,
        seed: int,
        tick_rate_override: Optional[int] = None,
        costume_sizes: Optional[CostumeSizes] = None,
    ):
        violations = validate(project)
        if violations:
            raise ValueError(f"invalid project: {violations[0]}")
        rate = tick_rate_override if tick_rate_override is not None else project.stage.tick_rate
        if not model.MIN_TICK_RATE <= rate <= model.MAX_TICK_RATE:
            raise ValueError(f"tick_rate must be in [{model.MIN_TICK_RATE}, {model.MAX_TICK_RATE}]")
        self.project = project
        self.tick = 0
        self.tick_rate = rate
        self.rng = SplitMix64(seed)
        self.seed = seed
        self.stopped = False
        self.costume_sizes: dict[tuple[str, str], tuple[int, int]] = dict(costume_sizes or {})
        self.sprite_states = [
            SpriteState(sprite_index=i, layer=i) for i in range(len(project.sprites))
        ]
        self.instances: list[ScriptInstance] = []
        self.pending_events: list[EventIn] = []
        self.diagnostics: list[BudgetExceeded] = []
        self._slots: dict[tuple[int, int], ScriptInstance] = {}
        self._next_instance_id = 1
        self._stop_requested = False
        self._program_ended_reported = False
        self._costume_index_maps = [
            {c.id: k for k, c in enumerate(sprite.costumes)} for sprite in project.sprites
        ]
        for si, sprite in enumerate(project.sprites):
            for sj, script in enumerate(sprite.scripts):
                if isinstance(script.trigger, WhenProgramStarts):
                    self._start_script(si, sj)

    # -- public API --------------------------------------------------------

    def inject(self, event: EventIn) -> None:
        """Queue an input event for the start of the next tick.

        Injecting into a stopped session is a documented no-op.
        """
        if self.stopped:
            return
        self.pending_events.append(event)

    def scene(self) -> Scene:
        entries = []
        order = sorted(
            range(len(self.sprite_states)),
            key=lambda i: (self.sprite_states[i].layer, i),
        )
        for i in order:
            st = self.sprite_states[i]
            sprite = self.project.sprites[i]
            costume_id = sprite.costumes[st.costume_index].id if sprite.costumes else None
            entries.append(
                SceneEntry(
                    sprite_name=sprite.name,
                    x=st.x,
                    y=st.y,
                    visible=st.visible,
                    size_percent=st.size_percent,
                    layer=st.layer,
                    costume_id=costume_id,
                )
            )
        return Scene(tick=max(0, self.tick - 1), entries=tuple(entries))

    def next_random_int(self, lo: int, hi: int) -> int:
        """Next seeded integer in [lo, hi]; consumes exactly one RNG output."""
        return self.rng.next_int(lo, hi)

    def step(self) -> TickOutputs:
        """Execute one logical tick and return its emitted events."""
        if self.stopped:
            raise RuntimeError("cannot step a stopped session")
        tick = self.tick
        emitted: list[OutputEvent] = []

        if self.pending_events:
            prev_scene = self.scene()
            for event in self.pending_events:
                if isinstance(event, Tap):
                    self._dispatch_tap(prev_scene, event)
                else:
                    self._stop_requested = True
            self.pending_events.clear()

        runq: list[tuple[ScriptInstance, int]] = [
            (inst, inst.generation) for inst in self.instances
        ]
        i = 0
        while i < len(runq):
            inst, gen = runq[i]
            i += 1
            if gen != inst.generation:
                continue
            self._run_turn(inst, tick, emitted, runq)

        if all(inst.done for inst in self.instances):
            if not self._program_ended_reported:
                emitted.append(ProgramEnded())
                self._program_ended_reported = True
        else:
            self._program_ended_reported = False

        self.tick = tick + 1
        if self._stop_requested:
            self.stopped = True
        return TickOutputs(tick=tick, emitted=tuple(emitted))

    # -- triggers ----------------------------------------------------------

    def _start_script(self, sprite_index: int, script_index: int) -> ScriptInstance:
        key = (sprite_index, script_index)
        self._program_ended_reported = False  # something is running again
        script = self.project.sprites[sprite_index].scripts[script_index]
        inst = self._slots.get(key)
        if inst is None:
            inst = ScriptInstance(
                sprite_index=sprite_index,
                script_index=script_index,
                instance_id=self._next_instance_id,
            )
            self._next_instance_id += 1
            self._slots[key] = inst
            self.instances.append(inst)
        else:
            inst.generation += 1
        inst.frames = [_Frame(bricks=script.bricks, kind=_TOP)]
        inst.status = Runnable()
        return inst

    def _dispatch_tap(self, prev_scene: Scene, tap: Tap) -> None:
        name = hit_test(prev_scene, tap.x, tap.y, self.costume_sizes)
        if name is None:
            return
        for si, sprite in enumerate(self.project.sprites):
            if sprite.name != name:
                continue
            for sj, script in enumerate(sprite.scripts):
                if isinstance(script.trigger, WhenTapped):
                    self._start_script(si, sj)
            return

    def _dispatch_broadcast(
        self, message: str, runq: list[tuple[ScriptInstance, int]]
    ) -> list[ScriptInstance]:
        started: list[ScriptInstance] = []
        for si, sprite in enumerate(self.project.sprites):
            for sj, script in enumerate(sprite.scripts):
                trig = script.trigger
                if isinstance(trig, WhenIReceive) and trig.message == message:
                    inst = self._start_script(si, sj)
                    runq.append((inst, inst.generation))
                    started.append(inst)
        return started

    # -- per-turn execution --------------------------------------------------

    def _run_turn(
        self,
        inst: ScriptInstance,
        tick: int,
        emitted: list[OutputEvent],
        runq: list[tuple[ScriptInstance, int]],
    ) -> None:
        status = inst.status
        if isinstance(status, Done):
            return
        if isinstance(status, Sleeping):
            if tick < status.until_tick:
                return
            inst.status = Runnable()
        elif isinstance(status, Gliding):
            self._glide_tick(inst, status, tick)
            return
        elif isinstance(status, WaitingOnBroadcast):
            if not all(w.done for w in status.waited):
                return
            inst.status = Runnable()
        self._execute(inst, tick, emitted, runq)

    def _ticks_for_millis(self, millis: int) -> int:
        return max(1, (millis * self.tick_rate + 999) // 1000)

    def _glide_tick(self, inst: ScriptInstance, status: Gliding, tick: int) -> None:
        state = self.sprite_states[inst.sprite_index]
        duration = status.end_tick - status.start_tick
        elapsed = tick + 1 - status.start_tick
        if elapsed >= duration:
            state.x = float(status.target_x)
            state.y = float(status.target_y)
            inst.status = Runnable()
        else:
            state.x = status.start_x + (status.target_x - status.start_x) * elapsed / duration
            state.y = status.start_y + (status.target_y - status.start_y) * elapsed / duration

    def _trip_budget(self, inst: ScriptInstance, tick: int) -> None:
        inst.budget_tripped = True
        self.diagnostics.append(
            BudgetExceeded(
                tick=tick, sprite_index=inst.sprite_index, script_index=inst.script_index
            )
        )

    def _execute(
        self,
        inst: ScriptInstance,
        tick: int,
        emitted: list[OutputEvent],
        runq: list[tuple[ScriptInstance, int]],
    ) -> None:
        if inst.budget_tick != tick:
            inst.budget_tick = tick
            inst.budget_used = 0
            inst.budget_tripped = False
        if inst.budget_tripped:
            return
        frames = inst.frames
        sprite = self.project.sprites[inst.sprite_index]
        state = self.sprite_states[inst.sprite_index]
        costume_index = self._costume_index_maps[inst.sprite_index]

        while True:
            if not frames:
                inst.status = Done()
                return
            frame = frames[-1]
            if frame.kind == _REPEAT and frame.remaining == 0 and frame.pos == 0:
                frames.pop()
                continue
            if frame.pos >= len(frame.bricks):
                if frame.kind == _TOP:
                    frames.pop()
                    continue
                if frame.kind == _FOREVER:
                    frame.pos = 0
                    return  # iteration end yields
                frame.remaining -= 1
                frame.pos = 0
                return  # iteration end yields, including the last one
            if inst.budget_used >= BRICK_BUDGET_PER_TICK:
                if not inst.budget_tripped:
                    self._trip_budget(inst, tick)
                return
            brick = frame.bricks[frame.pos]
            inst.budget_used += 1

            match brick:
                case model.Wait(millis=ms):
                    frame.pos += 1
                    inst.status = Sleeping(until_tick=tick + self._ticks_for_millis(ms))
                    return
                case model.GlideTo(x=tx, y=ty, millis=ms):
                    frame.pos += 1
                    glide = Gliding(
                        start_tick=tick,
                        end_tick=tick + self._ticks_for_millis(ms),
                        start_x=state.x,
                        start_y=state.y,
                        target_x=tx,
                        target_y=ty,
                    )
                    inst.status = glide
                    self._glide_tick(inst, glide, tick)
                    return  # every glide tick yields, including the first
                case model.PlaceAt(x=x, y=y):
                    state.x = float(x)
                    state.y = float(y)
                    frame.pos += 1
                case model.ChangeXBy(dx=dx):
                    state.x = state.x + dx
                    frame.pos += 1
                case model.ChangeYBy(dy=dy):
                    state.y = state.y + dy
                    frame.pos += 1
                case model.PlaceAtRandom(xmin=xmin, xmax=xmax, ymin=ymin, ymax=ymax):
                    state.x = float(self.next_random_int(xmin, xmax))
                    state.y = float(self.next_random_int(ymin, ymax))
                    frame.pos += 1
                case model.SetCostume(costume_id=cid):
                    state.costume_index = costume_index[cid]
                    frame.pos += 1
                case model.NextCostume():
                    if sprite.costumes:
                        state.costume_index = (state.costume_index + 1) % len(sprite.costumes)
                    frame.pos += 1
                case model.Show():
                    state.visible = True
                    frame.pos += 1
                case model.Hide():
                    state.visible = False
                    frame.pos += 1
                case model.SetSize(percent=p):
                    state.size_percent = float(p)
                    frame.pos += 1
                case model.ComeToFront():
                    state.layer = max(s.layer for s in self.sprite_states) + 1
                    frame.pos += 1
                case model.PlaySound(sound_id=sid):
                    emitted.append(SoundStart(sprite_name=sprite.name, sound_id=sid))
                    frame.pos += 1
                case model.Speak(text=text):
                    emitted.append(Speak(sprite_name=sprite.name, text=text))
                    frame.pos += 1
                case model.Broadcast(message=message):
                    frame.pos += 1
                    emitted.append(BroadcastSent(message=message))
                    started = self._dispatch_broadcast(message, runq)
                    if inst in started:
                        return  # restarted ourselves; this turn is stale
                case model.BroadcastAndWait(message=message):
                    frame.pos += 1
                    emitted.append(BroadcastSent(message=message))
                    started = self._dispatch_broadcast(message, runq)
                    if inst in started:
                        return
                    if started:
                        inst.status = WaitingOnBroadcast(waited=tuple(started))
                        return
                case model.Repeat(count=count, body=body):
                    frame.pos += 1
                    frames.append(_Frame(bricks=body, kind=_REPEAT, remaining=count))
                case model.Forever(body=body):
                    frame.pos += 1
                    frames.append(_Frame(bricks=body, kind=_FOREVER))
                case _:
                    raise AssertionError(f"unhandled brick {brick!r}")


def create_session(
    project: Project,
    seed: int,
    tick_rate_override: Optional[int] = None,
    costume_sizes: Optional[CostumeSizes] = None,
) -> Session:
    """Create a fresh session at tick 0 with one instance per start script."""
    return Session(project, seed, tick_rate_override, costume_sizes)
