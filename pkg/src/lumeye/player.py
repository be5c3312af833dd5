"""The controller: turns modes into a paced stream of driver messages.

The player owns a logical clock.  Frame k of the current mode is sampled
at t = k * 1000 / fps milliseconds, and both eyes get the same frame with
the same timestamp; wall time only decides when a tick happens, never
what it contains, so a session replayed at any speed is bit-identical.

Mode changes land on the next frame boundary: a frame is always sampled
from exactly one mode.  Per-eye sequence numbers start at 0 and increase
by 1 per emitted message for the life of the session.
"""

from __future__ import annotations

import queue
import random
import threading
from collections import deque
from dataclasses import dataclass

from .animation import MAX_FPS, MIN_FPS, sample
from .catalog import ACTIVE_IDS, Catalog, CatalogError, default_catalog
from .frames import DEFAULT_PALETTE, LedFrame, SemanticPalette, blank_frame, solid_frame
from .protocol import DriverMessage, encode

MODE_KINDS = ("idle", "active", "ocular", "functional")


class PlayerError(ValueError):
    """Raised for invalid modes, parameters or tick misuse."""


@dataclass(frozen=True)
class Mode:
    kind: str
    luceme_id: str | None = None
    gaze_deg: int | None = None
    level: float | None = None
    color: str | None = None
    intensity: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in MODE_KINDS:
            raise PlayerError(f"unknown mode kind {self.kind!r}")

    @classmethod
    def idle(cls) -> "Mode":
        return cls("idle")

    @classmethod
    def active(cls, luceme_id: str, level: float | None = None) -> "Mode":
        return cls("active", luceme_id=luceme_id, level=level)

    @classmethod
    def ocular(cls, luceme_id: str | None = None,
               gaze_deg: int | None = None) -> "Mode":
        if gaze_deg is not None:
            return cls("ocular", luceme_id="Gaze", gaze_deg=gaze_deg)
        if luceme_id is None:
            raise PlayerError("ocular mode needs a luceme id or a gaze angle")
        return cls("ocular", luceme_id=luceme_id)

    @classmethod
    def functional(cls, color: str, intensity: float) -> "Mode":
        return cls("functional", color=color, intensity=intensity)

    def to_dict(self) -> dict[str, object]:
        out: dict[str, object] = {"type": self.kind}
        if self.luceme_id is not None:
            out["id"] = self.luceme_id
        if self.gaze_deg is not None:
            out["angle"] = self.gaze_deg
        if self.level is not None:
            out["level"] = self.level
        if self.color is not None:
            out["color"] = self.color
        if self.intensity is not None:
            out["intensity"] = self.intensity
        return out


class Subscription:
    """A bounded frame feed; the producer drops the oldest item when full."""

    def __init__(self, maxsize: int):
        self.queue: queue.Queue = queue.Queue(maxsize=maxsize)
        self.dropped = 0

    def _offer(self, item) -> None:
        try:
            self.queue.put_nowait(item)
        except queue.Full:
            try:
                self.queue.get_nowait()
                self.dropped += 1
            except queue.Empty:
                pass
            try:
                self.queue.put_nowait(item)
            except queue.Full:
                self.dropped += 1


class Player:
    """Synchronous core; call tick() once per frame period.

    The player stays quiet until the first command arrives, so a freshly
    started session begins at sequence 0 / t=0 on its first real frame.
    """

    def __init__(
        self,
        endpoint=None,
        fps: int = 30,
        catalog: Catalog | None = None,
        palette: SemanticPalette = DEFAULT_PALETTE,
        record: bool = False,
    ):
        if not isinstance(fps, int) or not MIN_FPS <= fps <= MAX_FPS:
            raise PlayerError(f"fps must be an int in {MIN_FPS}..{MAX_FPS}, got {fps!r}")
        self._lock = threading.RLock()
        self._endpoint = endpoint
        self._fps = fps
        self._catalog = catalog if catalog is not None else default_catalog()
        self._palette = palette
        self._mode = Mode.idle()
        self._pending: Mode | None = None
        self._session_started = False
        self._mode_frame = 0
        self._session_frame = 0
        self._sequences = {0: 0, 1: 0}
        self._queue: deque[tuple[Mode, int]] = deque()
        self._frames_left: int | None = None
        self._transport_drops = 0
        self._recording: list[tuple[int, DriverMessage]] | None = [] if record else None
        self._subscribers: list[Subscription] = []

    @property
    def fps(self) -> int:
        return self._fps

    @property
    def session_started(self) -> bool:
        with self._lock:
            return self._session_started

    # -- commands ----------------------------------------------------------

    def frame_for(self, mode: Mode, t_ms: int) -> LedFrame:
        """Pure: the frame a mode shows at local time t_ms."""
        if mode.kind == "idle":
            return blank_frame()
        if mode.kind == "active":
            ldef = self._catalog.active_def(mode.luceme_id, level=mode.level)
            return sample(ldef, t_ms, self._palette)
        if mode.kind == "ocular":
            ldef = self._catalog.ocular_def(mode.luceme_id, gaze_deg=mode.gaze_deg)
            return sample(ldef, t_ms, self._palette)
        if mode.kind == "functional":
            color = self._palette[mode.color]
            if not 0.0 <= mode.intensity <= 1.0:
                raise PlayerError(f"intensity must be in [0, 1], got {mode.intensity!r}")
            return solid_frame(color.with_alpha(round(color.a * mode.intensity)))
        raise PlayerError(f"unknown mode kind {mode.kind!r}")

    def set_mode(self, mode: Mode) -> dict[str, object]:
        """Request a mode; it takes effect on the next frame boundary.

        An explicit mode change cancels any trial sequence in progress.
        Raises CatalogError for unknown lucemes and PlayerError for bad
        parameters; validation happens here, not at the boundary.
        """
        self.frame_for(mode, 0)  # validate before accepting
        with self._lock:
            self._pending = mode
            self._queue.clear()
            self._frames_left = None
            self._session_started = True
            return self.state()

    def play_sequence(
        self,
        ids: list[str] | None = None,
        dwell_ms: int = 2000,
        randomize: bool = False,
        seed: int | None = None,
    ) -> list[str]:
        """Queue a trial sequence of active lucemes; returns the realized order.

        With randomize set, the order is a seeded shuffle: equal seeds give
        equal orders.  Each item plays for dwell_ms, then the player goes
        idle.
        """
        ids = list(ids) if ids is not None else list(ACTIVE_IDS)
        if not ids:
            raise PlayerError("sequence needs at least one luceme")
        for luceme_id in ids:
            if luceme_id not in ACTIVE_IDS:
                raise CatalogError(f"unknown active luceme {luceme_id!r}")
        dwell_frames = dwell_ms * self._fps // 1000
        if dwell_ms <= 0 or dwell_frames < 1:
            raise PlayerError(
                f"dwell_ms {dwell_ms!r} is shorter than one frame at {self._fps} fps"
            )
        order = list(ids)
        if randomize:
            order = random.Random(seed).sample(order, len(order))
        with self._lock:
            self._queue.clear()
            for luceme_id in order:
                self._queue.append((Mode.active(luceme_id), dwell_frames))
            self._pending = None
            self._frames_left = 0  # advance into the queue on the next tick
            self._session_started = True
        return order

    def sequence_frame_total(self, n_items: int, dwell_ms: int) -> int:
        return n_items * (dwell_ms * self._fps // 1000)

    # -- the clock ---------------------------------------------------------

    def tick(self) -> list[DriverMessage]:
        """Emit one frame to both eyes; returns the two messages."""
        with self._lock:
            if not self._session_started:
                raise PlayerError("no session: set a mode or sequence first")
            if self._pending is not None:
                self._mode = self._pending
                self._pending = None
                self._mode_frame = 0
            elif self._frames_left == 0:
                if self._queue:
                    self._mode, self._frames_left = self._queue.popleft()
                else:
                    self._mode = Mode.idle()
                    self._frames_left = None
                self._mode_frame = 0
            t_ms = self._mode_frame * 1000 // self._fps
            ts_ms = self._session_frame * 1000 // self._fps
            frame = self.frame_for(self._mode, t_ms)
            messages = []
            for eye_id in (0, 1):
                msg = DriverMessage(eye_id, self._sequences[eye_id], frame)
                self._sequences[eye_id] += 1
                messages.append(msg)
            if self._endpoint is not None:
                for msg in messages:
                    self._endpoint.send(encode(msg))
            else:
                self._transport_drops += len(messages)
            if self._recording is not None:
                for msg in messages:
                    self._recording.append((ts_ms, msg))
            for sub in self._subscribers:
                for msg in messages:
                    sub._offer((ts_ms, msg))
            self._mode_frame += 1
            self._session_frame += 1
            if self._frames_left is not None:
                self._frames_left -= 1
            return messages

    def run(self, ticks: int) -> None:
        """Advance the logical clock as fast as possible (headless use)."""
        for _ in range(ticks):
            self.tick()

    # -- introspection -----------------------------------------------------

    def state(self) -> dict[str, object]:
        with self._lock:
            return {
                "session_started": self._session_started,
                "mode": self._mode.to_dict(),
                "pending_mode": self._pending.to_dict() if self._pending else None,
                "fps": self._fps,
                "frames_emitted": self._session_frame,
                "transport_drops": self._transport_drops,
                "stream_drops": sum(s.dropped for s in self._subscribers),
                "sequence_remaining": len(self._queue),
                "device_connected": self._endpoint is not None,
            }

    def recording(self) -> list[tuple[int, DriverMessage]]:
        if self._recording is None:
            raise PlayerError("player was created without record=True")
        with self._lock:
            return list(self._recording)

    def subscribe(self, maxsize: int = 64) -> Subscription:
        sub = Subscription(maxsize)
        with self._lock:
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)
