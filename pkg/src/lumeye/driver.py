"""Driver-side simulation of the two eye faces.

The simulator stands in for the firmware that owns the physical LEDs.  It
accepts encoded messages, keeps one frame per eye, enforces the staleness
rule (a message only lands if its sequence number is higher than the last
accepted one for that eye) and can rasterize its state to a PPM image for
headless inspection.

Mounting rotation is modeled as a per-eye calibration offset in degrees:
snapshots report the frame rotated by the offset, mapping each LED onto
the one nearest its corrected direction.  The stored frame is untouched,
so changing the offset later re-reads the same data differently.
"""

from __future__ import annotations

import math
import threading
import time

from dataclasses import dataclass

from .frames import LedFrame, blank_frame
from .geometry import (
    LedAddress,
    Ring,
    all_addresses,
    led_angle,
    nearest_led,
    ring_count,
)
from .protocol import MESSAGE_SIZE, DriverMessage, decode

IMAGE_SIZE = 256          # one eye panel is IMAGE_SIZE x IMAGE_SIZE
OUTER_RADIUS_PX = 100
INNER_RADIUS_PX = 60
LED_RADIUS_PX = 9
_CENTER = 128.0


class DriverError(ValueError):
    """Raised for unknown eyes or bad calibration values."""


def now_ms() -> int:
    return int(time.time() * 1000)


def rotate_frame(frame: LedFrame, offset_deg: float) -> LedFrame:
    """View a frame through a mounting rotation.

    Each destination LED takes the value of the source LED nearest to its
    own direction minus the offset; offsets that are whole LED steps are
    exact permutations.
    """
    if offset_deg % 360.0 == 0.0:
        return frame
    updates = {}
    for ring in (Ring.OUTER, Ring.INNER):
        for j in range(ring_count(ring)):
            dst = LedAddress(ring, j)
            src = nearest_led(ring, led_angle(dst) - offset_deg)
            updates[dst] = frame.get(src)
    return blank_frame().with_pixels(updates)


@dataclass(frozen=True)
class EyeSnapshot:
    """A consistent read of one eye: frame (calibration applied) plus metadata."""

    eye_id: int
    frame: LedFrame
    sequence: int | None
    updated_at_ms: int | None
    calibration_offset_deg: float


class _EyeCell:
    __slots__ = ("lock", "frame", "sequence", "updated_at_ms", "offset_deg")

    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.frame = blank_frame()
        self.sequence: int | None = None
        self.updated_at_ms: int | None = None
        self.offset_deg = 0.0


class DriverSim:
    """Both eyes of the face, fed by encoded driver messages.

    apply()/send() may be called from any thread; snapshots are taken
    under the same per-eye lock that writers hold for their brief update,
    so a reader never observes a half-applied frame.
    """

    def __init__(self, calibration: dict[int, float] | None = None):
        self._eyes = {0: _EyeCell(), 1: _EyeCell()}
        self._rxbuf = bytearray()
        if calibration:
            for eye_id, offset in calibration.items():
                self.set_calibration(eye_id, offset)

    def _cell(self, eye_id: int) -> _EyeCell:
        try:
            return self._eyes[eye_id]
        except KeyError:
            raise DriverError(f"unknown eye {eye_id!r}") from None

    def set_calibration(self, eye_id: int, offset_deg: float) -> None:
        if not math.isfinite(offset_deg):
            raise DriverError(f"offset must be finite, got {offset_deg!r}")
        cell = self._cell(eye_id)
        with cell.lock:
            cell.offset_deg = float(offset_deg)

    def apply(self, msg: DriverMessage, at_ms: int | None = None) -> bool:
        """Accept a decoded message; returns False if it was stale."""
        cell = self._cell(msg.eye_id)
        with cell.lock:
            if cell.sequence is not None and msg.sequence <= cell.sequence:
                return False
            cell.frame = msg.frame
            cell.sequence = msg.sequence
            cell.updated_at_ms = now_ms() if at_ms is None else at_ms
            return True

    def send(self, data: bytes) -> None:
        """Byte-stream endpoint: buffers input and applies complete messages.

        Decode failures propagate; the stream has no resync marker, so a
        bad message means the sender and receiver disagree about framing.
        """
        self._rxbuf.extend(data)
        while len(self._rxbuf) >= MESSAGE_SIZE:
            chunk = bytes(self._rxbuf[:MESSAGE_SIZE])
            del self._rxbuf[:MESSAGE_SIZE]
            self.apply(decode(chunk))

    def snapshot(self, eye_id: int) -> EyeSnapshot:
        cell = self._cell(eye_id)
        with cell.lock:
            frame = rotate_frame(cell.frame, cell.offset_deg)
            return EyeSnapshot(
                eye_id=eye_id,
                frame=frame,
                sequence=cell.sequence,
                updated_at_ms=cell.updated_at_ms,
                calibration_offset_deg=cell.offset_deg,
            )

    def render_image(self, eye: int | str = "both") -> bytes:
        """Rasterize the current state to a binary PPM (P6)."""
        if eye == "both":
            frames = [self.snapshot(0).frame, self.snapshot(1).frame]
        else:
            frames = [self.snapshot(int(eye)).frame]
        return render_ppm(frames)


def render_ppm(frames: list[LedFrame]) -> bytes:
    """Draw eye panels side by side; left panel first.

    Deterministic by construction: integer pixel centers from rounded
    trigonometry, fixed draw order, and a black background.
    """
    width = IMAGE_SIZE * len(frames)
    height = IMAGE_SIZE
    buf = bytearray(width * height * 3)
    for panel, frame in enumerate(frames):
        x_base = panel * IMAGE_SIZE
        for addr in all_addresses():
            color = frame.get(addr).rendered()
            if color == (0, 0, 0):
                continue
            radius = OUTER_RADIUS_PX if addr.ring is Ring.OUTER else INNER_RADIUS_PX
            ang = math.radians(led_angle(addr))
            cx = x_base + round(_CENTER + radius * math.cos(ang))
            cy = round(_CENTER - radius * math.sin(ang))
            _draw_disc(buf, width, height, cx, cy, color)
    return b"P6\n%d %d\n255\n" % (width, height) + bytes(buf)


def _draw_disc(buf: bytearray, width: int, height: int,
               cx: int, cy: int, color: tuple[int, int, int]) -> None:
    r, g, b = color
    rad = LED_RADIUS_PX
    for dy in range(-rad, rad + 1):
        y = cy + dy
        if not 0 <= y < height:
            continue
        for dx in range(-rad, rad + 1):
            if dx * dx + dy * dy > rad * rad:
                continue
            x = cx + dx
            if not 0 <= x < width:
                continue
            i = (y * width + x) * 3
            buf[i] = r
            buf[i + 1] = g
            buf[i + 2] = b


def led_center_px(addr: LedAddress, panel: int = 0) -> tuple[int, int]:
    """Pixel center of an LED disc; the inverse sampling point for decoders."""
    radius = OUTER_RADIUS_PX if addr.ring is Ring.OUTER else INNER_RADIUS_PX
    ang = math.radians(led_angle(addr))
    x = panel * IMAGE_SIZE + round(_CENTER + radius * math.cos(ang))
    y = round(_CENTER - radius * math.sin(ang))
    return x, y


def replay_into_sim(records: list[tuple[int, DriverMessage]],
                    sim: DriverSim | None = None) -> DriverSim:
    """Apply logged messages in order; handy for reconstructing a session."""
    if sim is None:
        sim = DriverSim()
    for ts, msg in records:
        sim.apply(msg, at_ms=ts)
    return sim
