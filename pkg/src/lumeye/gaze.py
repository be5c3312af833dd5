"""Gaze rendering and decoding.

A gaze direction is shown as a pink pupil on the inner ring over a dim
pink iris, with the whole outer ring as a white sclera.  Directions are
quantized to 30 degree steps; exact ties round counterclockwise.

The pupil is a window of half-width PUPIL_HALF_WIDTH centred on the target
direction.  Each inner LED's alpha is the full level scaled by how much of
that LED's angular cell the window covers, so the alpha-weighted centroid
of the lit pixels lands on the target even when it falls between LEDs.
Directions aligned with the grid produce exactly five full-alpha LEDs.
"""

from __future__ import annotations

import math

from .frames import DEFAULT_PALETTE, LedFrame, SemanticPalette, blank_frame
from .geometry import (
    INNER_COUNT,
    LedAddress,
    Ring,
    led_angle,
    normalize_angle,
    ring_count,
    ring_spacing,
    signed_delta,
)

GAZE_STEP_DEG = 30
GAZE_ANGLES = tuple(range(0, 360, GAZE_STEP_DEG))

PUPIL_HALF_WIDTH = 56.25  # 2.5 inner cells either side of the target
DIM_ALPHA = 40            # iris background level; the decoder ignores it
ENTRY_MS = 300            # pupil sweep-in time before the frame goes static


class GazeError(ValueError):
    """Raised when a gaze cannot be quantized or estimated."""


def quantize_gaze(angle_deg: float) -> int:
    """Snap a direction to the 30 degree grid; ties round counterclockwise.

    quantize_gaze(105) == 120 because 105 sits exactly between detents and
    the counterclockwise neighbour wins.
    """
    if not math.isfinite(angle_deg):
        raise GazeError(f"angle must be finite, got {angle_deg!r}")
    a = normalize_angle(angle_deg)
    down = int(a // GAZE_STEP_DEG) * GAZE_STEP_DEG
    rem = a - down
    if rem < GAZE_STEP_DEG / 2:
        return down % 360
    return (down + GAZE_STEP_DEG) % 360


def pupil_alphas(theta_deg: float, half_width_deg: float = PUPIL_HALF_WIDTH,
                 full_alpha: int = 255) -> dict[int, int]:
    """Per-inner-LED pupil alpha from window coverage.

    Each LED owns a cell one spacing wide; its alpha is full_alpha scaled
    by the fraction of the cell inside [theta - w, theta + w].  Checking
    the overlap at +-360 as well keeps wide entry windows correct across
    the wrap point.
    """
    spacing = ring_spacing(Ring.INNER)
    half_cell = spacing / 2
    out: dict[int, int] = {}
    for i in range(INNER_COUNT):
        d = signed_delta(i * spacing, theta_deg)
        cover = 0.0
        for shift in (-360.0, 0.0, 360.0):
            lo = max(d + shift - half_cell, -half_width_deg)
            hi = min(d + shift + half_cell, half_width_deg)
            cover += max(0.0, hi - lo)
        a = round(full_alpha * min(cover, spacing) / spacing)
        if a > 0:
            out[i] = a
    return out


def render_gaze(angle_deg: int, t_ms: int,
                palette: SemanticPalette = DEFAULT_PALETTE) -> LedFrame:
    """The eye frame for a quantized gaze `angle_deg` at time `t_ms`.

    For the first ENTRY_MS the pupil window narrows from the whole ring to
    its final width, reading as a sweep onto the target; afterwards the
    frame is constant.
    """
    angle = int(angle_deg)
    if angle % GAZE_STEP_DEG != 0 or not 0 <= angle < 360:
        raise GazeError(
            f"gaze must be a multiple of {GAZE_STEP_DEG} in [0, 330], got {angle_deg!r}"
        )
    if t_ms < 0:
        raise GazeError(f"time must be >= 0, got {t_ms}")
    if t_ms >= ENTRY_MS:
        width = PUPIL_HALF_WIDTH
    else:
        width = 180.0 - (180.0 - PUPIL_HALF_WIDTH) * (t_ms / ENTRY_MS)
    iris = palette["Iris-Pink"]
    sclera = palette["Sclera-White"]
    frame = blank_frame()
    updates = {}
    for i in range(ring_count(Ring.OUTER)):
        updates[LedAddress(Ring.OUTER, i)] = sclera
    window = pupil_alphas(angle, width)
    for i in range(INNER_COUNT):
        a = max(DIM_ALPHA, window.get(i, 0))
        updates[LedAddress(Ring.INNER, i)] = iris.with_alpha(a)
    return frame.with_pixels(updates)


def estimate_gaze(frame: LedFrame) -> float:
    """Recover the gaze direction from a frame.

    Uses the alpha-weighted circular mean of inner-ring pixels that carry
    the pupil signature: red above green, red and blue present, and alpha
    strictly above the iris background level.
    """
    x = 0.0
    y = 0.0
    found = False
    for i in range(INNER_COUNT):
        p = frame.get(LedAddress(Ring.INNER, i))
        if p.a > DIM_ALPHA and p.r > p.g and p.r > 0 and p.b > 0:
            ang = math.radians(led_angle(LedAddress(Ring.INNER, i)))
            x += p.a * math.cos(ang)
            y += p.a * math.sin(ang)
            found = True
    if not found or (x == 0.0 and y == 0.0):
        raise GazeError("no pupil pixels found in frame")
    return normalize_angle(math.degrees(math.atan2(y, x)))
