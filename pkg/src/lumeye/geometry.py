"""Ring geometry for the dual-ring eye face.

The face is two concentric LED rings: 24 LEDs outside, 16 inside.  Index 0
of each ring sits at 0 degrees in Cartesian convention (3 o'clock) and
indices increase counterclockwise, so outer LEDs are 15 degrees apart and
inner LEDs 22.5 degrees apart.  All angles in this package are degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

OUTER_COUNT = 24
INNER_COUNT = 16
TOTAL_COUNT = OUTER_COUNT + INNER_COUNT


class Ring(Enum):
    OUTER = "outer"
    INNER = "inner"


class AddressError(ValueError):
    """Raised for an index outside its ring."""


def ring_count(ring: Ring) -> int:
    return OUTER_COUNT if ring is Ring.OUTER else INNER_COUNT


def ring_spacing(ring: Ring) -> float:
    """Angular distance between neighbouring LEDs on a ring."""
    return 360.0 / ring_count(ring)


@dataclass(frozen=True, order=True)
class LedAddress:
    ring: Ring
    index: int

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or isinstance(self.index, bool):
            raise AddressError(f"index must be an int, got {self.index!r}")
        if not 0 <= self.index < ring_count(self.ring):
            raise AddressError(
                f"index {self.index} out of range for {self.ring.value} ring"
            )


def all_addresses() -> list[LedAddress]:
    """Every address, outer ring first, each ring in index order."""
    outer = [LedAddress(Ring.OUTER, i) for i in range(OUTER_COUNT)]
    inner = [LedAddress(Ring.INNER, i) for i in range(INNER_COUNT)]
    return outer + inner


def normalize_angle(deg: float) -> float:
    """Map an angle to [0, 360)."""
    a = math.fmod(deg, 360.0)
    if a < 0:
        a += 360.0
    return 0.0 if a == 360.0 else a


def led_angle(addr: LedAddress) -> float:
    return addr.index * ring_spacing(addr.ring)


def circular_distance(a: float, b: float) -> float:
    """Shortest angular distance between two directions, in [0, 180]."""
    d = abs(normalize_angle(a) - normalize_angle(b))
    return min(d, 360.0 - d)


def signed_delta(a: float, b: float) -> float:
    """Signed shortest rotation from b to a, in [-180, 180)."""
    return (a - b + 180.0) % 360.0 - 180.0


def nearest_led(ring: Ring, angle_deg: float) -> LedAddress:
    """The LED on `ring` closest to `angle_deg`; ties go to the lower index.

    Scanning in index order and keeping strictly-better candidates makes the
    tiebreak explicit instead of leaning on float rounding.
    """
    if not math.isfinite(angle_deg):
        raise AddressError(f"angle must be finite, got {angle_deg!r}")
    best_i = 0
    best_d = circular_distance(angle_deg, 0.0)
    spacing = ring_spacing(ring)
    for i in range(1, ring_count(ring)):
        d = circular_distance(angle_deg, i * spacing)
        if d < best_d:
            best_i, best_d = i, d
    return LedAddress(ring, best_i)


_ARC_EPS = 1e-9  # absorbs float dust so exact boundary LEDs stay included


def arc(ring: Ring, center_deg: float, half_width_deg: float) -> list[LedAddress]:
    """LEDs within `half_width_deg` of `center_deg`, boundary inclusive.

    Ordered counterclockwise starting from the most clockwise member, so a
    growing arc keeps a stable leading edge.
    """
    if half_width_deg < 0:
        raise AddressError(f"half width must be >= 0, got {half_width_deg!r}")
    members = []
    spacing = ring_spacing(ring)
    for i in range(ring_count(ring)):
        delta = signed_delta(i * spacing, center_deg)
        if abs(delta) <= half_width_deg + _ARC_EPS or half_width_deg >= 180.0:
            members.append((delta, i))
    members.sort()
    return [LedAddress(ring, i) for _, i in members]
