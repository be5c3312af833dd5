"""Frame buffer and the named color vocabulary.

A frame is 40 RGBA pixels, one per LED: buffer indices 0-23 are the outer
ring, 24-39 the inner ring, in ring index order.  Alpha is a brightness
multiplier applied at render time (rendered channel = channel * a / 255),
so a pixel with alpha 0 is dark no matter what its color channels say.
Frames canonicalize such pixels to Off, which keeps equality and the wire
encoding honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import OUTER_COUNT, TOTAL_COUNT, LedAddress, Ring, all_addresses


class PaletteError(ValueError):
    """Raised for a malformed palette entry or file."""


@dataclass(frozen=True)
class ColorRGBA:
    r: int
    g: int
    b: int
    a: int

    def __post_init__(self) -> None:
        for name in ("r", "g", "b", "a"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= 255:
                raise PaletteError(f"channel {name}={v!r} outside 0..255")

    def with_alpha(self, a: int) -> "ColorRGBA":
        return ColorRGBA(self.r, self.g, self.b, a)

    def rendered(self) -> tuple[int, int, int]:
        """RGB after the alpha brightness multiplier, rounded to nearest."""
        return (
            (self.r * self.a + 127) // 255,
            (self.g * self.a + 127) // 255,
            (self.b * self.a + 127) // 255,
        )


OFF = ColorRGBA(0, 0, 0, 0)


def buffer_index(addr: LedAddress) -> int:
    """Map a ring address to its slot in the 40-pixel buffer."""
    if addr.ring is Ring.OUTER:
        return addr.index
    return OUTER_COUNT + addr.index


class LedFrame:
    """Immutable 40-pixel frame.

    Pixels whose alpha is 0 are stored as Off so that visually identical
    frames compare and serialize identically.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels: tuple[ColorRGBA, ...] | list[ColorRGBA]):
        if len(pixels) != TOTAL_COUNT:
            raise ValueError(f"frame needs {TOTAL_COUNT} pixels, got {len(pixels)}")
        self._pixels = tuple(OFF if p.a == 0 else p for p in pixels)

    @property
    def pixels(self) -> tuple[ColorRGBA, ...]:
        return self._pixels

    def get(self, addr: LedAddress) -> ColorRGBA:
        return self._pixels[buffer_index(addr)]

    def with_pixel(self, addr: LedAddress, color: ColorRGBA) -> "LedFrame":
        buf = list(self._pixels)
        buf[buffer_index(addr)] = color
        return LedFrame(buf)

    def with_pixels(self, updates: dict[LedAddress, ColorRGBA]) -> "LedFrame":
        buf = list(self._pixels)
        for addr, color in updates.items():
            buf[buffer_index(addr)] = color
        return LedFrame(buf)

    def lit_addresses(self) -> list[LedAddress]:
        return [a for a in all_addresses() if self.get(a).a > 0]

    def to_bytes(self) -> bytes:
        out = bytearray()
        for p in self._pixels:
            out.extend((p.r, p.g, p.b, p.a))
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "LedFrame":
        if len(data) != TOTAL_COUNT * 4:
            raise ValueError(f"expected {TOTAL_COUNT * 4} bytes, got {len(data)}")
        px = [
            ColorRGBA(data[i], data[i + 1], data[i + 2], data[i + 3])
            for i in range(0, len(data), 4)
        ]
        return cls(px)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LedFrame) and self._pixels == other._pixels

    def __hash__(self) -> int:
        return hash(self._pixels)

    def __repr__(self) -> str:
        lit = sum(1 for p in self._pixels if p.a > 0)
        return f"<LedFrame lit={lit}/{TOTAL_COUNT}>"


def blank_frame() -> LedFrame:
    return LedFrame([OFF] * TOTAL_COUNT)


def solid_frame(color: ColorRGBA) -> LedFrame:
    return LedFrame([color] * TOTAL_COUNT)


def composite(base: LedFrame, overlay: LedFrame) -> LedFrame:
    """Painter's rule: any overlay pixel that is not dark replaces the base."""
    return LedFrame(
        [o if o.a > 0 else b for b, o in zip(base.pixels, overlay.pixels)]
    )


# ---------------------------------------------------------------------------
# Semantic palette
# ---------------------------------------------------------------------------
#
# One name per meaning class, tuned for underwater legibility: yellow for
# directions, red for problems, blue for information, purple for the vehicle
# itself, plus the eye tones and a confirmation green.  The whole vocabulary
# can be re-tuned from a single config file without touching animations.

DEFAULT_COLORS: dict[str, ColorRGBA] = {
    "Directional-Yellow": ColorRGBA(255, 200, 0, 255),
    "Problem-Red": ColorRGBA(255, 0, 0, 255),
    "Information-Blue": ColorRGBA(0, 80, 255, 255),
    "AUV-Purple": ColorRGBA(160, 0, 255, 255),
    "Iris-Pink": ColorRGBA(255, 60, 160, 255),
    "Sclera-White": ColorRGBA(255, 255, 255, 180),
    "Affirm-Green": ColorRGBA(0, 255, 60, 255),
    "Off": OFF,
}

MIN_COLOR_SEPARATION = 80.0


class SemanticPalette:
    """The named colors every animation refers to.

    Names are fixed; values may be overridden from a config file.  Any two
    non-Off entries must stay at least MIN_COLOR_SEPARATION apart in RGB
    space so the meanings remain distinguishable through water.
    """

    def __init__(self, colors: dict[str, ColorRGBA] | None = None,
                 min_separation: float = MIN_COLOR_SEPARATION):
        merged = dict(DEFAULT_COLORS)
        if colors:
            for name in colors:
                if name not in DEFAULT_COLORS:
                    raise PaletteError(f"unknown palette name {name!r}")
            merged.update(colors)
        if merged["Off"].a != 0:
            raise PaletteError("Off must have alpha 0")
        names = [n for n in merged if n != "Off"]
        for i, n1 in enumerate(names):
            for n2 in names[i + 1:]:
                d = _rgb_distance(merged[n1], merged[n2])
                if d <= min_separation:
                    raise PaletteError(
                        f"colors {n1!r} and {n2!r} are only {d:.1f} apart "
                        f"(minimum {min_separation})"
                    )
        self._colors = merged

    def __getitem__(self, name: str) -> ColorRGBA:
        try:
            return self._colors[name]
        except KeyError:
            raise PaletteError(f"unknown palette name {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._colors

    def names(self) -> list[str]:
        return list(self._colors)

    def name_of_rgb(self, r: int, g: int, b: int) -> str | None:
        """Reverse lookup by color channels, ignoring alpha."""
        for name, c in self._colors.items():
            if name != "Off" and (c.r, c.g, c.b) == (r, g, b):
                return name
        return None

    @classmethod
    def from_text(cls, text: str) -> "SemanticPalette":
        """Parse `name = r,g,b,a` lines; `#` starts a comment."""
        overrides: dict[str, ColorRGBA] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise PaletteError(f"line {line_no}: expected `name = r,g,b,a`")
            name, _, rhs = line.partition("=")
            name = name.strip()
            if name not in DEFAULT_COLORS:
                raise PaletteError(f"line {line_no}: unknown palette name {name!r}")
            parts = [p.strip() for p in rhs.split(",")]
            if len(parts) != 4:
                raise PaletteError(f"line {line_no}: need four channels")
            try:
                r, g, b, a = (int(p) for p in parts)
            except ValueError:
                raise PaletteError(f"line {line_no}: channels must be integers") from None
            try:
                overrides[name] = ColorRGBA(r, g, b, a)
            except PaletteError as exc:
                raise PaletteError(f"line {line_no}: {exc}") from None
        return cls(overrides)

    def to_text(self) -> str:
        lines = [f"{name} = {c.r},{c.g},{c.b},{c.a}" for name, c in self._colors.items()]
        return "\n".join(lines) + "\n"


def _rgb_distance(c1: ColorRGBA, c2: ColorRGBA) -> float:
    return math.sqrt((c1.r - c2.r) ** 2 + (c1.g - c2.g) ** 2 + (c1.b - c2.b) ** 2)


DEFAULT_PALETTE = SemanticPalette()
