"""Animation primitives and the luceme definition format.

A luceme is a named, timed light gesture: an ordered list of tracks, each
binding one primitive to a ring scope, a palette color and a half-open
window [start_ms, end_ms).  Later tracks paint over earlier ones wherever
they are lit.  Time is integer milliseconds throughout; sampling the same
definition at the same instant always yields the same frame.

Definitions have a plain-text form, one luceme per file::

    # double green flash
    luceme Affirmative duration=2000 loop=true
    track 0..1000 Flash ring=Both color=Affirm-Green on=250 off=250

Kinds and their parameters:

    Fill                                   [alpha=N]
    Flash    on=MS off=MS                  [alpha=N]
    Pulse    period=MS min_alpha=N max_alpha=N
    Chase    segments=N seglen=N speed=DEG_PER_S dir=ccw|cw  [alpha=N]
    Wipe     start=DEG end=DEG sweep=MS    [alpha=N]
    ArcHold  center=DEG half_width=DEG     [alpha=N]
    Shape    leds=O0,O1,I5                 [alpha=N]

`alpha` overrides the palette color's alpha; Pulse computes its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Union

from .frames import DEFAULT_PALETTE, OFF, LedFrame, SemanticPalette, buffer_index
from .geometry import (
    TOTAL_COUNT,
    LedAddress,
    Ring,
    arc,
    nearest_led,
    normalize_angle,
    ring_count,
    ring_spacing,
)

SCOPE_OUTER = "outer"
SCOPE_INNER = "inner"
SCOPE_BOTH = "both"
_SCOPES = (SCOPE_OUTER, SCOPE_INNER, SCOPE_BOTH)

MIN_FPS = 1
MAX_FPS = 120


class AnimationError(ValueError):
    """Raised for invalid primitives, tracks or sampling arguments."""


class LucemeParseError(AnimationError):
    """Raised with a line number when definition text cannot be parsed."""


def scope_rings(scope: str) -> tuple[Ring, ...]:
    if scope == SCOPE_OUTER:
        return (Ring.OUTER,)
    if scope == SCOPE_INNER:
        return (Ring.INNER,)
    if scope == SCOPE_BOTH:
        return (Ring.OUTER, Ring.INNER)
    raise AnimationError(f"unknown ring scope {scope!r}")


def _check_scope(scope: str) -> None:
    if scope not in _SCOPES:
        raise AnimationError(f"unknown ring scope {scope!r}")


def _check_alpha(alpha: int | None) -> None:
    if alpha is not None and not 0 <= alpha <= 255:
        raise AnimationError(f"alpha {alpha!r} outside 0..255")


@dataclass(frozen=True)
class Fill:
    """Light every LED in scope."""

    ring: str
    color: str
    alpha: int | None = None

    def __post_init__(self) -> None:
        _check_scope(self.ring)
        _check_alpha(self.alpha)

    def alphas(self, t_ms: int, base: int) -> dict[LedAddress, int]:
        a = base if self.alpha is None else self.alpha
        out = {}
        for ring in scope_rings(self.ring):
            for i in range(ring_count(ring)):
                out[LedAddress(ring, i)] = a
        return out


@dataclass(frozen=True)
class Flash:
    """Square on/off blinking, starting on."""

    ring: str
    color: str
    on_ms: int
    off_ms: int
    alpha: int | None = None

    def __post_init__(self) -> None:
        _check_scope(self.ring)
        _check_alpha(self.alpha)
        if self.on_ms <= 0 or self.off_ms < 0:
            raise AnimationError("Flash needs on_ms > 0 and off_ms >= 0")

    def alphas(self, t_ms: int, base: int) -> dict[LedAddress, int]:
        phase = t_ms % (self.on_ms + self.off_ms)
        if phase >= self.on_ms:
            return {}
        a = base if self.alpha is None else self.alpha
        out = {}
        for ring in scope_rings(self.ring):
            for i in range(ring_count(ring)):
                out[LedAddress(ring, i)] = a
        return out


@dataclass(frozen=True)
class Pulse:
    """Raised-cosine breathing between two alpha levels.

    alpha(t) = min + (max - min) * (1 - cos(2*pi*t / period)) / 2, so the
    trace starts at min_alpha and peaks at half period.
    """

    ring: str
    color: str
    period_ms: int
    min_alpha: int = 0
    max_alpha: int = 255

    def __post_init__(self) -> None:
        _check_scope(self.ring)
        if self.period_ms <= 0:
            raise AnimationError("Pulse needs period_ms > 0")
        if not 0 <= self.min_alpha <= self.max_alpha <= 255:
            raise AnimationError("Pulse needs 0 <= min_alpha <= max_alpha <= 255")

    def alpha_at(self, t_ms: int) -> int:
        lobe = (1.0 - math.cos(2.0 * math.pi * t_ms / self.period_ms)) / 2.0
        return round(self.min_alpha + (self.max_alpha - self.min_alpha) * lobe)

    def alphas(self, t_ms: int, base: int) -> dict[LedAddress, int]:
        a = self.alpha_at(t_ms)
        out = {}
        for ring in scope_rings(self.ring):
            for i in range(ring_count(ring)):
                out[LedAddress(ring, i)] = a
        return out


@dataclass(frozen=True)
class Chase:
    """Evenly spaced segments running around a ring.

    Each segment's head angle advances linearly at `speed_dps`; the body
    trails `seglen` LEDs behind the head against the direction of travel.
    """

    ring: str
    color: str
    segments: int
    seglen: int
    speed_dps: float
    direction: str = "ccw"
    alpha: int | None = None

    def __post_init__(self) -> None:
        _check_scope(self.ring)
        _check_alpha(self.alpha)
        if self.segments < 1 or self.seglen < 1:
            raise AnimationError("Chase needs segments >= 1 and seglen >= 1")
        if self.direction not in ("ccw", "cw"):
            raise AnimationError(f"Chase direction must be ccw or cw, got {self.direction!r}")
        if self.speed_dps < 0:
            raise AnimationError("Chase speed must be >= 0; use dir=cw to reverse")

    def head_angle(self, segment: int, t_ms: int) -> float:
        sign = 1.0 if self.direction == "ccw" else -1.0
        start = segment * 360.0 / self.segments
        return normalize_angle(start + sign * self.speed_dps * t_ms / 1000.0)

    def alphas(self, t_ms: int, base: int) -> dict[LedAddress, int]:
        a = base if self.alpha is None else self.alpha
        step = 1 if self.direction == "ccw" else -1
        out = {}
        for ring in scope_rings(self.ring):
            n = ring_count(ring)
            for s in range(self.segments):
                head = nearest_led(ring, self.head_angle(s, t_ms)).index
                for j in range(self.seglen):
                    out[LedAddress(ring, (head - step * j) % n)] = a
        return out


@dataclass(frozen=True)
class Wipe:
    """An arc growing from `start_deg` toward `end_deg` over `sweep_ms`.

    The signed difference end - start sets both direction and extent; once
    the sweep completes the full arc holds until the track ends.
    """

    ring: str
    color: str
    start_deg: float
    end_deg: float
    sweep_ms: int
    alpha: int | None = None

    def __post_init__(self) -> None:
        _check_scope(self.ring)
        _check_alpha(self.alpha)
        if self.sweep_ms <= 0:
            raise AnimationError("Wipe needs sweep_ms > 0")

    def alphas(self, t_ms: int, base: int) -> dict[LedAddress, int]:
        a = base if self.alpha is None else self.alpha
        total = self.end_deg - self.start_deg
        frac = min(1.0, t_ms / self.sweep_ms)
        extent = abs(total) * frac
        eps = 1e-9
        out = {}
        for ring in scope_rings(self.ring):
            spacing = ring_spacing(ring)
            for i in range(ring_count(ring)):
                ang = i * spacing
                if total >= 0:
                    off = normalize_angle(ang - self.start_deg)
                else:
                    off = normalize_angle(self.start_deg - ang)
                if off <= extent + eps:
                    out[LedAddress(ring, i)] = a
        return out


@dataclass(frozen=True)
class ArcHold:
    """A static arc of LEDs around a center direction."""

    ring: str
    color: str
    center_deg: float
    half_width_deg: float
    alpha: int | None = None

    def __post_init__(self) -> None:
        _check_scope(self.ring)
        _check_alpha(self.alpha)
        if self.half_width_deg < 0:
            raise AnimationError("ArcHold needs half_width_deg >= 0")

    def alphas(self, t_ms: int, base: int) -> dict[LedAddress, int]:
        a = base if self.alpha is None else self.alpha
        out = {}
        for ring in scope_rings(self.ring):
            for addr in arc(ring, self.center_deg, self.half_width_deg):
                out[addr] = a
        return out


@dataclass(frozen=True)
class Shape:
    """An explicit, static LED set; the ring scope is implied by the set."""

    leds: tuple[LedAddress, ...]
    color: str
    alpha: int | None = None
    ring: str = SCOPE_BOTH

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if not self.leds:
            raise AnimationError("Shape needs at least one LED")
        if len(set(self.leds)) != len(self.leds):
            raise AnimationError("Shape LED set has duplicates")

    def alphas(self, t_ms: int, base: int) -> dict[LedAddress, int]:
        a = base if self.alpha is None else self.alpha
        return {addr: a for addr in self.leds}


Primitive = Union[Fill, Flash, Pulse, Chase, Wipe, ArcHold, Shape]

_KINDS: dict[str, type] = {
    "Fill": Fill,
    "Flash": Flash,
    "Pulse": Pulse,
    "Chase": Chase,
    "Wipe": Wipe,
    "ArcHold": ArcHold,
    "Shape": Shape,
}


@dataclass(frozen=True)
class Track:
    """A primitive active over [start_ms, end_ms)."""

    start_ms: int
    end_ms: int
    primitive: Primitive

    def __post_init__(self) -> None:
        if self.start_ms < 0 or self.end_ms <= self.start_ms:
            raise AnimationError(
                f"track window [{self.start_ms}, {self.end_ms}) is not valid"
            )

    def active_at(self, t_ms: int) -> bool:
        return self.start_ms <= t_ms < self.end_ms


@dataclass(frozen=True)
class LucemeDef:
    name: str
    duration_ms: int
    loop: bool
    tracks: tuple[Track, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.name or any(c.isspace() for c in self.name):
            raise AnimationError(f"luceme name {self.name!r} must be non-empty, no spaces")
        if self.duration_ms <= 0:
            raise AnimationError("duration_ms must be > 0")
        object.__setattr__(self, "tracks", tuple(self.tracks))
        for tr in self.tracks:
            if tr.end_ms > self.duration_ms:
                raise AnimationError(
                    f"track [{tr.start_ms}, {tr.end_ms}) exceeds duration "
                    f"{self.duration_ms}"
                )


def sample(ldef: LucemeDef, t_ms: int, palette: SemanticPalette = DEFAULT_PALETTE) -> LedFrame:
    """The frame shown `t_ms` after the luceme starts.

    Looping definitions wrap; non-looping ones hold their final frame.
    """
    if t_ms < 0:
        raise AnimationError(f"sample time must be >= 0, got {t_ms}")
    if ldef.loop:
        t = t_ms % ldef.duration_ms
    else:
        t = min(t_ms, ldef.duration_ms - 1)
    buf = [OFF] * TOTAL_COUNT
    for tr in ldef.tracks:
        if not tr.active_at(t):
            continue
        prim = tr.primitive
        color = palette[prim.color]
        for addr, a in prim.alphas(t - tr.start_ms, color.a).items():
            if a > 0:
                buf[buffer_index(addr)] = color.with_alpha(a)
    return LedFrame(buf)


def frame_count(ldef: LucemeDef, fps: int, repeats: int) -> int:
    return repeats * ldef.duration_ms * fps // 1000


def stream(
    ldef: LucemeDef,
    fps: int = 30,
    repeats: int = 1,
    palette: SemanticPalette = DEFAULT_PALETTE,
) -> Iterator[LedFrame]:
    """Frames at t = k*1000/fps for k = 0 .. repeats*duration*fps/1000 - 1."""
    if not isinstance(fps, int) or not MIN_FPS <= fps <= MAX_FPS:
        raise AnimationError(f"fps must be an int in {MIN_FPS}..{MAX_FPS}, got {fps!r}")
    if not isinstance(repeats, int) or repeats < 1:
        raise AnimationError(f"repeats must be an int >= 1, got {repeats!r}")
    for k in range(frame_count(ldef, fps, repeats)):
        yield sample(ldef, (k * 1000 // fps) % ldef.duration_ms, palette)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_RING_WORDS = {"Outer": SCOPE_OUTER, "Inner": SCOPE_INNER, "Both": SCOPE_BOTH}
_RING_NAMES = {v: k for k, v in _RING_WORDS.items()}


def _fmt_num(v: float) -> str:
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _parse_leds(text: str, line_no: int) -> tuple[LedAddress, ...]:
    out = []
    for token in text.split(","):
        token = token.strip()
        if len(token) < 2 or token[0] not in "OI":
            raise LucemeParseError(
                f"line {line_no}: LED {token!r} must look like O3 or I12"
            )
        ring = Ring.OUTER if token[0] == "O" else Ring.INNER
        try:
            out.append(LedAddress(ring, int(token[1:])))
        except ValueError as exc:
            raise LucemeParseError(f"line {line_no}: bad LED {token!r}: {exc}") from None
    return tuple(out)


def _leds_text(leds: tuple[LedAddress, ...]) -> str:
    return ",".join(
        ("O" if a.ring is Ring.OUTER else "I") + str(a.index) for a in leds
    )


def _kv_pairs(tokens: list[str], line_no: int) -> dict[str, str]:
    pairs = {}
    for tok in tokens:
        if "=" not in tok:
            raise LucemeParseError(f"line {line_no}: expected key=value, got {tok!r}")
        k, _, v = tok.partition("=")
        if k in pairs:
            raise LucemeParseError(f"line {line_no}: duplicate parameter {k!r}")
        pairs[k] = v
    return pairs


_REQUIRED = object()


def _take(pairs: dict[str, str], key: str, line_no: int, conv, default=_REQUIRED):
    if key not in pairs:
        if default is _REQUIRED:
            raise LucemeParseError(f"line {line_no}: missing parameter {key!r}")
        return default
    raw = pairs.pop(key)
    try:
        return conv(raw)
    except (ValueError, TypeError):
        raise LucemeParseError(f"line {line_no}: bad value for {key}: {raw!r}") from None


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(raw)


def parse_luceme(
    text: str, palette: SemanticPalette = DEFAULT_PALETTE
) -> LucemeDef:
    """Parse one definition; errors name the offending line."""
    name = None
    duration = None
    loop = None
    tracks: list[Track] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "luceme":
            if name is not None:
                raise LucemeParseError(f"line {line_no}: second luceme header")
            if len(tokens) < 2:
                raise LucemeParseError(f"line {line_no}: luceme needs a name")
            name = tokens[1]
            pairs = _kv_pairs(tokens[2:], line_no)
            duration = _take(pairs, "duration", line_no, int)
            loop = _take(pairs, "loop", line_no, _parse_bool)
            if pairs:
                raise LucemeParseError(
                    f"line {line_no}: unknown parameter {next(iter(pairs))!r}"
                )
        elif tokens[0] == "track":
            if name is None:
                raise LucemeParseError(f"line {line_no}: track before luceme header")
            if len(tokens) < 3:
                raise LucemeParseError(f"line {line_no}: track needs a window and kind")
            window = tokens[1]
            if ".." not in window:
                raise LucemeParseError(
                    f"line {line_no}: window must be start..end, got {window!r}"
                )
            lo, _, hi = window.partition("..")
            try:
                start_ms, end_ms = int(lo), int(hi)
            except ValueError:
                raise LucemeParseError(
                    f"line {line_no}: window bounds must be integers"
                ) from None
            if end_ms > duration:
                raise LucemeParseError(
                    f"line {line_no}: track [{start_ms}, {end_ms}) exceeds "
                    f"duration {duration}"
                )
            kind = tokens[2]
            if kind not in _KINDS:
                raise LucemeParseError(f"line {line_no}: unknown kind {kind!r}")
            pairs = _kv_pairs(tokens[3:], line_no)
            try:
                prim = _build_primitive(kind, pairs, line_no, palette)
                tracks.append(Track(start_ms, end_ms, prim))
            except AnimationError as exc:
                if isinstance(exc, LucemeParseError):
                    raise
                raise LucemeParseError(f"line {line_no}: {exc}") from None
        else:
            raise LucemeParseError(f"line {line_no}: unknown directive {tokens[0]!r}")
    if name is None:
        raise LucemeParseError("no luceme header found")
    try:
        return LucemeDef(name, duration, loop, tuple(tracks))
    except AnimationError as exc:
        raise LucemeParseError(str(exc)) from None


def _build_primitive(
    kind: str, pairs: dict[str, str], line_no: int, palette: SemanticPalette
) -> Primitive:
    color = _take(pairs, "color", line_no, str)
    if color not in palette:
        raise LucemeParseError(f"line {line_no}: unknown palette name {color!r}")
    alpha = _take(pairs, "alpha", line_no, int, default=None)
    if kind == "Shape":
        leds = _parse_leds(_take(pairs, "leds", line_no, str), line_no)
        pairs.pop("ring", None)  # implied by the set
        prim: Primitive = Shape(leds=leds, color=color, alpha=alpha)
    else:
        ring_word = _take(pairs, "ring", line_no, str)
        if ring_word not in _RING_WORDS:
            raise LucemeParseError(f"line {line_no}: ring must be Outer, Inner or Both")
        ring = _RING_WORDS[ring_word]
        if kind == "Fill":
            prim = Fill(ring, color, alpha)
        elif kind == "Flash":
            prim = Flash(
                ring, color,
                on_ms=_take(pairs, "on", line_no, int),
                off_ms=_take(pairs, "off", line_no, int),
                alpha=alpha,
            )
        elif kind == "Pulse":
            if alpha is not None:
                raise LucemeParseError(f"line {line_no}: Pulse computes its own alpha")
            prim = Pulse(
                ring, color,
                period_ms=_take(pairs, "period", line_no, int),
                min_alpha=_take(pairs, "min_alpha", line_no, int),
                max_alpha=_take(pairs, "max_alpha", line_no, int),
            )
        elif kind == "Chase":
            prim = Chase(
                ring, color,
                segments=_take(pairs, "segments", line_no, int),
                seglen=_take(pairs, "seglen", line_no, int),
                speed_dps=_take(pairs, "speed", line_no, float),
                direction=_take(pairs, "dir", line_no, str),
                alpha=alpha,
            )
        elif kind == "Wipe":
            prim = Wipe(
                ring, color,
                start_deg=_take(pairs, "start", line_no, float),
                end_deg=_take(pairs, "end", line_no, float),
                sweep_ms=_take(pairs, "sweep", line_no, int),
                alpha=alpha,
            )
        elif kind == "ArcHold":
            prim = ArcHold(
                ring, color,
                center_deg=_take(pairs, "center", line_no, float),
                half_width_deg=_take(pairs, "half_width", line_no, float),
                alpha=alpha,
            )
        else:  # pragma: no cover - guarded by _KINDS lookup
            raise LucemeParseError(f"line {line_no}: unknown kind {kind!r}")
    if pairs:
        raise LucemeParseError(
            f"line {line_no}: unknown parameter {next(iter(pairs))!r} for {kind}"
        )
    return prim


def serialize_luceme(ldef: LucemeDef) -> str:
    """Canonical text for a definition; parse_luceme inverts it exactly."""
    lines = [
        f"luceme {ldef.name} duration={ldef.duration_ms} "
        f"loop={'true' if ldef.loop else 'false'}"
    ]
    for tr in ldef.tracks:
        p = tr.primitive
        parts = [f"track {tr.start_ms}..{tr.end_ms}"]
        if isinstance(p, Shape):
            parts.append("Shape")
            parts.append(f"color={p.color}")
            parts.append(f"leds={_leds_text(p.leds)}")
        else:
            kind = type(p).__name__
            parts.append(kind)
            parts.append(f"ring={_RING_NAMES[p.ring]}")
            parts.append(f"color={p.color}")
            if isinstance(p, Flash):
                parts.append(f"on={p.on_ms}")
                parts.append(f"off={p.off_ms}")
            elif isinstance(p, Pulse):
                parts.append(f"period={p.period_ms}")
                parts.append(f"min_alpha={p.min_alpha}")
                parts.append(f"max_alpha={p.max_alpha}")
            elif isinstance(p, Chase):
                parts.append(f"segments={p.segments}")
                parts.append(f"seglen={p.seglen}")
                parts.append(f"speed={_fmt_num(p.speed_dps)}")
                parts.append(f"dir={p.direction}")
            elif isinstance(p, Wipe):
                parts.append(f"start={_fmt_num(p.start_deg)}")
                parts.append(f"end={_fmt_num(p.end_deg)}")
                parts.append(f"sweep={p.sweep_ms}")
            elif isinstance(p, ArcHold):
                parts.append(f"center={_fmt_num(p.center_deg)}")
                parts.append(f"half_width={_fmt_num(p.half_width_deg)}")
        if not isinstance(p, Pulse) and p.alpha is not None:
            parts.append(f"alpha={p.alpha}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
