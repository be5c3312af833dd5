"""The shipped luceme catalog.

Sixteen active lucemes cover the operator vocabulary (commands, warnings
and status), and a small ocular set animates the eye itself (steady gaze,
blink, squint, wide eyes, directed gaze).  Color assignments follow the
meaning classes: yellow for directional instructions, red for problems,
blue for information, purple for the vehicle itself.

Constraints the catalog keeps deliberately:

* FollowMe and FollowYou share one outer-ring chase and differ only in the
  inner ring color (purple for "follow the vehicle", blue for "the vehicle
  follows you").
* Danger and Attention flash the same 9-LED outer symbol at 4 Hz and
  differ only in color (red versus blue).
* WaitCMD and Malfunction breathe with the same 1.5 s raised-cosine pulse,
  blue versus red.
* BatteryLevel lights round(level * 24) outer LEDs clockwise from the top
  in blue over a dimmed purple inner ring; level 0.5 is exactly half the
  ring.

Definitions ship as text files in `catalog_data/`, one per luceme, loaded
on first use; the builders in this module are the source the files were
generated from, and a test keeps the two in lockstep.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .animation import (
    ArcHold,
    Chase,
    Fill,
    Flash,
    LucemeDef,
    Pulse,
    Shape,
    Track,
    Wipe,
    parse_luceme,
    serialize_luceme,
    stream,
)
from .frames import DEFAULT_PALETTE, SemanticPalette
from .gaze import (
    DIM_ALPHA,
    ENTRY_MS,
    GAZE_STEP_DEG,
    GazeError,
    PUPIL_HALF_WIDTH,
    pupil_alphas,
)
from .geometry import OUTER_COUNT, LedAddress, Ring

DEFAULT_DURATION_MS = 2000
PULSE_DURATION_MS = 3000
PULSE_PERIOD_MS = 1500
DEFAULT_BATTERY_LEVEL = 0.5

ACTIVE_IDS = (
    "Affirmative", "Negative", "Danger", "Attention", "Malfunction",
    "WaitCMD", "GoLeft", "GoRight", "GoUp", "GoDown", "WhichWay",
    "Stay", "ComeHere", "FollowMe", "FollowYou", "BatteryLevel",
)

OCULAR_IDS = ("Steady", "Blink", "Squint", "EyesWide", "Gaze")

ACTIVE_GLOSSES = {
    "Affirmative": "Yes, okay.",
    "Negative": "No.",
    "Danger": "Danger in the area.",
    "Attention": "Pay attention to the vehicle.",
    "Malfunction": "Internal malfunction.",
    "WaitCMD": "Waiting for instructions.",
    "GoLeft": "Go left / vehicle going left.",
    "GoRight": "Go right / vehicle going right.",
    "GoUp": "Go up / vehicle going up.",
    "GoDown": "Go down / vehicle going down.",
    "WhichWay": "Asking for directions.",
    "Stay": "Stay where you are.",
    "ComeHere": "Come to the vehicle.",
    "FollowMe": "You can follow the vehicle.",
    "FollowYou": "The vehicle will follow you.",
    "BatteryLevel": "Battery level readout.",
}

OCULAR_GLOSSES = {
    "Steady": "Neutral open eye.",
    "Blink": "Blink.",
    "Squint": "Squint.",
    "EyesWide": "Eyes wide open.",
    "Gaze": "Look toward a direction.",
}

# Which palette name should carry the most lit mass for each active luceme.
EXPECTED_DOMINANT = {
    "Affirmative": "Affirm-Green",
    "Negative": "Problem-Red",
    "Danger": "Problem-Red",
    "Attention": "Information-Blue",
    "Malfunction": "Problem-Red",
    "WaitCMD": "Information-Blue",
    "GoLeft": "Directional-Yellow",
    "GoRight": "Directional-Yellow",
    "GoUp": "Directional-Yellow",
    "GoDown": "Directional-Yellow",
    "WhichWay": "Directional-Yellow",
    "Stay": "Directional-Yellow",
    "ComeHere": "Directional-Yellow",
    "FollowMe": "AUV-Purple",
    "FollowYou": "Information-Blue",
    "BatteryLevel": "Information-Blue",
}


class CatalogError(ValueError):
    """Raised for unknown luceme ids or bad parameters."""


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

# Nine outer LEDs make a triangle-like warning symbol: three vertex clusters
# at the top and the two lower corners.
WARNING_SHAPE = tuple(
    LedAddress(Ring.OUTER, i) for i in (5, 6, 7, 13, 14, 15, 21, 22, 23)
)

_FOLLOW_CHASE = Chase(
    ring="outer", color="Directional-Yellow",
    segments=2, seglen=4, speed_dps=180.0, direction="ccw",
)


def _double_flash(name: str, color: str) -> LucemeDef:
    return LucemeDef(
        name=name, duration_ms=DEFAULT_DURATION_MS, loop=True,
        tracks=(Track(0, 1000, Flash("both", color, on_ms=250, off_ms=250)),),
    )


def _warning_symbol(name: str, color: str) -> LucemeDef:
    # 4 Hz flash written out as explicit windows so the lit set is a plain
    # Shape and both warning lucemes stay frame-for-frame aligned.
    tracks = [
        Track(k * 250, k * 250 + 125, Shape(WARNING_SHAPE, color))
        for k in range(DEFAULT_DURATION_MS // 250)
    ]
    return LucemeDef(name, DEFAULT_DURATION_MS, True, tuple(tracks))


def _breathing(name: str, color: str) -> LucemeDef:
    return LucemeDef(
        name, PULSE_DURATION_MS, True,
        (Track(0, PULSE_DURATION_MS,
               Pulse("both", color, period_ms=PULSE_PERIOD_MS,
                     min_alpha=0, max_alpha=255)),),
    )


def _go(name: str, target_deg: float) -> LucemeDef:
    """Two wipes close in on the target from its antipode; a small inner
    chevron marks the side being pointed at."""
    antipode = (target_deg + 180.0) % 360.0
    return LucemeDef(
        name, DEFAULT_DURATION_MS, True,
        (
            Track(0, DEFAULT_DURATION_MS,
                  Wipe("outer", "Directional-Yellow",
                       start_deg=antipode, end_deg=antipode + 180.0, sweep_ms=1200)),
            Track(0, DEFAULT_DURATION_MS,
                  Wipe("outer", "Directional-Yellow",
                       start_deg=antipode, end_deg=antipode - 180.0, sweep_ms=1200)),
            Track(0, DEFAULT_DURATION_MS,
                  ArcHold("inner", "Directional-Yellow",
                          center_deg=target_deg, half_width_deg=22.5)),
        ),
    )


def _which_way() -> LucemeDef:
    left = ArcHold("outer", "Directional-Yellow", center_deg=180.0, half_width_deg=45.0)
    right = ArcHold("outer", "Directional-Yellow", center_deg=0.0, half_width_deg=45.0)
    return LucemeDef(
        "WhichWay", DEFAULT_DURATION_MS, True,
        (
            Track(0, 500, left),
            Track(500, 1000, right),
            Track(1000, 1500, left),
            Track(1500, 2000, right),
        ),
    )


def _stay() -> LucemeDef:
    return LucemeDef(
        "Stay", DEFAULT_DURATION_MS, True,
        (Track(0, DEFAULT_DURATION_MS, Fill("outer", "Directional-Yellow")),),
    )


def _come_here() -> LucemeDef:
    # Light collapses inward: outer ring, then inner ring, then dark.
    return LucemeDef(
        "ComeHere", DEFAULT_DURATION_MS, True,
        (
            Track(0, 700, Fill("outer", "Directional-Yellow")),
            Track(700, 1400, Fill("inner", "Directional-Yellow")),
        ),
    )


def _follow(name: str, inner_color: str) -> LucemeDef:
    return LucemeDef(
        name, DEFAULT_DURATION_MS, True,
        (
            Track(0, DEFAULT_DURATION_MS, Fill("inner", inner_color)),
            Track(0, DEFAULT_DURATION_MS, _FOLLOW_CHASE),
        ),
    )


def battery_led_indices(level: float) -> list[int]:
    """Outer indices lit for a charge level, clockwise from the top."""
    if not 0.0 <= level <= 1.0:
        raise CatalogError(f"battery level must be in [0, 1], got {level!r}")
    count = int(level * OUTER_COUNT + 0.5)
    top = OUTER_COUNT // 4  # index at 90 degrees
    return [(top - i) % OUTER_COUNT for i in range(count)]


def _battery(level: float) -> LucemeDef:
    indices = battery_led_indices(level)
    tracks = [
        Track(0, DEFAULT_DURATION_MS, Fill("inner", "AUV-Purple", alpha=100)),
    ]
    if indices:
        leds = tuple(LedAddress(Ring.OUTER, i) for i in indices)
        tracks.append(
            Track(0, DEFAULT_DURATION_MS, Shape(leds, "Information-Blue"))
        )
    return LucemeDef("BatteryLevel", DEFAULT_DURATION_MS, True, tuple(tracks))


def build_active(luceme_id: str, level: float = DEFAULT_BATTERY_LEVEL) -> LucemeDef:
    """Construct an active luceme definition from scratch."""
    if luceme_id == "Affirmative":
        return _double_flash("Affirmative", "Affirm-Green")
    if luceme_id == "Negative":
        return _double_flash("Negative", "Problem-Red")
    if luceme_id == "Danger":
        return _warning_symbol("Danger", "Problem-Red")
    if luceme_id == "Attention":
        return _warning_symbol("Attention", "Information-Blue")
    if luceme_id == "Malfunction":
        return _breathing("Malfunction", "Problem-Red")
    if luceme_id == "WaitCMD":
        return _breathing("WaitCMD", "Information-Blue")
    if luceme_id == "GoLeft":
        return _go("GoLeft", 180.0)
    if luceme_id == "GoRight":
        return _go("GoRight", 0.0)
    if luceme_id == "GoUp":
        return _go("GoUp", 90.0)
    if luceme_id == "GoDown":
        return _go("GoDown", 270.0)
    if luceme_id == "WhichWay":
        return _which_way()
    if luceme_id == "Stay":
        return _stay()
    if luceme_id == "ComeHere":
        return _come_here()
    if luceme_id == "FollowMe":
        return _follow("FollowMe", "AUV-Purple")
    if luceme_id == "FollowYou":
        return _follow("FollowYou", "Information-Blue")
    if luceme_id == "BatteryLevel":
        return _battery(level)
    raise CatalogError(f"unknown active luceme {luceme_id!r}")


def _shape_tracks(alpha_map: dict[int, int], t0: int, t1: int) -> list[Track]:
    """One Shape track per distinct alpha so graded pupils stay declarative."""
    by_alpha: dict[int, list[int]] = {}
    for idx, a in alpha_map.items():
        by_alpha.setdefault(a, []).append(idx)
    tracks = []
    for a in sorted(by_alpha):
        leds = tuple(LedAddress(Ring.INNER, i) for i in sorted(by_alpha[a]))
        tracks.append(Track(t0, t1, Shape(leds, "Iris-Pink", alpha=a)))
    return tracks


_GAZE_ENTRY_STEP_MS = 30


def build_gaze(angle_deg: int) -> LucemeDef:
    """A gaze luceme: sweep onto the target, then hold it.

    Non-looping so the held pupil stays put however long the mode runs;
    the static section reproduces render_gaze exactly.
    """
    if angle_deg % GAZE_STEP_DEG != 0 or not 0 <= angle_deg < 360:
        raise GazeError(
            f"gaze must be a multiple of {GAZE_STEP_DEG} in [0, 330], got {angle_deg!r}"
        )
    tracks = [
        Track(0, DEFAULT_DURATION_MS, Fill("outer", "Sclera-White")),
        Track(0, DEFAULT_DURATION_MS, Fill("inner", "Iris-Pink", alpha=DIM_ALPHA)),
    ]
    for t0 in range(0, ENTRY_MS, _GAZE_ENTRY_STEP_MS):
        width = 180.0 - (180.0 - PUPIL_HALF_WIDTH) * (t0 / ENTRY_MS)
        tracks.extend(
            _shape_tracks(pupil_alphas(angle_deg, width),
                          t0, t0 + _GAZE_ENTRY_STEP_MS)
        )
    tracks.extend(
        _shape_tracks(pupil_alphas(angle_deg), ENTRY_MS, DEFAULT_DURATION_MS)
    )
    return LucemeDef(f"Gaze-{angle_deg}", DEFAULT_DURATION_MS, False, tuple(tracks))


def build_ocular(luceme_id: str, gaze_deg: int | None = None) -> LucemeDef:
    """Construct an ocular luceme definition from scratch."""
    steady_tracks = (
        Track(0, DEFAULT_DURATION_MS, Fill("outer", "Sclera-White")),
        Track(0, DEFAULT_DURATION_MS, Fill("inner", "Iris-Pink")),
    )
    if luceme_id == "Steady":
        return LucemeDef("Steady", DEFAULT_DURATION_MS, True, steady_tracks)
    if luceme_id == "Blink":
        return LucemeDef(
            "Blink", DEFAULT_DURATION_MS, True,
            (
                Track(0, 850, Fill("outer", "Sclera-White")),
                Track(0, 850, Fill("inner", "Iris-Pink")),
                Track(1150, 2000, Fill("outer", "Sclera-White")),
                Track(1150, 2000, Fill("inner", "Iris-Pink")),
            ),
        )
    if luceme_id == "Squint":
        return LucemeDef(
            "Squint", DEFAULT_DURATION_MS, True,
            (
                Track(0, 2000, Fill("inner", "Iris-Pink")),
                Track(0, 2000, ArcHold("outer", "Sclera-White",
                                       center_deg=0.0, half_width_deg=37.5,
                                       alpha=120)),
                Track(0, 2000, ArcHold("outer", "Sclera-White",
                                       center_deg=180.0, half_width_deg=37.5,
                                       alpha=120)),
            ),
        )
    if luceme_id == "EyesWide":
        return LucemeDef(
            "EyesWide", DEFAULT_DURATION_MS, True,
            (
                Track(0, 2000, Fill("inner", "Iris-Pink")),
                Track(0, 600, Fill("outer", "Sclera-White", alpha=255)),
                Track(600, 2000, Fill("outer", "Sclera-White")),
            ),
        )
    if luceme_id == "Gaze":
        if gaze_deg is None:
            raise CatalogError("Gaze needs an angle")
        return build_gaze(gaze_deg)
    raise CatalogError(f"unknown ocular luceme {luceme_id!r}")


# ---------------------------------------------------------------------------
# Shipped files
# ---------------------------------------------------------------------------

_OCULAR_FILE_IDS = ("Steady", "Blink", "Squint", "EyesWide")
_FILE_IDS = ACTIVE_IDS + _OCULAR_FILE_IDS


def _build_by_id(luceme_id: str) -> LucemeDef:
    if luceme_id in ACTIVE_IDS:
        return build_active(luceme_id)
    return build_ocular(luceme_id)


def write_catalog_files(directory: str | Path) -> list[Path]:
    """Serialize the default catalog, one file per luceme."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for luceme_id in _FILE_IDS:
        path = directory / f"{luceme_id}.luceme"
        path.write_text(serialize_luceme(_build_by_id(luceme_id)), encoding="utf-8")
        written.append(path)
    return written


class Catalog:
    """The loaded luceme set the player and CLI draw from."""

    def __init__(self, active: dict[str, LucemeDef], ocular: dict[str, LucemeDef]):
        missing = [i for i in ACTIVE_IDS if i not in active]
        if missing:
            raise CatalogError(f"catalog is missing active lucemes: {missing}")
        missing = [i for i in _OCULAR_FILE_IDS if i not in ocular]
        if missing:
            raise CatalogError(f"catalog is missing ocular lucemes: {missing}")
        self._active = dict(active)
        self._ocular = dict(ocular)

    def active_def(self, luceme_id: str,
                   level: float | None = None) -> LucemeDef:
        if luceme_id not in self._active:
            raise CatalogError(f"unknown active luceme {luceme_id!r}")
        if luceme_id == "BatteryLevel" and level is not None:
            return _battery(level)
        if level is not None:
            raise CatalogError(f"{luceme_id} takes no level parameter")
        return self._active[luceme_id]

    def ocular_def(self, luceme_id: str,
                   gaze_deg: int | None = None) -> LucemeDef:
        if luceme_id == "Gaze":
            return build_ocular("Gaze", gaze_deg)
        if luceme_id not in self._ocular:
            raise CatalogError(f"unknown ocular luceme {luceme_id!r}")
        return self._ocular[luceme_id]

    @classmethod
    def from_dir(cls, directory: str | Path,
                 palette: SemanticPalette = DEFAULT_PALETTE) -> "Catalog":
        directory = Path(directory)
        active: dict[str, LucemeDef] = {}
        ocular: dict[str, LucemeDef] = {}
        for path in sorted(directory.glob("*.luceme")):
            ldef = parse_luceme(path.read_text(encoding="utf-8"), palette)
            base = ldef.name.split("-", 1)[0]
            if ldef.name in ACTIVE_IDS:
                active[ldef.name] = ldef
            elif ldef.name in OCULAR_IDS or base == "Gaze":
                ocular[ldef.name] = ldef
            else:
                raise CatalogError(
                    f"{path.name}: luceme {ldef.name!r} is not in the vocabulary"
                )
        return cls(active, ocular)


_default_catalog: Catalog | None = None


def default_catalog() -> Catalog:
    """The catalog parsed from the files shipped with the package."""
    global _default_catalog
    if _default_catalog is None:
        data = resources.files(__package__) / "catalog_data"
        with resources.as_file(data) as directory:
            _default_catalog = Catalog.from_dir(directory)
    return _default_catalog


# ---------------------------------------------------------------------------
# Conformance helpers
# ---------------------------------------------------------------------------

def color_mass(ldef: LucemeDef, palette: SemanticPalette = DEFAULT_PALETTE,
               fps: int = 30) -> dict[str, int]:
    """Alpha-weighted lit pixel mass per palette name over one pass."""
    mass: dict[str, int] = {}
    for frame in stream(ldef, fps=fps, repeats=1, palette=palette):
        for p in frame.pixels:
            if p.a > 0:
                name = palette.name_of_rgb(p.r, p.g, p.b)
                if name is not None:
                    mass[name] = mass.get(name, 0) + p.a
    return mass


def dominant_color(ldef: LucemeDef, palette: SemanticPalette = DEFAULT_PALETTE,
                   fps: int = 30) -> str | None:
    mass = color_mass(ldef, palette, fps)
    if not mass:
        return None
    return max(mass, key=mass.get)
