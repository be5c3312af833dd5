"""lumeye: a dual-ring LED eye for underwater human-robot signalling.

The package models the full pipeline from symbolic light signals
("lucemes") down to the byte stream a display driver consumes, plus a
simulated driver, an HTTP control service, and scoring tools for
comprehension studies.
"""

from .animation import (
    AnimationError,
    ArcHold,
    Chase,
    Fill,
    Flash,
    LucemeDef,
    LucemeParseError,
    Pulse,
    Shape,
    Track,
    Wipe,
    frame_count,
    parse_luceme,
    sample,
    serialize_luceme,
    stream,
)
from .catalog import (
    ACTIVE_GLOSSES,
    ACTIVE_IDS,
    Catalog,
    CatalogError,
    OCULAR_GLOSSES,
    OCULAR_IDS,
    default_catalog,
)
from .driver import DriverSim, EyeSnapshot, render_ppm, replay_into_sim, rotate_frame
from .frames import (
    ColorRGBA,
    DEFAULT_PALETTE,
    LedFrame,
    OFF,
    PaletteError,
    SemanticPalette,
    blank_frame,
    composite,
    solid_frame,
)
from .gaze import GazeError, estimate_gaze, quantize_gaze, render_gaze
from .geometry import (
    AddressError,
    INNER_COUNT,
    LedAddress,
    OUTER_COUNT,
    Ring,
    TOTAL_COUNT,
    arc,
    circular_distance,
    led_angle,
    nearest_led,
)
from .metrics import (
    FleissResult,
    MetricsError,
    ResponseRecord,
    fleiss_kappa,
    parse_responses,
    summarize,
)
from .player import Mode, Player, PlayerError, Subscription
from .protocol import (
    CorruptionError,
    DriverMessage,
    FormatError,
    ProtocolError,
    TruncationError,
    decode,
    encode,
    read_framelog,
    write_framelog,
)
from .service import PlayerService, build_service

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_GLOSSES",
    "ACTIVE_IDS",
    "AddressError",
    "AnimationError",
    "ArcHold",
    "Catalog",
    "CatalogError",
    "Chase",
    "ColorRGBA",
    "CorruptionError",
    "DEFAULT_PALETTE",
    "DriverMessage",
    "DriverSim",
    "EyeSnapshot",
    "Fill",
    "Flash",
    "FleissResult",
    "FormatError",
    "GazeError",
    "INNER_COUNT",
    "LedAddress",
    "LedFrame",
    "LucemeDef",
    "LucemeParseError",
    "MetricsError",
    "Mode",
    "OCULAR_GLOSSES",
    "OCULAR_IDS",
    "OFF",
    "OUTER_COUNT",
    "PaletteError",
    "Player",
    "PlayerError",
    "PlayerService",
    "ProtocolError",
    "Pulse",
    "ResponseRecord",
    "Ring",
    "SemanticPalette",
    "Shape",
    "Subscription",
    "TOTAL_COUNT",
    "Track",
    "TruncationError",
    "Wipe",
    "arc",
    "blank_frame",
    "build_service",
    "circular_distance",
    "composite",
    "decode",
    "default_catalog",
    "encode",
    "estimate_gaze",
    "fleiss_kappa",
    "frame_count",
    "led_angle",
    "nearest_led",
    "parse_luceme",
    "parse_responses",
    "quantize_gaze",
    "read_framelog",
    "render_gaze",
    "render_ppm",
    "replay_into_sim",
    "rotate_frame",
    "sample",
    "serialize_luceme",
    "solid_frame",
    "stream",
    "summarize",
    "write_framelog",
]
