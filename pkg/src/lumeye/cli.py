"""Command line entry points.

    lumeye list                     show the luceme vocabulary
    lumeye play ID [...]            play headless, write a frame log
    lumeye export ID --out DIR      write a luceme as numbered PPM frames
    lumeye serve [...]              run the HTTP service with embedded eyes
    lumeye replay LOG --out DIR     rasterize a frame log
    lumeye score CSV [...]          score study responses
    lumeye decode-gaze PATH         estimate gaze from a .ppm or .hrlog

Environment: LUMEYE_LISTEN overrides the serve address, LUMEYE_CATALOG
points every command at a directory of luceme definition files.
"""

from __future__ import annotations

import argparse
import os
import signal
import sys
import time
from pathlib import Path

from .animation import stream
from .catalog import (
    ACTIVE_GLOSSES,
    ACTIVE_IDS,
    Catalog,
    CatalogError,
    OCULAR_GLOSSES,
    default_catalog,
)
from .driver import DriverSim, IMAGE_SIZE, led_center_px, render_ppm
from .frames import PaletteError
from .gaze import DIM_ALPHA, GazeError, estimate_gaze, quantize_gaze
from .geometry import INNER_COUNT, LedAddress, Ring, led_angle
from .metrics import (
    MetricsError,
    adjust_time,
    parse_rating_table,
    parse_responses,
    report_kv,
    report_text,
    summarize,
)
from .player import Mode, Player, PlayerError
from .protocol import (
    LOG_EXTENSION,
    ProtocolError,
    read_framelog,
    write_framelog,
)
from .service import build_service

_ERRORS = (
    CatalogError, PlayerError, ProtocolError, MetricsError, PaletteError,
    GazeError, ValueError, OSError,
)


def _load_catalog(args) -> Catalog:
    path = getattr(args, "catalog", None) or os.environ.get("LUMEYE_CATALOG")
    if path:
        return Catalog.from_dir(path)
    return default_catalog()


def _resolve_mode(luceme_id: str, args) -> tuple[Mode, int]:
    """Map a CLI luceme id (+flags) to a mode and its definition length."""
    cat = _load_catalog(args)
    gaze = getattr(args, "gaze", None)
    level = getattr(args, "level", None)
    if luceme_id in ACTIVE_IDS:
        ldef = cat.active_def(luceme_id, level=level)
        return Mode.active(luceme_id, level=level), ldef.duration_ms
    if luceme_id == "Gaze" or gaze is not None:
        if gaze is None:
            raise CatalogError("Gaze needs --gaze DEG")
        angle = quantize_gaze(gaze)
        ldef = cat.ocular_def("Gaze", gaze_deg=angle)
        return Mode.ocular(gaze_deg=angle), ldef.duration_ms
    if luceme_id in OCULAR_GLOSSES:
        ldef = cat.ocular_def(luceme_id)
        return Mode.ocular(luceme_id=luceme_id), ldef.duration_ms
    raise CatalogError(f"unknown luceme {luceme_id!r}")


def _resolve_def(luceme_id: str, args):
    cat = _load_catalog(args)
    gaze = getattr(args, "gaze", None)
    level = getattr(args, "level", None)
    if luceme_id in ACTIVE_IDS:
        return cat.active_def(luceme_id, level=level)
    if luceme_id == "Gaze" or gaze is not None:
        if gaze is None:
            raise CatalogError("Gaze needs --gaze DEG")
        return cat.ocular_def("Gaze", gaze_deg=quantize_gaze(gaze))
    if luceme_id in OCULAR_GLOSSES:
        return cat.ocular_def(luceme_id)
    raise CatalogError(f"unknown luceme {luceme_id!r}")


# -- subcommands -------------------------------------------------------------

def cmd_list(args) -> int:
    cat = _load_catalog(args)
    print("active lucemes:")
    for luceme_id in ACTIVE_IDS:
        ldef = cat.active_def(luceme_id)
        print(f"  {luceme_id:<14} {ldef.duration_ms:>5} ms  {ACTIVE_GLOSSES[luceme_id]}")
    print("ocular lucemes:")
    for luceme_id, gloss in OCULAR_GLOSSES.items():
        note = " (use --gaze DEG)" if luceme_id == "Gaze" else ""
        print(f"  {luceme_id:<14} {gloss}{note}")
    return 0


def cmd_play(args) -> int:
    mode, duration_ms = _resolve_mode(args.luceme, args)
    sim = DriverSim()
    player = Player(endpoint=sim, fps=args.fps,
                    catalog=_load_catalog(args), record=True)
    player.set_mode(mode)
    ticks = args.repeats * duration_ms * args.fps // 1000
    player.run(ticks)
    out = Path(args.out) if args.out else Path(f"{args.luceme}{LOG_EXTENSION}")
    with open(out, "wb") as fh:
        count = write_framelog(fh, player.recording())
    print(f"wrote {count} messages ({ticks} frames x 2 eyes) to {out}")
    return 0


def cmd_export(args) -> int:
    if args.format != "ppm-seq":
        raise ValueError(f"unknown export format {args.format!r}")
    ldef = _resolve_def(args.luceme, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    for k, frame in enumerate(stream(ldef, fps=args.fps, repeats=args.repeats)):
        (out / f"frame_{k:05d}.ppm").write_bytes(render_ppm([frame]))
        n += 1
    print(f"wrote {n} frames to {out}")
    return 0


def cmd_serve(args) -> int:
    listen = args.listen or os.environ.get("LUMEYE_LISTEN") or "127.0.0.1:8321"
    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise ValueError(f"listen address must be HOST:PORT, got {listen!r}")
    stop = {"flag": False}

    def _sigint(signum, frame):
        stop["flag"] = True

    # handlers go in before the banner: once the address is announced,
    # a signal must never hit the default disposition
    signal.signal(signal.SIGINT, _sigint)
    signal.signal(signal.SIGTERM, _sigint)
    service = build_service(
        fps=args.fps,
        assets_dir=args.assets,
        catalog=_load_catalog(args),
        record=bool(args.record),
    )
    bound_host, bound_port = service.start(host, int(port_text))
    print(f"serving on http://{bound_host}:{bound_port}/ (Ctrl-C to stop)",
          flush=True)
    try:
        while not stop["flag"]:
            time.sleep(0.2)
    finally:
        service.stop()
        if args.record:
            with open(args.record, "wb") as fh:
                count = write_framelog(fh, service.player.recording())
            print(f"wrote {count} messages to {args.record}")
    return 0


def cmd_replay(args) -> int:
    with open(args.log, "rb") as fh:
        records, truncated = read_framelog(fh)
    if truncated:
        print("warning: log was truncated mid-record; replaying what's complete",
              file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sim = DriverSim()
    # render one image per timestamp group so each shows a settled pair
    groups: list[tuple[int, list]] = []
    for ts, msg in records:
        if groups and groups[-1][0] == ts:
            groups[-1][1].append(msg)
        else:
            groups.append((ts, [msg]))
    for k, (ts, msgs) in enumerate(groups):
        for msg in msgs:
            sim.apply(msg, at_ms=ts)
        (out / f"frame_{k:05d}.ppm").write_bytes(sim.render_image("both"))
    print(f"rendered {len(groups)} frames ({len(records)} messages) to {out}")
    return 0


def cmd_score(args) -> int:
    records = parse_responses(Path(args.responses).read_text(encoding="utf-8"))
    if args.swim_time is not None:
        records = adjust_time(records, args.swim_time)
    table = None
    if args.ratings:
        table = parse_rating_table(Path(args.ratings).read_text(encoding="utf-8"))
    summary = summarize(records, rating_table=table)
    print(report_text(summary), end="")
    print("---")
    print(report_kv(summary), end="")
    return 0


def _frame_from_ppm(data: bytes):
    """Rebuild enough of a frame from a rendered panel to decode gaze.

    Samples each inner LED's disc center; with the default palette the red
    channel of a pupil pixel equals its alpha, so weights survive the trip
    through the image.
    """
    parts = data.split(None, 4)
    if len(parts) < 5 or parts[0] != b"P6" or parts[3] != b"255":
        raise ValueError("not an 8-bit binary PPM")
    width, height = int(parts[1]), int(parts[2])
    raster = parts[4]
    if len(raster) < width * height * 3:
        raise ValueError("PPM raster is shorter than its header promises")
    if height != IMAGE_SIZE or width % IMAGE_SIZE != 0:
        raise ValueError(
            f"expected {IMAGE_SIZE}px eye panels, got {width}x{height}"
        )
    weights = []
    for i in range(INNER_COUNT):
        addr = LedAddress(Ring.INNER, i)
        x, y = led_center_px(addr)  # leftmost panel
        o = (y * width + x) * 3
        r, g, b = raster[o], raster[o + 1], raster[o + 2]
        if r > DIM_ALPHA and r > g and b > 0:
            weights.append((led_angle(addr), r))
    return weights


def cmd_decode_gaze(args) -> int:
    path = Path(args.path)
    if path.suffix == LOG_EXTENSION:
        with open(path, "rb") as fh:
            records, truncated = read_framelog(fh)
        if truncated:
            print("warning: log was truncated mid-record", file=sys.stderr)
        if not records:
            raise ValueError("log holds no messages")
        est = estimate_gaze(records[-1][1].frame)
    elif path.suffix == ".ppm":
        import math

        weights = _frame_from_ppm(path.read_bytes())
        if not weights:
            raise GazeError("no pupil pixels found in image")
        x = sum(w * math.cos(math.radians(a)) for a, w in weights)
        y = sum(w * math.sin(math.radians(a)) for a, w in weights)
        est = math.degrees(math.atan2(y, x)) % 360.0
    else:
        raise ValueError(f"decode-gaze reads .ppm or {LOG_EXTENSION}, got {path.suffix!r}")
    print(f"{est:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lumeye", description="dual-ring LED eye toolkit"
    )
    parser.add_argument("--catalog", help="directory of .luceme files "
                        "(or set LUMEYE_CATALOG)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="show the luceme vocabulary")

    p = sub.add_parser("play", help="play a luceme headless and write a frame log")
    p.add_argument("luceme")
    p.add_argument("--gaze", type=float, help="gaze angle for the Gaze luceme")
    p.add_argument("--level", type=float, help="battery level in [0, 1]")
    p.add_argument("--fps", type=int, default=30)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", help=f"frame log path (default <ID>{LOG_EXTENSION})")

    p = sub.add_parser("export", help="write a luceme as numbered PPM frames")
    p.add_argument("luceme")
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="ppm-seq", help="only ppm-seq for now")
    p.add_argument("--gaze", type=float)
    p.add_argument("--level", type=float)
    p.add_argument("--fps", type=int, default=30)
    p.add_argument("--repeats", type=int, default=1)

    p = sub.add_parser("serve", help="run the HTTP service with embedded eyes")
    p.add_argument("--listen", help="HOST:PORT (or set LUMEYE_LISTEN; "
                   "default 127.0.0.1:8321)")
    p.add_argument("--fps", type=int, default=30)
    p.add_argument("--assets", help="directory with the web console build")
    p.add_argument("--record", help="write the session frame log here on exit")

    p = sub.add_parser("replay", help="rasterize a frame log to PPM frames")
    p.add_argument("log")
    p.add_argument("--out", required=True)

    p = sub.add_parser("score", help="score a study response CSV")
    p.add_argument("responses")
    p.add_argument("--swim-time", type=float,
                   help="seconds to add to remote-display answers")
    p.add_argument("--ratings", help="CSV of rater count rows for agreement")

    p = sub.add_parser("decode-gaze", help="estimate gaze from a frame image or log")
    p.add_argument("path")

    return parser


_COMMANDS = {
    "list": cmd_list,
    "play": cmd_play,
    "export": cmd_export,
    "serve": cmd_serve,
    "replay": cmd_replay,
    "score": cmd_score,
    "decode-gaze": cmd_decode_gaze,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
