"""Wire format between the controller and the eye driver.

Every message carries one complete frame for one eye.  Layout, all
multi-byte fields big-endian, 172 bytes total:

    offset  size  field
    0       2     magic 0x48 0x52 ("HR")
    2       1     version, currently 0x01
    3       1     eye id, 0 or 1
    4       4     sequence number, unsigned
    8       160   40 pixels * RGBA, outer ring 0..23 then inner 0..15
    168     4     CRC-32 (IEEE, as in zlib) over bytes 0..167

Decoding distinguishes three failure classes so callers can react
sensibly: TruncationError (too little data), FormatError (bad magic,
version, eye id or trailing bytes) and CorruptionError (CRC mismatch).

A frame log is a stream of timestamped messages:

    8 bytes   header "HRLOG\\0\\0\\1"
    repeated  8-byte unsigned timestamp in ms, then one 172-byte message

Pixels whose alpha is 0 are canonically zero in all channels; LedFrame
enforces that, so encode(decode(b)) == b for any valid message bytes.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import BinaryIO, Iterable

from .frames import LedFrame

MAGIC = b"HR"
VERSION = 1
MESSAGE_SIZE = 172
_CRC_OFFSET = MESSAGE_SIZE - 4
_HEADER = struct.Struct(">2sBBI")

LOG_MAGIC = b"HRLOG\x00\x00\x01"
LOG_RECORD_SIZE = 8 + MESSAGE_SIZE
LOG_EXTENSION = ".hrlog"


class ProtocolError(ValueError):
    """Base class for message and log failures."""


class TruncationError(ProtocolError):
    """Input ended before a complete message."""


class FormatError(ProtocolError):
    """Structurally wrong: bad magic, version, eye id or length."""


class CorruptionError(ProtocolError):
    """Checksum mismatch: the payload was altered in transit."""


@dataclass(frozen=True)
class DriverMessage:
    eye_id: int
    sequence: int
    frame: LedFrame

    def __post_init__(self) -> None:
        if self.eye_id not in (0, 1):
            raise FormatError(f"eye_id must be 0 or 1, got {self.eye_id!r}")
        if not 0 <= self.sequence <= 0xFFFFFFFF:
            raise FormatError(f"sequence {self.sequence!r} outside uint32 range")


def encode(msg: DriverMessage) -> bytes:
    body = _HEADER.pack(MAGIC, VERSION, msg.eye_id, msg.sequence)
    body += msg.frame.to_bytes()
    return body + struct.pack(">I", zlib.crc32(body))


def decode(data: bytes) -> DriverMessage:
    """Parse exactly one message; see the module docstring for error classes."""
    if len(data) < MESSAGE_SIZE:
        raise TruncationError(
            f"need {MESSAGE_SIZE} bytes, got {len(data)}"
        )
    if len(data) > MESSAGE_SIZE:
        raise FormatError(
            f"expected exactly {MESSAGE_SIZE} bytes, got {len(data)}"
        )
    magic, version, eye_id, sequence = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if eye_id not in (0, 1):
        raise FormatError(f"eye_id must be 0 or 1, got {eye_id}")
    (crc,) = struct.unpack_from(">I", data, _CRC_OFFSET)
    actual = zlib.crc32(data[:_CRC_OFFSET])
    if crc != actual:
        raise CorruptionError(f"CRC mismatch: stored {crc:#010x}, computed {actual:#010x}")
    frame = LedFrame.from_bytes(data[8:_CRC_OFFSET])
    return DriverMessage(eye_id, sequence, frame)


def iter_messages(data: bytes) -> Iterable[tuple[DriverMessage, int]]:
    """Decode back-to-back messages from a buffer, yielding (message, offset)."""
    offset = 0
    while offset < len(data):
        chunk = data[offset:offset + MESSAGE_SIZE]
        if len(chunk) < MESSAGE_SIZE:
            raise TruncationError(
                f"trailing {len(chunk)} bytes at offset {offset} are not a full message"
            )
        yield decode(chunk), offset
        offset += MESSAGE_SIZE


# ---------------------------------------------------------------------------
# Frame log
# ---------------------------------------------------------------------------

def write_framelog(stream: BinaryIO,
                   records: Iterable[tuple[int, DriverMessage]]) -> int:
    """Write (timestamp_ms, message) records; returns the record count.

    Timestamps must not decrease and per-eye sequences must not decrease;
    a log that violated either could not have come from a live session.
    """
    stream.write(LOG_MAGIC)
    last_ts = -1
    last_seq: dict[int, int] = {}
    count = 0
    for ts, msg in records:
        if ts < 0 or ts > 0xFFFFFFFFFFFFFFFF:
            raise ProtocolError(f"timestamp {ts!r} outside uint64 range")
        if ts < last_ts:
            raise ProtocolError(
                f"timestamp {ts} goes backwards (previous {last_ts})"
            )
        prev = last_seq.get(msg.eye_id)
        if prev is not None and msg.sequence < prev:
            raise ProtocolError(
                f"eye {msg.eye_id} sequence {msg.sequence} goes backwards "
                f"(previous {prev})"
            )
        stream.write(struct.pack(">Q", ts))
        stream.write(encode(msg))
        last_ts = ts
        last_seq[msg.eye_id] = msg.sequence
        count += 1
    return count


def read_framelog(stream: BinaryIO) -> tuple[list[tuple[int, DriverMessage]], bool]:
    """Read a frame log; returns (records, truncated).

    A log cut off mid-record yields every complete record and True for the
    truncated flag instead of failing outright.
    """
    header = stream.read(len(LOG_MAGIC))
    if len(header) < len(LOG_MAGIC):
        raise TruncationError("log shorter than its header")
    if header != LOG_MAGIC:
        raise FormatError(f"bad log header {header!r}")
    records: list[tuple[int, DriverMessage]] = []
    truncated = False
    while True:
        chunk = stream.read(LOG_RECORD_SIZE)
        if not chunk:
            break
        if len(chunk) < LOG_RECORD_SIZE:
            truncated = True
            break
        (ts,) = struct.unpack_from(">Q", chunk)
        records.append((ts, decode(chunk[8:])))
    return records, truncated
