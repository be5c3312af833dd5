"""Driver simulator: staleness, framing, calibration, rasterization."""

import random
import threading

import pytest

from lumeye.driver import (
    DriverError,
    DriverSim,
    IMAGE_SIZE,
    LED_RADIUS_PX,
    led_center_px,
    render_ppm,
    replay_into_sim,
    rotate_frame,
)
from lumeye.frames import ColorRGBA, LedFrame, blank_frame
from lumeye.geometry import LedAddress, Ring, all_addresses
from lumeye.protocol import CorruptionError, DriverMessage, encode

RED = ColorRGBA(255, 0, 0, 255)
GREEN = ColorRGBA(0, 255, 0, 255)


def frame_with(addr, color=RED):
    return blank_frame().with_pixel(addr, color)


def numbered_frame(n):
    """A frame whose bytes encode n, so frames are distinguishable."""
    return frame_with(LedAddress(Ring.OUTER, n % 24),
                      ColorRGBA(n % 256, (n * 7) % 256, (n * 13) % 256, 255))


def parse_ppm(data):
    assert data.startswith(b"P6\n")
    header, _, rest = data.partition(b"\n255\n")
    dims = header.split(b"\n")[1].split()
    w, h = int(dims[0]), int(dims[1])
    assert len(rest) == w * h * 3
    return w, h, rest


def pixel(data, x, y):
    w, h, raw = parse_ppm(data)
    i = (y * w + x) * 3
    return raw[i], raw[i + 1], raw[i + 2]


class TestStaleness:
    def test_first_message_lands(self):
        sim = DriverSim()
        assert sim.apply(DriverMessage(0, 5, numbered_frame(1))) is True
        assert sim.snapshot(0).sequence == 5

    def test_equal_and_lower_sequences_rejected(self):
        sim = DriverSim()
        sim.apply(DriverMessage(0, 5, numbered_frame(1)))
        assert sim.apply(DriverMessage(0, 5, numbered_frame(2))) is False
        assert sim.apply(DriverMessage(0, 4, numbered_frame(3))) is False
        assert sim.snapshot(0).frame == numbered_frame(1)
        assert sim.apply(DriverMessage(0, 6, numbered_frame(4))) is True
        assert sim.snapshot(0).frame == numbered_frame(4)

    def test_eyes_are_independent(self):
        sim = DriverSim()
        sim.apply(DriverMessage(0, 10, numbered_frame(1)))
        assert sim.apply(DriverMessage(1, 3, numbered_frame(2))) is True
        assert sim.snapshot(1).sequence == 3
        assert sim.snapshot(0).sequence == 10

    def test_at_ms_recorded(self):
        sim = DriverSim()
        sim.apply(DriverMessage(0, 1, numbered_frame(1)), at_ms=777)
        snap = sim.snapshot(0)
        assert snap.updated_at_ms == 777

    def test_unknown_eye(self):
        sim = DriverSim()
        with pytest.raises(DriverError):
            sim.snapshot(2)

    def test_threaded_applies_match_reference(self):
        """Final state only depends on the max sequence, not arrival order."""
        rng = random.Random(61)
        msgs = []
        for eye in (0, 1):
            seqs = rng.sample(range(1000), 100)
            msgs.extend(DriverMessage(eye, s, numbered_frame(s)) for s in seqs)
        rng.shuffle(msgs)

        sim = DriverSim()
        chunks = [msgs[i::4] for i in range(4)]
        threads = [threading.Thread(target=lambda c=c: [sim.apply(m) for m in c])
                   for c in chunks]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        for eye in (0, 1):
            winner = max((m for m in msgs if m.eye_id == eye),
                         key=lambda m: m.sequence)
            snap = sim.snapshot(eye)
            assert snap.sequence == winner.sequence
            assert snap.frame == winner.frame


class TestByteStream:
    def test_single_message(self):
        sim = DriverSim()
        sim.send(encode(DriverMessage(1, 1, numbered_frame(9))))
        assert sim.snapshot(1).frame == numbered_frame(9)

    def test_dripped_bytes(self):
        """Nothing lands until the message completes, then it all does."""
        sim = DriverSim()
        data = encode(DriverMessage(0, 1, numbered_frame(5)))
        for i in range(0, len(data), 7):
            sim.send(data[i:i + 7])
            if i + 7 < len(data):
                assert sim.snapshot(0).sequence is None
        assert sim.snapshot(0).sequence == 1

    def test_back_to_back_messages(self):
        sim = DriverSim()
        blob = b"".join(encode(DriverMessage(0, s, numbered_frame(s)))
                        for s in (1, 2, 3))
        sim.send(blob + encode(DriverMessage(1, 1, numbered_frame(7)))[:50])
        assert sim.snapshot(0).sequence == 3
        assert sim.snapshot(1).sequence is None

    def test_corrupt_stream_raises(self):
        sim = DriverSim()
        data = bytearray(encode(DriverMessage(0, 1, numbered_frame(5))))
        data[100] ^= 0xFF
        with pytest.raises(CorruptionError):
            sim.send(bytes(data))


class TestCalibration:
    def test_whole_step_offset_is_permutation(self):
        # 45 degrees is three outer steps and two inner steps
        frame = (blank_frame()
                 .with_pixel(LedAddress(Ring.OUTER, 0), RED)
                 .with_pixel(LedAddress(Ring.INNER, 0), GREEN))
        rotated = rotate_frame(frame, 45.0)
        assert rotated.get(LedAddress(Ring.OUTER, 3)) == RED
        assert rotated.get(LedAddress(Ring.INNER, 2)) == GREEN
        assert rotated.get(LedAddress(Ring.OUTER, 0)) == ColorRGBA(0, 0, 0, 0)

    def test_zero_offset_identity(self):
        frame = numbered_frame(3)
        assert rotate_frame(frame, 0.0) == frame
        assert rotate_frame(frame, 360.0) == frame
        assert rotate_frame(frame, -720.0) == frame

    def test_snapshot_applies_offset_without_mutating_store(self):
        sim = DriverSim()
        sim.apply(DriverMessage(0, 1, frame_with(LedAddress(Ring.OUTER, 0))))
        sim.set_calibration(0, 45.0)
        assert sim.snapshot(0).frame.get(LedAddress(Ring.OUTER, 3)) == RED
        assert sim.snapshot(0).calibration_offset_deg == 45.0
        sim.set_calibration(0, 0.0)
        assert sim.snapshot(0).frame.get(LedAddress(Ring.OUTER, 0)) == RED

    def test_constructor_calibration(self):
        sim = DriverSim(calibration={1: 90.0})
        assert sim.snapshot(1).calibration_offset_deg == 90.0
        assert sim.snapshot(0).calibration_offset_deg == 0.0

    def test_rejects_non_finite_offset(self):
        sim = DriverSim()
        for bad in (float("nan"), float("inf")):
            with pytest.raises(DriverError):
                sim.set_calibration(0, bad)
        with pytest.raises(DriverError):
            DriverSim(calibration={0: float("nan")})


class TestRaster:
    def test_header_and_size(self):
        sim = DriverSim()
        w, h, raw = parse_ppm(sim.render_image("both"))
        assert (w, h) == (2 * IMAGE_SIZE, IMAGE_SIZE)
        assert raw == bytes(len(raw))  # all black when nothing is lit
        w, h, _ = parse_ppm(sim.render_image(0))
        assert (w, h) == (IMAGE_SIZE, IMAGE_SIZE)

    def test_deterministic(self):
        sim = DriverSim()
        sim.apply(DriverMessage(0, 1, numbered_frame(11)))
        sim.apply(DriverMessage(1, 1, numbered_frame(23)))
        assert sim.render_image("both") == sim.render_image("both")

    def test_top_led_lands_at_top_of_panel(self):
        # outer index 6 sits at 90 degrees, dead above center
        frame = frame_with(LedAddress(Ring.OUTER, 6))
        data = render_ppm([frame])
        assert pixel(data, 128, 28) == (255, 0, 0)
        assert pixel(data, 128, 28 - LED_RADIUS_PX - 1) == (0, 0, 0)
        assert pixel(data, 128, 128) == (0, 0, 0)

    def test_disc_pixel_count(self):
        data = render_ppm([frame_with(LedAddress(Ring.INNER, 0))])
        _, _, raw = parse_ppm(data)
        lit = sum(1 for i in range(0, len(raw), 3) if raw[i] == 255)
        assert lit == 253

    def test_alpha_scales_brightness(self):
        frame = frame_with(LedAddress(Ring.OUTER, 0), ColorRGBA(255, 0, 0, 128))
        x, y = led_center_px(LedAddress(Ring.OUTER, 0))
        assert pixel(render_ppm([frame]), x, y) == ((255 * 128 + 127) // 255, 0, 0)

    def test_second_panel_offsets_x(self):
        frame = frame_with(LedAddress(Ring.OUTER, 0))
        data = render_ppm([blank_frame(), frame])
        x, y = led_center_px(LedAddress(Ring.OUTER, 0), panel=1)
        assert pixel(data, x, y) == (255, 0, 0)
        assert x == led_center_px(LedAddress(Ring.OUTER, 0))[0] + IMAGE_SIZE

    def test_led_center_px_anchors(self):
        assert led_center_px(LedAddress(Ring.OUTER, 0)) == (228, 128)
        assert led_center_px(LedAddress(Ring.OUTER, 6)) == (128, 28)
        assert led_center_px(LedAddress(Ring.INNER, 4)) == (128, 68)
        assert led_center_px(LedAddress(Ring.INNER, 8)) == (68, 128)

    def test_every_disc_fits_inside_its_panel(self):
        for addr in all_addresses():
            x, y = led_center_px(addr)
            assert LED_RADIUS_PX <= x < IMAGE_SIZE - LED_RADIUS_PX
            assert LED_RADIUS_PX <= y < IMAGE_SIZE - LED_RADIUS_PX


class TestReplay:
    def test_replay_reconstructs_final_state(self):
        records = [
            (0, DriverMessage(0, 1, numbered_frame(1))),
            (33, DriverMessage(1, 1, numbered_frame(2))),
            (66, DriverMessage(0, 2, numbered_frame(3))),
        ]
        sim = replay_into_sim(records)
        assert sim.snapshot(0).frame == numbered_frame(3)
        assert sim.snapshot(0).updated_at_ms == 66
        assert sim.snapshot(1).frame == numbered_frame(2)

    def test_replay_into_existing_sim(self):
        sim = DriverSim(calibration={0: 45.0})
        out = replay_into_sim([(5, DriverMessage(0, 1, numbered_frame(4)))], sim)
        assert out is sim
        assert sim.snapshot(0).sequence == 1
