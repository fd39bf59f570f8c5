"""Single-datum telemetry frames.

Wire image, 6 bytes::

    AA | field_id | seq | value_lo | value_hi | xor(bytes 1..4)

``value`` is a signed 16-bit little-endian integer.  Scaling per field:
temperature and humidity in tenths of a unit, soil in raw ADC counts,
rain as 0/1, distance in tenths of a centimeter.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

SYNC = 0xAA
FRAME_LEN = 6


class FieldId(enum.IntEnum):
    TEMPERATURE = 0
    HUMIDITY = 1
    SOIL_COUNTS = 2
    RAIN = 3
    DISTANCE_TENTHS_CM = 4


# inclusive value ranges accepted on the wire
FIELD_RANGES = {
    FieldId.TEMPERATURE: (-32768, 32767),
    FieldId.HUMIDITY: (0, 1000),
    FieldId.SOIL_COUNTS: (0, 4095),
    FieldId.RAIN: (0, 1),
    FieldId.DISTANCE_TENTHS_CM: (0, 32767),
}


class FrameError(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    field_id: FieldId
    seq: int
    value: int

    def is_valid(self) -> bool:
        try:
            field = FieldId(self.field_id)
        except ValueError:
            return False
        lo, hi = FIELD_RANGES[field]
        return 0 <= self.seq <= 255 and lo <= self.value <= hi


def checksum(body) -> int:
    c = 0
    for b in body:
        c ^= b
    return c


def encode_frame(frame: Frame) -> bytes:
    if not frame.is_valid():
        raise FrameError(f"invalid frame: {frame}")
    v = frame.value & 0xFFFF
    body = (int(frame.field_id), frame.seq, v & 0xFF, v >> 8)
    return bytes((SYNC, *body, checksum(body)))


def _parse(buf) -> Optional[Frame]:
    """Validate 6 bytes starting at a sync byte; None if they do not form a frame."""
    if buf[5] != buf[1] ^ buf[2] ^ buf[3] ^ buf[4]:
        return None
    if buf[1] > FieldId.DISTANCE_TENTHS_CM:
        return None
    value = buf[3] | (buf[4] << 8)
    if value >= 0x8000:
        value -= 0x10000
    frame = Frame(FieldId(buf[1]), buf[2], value)
    return frame if frame.is_valid() else None


class Decoder:
    """Streaming frame decoder with resynchronization on the sync byte.

    Bytes that cannot start or belong to a valid frame are discarded and
    counted in ``rejected_bytes``; decoding never raises on malformed input.
    """

    def __init__(self):
        self._buf = bytearray()
        self.rejected_bytes = 0
        self.frames = 0

    def _drop_to_sync(self):
        buf = self._buf
        i = buf.find(SYNC)
        n = len(buf) if i < 0 else i
        if n:
            del buf[:n]
            self.rejected_bytes += n

    def push(self, byte: int) -> Optional[Frame]:
        self._buf.append(byte)
        if self._buf[0] != SYNC:
            self._drop_to_sync()
        while len(self._buf) >= FRAME_LEN:
            frame = _parse(self._buf)
            if frame is not None:
                del self._buf[:FRAME_LEN]
                self.frames += 1
                return frame
            del self._buf[0]
            self.rejected_bytes += 1
            self._drop_to_sync()
        return None

    def feed(self, data) -> list[Frame]:
        out = []
        for b in data:
            frame = self.push(b)
            if frame is not None:
                out.append(frame)
        return out

    @property
    def pending(self) -> int:
        return len(self._buf)


def decoder_push(decoder: Decoder, byte: int) -> Optional[Frame]:
    return decoder.push(byte)


FIELD_CYCLE = tuple(FieldId)


class RoundRobin:
    """Fixed cyclic field order with a mod-256 sequence counter."""

    def __init__(self):
        self._index = 0
        self.seq = 0

    def next_field(self) -> FieldId:
        field = FIELD_CYCLE[self._index]
        self._index = (self._index + 1) % len(FIELD_CYCLE)
        return field

    def next_seq(self) -> int:
        seq = self.seq
        self.seq = (self.seq + 1) & 0xFF
        return seq

    def next_slot(self) -> tuple[FieldId, int]:
        return self.next_field(), self.next_seq()


def next_field(scheduler: RoundRobin) -> FieldId:
    return scheduler.next_field()
