"""Red House: the receive-only slave node.

Decodes frames from the link, keeps the last value of each field with its
arrival time, and derives the display, the three soil LEDs and the rain
buzzer from values no older than the staleness timeout.
"""

from __future__ import annotations

from typing import Optional

from .btlink import ByteChannel, Direction
from .display import DisplayBuffer, render, tenths
from .envmodel import ADC_MAX, soil_percent
from .events import TraceEvent
from .greennode import display_event
from .wireproto import Decoder, FieldId, Frame

STALENESS_TIMEOUT_MS = 5000
# percent of full-scale soil counts at which LED 1, 2, 3 light
LED_THRESHOLDS_PCT = (10, 40, 70)

PIN_MAP = (
    ("oled_scl", "PB6"),
    ("oled_sda", "PB7"),
    ("led1", "PB1"),
    ("led2", "PA7"),
    ("led3", "PA0"),
    ("buzzer", "PA4"),
    ("hc05_rx", "PA9"),
    ("hc05_tx", "PA10"),
)


def led_count(soil_counts: int) -> int:
    if not 0 <= soil_counts <= ADC_MAX:
        raise ValueError(f"soil_counts out of range: {soil_counts}")
    # counts/4095 >= pct/100, kept in integers
    return sum(1 for pct in LED_THRESHOLDS_PCT if soil_counts * 100 >= pct * ADC_MAX)


def render_slave_display(values: dict) -> DisplayBuffer:
    """Render from a field -> value mapping; missing fields show ``--``."""
    def get(field, fmt):
        v = values.get(field)
        return "--" if v is None else fmt(v)

    return render(
        temp=get(FieldId.TEMPERATURE, tenths),
        hum=get(FieldId.HUMIDITY, tenths),
        dist=get(FieldId.DISTANCE_TENTHS_CM, tenths),
        soil=get(FieldId.SOIL_COUNTS, lambda v: str(soil_percent(v))),
        rain=get(FieldId.RAIN, lambda v: "YES" if v else "NO"),
    )


class SlaveNode:
    def __init__(self, staleness_timeout_ms: int = STALENESS_TIMEOUT_MS,
                 direction: Direction = Direction.GREEN_TO_RED):
        self.staleness_timeout_ms = staleness_timeout_ms
        self.direction = direction
        self.decoder = Decoder()
        self.last_value: dict[FieldId, tuple[int, int]] = {}
        self.display = DisplayBuffer()
        self.leds = 0
        self.buzzer = False
        self.rx_frames = 0
        self.invalid_frames = 0
        self._next_expiry: Optional[int] = None
        self._reported_rejects = 0
        self._dirty = True

    def fresh_values(self, now_ms: int) -> dict:
        limit = self.staleness_timeout_ms
        return {f: v for f, (v, at) in self.last_value.items() if now_ms - at <= limit}

    def value(self, field: FieldId, now_ms: int) -> Optional[int]:
        entry = self.last_value.get(field)
        if entry is None or now_ms - entry[1] > self.staleness_timeout_ms:
            return None
        return entry[0]

    def receive(self, frame: Frame, now_ms: int):
        if not frame.is_valid():
            self.invalid_frames += 1
            return
        self.last_value[frame.field_id] = (frame.value, now_ms)
        self.rx_frames += 1
        self._dirty = True

    def step(self, channel: ByteChannel, now_ms: int) -> list[TraceEvent]:
        data = channel.poll_receive(self.direction, now_ms)
        expired = self._next_expiry is not None and now_ms >= self._next_expiry
        if not data and not expired and not self._dirty:
            return []
        events = []
        push = self.decoder.push
        for b in data:
            frame = push(b)
            if frame is not None:
                self.receive(frame, now_ms)
                events.append(TraceEvent(now_ms, "RED", "RX_FRAME", (
                    ("field", int(frame.field_id)), ("seq", frame.seq), ("value", frame.value))))
        rejected = self.decoder.rejected_bytes - self._reported_rejects
        if rejected:
            self._reported_rejects = self.decoder.rejected_bytes
            events.append(TraceEvent(now_ms, "RED", "DECODE_REJECT", (("bytes", rejected),)))
        events.extend(self._refresh(now_ms))
        return events

    def _refresh(self, now_ms: int) -> list[TraceEvent]:
        self._dirty = False
        events = []
        values = self.fresh_values(now_ms)
        soil = values.get(FieldId.SOIL_COUNTS)
        leds = 0 if soil is None else led_count(soil)
        buzzer = values.get(FieldId.RAIN) == 1
        display = render_slave_display(values)
        if leds != self.leds:
            self.leds = leds
            events.append(TraceEvent(now_ms, "RED", "LED", (("count", leds),)))
        if buzzer != self.buzzer:
            self.buzzer = buzzer
            events.append(TraceEvent(now_ms, "RED", "BUZZER", (("on", buzzer),)))
        if display != self.display:
            self.display = display
            events.append(display_event(now_ms, "RED", display))
        pending = [at + self.staleness_timeout_ms + 1
                   for f, (_, at) in self.last_value.items() if f in values]
        self._next_expiry = min(pending) if pending else None
        return events


def slave_step(state: SlaveNode, channel: ByteChannel, now_ms: int) -> list[TraceEvent]:
    return state.step(channel, now_ms)
