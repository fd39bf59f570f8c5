"""Green House: the master node.

Samples all sensors once per sample period, redraws its display from that
sample, and hands exactly one frame to the link per transmit slot.  It
never reads from the link.
"""

from __future__ import annotations

from typing import Optional

from .btlink import ByteChannel, Direction
from .display import DisplayBuffer, render, tenths
from .envmodel import EnvironmentState, SensorReadings, echo_to_cm, sample_all, soil_percent
from .events import TraceEvent
from .wireproto import FieldId, Frame, RoundRobin, encode_frame

SAMPLE_PERIOD_MS = 1000
TRANSMIT_PERIOD_MS = 200

# Blue Pill wiring; documentation only
PIN_MAP = (
    ("oled_scl", "PB6"),
    ("oled_sda", "PB7"),
    ("us_trig", "PA11"),
    ("us_echo", "PA8"),
    ("dht11", "PB9"),
    ("soil_a0", "PB1"),
    ("soil_vcc", "PA7"),
    ("rain_d0", "PA0"),
    ("hc05_rx", "PA9"),
    ("hc05_tx", "PA10"),
)


def field_value(readings: SensorReadings, field: FieldId) -> int:
    """Scaled wire value of one field of a sensor sample."""
    if field is FieldId.TEMPERATURE:
        return readings.temp_c_int * 10
    if field is FieldId.HUMIDITY:
        return readings.hum_pct_int * 10
    if field is FieldId.SOIL_COUNTS:
        return readings.soil_counts
    if field is FieldId.RAIN:
        return int(readings.rain_digital)
    return echo_to_cm(readings.echo_us)


def render_master_display(readings: SensorReadings) -> DisplayBuffer:
    return render(
        temp=str(readings.temp_c_int),
        hum=str(readings.hum_pct_int),
        dist=tenths(echo_to_cm(readings.echo_us)),
        soil=str(soil_percent(readings.soil_counts)),
        rain="YES" if readings.rain_digital else "NO",
    )


def display_event(t: int, source: str, display: DisplayBuffer) -> TraceEvent:
    return TraceEvent(t, source, "DISPLAY",
                      tuple((f"l{i}", line) for i, line in enumerate(display.lines, 1)))


class MasterNode:
    def __init__(self, sample_period_ms: int = SAMPLE_PERIOD_MS,
                 transmit_period_ms: int = TRANSMIT_PERIOD_MS,
                 direction: Direction = Direction.GREEN_TO_RED):
        self.sample_period_ms = sample_period_ms
        self.transmit_period_ms = transmit_period_ms
        self.direction = direction
        self.readings: Optional[SensorReadings] = None
        self.scheduler = RoundRobin()
        self.display = DisplayBuffer()
        self.tx_frames = 0
        self.last_tx: dict[FieldId, int] = {}

    def is_sample_tick(self, now_ms: int) -> bool:
        return now_ms % self.sample_period_ms == 0

    def is_transmit_tick(self, now_ms: int) -> bool:
        return now_ms % self.transmit_period_ms == 0

    def step(self, env: Optional[EnvironmentState], channel: ByteChannel, now_ms: int) -> list[TraceEvent]:
        """Advance one tick.  ``env`` is only consulted on sample ticks."""
        events = []
        if self.is_sample_tick(now_ms):
            if env is None:
                raise ValueError(f"sample tick at t={now_ms} needs an environment state")
            r = self.readings = sample_all(env)
            self.display = render_master_display(r)
            events.append(TraceEvent(now_ms, "GREEN", "SAMPLE", (
                ("temp", r.temp_c_int), ("hum", r.hum_pct_int), ("soil", r.soil_counts),
                ("rain", r.rain_digital), ("echo_us", r.echo_us))))
            events.append(display_event(now_ms, "GREEN", self.display))
        if self.is_transmit_tick(now_ms):
            if self.readings is None:
                raise RuntimeError("transmit before first sample")
            field, seq = self.scheduler.next_slot()
            frame = Frame(field, seq, field_value(self.readings, field))
            channel.send_bytes(self.direction, encode_frame(frame), now_ms)
            self.tx_frames += 1
            self.last_tx[field] = frame.value
            events.append(TraceEvent(now_ms, "GREEN", "TX_FRAME",
                                     (("field", int(field)), ("seq", seq), ("value", frame.value))))
        return events


def master_step(state: MasterNode, env, channel: ByteChannel, now_ms: int) -> list[TraceEvent]:
    return state.step(env, channel, now_ms)
