"""Ground-truth environment and the sensor quantization models.

The Green House senses five quantities: air temperature and humidity
(DHT11), soil moisture (12-bit ADC), rain (digital comparator output) and
the distance from the gate to an obstacle (ultrasonic echo time).  Sensor
noise is not modeled, so every sampling function here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

ENV_FIELDS = (
    "temperature_c",
    "humidity_pct",
    "soil_moisture_frac",
    "raining",
    "obstacle_distance_cm",
)

DHT11_TEMP_RANGE = (0, 50)
DHT11_HUM_RANGE = (20, 90)
ADC_MAX = 4095
ULTRASONIC_RANGE_CM = (2.0, 400.0)
# round trip at 343 m/s
US_PER_CM = 58.0
# 72 MHz core clock / (prescaler 71 + 1) = 1 MHz echo timer
TIMER_TICK_US = 1


def round_half_away(x: float) -> int:
    """Round to nearest integer, ties away from zero."""
    if x >= 0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class EnvironmentState:
    temperature_c: float = 25.0
    humidity_pct: float = 50.0
    soil_moisture_frac: float = 0.5
    raining: bool = False
    obstacle_distance_cm: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.soil_moisture_frac <= 1.0:
            raise ValueError(f"soil_moisture_frac out of [0,1]: {self.soil_moisture_frac}")
        if not 0.0 <= self.humidity_pct <= 100.0:
            raise ValueError(f"humidity_pct out of [0,100]: {self.humidity_pct}")
        if not self.obstacle_distance_cm >= 0.0:
            raise ValueError(f"obstacle_distance_cm negative: {self.obstacle_distance_cm}")


DEFAULT_ENV = EnvironmentState()


@dataclass(frozen=True)
class SensorReadings:
    temp_c_int: int
    hum_pct_int: int
    soil_counts: int
    rain_digital: bool
    echo_us: int


@dataclass(frozen=True)
class EnvEvent:
    """A `set` (``over_ms is None``) or `ramp` of one environment field."""

    at_ms: int
    field: str
    value: float
    over_ms: Optional[int] = None


def _segment_value(seg, t_ms):
    if seg[0] == "const":
        return seg[1]
    _, start_t, start_val, target, over = seg
    if t_ms >= start_t + over:
        return target
    return start_val + (target - start_val) * (t_ms - start_t) / over


def env_at(timeline: Sequence[EnvEvent], t_ms: int) -> EnvironmentState:
    """Environment state at ``t_ms`` given a time-sorted event list.

    Events at or before ``t_ms`` apply; a ramp interpolates linearly from
    the field's value at the ramp's start.  A later set or ramp on the same
    field supersedes an unfinished ramp.
    """
    segments = {}
    for ev in timeline:
        if ev.at_ms > t_ms:
            break
        if ev.field == "raining" or not ev.over_ms:
            segments[ev.field] = ("const", ev.value)
            continue
        seg = segments.get(ev.field)
        start = getattr(DEFAULT_ENV, ev.field) if seg is None else _segment_value(seg, ev.at_ms)
        segments[ev.field] = ("ramp", ev.at_ms, start, ev.value, ev.over_ms)
    if not segments:
        return DEFAULT_ENV
    values = {name: _segment_value(seg, t_ms) for name, seg in segments.items()}
    if "raining" in values:
        values["raining"] = bool(values["raining"])
    return replace(DEFAULT_ENV, **values)


def sample_dht11(env: EnvironmentState) -> tuple[int, int]:
    temp = _clamp(round_half_away(env.temperature_c), *DHT11_TEMP_RANGE)
    hum = _clamp(round_half_away(env.humidity_pct), *DHT11_HUM_RANGE)
    return temp, hum


def sample_soil(env: EnvironmentState) -> int:
    # direct polarity: wet soil reads high
    return _clamp(round_half_away(env.soil_moisture_frac * ADC_MAX), 0, ADC_MAX)


def sample_rain(env: EnvironmentState) -> bool:
    return bool(env.raining)


def sample_ultrasonic(env: EnvironmentState) -> int:
    """Echo round-trip time in whole microseconds for the obstacle distance."""
    d = _clamp(env.obstacle_distance_cm, *ULTRASONIC_RANGE_CM)
    return round_half_away(d * US_PER_CM)


def echo_to_cm(echo_us: int) -> int:
    """Convert an echo time to distance in tenths of a centimeter."""
    if echo_us < 0:
        raise ValueError("echo_us must be non-negative")
    # round(echo_us * 10 / 58) in integer arithmetic, ties up
    return (echo_us * 20 + 58) // 116


def sample_all(env: EnvironmentState) -> SensorReadings:
    temp, hum = sample_dht11(env)
    return SensorReadings(
        temp_c_int=temp,
        hum_pct_int=hum,
        soil_counts=sample_soil(env),
        rain_digital=sample_rain(env),
        echo_us=sample_ultrasonic(env),
    )


def soil_percent(counts: int) -> int:
    return (counts * 200 + ADC_MAX) // (2 * ADC_MAX)


def validate_timeline(events: Iterable[EnvEvent]) -> list[EnvEvent]:
    """Check field names and order; returns the events as a list."""
    out = list(events)
    last = -1
    for ev in out:
        if ev.field not in ENV_FIELDS:
            raise ValueError(f"unknown environment field {ev.field!r}")
        if ev.at_ms < last:
            raise ValueError("timeline events must be sorted by at_ms")
        last = ev.at_ms
    return out
