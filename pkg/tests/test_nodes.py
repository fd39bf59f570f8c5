from fractions import Fraction

import pytest

from greenlink.btlink import ByteChannel, Direction, LinkImpairments
from greenlink.display import COLS, DisplayBuffer
from greenlink.envmodel import DEFAULT_ENV, EnvironmentState, SensorReadings
from greenlink.greennode import MasterNode, master_step, render_master_display
from greenlink.rednode import SlaveNode, led_count, render_slave_display, slave_step
from greenlink.wireproto import Decoder, FieldId, Frame, encode_frame

G2R = Direction.GREEN_TO_RED


def connected(**imp):
    return ByteChannel(9600, LinkImpairments(connected=True, **imp))


class RecordingChannel(ByteChannel):
    def __init__(self):
        super().__init__(9600, LinkImpairments(connected=True))
        self.calls = []

    def send_bytes(self, direction, data, now_ms):
        self.calls.append(("send", direction, bytes(data), now_ms))
        return super().send_bytes(direction, data, now_ms)

    def poll_receive(self, direction, now_ms):
        self.calls.append(("poll", direction, now_ms))
        return super().poll_receive(direction, now_ms)


def run_master(duration, env=DEFAULT_ENV, ch=None):
    m = MasterNode()
    ch = ch or connected()
    events = []
    for t in range(duration + 1):
        events += master_step(m, env if m.is_sample_tick(t) else None, ch, t)
    return m, ch, events


class TestMasterDisplay:
    def test_example(self):
        r = SensorReadings(25, 61, 2048, False, 580)
        assert render_master_display(r).lines == ("T:25C H:61%", "Dist:10.0cm", "Soil:50%", "Rain:NO")

    def test_rain_and_dry(self):
        r = SensorReadings(0, 20, 0, True, 23200)
        assert render_master_display(r).lines == ("T:0C H:20%", "Dist:400.0cm", "Soil:0%", "Rain:YES")

    def test_truncates_not_wraps(self):
        d = DisplayBuffer.from_lines(["x" * 30, "y"])
        assert d.lines == ("x" * COLS, "y", "", "")


class TestMasterStep:
    def test_t0_samples_and_sends_temperature(self):
        m = MasterNode()
        ch = connected()
        ev = master_step(m, DEFAULT_ENV, ch, 0)
        assert [e.name for e in ev] == ["SAMPLE", "DISPLAY", "TX_FRAME"]
        assert ev[0].fields == (("temp", 25), ("hum", 50), ("soil", 2048), ("rain", False), ("echo_us", 5800))
        assert ev[2].fields == (("field", 0), ("seq", 0), ("value", 250))
        assert Decoder().feed(ch.poll_receive(G2R, 100)) == [Frame(FieldId.TEMPERATURE, 0, 250)]

    def test_schedule(self):
        m, ch, ev = run_master(1000)
        tx = [(e.t, e.get("field")) for e in ev if e.name == "TX_FRAME"]
        assert tx == [(0, 0), (200, 1), (400, 2), (600, 3), (800, 4), (1000, 0)]
        assert [e.t for e in ev if e.name == "SAMPLE"] == [0, 1000]

    def test_default_frame_values(self):
        m, ch, ev = run_master(800)
        frames = Decoder().feed(ch.poll_receive(G2R, 2000))
        assert [f.value for f in frames] == [250, 500, 2048, 0, 1000]

    @pytest.mark.parametrize("duration", [0, 199, 200, 1234, 5000])
    def test_frame_count(self, duration):
        m, ch, ev = run_master(duration)
        assert m.tx_frames == duration // 200 + 1
        assert sum(e.name == "TX_FRAME" for e in ev) == duration // 200 + 1

    def test_seq_and_fields_over_many_cycles(self):
        m, ch, ev = run_master(60_000)
        tx = [e for e in ev if e.name == "TX_FRAME"]
        assert [e.get("field") for e in tx] == [k % 5 for k in range(len(tx))]
        assert [e.get("seq") for e in tx] == [k % 256 for k in range(len(tx))]

    def test_never_reads_link(self):
        ch = RecordingChannel()
        run_master(3000, ch=ch)
        assert ch.calls and all(c[0] == "send" for c in ch.calls)

    def test_needs_env_on_sample_tick(self):
        with pytest.raises(ValueError):
            MasterNode().step(None, connected(), 0)

    def test_display_tracks_latest_sample(self):
        m = MasterNode()
        ch = connected()
        m.step(DEFAULT_ENV, ch, 0)
        wet = EnvironmentState(soil_moisture_frac=1.0, raining=True)
        m.step(wet, ch, 1000)
        assert m.display == render_master_display(m.readings)
        assert m.display.lines[2:] == ("Soil:100%", "Rain:YES")


def led_oracle(counts):
    frac = Fraction(counts, 4095)
    return sum(1 for th in (Fraction(10, 100), Fraction(40, 100), Fraction(70, 100)) if th <= frac)


class TestLeds:
    @pytest.mark.parametrize("counts, leds", [(0, 0), (2048, 2), (4095, 3), (409, 0), (410, 1), (1638, 2), (2867, 3)])
    def test_examples(self, counts, leds):
        assert led_count(counts) == leds

    def test_exhaustive_against_fraction_oracle(self):
        assert all(led_count(c) == led_oracle(c) for c in range(4096))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            led_count(4096)


class TestSlaveDisplay:
    def test_cold_start(self):
        assert render_slave_display({}).lines == ("T:--C H:--%", "Dist:--cm", "Soil:--%", "Rain:--")

    def test_only_temperature(self):
        assert render_slave_display({FieldId.TEMPERATURE: 253}).lines[0] == "T:25.3C H:--%"

    def test_negative_tenths(self):
        assert render_slave_display({FieldId.TEMPERATURE: -5}).lines[0] == "T:-0.5C H:--%"

    def test_full_set(self):
        d = render_slave_display({FieldId.TEMPERATURE: 250, FieldId.HUMIDITY: 610,
                                  FieldId.SOIL_COUNTS: 2048, FieldId.RAIN: 0,
                                  FieldId.DISTANCE_TENTHS_CM: 100})
        assert d.lines == ("T:25.0C H:61.0%", "Dist:10.0cm", "Soil:50%", "Rain:NO")


def feed(ch, *frames, at=0):
    ch.send_bytes(G2R, b"".join(encode_frame(f) for f in frames), at)


class TestSlaveStep:
    def test_rain_frame_sounds_buzzer_same_step(self):
        ch, s = connected(), SlaveNode()
        feed(ch, Frame(FieldId.RAIN, 0, 1))
        for t in range(7):
            slave_step(s, ch, t)
            assert not s.buzzer
        ev = slave_step(s, ch, 7)
        assert s.buzzer
        assert ("BUZZER", (("on", True),)) in [(e.name, e.fields) for e in ev]

    def test_staleness_boundary(self):
        s = SlaveNode()
        ch = connected()
        s.receive(Frame(FieldId.RAIN, 0, 1), 100)
        s.step(ch, 100)
        s.step(ch, 5100)
        assert s.buzzer
        ev = s.step(ch, 5101)
        assert not s.buzzer
        assert any(e.name == "BUZZER" for e in ev)
        assert s.display.lines[3] == "Rain:--"

    def test_soil_drives_leds(self):
        ch, s = connected(), SlaveNode()
        feed(ch, Frame(FieldId.SOIL_COUNTS, 0, 2048))
        for t in range(20):
            s.step(ch, t)
        assert s.leds == 2

    def test_garbage_counted_not_fatal(self):
        ch, s = connected(), SlaveNode()
        ch.send_bytes(G2R, b"\x00\x01\xAA\x07", 0)
        feed(ch, Frame(FieldId.HUMIDITY, 3, 420), at=0)
        events = []
        for t in range(30):
            events += s.step(ch, t)
        assert s.value(FieldId.HUMIDITY, 30) == 420
        assert sum(e.get("bytes") for e in events if e.name == "DECODE_REJECT") == 4

    def test_never_writes_link(self):
        ch, s = RecordingChannel(), SlaveNode()
        for t in range(100):
            s.step(ch, t)
        assert all(c[0] == "poll" for c in ch.calls)

    def test_buzzer_off_after_rain_zero(self):
        ch, s = connected(), SlaveNode()
        s.receive(Frame(FieldId.RAIN, 0, 1), 0)
        s.step(ch, 0)
        assert s.buzzer
        s.receive(Frame(FieldId.RAIN, 1, 0), 10)
        s.step(ch, 10)
        assert not s.buzzer


def test_end_to_end_display_matches_master_on_integral_readings():
    m, s, ch = MasterNode(), SlaveNode(), connected()
    env = EnvironmentState(temperature_c=31, humidity_pct=44, soil_moisture_frac=0.8,
                           raining=True, obstacle_distance_cm=12.5)
    for t in range(1100):
        m.step(env if m.is_sample_tick(t) else None, ch, t)
        s.step(ch, t)
    assert s.display.lines[1:] == m.display.lines[1:]
    assert s.display.lines[0] == "T:31.0C H:44.0%"
    assert m.display.lines[0] == "T:31C H:44%"
    assert {f: s.value(f, 1100) for f in FieldId} == m.last_tx
    assert s.leds == 3 and s.buzzer
