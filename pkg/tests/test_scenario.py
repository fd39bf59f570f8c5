import pytest

from greenlink.envmodel import EnvEvent
from greenlink.simharness import Expectation, LinkEvent, ScenarioError, parse_scenario
from greenlink.scenarios import scenario_paths
from greenlink.simharness.scenario import load_scenario


def test_set_event():
    sc = parse_scenario("at 5000 set raining 1")
    assert sc.events == [EnvEvent(5000, "raining", 1.0)]


def test_windowed_expectation():
    (exp,) = parse_scenario("at 5000 expect red.buzzer == 1 within 1500").events
    assert exp == Expectation(5000, "red.buzzer", "==", 1.0, 1500, line=1)


def test_invalid_time():
    with pytest.raises(ScenarioError, match="^line 1: invalid time$"):
        parse_scenario("at x set raining 1")


def test_comments_blank_lines_and_sorting():
    sc = parse_scenario("""
# header
at 300 set temperature_c 30   # inline
at 100 link drop_prob 0.5

at 100 link disconnect
at 0 ramp humidity_pct 80 over 1000
""")
    assert [e.at_ms for e in sc.events] == [0, 100, 100, 300]
    # stable for equal times
    assert sc.events[1] == LinkEvent(100, "param", "drop_prob", 0.5, line=4)
    assert sc.events[2] == LinkEvent(100, "disconnect", line=6)
    assert sc.timeline == [EnvEvent(0, "humidity_pct", 80.0, 1000), EnvEvent(300, "temperature_c", 30.0)]


def test_quoted_display_value():
    (exp,) = parse_scenario('at 1000 expect red.display.line1 == "T:25.0C H:50.0%"').events
    assert exp.value == "T:25.0C H:50.0%"


def test_absent_value():
    (exp,) = parse_scenario("at 10 expect red.temp == --").events
    assert exp.value is None
    assert exp.holds(None) and not exp.holds(25.0)


@pytest.mark.parametrize("line, reason", [
    ("at 10 set pressure 3", "unknown environment field"),
    ("at 10 expect red.pressure == 1", "unknown probe"),
    ("at 10 expect red.temp ~ 1", "unknown operator"),
    ("at 10 expect red.display.line1 < foo", "display probes"),
    ("at 10 set soil_moisture_frac 2", "out of range"),
    ("at 10 set raining maybe", "invalid value"),
    ("at 10 ramp raining 1 over 10", "cannot be ramped"),
    ("at 10 ramp temperature_c 30", "expected: ramp"),
    ("at 10 link drop_prob 2", r"must be in \[0,1\]"),
    ("at 10 link warp 9", "unknown link parameter"),
    ("at 10 jump", "unknown directive"),
    ("at -5 set raining 1", "invalid time"),
    ("set raining 1", "expected 'at'"),
    ('at 10 expect red.display.line1 == "unterminated', "quotation"),
    ("at 10 expect red.temp == 1 within soon", "invalid window"),
    ("at 10 set temperature_c nan", "invalid value"),
])
def test_parse_errors(line, reason):
    with pytest.raises(ScenarioError, match=reason) as exc:
        parse_scenario("# ok\n" + line)
    assert exc.value.line == 2
    assert str(exc.value).startswith("line 2: ")


@pytest.mark.parametrize("op, observed, expected", [
    ("==", 1, True), ("!=", 1, False), ("<", 0, True), ("<=", 1, True), (">", 1, False), (">=", 2, True),
])
def test_operators(op, observed, expected):
    exp = Expectation(0, "red.leds", op, 1.0)
    assert exp.holds(observed) is expected


def test_bundled_corpus_parses():
    paths = scenario_paths()
    assert len(paths) >= 8
    for p in paths:
        assert load_scenario(p).expectations
