"""Scenario files: a timeline of environment changes, link faults and probes.

Grammar, one directive per line (``#`` starts a comment)::

    at <ms> set <env-field> <value>
    at <ms> ramp <env-field> <value> over <ms>
    at <ms> link <param> <value>
    at <ms> link connect|disconnect
    at <ms> expect <probe> <op> <value> [within <ms>]

Values may be double-quoted to include spaces (display text).
"""

from __future__ import annotations

import math
import operator
import shlex
from dataclasses import dataclass
from typing import Optional, Union

from ..envmodel import ENV_FIELDS, EnvEvent


class ScenarioError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


DISPLAY_PROBES = frozenset(
    f"{node}.display.line{n}" for node in ("green", "red") for n in range(1, 5)
)
NUMERIC_PROBES = frozenset({
    "green.tx_frames",
    "red.temp", "red.hum", "red.soil", "red.rain", "red.dist", "red.leds", "red.buzzer",
    "link.delivered_bytes", "link.dropped_bytes",
})
PROBES = DISPLAY_PROBES | NUMERIC_PROBES

OPS = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
ABSENT_TOKENS = ("--", "none")

LINK_PARAMS = {
    "latency_ms": "int",
    "drop_prob": "prob",
    "bit_error_prob": "prob",
    "green_baud": "baud",
    "red_baud": "baud",
}


@dataclass(frozen=True)
class LinkEvent:
    at_ms: int
    action: str  # param | connect | disconnect
    param: Optional[str] = None
    value: Union[int, float, None] = None
    line: int = 0


@dataclass(frozen=True)
class Expectation:
    at_ms: int
    probe: str
    op: str
    value: Union[str, float, None]
    within_ms: Optional[int] = None
    line: int = 0

    def holds(self, observed) -> bool:
        fn = OPS[self.op]
        if self.value is None or observed is None:
            # absence only compares for (in)equality
            if self.op == "==":
                return observed is self.value
            if self.op == "!=":
                return observed is not self.value
            return False
        return fn(observed, self.value)

    def describe(self) -> str:
        v = "--" if self.value is None else self.value
        if isinstance(v, str) and self.probe in DISPLAY_PROBES:
            v = f'"{v}"'
        s = f"at {self.at_ms} expect {self.probe} {self.op} {v}"
        if self.within_ms is not None:
            s += f" within {self.within_ms}"
        return s


@dataclass
class Scenario:
    events: list
    source: str = "<string>"

    @property
    def timeline(self) -> list[EnvEvent]:
        return [e for e in self.events if isinstance(e, EnvEvent)]

    @property
    def link_events(self) -> list[LinkEvent]:
        return [e for e in self.events if isinstance(e, LinkEvent)]

    @property
    def expectations(self) -> list[Expectation]:
        return [e for e in self.events if isinstance(e, Expectation)]


def _int(tok: str, lineno: int, what: str) -> int:
    if not tok.isdigit():
        raise ScenarioError(lineno, f"invalid {what}")
    return int(tok)


def _real(tok: str, lineno: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ScenarioError(lineno, f"invalid {what} {tok!r}") from None
    if not math.isfinite(v):
        raise ScenarioError(lineno, f"invalid {what} {tok!r}")
    return v


def _env_value(field: str, tok: str, lineno: int) -> float:
    if field == "raining":
        t = tok.lower()
        if t in ("1", "true", "yes", "on"):
            return 1.0
        if t in ("0", "false", "no", "off"):
            return 0.0
        raise ScenarioError(lineno, f"invalid value {tok!r} for raining")
    v = _real(tok, lineno, f"value for {field}")
    bounds = {
        "humidity_pct": (0.0, 100.0),
        "soil_moisture_frac": (0.0, 1.0),
        "obstacle_distance_cm": (0.0, math.inf),
    }.get(field)
    if bounds and not bounds[0] <= v <= bounds[1]:
        raise ScenarioError(lineno, f"{field} value {v} out of range")
    return v


def _parse_env(kind, args, at, lineno):
    if not args:
        raise ScenarioError(lineno, f"{kind} needs a field")
    field = args[0]
    if field not in ENV_FIELDS:
        raise ScenarioError(lineno, f"unknown environment field {field!r}")
    if kind == "set":
        if len(args) != 2:
            raise ScenarioError(lineno, "expected: set <field> <value>")
        return EnvEvent(at, field, _env_value(field, args[1], lineno))
    if len(args) != 4 or args[2] != "over":
        raise ScenarioError(lineno, "expected: ramp <field> <value> over <ms>")
    if field == "raining":
        raise ScenarioError(lineno, "raining cannot be ramped")
    return EnvEvent(at, field, _env_value(field, args[1], lineno), _int(args[3], lineno, "ramp duration"))


def _parse_link(args, at, lineno):
    if len(args) == 1 and args[0] in ("connect", "disconnect"):
        return LinkEvent(at, args[0], line=lineno)
    if len(args) != 2:
        raise ScenarioError(lineno, "expected: link <param> <value> or link connect|disconnect")
    param, tok = args
    kind = LINK_PARAMS.get(param)
    if kind is None:
        raise ScenarioError(lineno, f"unknown link parameter {param!r}")
    if kind == "prob":
        v = _real(tok, lineno, param)
        if not 0.0 <= v <= 1.0:
            raise ScenarioError(lineno, f"{param} must be in [0,1]")
    else:
        v = _int(tok, lineno, param)
        if kind == "baud" and v == 0:
            raise ScenarioError(lineno, "baud must be positive")
    return LinkEvent(at, "param", param, v, lineno)


def _parse_expect(args, at, lineno):
    within = None
    if len(args) >= 2 and args[-2] == "within":
        within = _int(args[-1], lineno, "window")
        args = args[:-2]
    if len(args) != 3:
        raise ScenarioError(lineno, "expected: expect <probe> <op> <value> [within <ms>]")
    probe, op, tok = args
    if probe not in PROBES:
        raise ScenarioError(lineno, f"unknown probe {probe!r}")
    if op not in OPS:
        raise ScenarioError(lineno, f"unknown operator {op!r}")
    if probe in DISPLAY_PROBES:
        if op not in ("==", "!="):
            raise ScenarioError(lineno, "display probes compare with == or != only")
        value = tok
    elif tok.lower() in ABSENT_TOKENS:
        value = None
    else:
        value = _real(tok, lineno, "expected value")
    return Expectation(at, probe, op, value, within, lineno)


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    events = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        try:
            toks = shlex.split(raw, comments=True)
        except ValueError as exc:
            raise ScenarioError(lineno, str(exc)) from None
        if not toks:
            continue
        if toks[0] != "at":
            raise ScenarioError(lineno, f"expected 'at', got {toks[0]!r}")
        if len(toks) < 2:
            raise ScenarioError(lineno, "invalid time")
        at = _int(toks[1], lineno, "time")
        if len(toks) < 3:
            raise ScenarioError(lineno, "missing directive")
        kind, args = toks[2], toks[3:]
        if kind in ("set", "ramp"):
            events.append(_parse_env(kind, args, at, lineno))
        elif kind == "link":
            events.append(_parse_link(args, at, lineno))
        elif kind == "expect":
            events.append(_parse_expect(args, at, lineno))
        else:
            raise ScenarioError(lineno, f"unknown directive {kind!r}")
    events.sort(key=lambda e: e.at_ms)  # stable: file order within a tick
    return Scenario(events, source)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), str(path))
