"""Millisecond-tick simulation of the Green House -> Red House system.

Per tick, in this order: apply scenario link events, sample the
environment (sample ticks only), step the master, deliver channel bytes
and step the slave, evaluate expectations, emit snapshots.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from ..btlink import (ByteChannel, Hc05Config, LinkImpairments, Mode, Role,
                      at_command, try_connect)
from ..envmodel import env_at
from ..events import TraceEvent
from ..greennode import PIN_MAP as GREEN_PINS, MasterNode, display_event
from ..rednode import PIN_MAP as RED_PINS, SlaveNode
from ..wireproto import FieldId
from .scenario import DISPLAY_PROBES, Expectation, LinkEvent, Scenario

log = logging.getLogger(__name__)

GREEN_ADDR = "98d3:31:f5a1b2"
RED_ADDR = "98d3:32:207c4e"


@dataclass
class ExpectResult:
    expectation: Expectation
    passed: bool
    observed: object = None
    decided_at: Optional[int] = None
    note: str = ""

    def describe(self) -> str:
        exp = self.expectation
        status = "PASS" if self.passed else "FAIL"
        obs = "--" if self.observed is None else self.observed
        where = f" at t={self.decided_at}" if self.decided_at is not None else ""
        note = f"; {self.note}" if self.note else ""
        return f"{status} line {exp.line}: {exp.describe()} (observed {obs}{where}{note})"


@dataclass
class SimReport:
    duration_ms: int
    seed: int
    results: list[ExpectResult]
    counters: dict
    green_display: tuple
    red_display: tuple
    warnings: list[str] = field(default_factory=list)
    trace: list[TraceEvent] = field(default_factory=list)
    source: str = ""

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 2

    def to_json_dict(self) -> dict:
        d = dict(self.counters)
        for i, line in enumerate(self.green_display, 1):
            d[f"green.display.line{i}"] = line
        for i, line in enumerate(self.red_display, 1):
            d[f"red.display.line{i}"] = line
        d["warnings"] = len(self.warnings)
        return d

    def summary(self) -> str:
        c = self.counters
        out = [
            f"scenario: {self.source}",
            f"duration: {self.duration_ms} ms  seed: {self.seed}  baud: {c['baud']}",
            f"frames: tx={c['green.tx_frames']} rx={c['red.rx_frames']}  "
            f"bytes: sent={c['link.sent_bytes']} delivered={c['link.delivered_bytes']} "
            f"dropped={c['link.dropped_bytes']} corrupted={c['link.corrupted_bytes']} "
            f"rejected={c['red.rejected_bytes']}",
            "GREEN display: " + " | ".join(self.green_display),
            "RED display:   " + " | ".join(self.red_display),
            f"RED leds={c['red.leds']} buzzer={'on' if c['red.buzzer'] else 'off'}",
            f"expectations: {c['expect.passed']}/{c['expect.total']} passed",
        ]
        out += ["  " + r.describe() for r in self.results]
        out += [f"warning: {w}" for w in self.warnings]
        return "\n".join(out)


class Simulation:
    """One run's worth of state: both nodes, both HC-05 modules, the link."""

    def __init__(self, scenario: Scenario, seed: int = 1, baud: int = 9600,
                 impairments: Optional[LinkImpairments] = None, skip_config: bool = False,
                 snapshot_every: Optional[int] = None, keep_log: bool = False):
        self.scenario = scenario
        self.seed = seed
        self.baud = baud
        imp = impairments or LinkImpairments()
        imp = LinkImpairments(imp.latency_ms, imp.drop_prob, imp.bit_error_prob, connected=False)
        self.channel = ByteChannel(baud, imp, seed=seed, keep_log=keep_log)
        self.green_bt = Hc05Config(GREEN_ADDR)
        self.red_bt = Hc05Config(RED_ADDR)
        self.master = MasterNode()
        self.slave = SlaveNode()
        self.skip_config = skip_config
        self.snapshot_every = snapshot_every
        self.trace: list[TraceEvent] = []
        self.results: list[ExpectResult] = []
        self.warnings: list[str] = []
        self.now = -1
        self._timeline = scenario.timeline
        self._link_events = scenario.link_events
        self._expectations = scenario.expectations
        self._next_link = 0
        self._next_expect = 0
        self._active: list[Expectation] = []
        self._failed_connect_at: Optional[int] = None
        self._started = False

    # -- configuration -------------------------------------------------

    def _at(self, t, name, module, cmd):
        resp = at_command(module, cmd)
        self.trace.append(TraceEvent(t, "LINK", "AT", (("module", name), ("cmd", cmd), ("resp", resp))))
        return resp

    def _set_mode(self, t, name, module, mode):
        module.mode = mode
        self.trace.append(TraceEvent(t, "LINK", "MODE", (("module", name), ("mode", mode.value))))

    def _connect(self, t):
        ok = try_connect(self.green_bt, self.red_bt, self.channel)
        self.trace.append(TraceEvent(t, "LINK", "CONNECT", (
            ("ok", ok), ("green_baud", self.green_bt.baud), ("red_baud", self.red_bt.baud))))
        if ok:
            self._failed_connect_at = None
        else:
            self._failed_connect_at = t
            log.info("t=%d: HC-05 pairing failed", t)
        return ok

    def configure(self):
        """Pair the modules; replays the AT session unless ``skip_config``."""
        t = 0
        self.trace.append(TraceEvent(t, "GREEN", "PINMAP", GREEN_PINS))
        self.trace.append(TraceEvent(t, "RED", "PINMAP", RED_PINS))
        g, r = self.green_bt, self.red_bt
        if self.skip_config:
            g.role, g.baud, g.bound_addr, g.mode = Role.MASTER, self.baud, r.own_addr, Mode.DATA
            r.role, r.baud, r.mode = Role.SLAVE, self.baud, Mode.DATA
        else:
            bind = r.own_addr.replace(":", ",")
            for cmd in ("AT", "AT+ROLE=1", f"AT+UART={self.baud},0,0", f"AT+BIND={bind}", "AT+ROLE?"):
                self._at(t, "GREEN", g, cmd)
            for cmd in ("AT", "AT+ROLE=0", f"AT+UART={self.baud},0,0", "AT+ROLE?"):
                self._at(t, "RED", r, cmd)
            self._set_mode(t, "GREEN", g, Mode.DATA)
            self._set_mode(t, "RED", r, Mode.DATA)
        self._connect(t)
        self._started = True

    # -- scenario events ------------------------------------------------

    def _apply_link(self, ev: LinkEvent, t: int):
        ch = self.channel
        if ev.action == "connect":
            self._connect(t)
        elif ev.action == "disconnect":
            ch.disconnect()
            self.trace.append(TraceEvent(t, "LINK", "DISCONNECT"))
        elif ev.param in ("green_baud", "red_baud"):
            name, module = ("GREEN", self.green_bt) if ev.param == "green_baud" else ("RED", self.red_bt)
            ch.disconnect()
            self.trace.append(TraceEvent(t, "LINK", "DISCONNECT"))
            self._set_mode(t, name, module, Mode.AT)
            self._at(t, name, module, f"AT+UART={ev.value},0,0")
            self._set_mode(t, name, module, Mode.DATA)
            self._connect(t)
        else:
            setattr(ch.impairments, ev.param, ev.value)
            self.trace.append(TraceEvent(t, "LINK", "PARAM", (("name", ev.param), ("value", ev.value))))

    # -- probes ---------------------------------------------------------

    def probe(self, name: str, t: Optional[int] = None):
        t = self.now if t is None else t
        if name in DISPLAY_PROBES:
            node, _, line = name.split(".")
            disp = self.master.display if node == "green" else self.slave.display
            return disp.line(int(line[-1]))
        if name == "green.tx_frames":
            return self.master.tx_frames
        if name == "red.leds":
            return self.slave.leds
        if name == "red.buzzer":
            return int(self.slave.buzzer)
        if name == "link.delivered_bytes":
            return self.channel.delivered_bytes
        if name == "link.dropped_bytes":
            return self.channel.dropped_bytes
        field, scale = {
            "red.temp": (FieldId.TEMPERATURE, 10),
            "red.hum": (FieldId.HUMIDITY, 10),
            "red.dist": (FieldId.DISTANCE_TENTHS_CM, 10),
            "red.soil": (FieldId.SOIL_COUNTS, 1),
            "red.rain": (FieldId.RAIN, 1),
        }[name]
        v = self.slave.value(field, t)
        if v is None:
            return None
        return v / scale if scale != 1 else v

    def _evaluate(self, t: int):
        exps = self._expectations
        while self._next_expect < len(exps) and exps[self._next_expect].at_ms <= t:
            self._active.append(exps[self._next_expect])
            self._next_expect += 1
        if not self._active:
            return
        still = []
        for exp in self._active:
            observed = self.probe(exp.probe, t)
            if exp.holds(observed):
                self.results.append(ExpectResult(exp, True, observed, t))
            elif exp.within_ms is None or t >= exp.at_ms + exp.within_ms:
                self.results.append(ExpectResult(exp, False, observed, t))
            else:
                still.append(exp)
        self._active = still

    # -- main loop ------------------------------------------------------

    def step(self, t: int):
        if not self._started:
            self.configure()
        if t != self.now + 1:
            raise ValueError(f"ticks must be consecutive: expected {self.now + 1}, got {t}")
        self.now = t
        trace = self.trace
        links = self._link_events
        while self._next_link < len(links) and links[self._next_link].at_ms <= t:
            self._apply_link(links[self._next_link], t)
            self._next_link += 1

        master = self.master
        env = env_at(self._timeline, t) if master.is_sample_tick(t) else None
        before = master.tx_frames
        trace.extend(master.step(env, self.channel, t))
        if master.tx_frames != before:
            burst = self.channel.last_burst
            if burst is None:
                trace.append(TraceEvent(t, "LINK", "DISCARD", (("bytes", 6),)))
            else:
                trace.append(TraceEvent(t, "LINK", "WIRE", (
                    ("bytes", burst.count), ("start_us", f"{float(burst.start_us):.3f}"),
                    ("end_us", f"{float(burst.end_us):.3f}"),
                    ("dropped", burst.dropped), ("flipped", burst.flipped))))

        trace.extend(self.slave.step(self.channel, t))
        self._evaluate(t)
        if self.snapshot_every and t % self.snapshot_every == 0:
            self.snapshot(t)

    def snapshot(self, t: int):
        ch = self.channel
        self.trace.append(display_event(t, "GREEN", self.master.display))
        self.trace.append(display_event(t, "RED", self.slave.display))
        self.trace.append(TraceEvent(t, "LINK", "COUNTERS", (
            ("sent", ch.sent_bytes), ("delivered", ch.delivered_bytes),
            ("dropped", ch.dropped_bytes), ("corrupted", ch.corrupted_bytes))))

    def finish(self, duration_ms: int) -> SimReport:
        for exp in self._active:
            self.results.append(ExpectResult(exp, False, self.probe(exp.probe, self.now), self.now,
                                             "window still open at end of run"))
        self._active = []
        for exp in self._expectations[self._next_expect:]:
            self.results.append(ExpectResult(exp, False, None, None, "time not reached"))
        self._next_expect = len(self._expectations)
        self.results.sort(key=lambda r: (r.expectation.at_ms, r.expectation.line))
        if self._failed_connect_at is not None:
            self.warnings.append(
                f"HC-05 pairing failed at t={self._failed_connect_at} and was never re-established")
        return SimReport(
            duration_ms=duration_ms,
            seed=self.seed,
            results=self.results,
            counters=self.counters(duration_ms),
            green_display=self.master.display.lines,
            red_display=self.slave.display.lines,
            warnings=self.warnings,
            trace=self.trace,
            source=self.scenario.source,
        )

    def counters(self, duration_ms: int) -> dict:
        ch, m, s = self.channel, self.master, self.slave
        passed = sum(r.passed for r in self.results)
        return {
            "duration_ms": duration_ms,
            "seed": self.seed,
            "baud": ch.baud,
            "green.tx_frames": m.tx_frames,
            "link.sent_bytes": ch.sent_bytes,
            "link.delivered_bytes": ch.delivered_bytes,
            "link.dropped_bytes": ch.dropped_bytes,
            "link.corrupted_bytes": ch.corrupted_bytes,
            "link.disconnected_bytes": ch.disconnected_bytes,
            "link.connected": int(ch.connected),
            "red.rx_frames": s.rx_frames,
            "red.invalid_frames": s.invalid_frames,
            "red.rejected_bytes": s.decoder.rejected_bytes,
            "red.leds": s.leds,
            "red.buzzer": int(s.buzzer),
            "expect.total": len(self.results),
            "expect.passed": passed,
            "expect.failed": len(self.results) - passed,
        }

    def run(self, duration_ms: int) -> SimReport:
        if duration_ms <= 0:
            raise ValueError("duration_ms must be positive")
        step = self.step
        for t in range(self.now + 1, duration_ms + 1):
            step(t)
        return self.finish(duration_ms)


def run(scenario: Scenario, duration_ms: int, seed: int = 1,
        link_defaults: Optional[LinkImpairments] = None, **kwargs) -> SimReport:
    return Simulation(scenario, seed=seed, impairments=link_defaults, **kwargs).run(duration_ms)
