"""Trace output: ``t=<ms> <GREEN|RED|LINK> <EVENT> <key=value ...>`` per line."""

from __future__ import annotations

from typing import Iterable, TextIO

from ..events import TraceEvent


def format_trace(events: Iterable[TraceEvent]) -> str:
    return "".join(ev.format() + "\n" for ev in events)


def emit_trace(events: Iterable[TraceEvent], sink: TextIO) -> None:
    """Write events to ``sink``; write failures propagate as OSError."""
    for ev in events:
        sink.write(ev.format() + "\n")
    sink.flush()
