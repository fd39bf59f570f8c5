"""Text model of the 128x64 OLED: 4 lines of 21 characters (6x8 font)."""

from __future__ import annotations

from dataclasses import dataclass

ROWS = 4
COLS = 21


@dataclass(frozen=True)
class DisplayBuffer:
    lines: tuple[str, str, str, str] = ("", "", "", "")

    @classmethod
    def from_lines(cls, lines) -> "DisplayBuffer":
        lines = [str(s)[:COLS] for s in lines][:ROWS]
        lines += [""] * (ROWS - len(lines))
        return cls(tuple(lines))

    def line(self, n: int) -> str:
        """1-based line access, as addressed by scenario probes."""
        return self.lines[n - 1]

    def __iter__(self):
        return iter(self.lines)


def tenths(v: int) -> str:
    sign = "-" if v < 0 else ""
    v = abs(v)
    return f"{sign}{v // 10}.{v % 10}"


def render(temp: str, hum: str, dist: str, soil: str, rain: str) -> DisplayBuffer:
    return DisplayBuffer.from_lines([
        f"T:{temp}C H:{hum}%",
        f"Dist:{dist}cm",
        f"Soil:{soil}%",
        f"Rain:{rain}",
    ])
