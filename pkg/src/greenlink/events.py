from __future__ import annotations

from typing import NamedTuple


class TraceEvent(NamedTuple):
    t: int
    source: str  # GREEN | RED | LINK
    name: str
    fields: tuple = ()

    def format(self) -> str:
        head = f"t={self.t} {self.source} {self.name}"
        if not self.fields:
            return head
        return head + " " + " ".join(f"{k}={_fmt(v)}" for k, v in self.fields)

    def get(self, key, default=None):
        for k, v in self.fields:
            if k == key:
                return v
        return default


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return v.replace("\r", "\\r").replace("\n", "\\n")
    return str(v)
