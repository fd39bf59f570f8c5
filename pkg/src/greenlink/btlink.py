"""HC-05 module pair: AT configuration, pairing and the serial byte channel.

The channel models an 8N1 UART at the configured baud: every byte occupies
10 bit-times on the wire, tracked exactly in microseconds (as a Fraction)
and rounded up to the 1 ms simulation grid only at delivery.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .prng import SplitMix64

BITS_PER_BYTE = 10  # 8N1
DEFAULT_BAUD = 9600

OK = "OK"
ERROR = "ERROR:(0)"
CRLF = "\r\n"
UNSET_ADDR = "0:0:0"


class Role(enum.IntEnum):
    SLAVE = 0
    MASTER = 1


class Mode(enum.Enum):
    AT = "AT"
    DATA = "DATA"


class Direction(enum.Enum):
    GREEN_TO_RED = "G2R"
    RED_TO_GREEN = "R2G"


def normalize_addr(addr: str) -> str:
    """HC-05 addresses are NAP:UAP:LAP hex; commands use commas, replies colons."""
    parts = addr.strip().lower().replace(",", ":").split(":")
    if len(parts) != 3 or not all(parts):
        raise ValueError(f"bad address {addr!r}")
    try:
        return ":".join(format(int(p, 16), "x") for p in parts)
    except ValueError:
        raise ValueError(f"bad address {addr!r}") from None


@dataclass
class Hc05Config:
    own_addr: str
    role: Role = Role.SLAVE
    baud: int = DEFAULT_BAUD
    bound_addr: Optional[str] = None
    mode: Mode = Mode.AT
    # commands issued while in data mode, which go out as payload instead
    data_mode_misuse: int = 0

    def __post_init__(self):
        self.own_addr = normalize_addr(self.own_addr)
        if self.bound_addr is not None:
            self.bound_addr = normalize_addr(self.bound_addr)


def at_command(module: Hc05Config, command: str) -> str:
    """Execute one AT command and return the response text.

    Multi-line responses are joined with CRLF; the final line carries no
    terminator here (the wire adds it).  In data mode nothing is executed
    and the empty string is returned.
    """
    if module.mode is not Mode.AT:
        module.data_mode_misuse += 1
        return ""
    cmd = command.strip()
    if cmd == "AT":
        return OK
    if not cmd.startswith("AT+"):
        return ERROR
    name, sep, arg = cmd[3:].partition("=")
    if not sep:
        if name == "ROLE?":
            return f"+ROLE:{int(module.role)}{CRLF}{OK}"
        if name == "UART?":
            return f"+UART:{module.baud},0,0{CRLF}{OK}"
        if name == "BIND?":
            return f"+BIND:{module.bound_addr or UNSET_ADDR}{CRLF}{OK}"
        if name == "ADDR?":
            return f"+ADDR:{module.own_addr}{CRLF}{OK}"
        return ERROR
    if name == "ROLE":
        if arg not in ("0", "1"):
            return ERROR
        module.role = Role(int(arg))
        return OK
    if name == "UART":
        fields = arg.split(",")
        if len(fields) != 3 or fields[1:] != ["0", "0"] or not fields[0].isdigit():
            return ERROR
        baud = int(fields[0])
        if baud <= 0:
            return ERROR
        module.baud = baud
        return OK
    if name == "BIND":
        try:
            module.bound_addr = normalize_addr(arg)
        except ValueError:
            return ERROR
        return OK
    return ERROR


def try_connect(a: Hc05Config, b: Hc05Config, channel: Optional["ByteChannel"] = None) -> bool:
    """Pair two modules; on success the channel (if given) is connected at their baud."""
    ok = (
        a.mode is Mode.DATA
        and b.mode is Mode.DATA
        and {a.role, b.role} == {Role.MASTER, Role.SLAVE}
        and a.baud == b.baud
    )
    if ok:
        master, slave = (a, b) if a.role is Role.MASTER else (b, a)
        ok = master.bound_addr is None or master.bound_addr == slave.own_addr
    if channel is not None:
        if ok:
            channel.connect(a.baud)
        else:
            channel.disconnect()
    return ok


@dataclass
class LinkImpairments:
    latency_ms: int = 0
    drop_prob: float = 0.0
    bit_error_prob: float = 0.0
    connected: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be >= 0")
        for name in ("drop_prob", "bit_error_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {p}")


@dataclass
class WireRecord:
    """One byte's passage over the wire, kept when logging is enabled."""

    direction: Direction
    start_us: Fraction
    end_us: Fraction
    deliver_ms: int
    dropped: bool
    flipped_bit: Optional[int]


@dataclass
class Burst:
    start_us: Fraction
    end_us: Fraction
    count: int
    dropped: int = 0
    flipped: int = 0


@dataclass
class _Lane:
    queue: deque = field(default_factory=deque)
    next_free_us: Fraction = Fraction(0)
    last_deliver_ms: int = 0


class ByteChannel:
    """Baud-limited, impaired FIFO byte pipe between two HC-05 modules.

    For each byte sent, the PRNG is drawn three times in a fixed order
    (drop test, bit-error test, bit index) so the random stream depends
    only on the number of bytes sent while connected.
    """

    def __init__(self, baud: int = DEFAULT_BAUD, impairments: Optional[LinkImpairments] = None,
                 seed: int = 1, keep_log: bool = False):
        self.baud = baud
        self.impairments = impairments if impairments is not None else LinkImpairments()
        self.rng = SplitMix64(seed)
        self._lanes = {d: _Lane() for d in Direction}
        self.keep_log = keep_log
        self.log: list[WireRecord] = []
        self.last_burst: Optional[Burst] = None
        self.sent_bytes = 0
        self.delivered_bytes = 0
        self.dropped_bytes = 0
        self.corrupted_bytes = 0
        self.disconnected_bytes = 0

    @property
    def connected(self) -> bool:
        return self.impairments.connected

    @property
    def byte_time_us(self) -> Fraction:
        return Fraction(BITS_PER_BYTE * 1_000_000, self.baud)

    def connect(self, baud: Optional[int] = None):
        if baud is not None:
            self.baud = baud
        self.impairments.connected = True

    def disconnect(self):
        """Drop the link; bytes still in flight are lost."""
        self.impairments.connected = False
        for lane in self._lanes.values():
            self.disconnected_bytes += len(lane.queue)
            lane.queue.clear()

    def send_bytes(self, direction: Direction, data, now_ms: int) -> int:
        """Put bytes on the wire; returns how many the sender's UART accepted.

        Dropped bytes still consume wire time: loss happens in the air, after
        the UART has clocked them out.
        """
        n = len(data)
        if not self.impairments.connected:
            self.disconnected_bytes += n
            self.last_burst = None
            return 0
        imp = self.impairments
        lane = self._lanes[direction]
        byte_time = self.byte_time_us
        start = max(Fraction(now_ms * 1000), lane.next_free_us)
        burst = Burst(start_us=start, end_us=start, count=n)
        rng = self.rng
        for b in data:
            end = start + byte_time
            deliver = max(math.ceil(end / 1000) + imp.latency_ms, lane.last_deliver_ms)
            drop = rng.random() < imp.drop_prob
            flip = rng.random() < imp.bit_error_prob
            bit = rng.next_u64() & 7
            flipped_bit = None
            if drop:
                self.dropped_bytes += 1
                burst.dropped += 1
            else:
                if flip:
                    b ^= 1 << bit
                    flipped_bit = bit
                    self.corrupted_bytes += 1
                    burst.flipped += 1
                lane.queue.append((deliver, b))
                lane.last_deliver_ms = deliver
            if self.keep_log:
                self.log.append(WireRecord(direction, start, end, deliver, drop, flipped_bit))
            start = end
        lane.next_free_us = start
        burst.end_us = start
        self.sent_bytes += n
        self.last_burst = burst
        return n

    def poll_receive(self, direction: Direction, now_ms: int) -> bytes:
        q = self._lanes[direction].queue
        if not q or q[0][0] > now_ms:
            return b""
        out = bytearray()
        while q and q[0][0] <= now_ms:
            out.append(q.popleft()[1])
        self.delivered_bytes += len(out)
        return bytes(out)

    def in_flight(self, direction: Direction) -> int:
        return len(self._lanes[direction].queue)


def send_bytes(channel: ByteChannel, direction: Direction, data, now_ms: int) -> int:
    return channel.send_bytes(direction, data, now_ms)


def poll_receive(channel: ByteChannel, direction: Direction, now_ms: int) -> bytes:
    return channel.poll_receive(direction, now_ms)
