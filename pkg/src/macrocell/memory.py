"""Range-checked byte regions over a backing buffer."""

from __future__ import annotations


class RegionViolation(Exception):
    """An access fell (partly) outside its region."""


class Region:
    """Window ``[start, end)`` of a mutable buffer, addressed from 0.

    Reads and writes are little-endian; every access is validated against the
    window before the buffer is touched.
    """

    __slots__ = ("buffer", "start", "end")

    def __init__(self, buffer: bytearray, start: int = 0, end: int | None = None):
        if end is None:
            end = len(buffer)
        if not 0 <= start <= end <= len(buffer):
            raise ValueError(f"region [{start}, {end}) does not fit a buffer of {len(buffer)} bytes")
        self.buffer = buffer
        self.start = start
        self.end = end

    @property
    def length(self) -> int:
        return self.end - self.start

    def _check(self, offset: int, width: int) -> int:
        if offset < 0 or width < 0 or offset + width > self.length:
            raise RegionViolation(f"access [{offset}, {offset + width}) outside region of {self.length} bytes")
        return self.start + offset

    def read_bytes(self, offset: int, width: int) -> bytes:
        base = self._check(offset, width)
        return bytes(self.buffer[base:base + width])

    def write_bytes(self, offset: int, data: bytes) -> None:
        base = self._check(offset, len(data))
        self.buffer[base:base + len(data)] = data

    def load(self, offset: int, width: int, signed: bool = True) -> int:
        return int.from_bytes(self.read_bytes(offset, width), "little", signed=signed)

    def store(self, offset: int, width: int, value: int) -> None:
        """Store the low ``width`` bytes of ``value`` (two's complement)."""
        mask = (1 << (8 * width)) - 1
        self.write_bytes(offset, (value & mask).to_bytes(width, "little"))

    def snapshot(self) -> bytes:
        return bytes(self.buffer[self.start:self.end])

    def __repr__(self) -> str:
        return f"Region([{self.start}, {self.end}) of {len(self.buffer)})"


class ExternalRegion(Region):
    """The calling application's window holding the external variables."""

    @property
    def start_offset(self) -> int:
        return self.start

    @property
    def end_offset(self) -> int:
        return self.end
