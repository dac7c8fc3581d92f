"""Compiled file (``.mcf``) layout, serializer and hardened reader.

Layout, all integers little-endian unsigned, strings u16-length-prefixed UTF-8::

    magic              4   b"MCF\\0"
    format_version     u16
    compiler_type      str
    compiler_version   str
    macro_code_length  u32
    external_var_size  u32
    local_var_size     u32
    platform_count     u16
    content_checksum   u32   CRC-32 of everything after the header
    macro code         macro_code_length bytes
    platform entries   platform_count x (5 str fields, wcet u64)
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

from macrocell import errors as E
from macrocell.isa import MacroCode
from macrocell.perfdata import PlatformType

MAGIC = b"MCF\x00"
FORMAT_VERSION = 1

_U16 = 0xFFFF
_U32 = 0xFFFFFFFF
_U64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class WcetEntry:
    platform: PlatformType
    wcet: int


@dataclass(frozen=True)
class Header:
    compiler_type: str
    compiler_version: str
    macro_code_length: int
    external_var_size: int
    local_var_size: int
    platform_type_count: int
    content_checksum: int
    format_version: int = FORMAT_VERSION
    magic: bytes = MAGIC


@dataclass(frozen=True)
class CompiledFile:
    header: Header
    macro_code: MacroCode
    wcet_table: tuple[WcetEntry, ...]

    def wcet_for(self, identity: str) -> int | None:
        for entry in self.wcet_table:
            if entry.platform.identity == identity:
                return entry.wcet
        return None


# --- writing ---------------------------------------------------------------


def _u(value: int, limit: int, what: str) -> int:
    if not 0 <= value <= limit:
        raise E.FieldOverflow(f"{what} = {value} does not fit its field")
    return value


def _text(value: str, what: str) -> bytes:
    raw = value.encode("utf-8")
    _u(len(raw), _U16, f"length of {what}")
    return struct.pack("<H", len(raw)) + raw


def encode_table(entries) -> bytes:
    out = bytearray()
    for e in entries:
        for i, f in enumerate(e.platform.fields()):
            out += _text(f, f"platform field {i}")
        out += struct.pack("<Q", _u(e.wcet, _U64, "wcet"))
    return bytes(out)


def content_checksum(code: bytes, entries) -> int:
    return zlib.crc32(code + encode_table(entries)) & _U32


def make_compiled_file(
    macro_code: MacroCode,
    wcet_table,
    external_var_size: int,
    local_var_size: int,
    compiler_type: str,
    compiler_version: str,
) -> CompiledFile:
    """Assemble a CompiledFile whose header agrees with its contents."""
    entries = tuple(wcet_table)
    code = macro_code.to_bytes()
    header = Header(
        compiler_type=compiler_type,
        compiler_version=compiler_version,
        macro_code_length=len(code),
        external_var_size=external_var_size,
        local_var_size=local_var_size,
        platform_type_count=len(entries),
        content_checksum=content_checksum(code, entries),
    )
    return CompiledFile(header, macro_code, entries)


def serialize(cf: CompiledFile) -> bytes:
    h = cf.header
    code = cf.macro_code.to_bytes()
    if h.magic != MAGIC:
        raise E.BadMagic(f"magic {h.magic!r}")
    if (h.macro_code_length != len(code) or h.platform_type_count != len(cf.wcet_table)
            or h.content_checksum != content_checksum(code, cf.wcet_table)):
        raise E.InconsistentHeader("header does not describe the file contents")
    out = bytearray(MAGIC)
    out += struct.pack("<H", _u(h.format_version, _U16, "format_version"))
    out += _text(h.compiler_type, "compiler_type")
    out += _text(h.compiler_version, "compiler_version")
    out += struct.pack(
        "<IIIHI",
        _u(h.macro_code_length, _U32, "macro_code_length"),
        _u(h.external_var_size, _U32, "external_var_size"),
        _u(h.local_var_size, _U32, "local_var_size"),
        _u(h.platform_type_count, _U16, "platform_type_count"),
        h.content_checksum,
    )
    out += code
    out += encode_table(cf.wcet_table)
    return bytes(out)


# --- reading ---------------------------------------------------------------


class _Reader:
    """Cursor that refuses to move past the end of the buffer."""

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def take(self, n: int, what: str) -> bytes:
        if n > len(self.data) - self.pos:
            raise E.Truncated(f"{what}: need {n} bytes at offset {self.pos}, {len(self.data) - self.pos} left")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def text(self, what: str) -> str:
        (n,) = self.unpack("<H", f"length of {what}")
        raw = self.take(n, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise E.InconsistentHeader(f"{what} is not valid UTF-8") from None


def _read_header(data: bytes) -> tuple[Header, int]:
    r = _Reader(bytes(data))
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise E.BadMagic(f"expected {MAGIC!r}, found {magic!r}")
    (version,) = r.unpack("<H", "format_version")
    if version != FORMAT_VERSION:
        raise E.UnsupportedFormatVersion(f"format version {version}, this reader supports {FORMAT_VERSION}")
    ctype = r.text("compiler_type")
    cversion = r.text("compiler_version")
    code_len, ext, loc, count, crc = r.unpack("<IIIHI", "header sizes")
    header = Header(ctype, cversion, code_len, ext, loc, count, crc, version)
    return header, r.pos


def parse_header_only(data: bytes) -> Header:
    """Parse just the header; the body may be absent."""
    return _read_header(data)[0]


def header_length(data: bytes) -> int:
    return _read_header(data)[1]


def deserialize(data: bytes) -> CompiledFile:
    """Parse and fully validate a compiled file.

    Checks run in a fixed order: header fields, section lengths, checksum,
    then decoding of the macro-code and platform table.
    """
    data = bytes(data)
    header, pos = _read_header(data)
    r = _Reader(data, pos)
    body_start = pos
    code = r.take(header.macro_code_length, "macro code")
    raw_entries = []
    for k in range(header.platform_type_count):
        fields = tuple(r.text(f"platform {k} field {j}") for j in range(5))
        (wcet,) = r.unpack("<Q", f"platform {k} wcet")
        raw_entries.append((fields, wcet))
    if r.pos != len(data):
        raise E.InconsistentHeader(f"{len(data) - r.pos} trailing bytes after the platform table")
    if zlib.crc32(data[body_start:]) & _U32 != header.content_checksum:
        raise E.ChecksumMismatch("content checksum does not match")

    try:
        macro_code = MacroCode.from_bytes(code)
    except E.DecodeError as exc:
        raise E.InconsistentHeader(f"macro code does not decode: {exc}") from exc
    entries = []
    seen = set()
    for fields, wcet in raw_entries:
        try:
            platform = PlatformType(*fields)
        except ValueError as exc:
            raise E.InconsistentHeader(str(exc)) from None
        if platform.identity in seen:
            raise E.InconsistentHeader(f"platform {platform.identity} listed twice")
        seen.add(platform.identity)
        entries.append(WcetEntry(platform, wcet))
    return CompiledFile(header, macro_code, tuple(entries))
