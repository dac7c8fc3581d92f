"""Elementary performance data: per-platform instruction costs.

File format (``.epd``), one ``key = value`` per line, ``#`` starts a comment::

    platform.hardware_type = CPU-A
    platform.hardware_version = 1
    platform.os_type = RTOS
    platform.os_version = 3
    platform.container_version = 1.0
    overhead.request = 50
    op.PUSH_CONST = 3
    ...            # one op.<MNEMONIC> line per instruction
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from macrocell import errors as E
from macrocell.isa import MNEMONICS

PLATFORM_KEYS = (
    ("hardware_type", "platform.hardware_type"),
    ("hardware_version", "platform.hardware_version"),
    ("os_type", "platform.os_type"),
    ("os_version", "platform.os_version"),
    ("container_version", "platform.container_version"),
)
OVERHEAD_KEY = "overhead.request"
_INT_RE = re.compile(r"[+-]?[0-9]+\Z")


@dataclass(frozen=True)
class PlatformType:
    hardware_type: str
    hardware_version: str
    os_type: str
    os_version: str
    container_version: str

    def __post_init__(self):
        for attr, _ in PLATFORM_KEYS:
            value = getattr(self, attr)
            if not isinstance(value, str) or not value or value != value.strip() or "/" in value:
                raise ValueError(f"platform field {attr} must be non-empty text without '/' or edge spaces: {value!r}")

    @property
    def identity(self) -> str:
        return "/".join(self.fields())

    def fields(self) -> tuple[str, str, str, str, str]:
        return (self.hardware_type, self.hardware_version, self.os_type, self.os_version, self.container_version)

    @classmethod
    def from_identity(cls, identity: str) -> "PlatformType":
        parts = identity.split("/")
        if len(parts) != 5:
            raise ValueError(f"platform identity needs 5 '/'-separated fields: {identity!r}")
        return cls(*parts)

    def __str__(self) -> str:
        return self.identity


@dataclass(frozen=True)
class PerfData:
    platform: PlatformType
    request_overhead: int
    op_costs: Mapping[str, int]

    def __post_init__(self):
        costs = dict(self.op_costs)
        missing = [m for m in MNEMONICS if m not in costs]
        if missing:
            raise E.MissingOpcode(missing[0])
        extra = sorted(set(costs) - set(MNEMONICS))
        if extra:
            raise E.UnknownKey(f"op.{extra[0]}")
        if any(not isinstance(c, int) or c <= 0 for c in costs.values()):
            raise ValueError("instruction costs must be positive integers")
        if not isinstance(self.request_overhead, int) or self.request_overhead < 0:
            raise ValueError("request overhead must be a non-negative integer")
        object.__setattr__(self, "op_costs", MappingProxyType({m: costs[m] for m in MNEMONICS}))

    def __eq__(self, other):
        if not isinstance(other, PerfData):
            return NotImplemented
        return (self.platform, self.request_overhead, dict(self.op_costs)) == (
            other.platform, other.request_overhead, dict(other.op_costs))

    def __hash__(self):
        return hash((self.platform, self.request_overhead, tuple(self.op_costs.items())))

    @property
    def identity(self) -> str:
        return self.platform.identity


def platform_identity(perf: PerfData) -> str:
    return perf.platform.identity


def uniform_perf_data(platform: PlatformType, cost: int = 1, overhead: int = 0) -> PerfData:
    return PerfData(platform, overhead, {m: cost for m in MNEMONICS})


def parse_perf_data(text: str) -> PerfData:
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise E.MalformedValue(lineno, f"expected 'key = value': {raw.strip()!r}")
        known = key == OVERHEAD_KEY or key in dict(PLATFORM_KEYS).values() or (
            key.startswith("op.") and key[3:] in MNEMONICS
        )
        if not known:
            raise E.UnknownKey(key)
        if key in values:
            raise E.DuplicateKey(key)
        values[key] = value
        lines[key] = lineno

    fields = {}
    for attr, key in PLATFORM_KEYS:
        if key not in values:
            raise E.MissingPlatformField(key)
        if "/" in values[key]:
            raise E.MalformedValue(lines[key], f"{key} may not contain '/'")
        fields[attr] = values[key]
    if OVERHEAD_KEY not in values:
        raise E.MissingKey(OVERHEAD_KEY)

    def integer(key: str, minimum: int) -> int:
        text = values[key]
        if not _INT_RE.match(text) or int(text) < minimum:
            raise E.MalformedValue(lines[key], f"{key} must be an integer >= {minimum}, got {text!r}")
        return int(text)

    overhead = integer(OVERHEAD_KEY, 0)
    costs = {}
    for mnemonic in MNEMONICS:
        key = f"op.{mnemonic}"
        if key not in values:
            raise E.MissingOpcode(mnemonic)
        costs[mnemonic] = integer(key, 1)
    return PerfData(PlatformType(**fields), overhead, costs)


def format_perf_data(perf: PerfData) -> str:
    lines = [f"{key} = {getattr(perf.platform, attr)}" for attr, key in PLATFORM_KEYS]
    lines.append(f"{OVERHEAD_KEY} = {perf.request_overhead}")
    lines += [f"op.{m} = {c}" for m, c in perf.op_costs.items()]
    return "\n".join(lines) + "\n"


def read_perf_file(path) -> PerfData:
    with open(path, encoding="utf-8") as fh:
        return parse_perf_data(fh.read())
