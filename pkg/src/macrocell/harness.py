"""Simulated calling application.

Owns the external region, reads and writes external variables by path
(``ground``, ``calculator[3].criticity``), and drives the init/execute
protocol against a container while recording the message trace.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator, Sequence

from macrocell import errors as E
from macrocell.compiler.layout import Slot, VariableLayout, layout_declarations
from macrocell.container import Container, ExecRequest, ExecResponse, InitRequest, InitResponse
from macrocell.lang import ast as A
from macrocell.lang import check_source
from macrocell.memory import ExternalRegion

_PATH_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\[\s*(-?[0-9]+)\s*\])?(?:\.([A-Za-z_][A-Za-z0-9_]*))?\Z")


def rack_manager_source() -> str:
    """The shipped Rack Manager decision rule."""
    return resources.files("macrocell.data").joinpath("rack_manager.adp").read_text(encoding="utf-8")


def source_layout(source: str) -> VariableLayout:
    """Layout the calling application derives from the agreed source."""
    return layout_declarations(check_source(source).declarations)


def resolve_path(slots: Sequence[Slot], path: str) -> tuple[int, A.ScalarType]:
    """Byte offset and scalar type of ``path`` within the external region."""
    m = _PATH_RE.match(path.strip())
    if m is None:
        raise E.UnknownPath(f"malformed variable path {path!r}")
    name, index, member = m.group(1), m.group(2), m.group(3)
    slot = next((s for s in slots if s.name == name), None)
    if slot is None:
        raise E.UnknownPath(f"no external variable {name!r}")
    t = slot.type
    offset = slot.offset
    if isinstance(t, A.ArrayType):
        if index is None:
            raise E.UnknownPath(f"{name!r} is an array; an index is required")
        k = int(index)
        if not t.lo <= k <= t.hi:
            raise E.IndexOutOfDeclaredRange(f"{path}: index {k} outside {t.lo}..{t.hi}")
        offset += (k - t.lo) * t.element.byte_size
        t = t.element
    elif index is not None:
        raise E.UnknownPath(f"{name!r} is not an array")
    if isinstance(t, A.StructType):
        found = t.field_offset(member) if member is not None else None
        if found is None:
            raise E.UnknownPath(f"{path}: expected one of the members {[f.name for f in t.fields]}")
        offset += found[0]
        t = found[1]
    elif member is not None:
        raise E.UnknownPath(f"{name!r} has no member {member!r}")
    return offset, t


def scalar_paths(slots: Sequence[Slot]) -> Iterator[str]:
    """Every addressable scalar path, in layout order."""
    for s in slots:
        t = s.type
        indices = [None]
        if isinstance(t, A.ArrayType):
            indices = list(range(t.lo, t.hi + 1))
            t = t.element
        for k in indices:
            head = s.name if k is None else f"{s.name}[{k}]"
            if isinstance(t, A.StructType):
                for f in t.fields:
                    yield f"{head}.{f.name}"
            else:
                yield head


@dataclass
class ExternalBinding:
    layout: VariableLayout
    region: ExternalRegion

    def __post_init__(self):
        if self.region.length != self.layout.external_total:
            raise ValueError(
                f"region of {self.region.length} bytes for {self.layout.external_total} bytes of externals"
            )

    @classmethod
    def allocate(cls, layout: VariableLayout, buffer: bytearray | None = None, start: int = 0) -> "ExternalBinding":
        if buffer is None:
            buffer = bytearray(start + layout.external_total)
        return cls(layout, ExternalRegion(buffer, start, start + layout.external_total))

    def write(self, path: str, value) -> None:
        offset, t = resolve_path(self.layout.externals, path)
        if t.is_bool:
            if value not in (True, False, 0, 1):
                raise E.ValueOverflow(f"{path} is bool, got {value!r}")
            value = int(bool(value))
        else:
            if isinstance(value, bool) or not isinstance(value, int):
                raise E.ValueOverflow(f"{path} is {t.kind}, got {value!r}")
            lo, hi = t.value_range()
            if not lo <= value <= hi:
                raise E.ValueOverflow(f"{path}: {value} does not fit {t.kind}")
        self.region.store(offset, t.byte_size, value)

    def read(self, path: str):
        offset, t = resolve_path(self.layout.externals, path)
        if t.is_bool:
            return self.region.load(offset, 1, signed=False) != 0
        return self.region.load(offset, t.byte_size)

    def paths(self) -> list[str]:
        return list(scalar_paths(self.layout.externals))

    def dump(self) -> dict:
        return {p: self.read(p) for p in self.paths()}


def write_var(binding: ExternalBinding, path: str, value) -> None:
    binding.write(path, value)


def read_var(binding: ExternalBinding, path: str):
    return binding.read(path)


def parse_value(text: str):
    text = text.strip()
    if text == "true":
        return True
    if text == "false":
        return False
    if re.fullmatch(r"[+-]?[0-9]+", text):
        return int(text)
    raise ValueError(f"not a value: {text!r}")


def parse_vars(text: str) -> list[tuple[str, object]]:
    """Parse ``path = value`` lines (``#`` comments, blank lines ignored)."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        path, sep, value = line.partition("=")
        if not sep or not path.strip():
            raise E.BindingError(f"line {lineno}: expected 'path = value'")
        try:
            out.append((path.strip(), parse_value(value)))
        except ValueError as exc:
            raise E.BindingError(f"line {lineno}: {exc}") from None
    return out


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


# --- protocol driver --------------------------------------------------------


@dataclass
class CallingApplication:
    """Start-up and operational requests of the application owning the externals."""

    container: Container
    binding: ExternalBinding
    allocated_time: int
    trace: list[tuple[str, object]] = field(default_factory=list)
    context_id: int | None = None

    def start_up(self, file_ref: str) -> InitResponse:
        req = InitRequest(file_ref, self.binding.region, self.allocated_time)
        self.trace.append(("init-request", req))
        resp = self.container.initialize(req)
        self.trace.append(("init-response", resp))
        self.context_id = resp.context_id
        return resp

    def run_adaptation(self) -> ExecResponse:
        if self.context_id is None:
            raise RuntimeError("macro-code not initialized")
        req = ExecRequest(self.context_id)
        self.trace.append(("exec-request", req))
        resp = self.container.execute(req)
        self.trace.append(("exec-response", resp))
        return resp


RACK_SIZE = 10


@dataclass(frozen=True)
class RackInputs:
    ground: bool
    powered: Sequence[bool]
    criticity: Sequence[int]


@dataclass(frozen=True)
class RackReport:
    init: InitResponse
    execution: ExecResponse | None
    powered: tuple[bool, ...]
    criticity: tuple[int, ...]
    trace: tuple[tuple[str, object], ...]

    @property
    def stopped(self) -> set[int]:
        return {k for k, on in enumerate(self.powered, start=1) if not on}


def rack_manager_scenario(
    container: Container,
    file_ref: str,
    inputs: RackInputs,
    allocated_time: int,
    source: str | None = None,
) -> RackReport:
    """Initialize and execute the decision rule once; report all calculators."""
    layout = source_layout(source if source is not None else rack_manager_source())
    app = CallingApplication(container, ExternalBinding.allocate(layout), allocated_time)
    b = app.binding
    b.write("ground", inputs.ground)
    for k in range(1, RACK_SIZE + 1):
        b.write(f"calculator[{k}].powered", inputs.powered[k - 1])
        b.write(f"calculator[{k}].criticity", inputs.criticity[k - 1])
    init = app.start_up(file_ref)
    execution = app.run_adaptation() if init.ok else None
    return RackReport(
        init=init,
        execution=execution,
        powered=tuple(b.read(f"calculator[{k}].powered") for k in range(1, RACK_SIZE + 1)),
        criticity=tuple(b.read(f"calculator[{k}].criticity") for k in range(1, RACK_SIZE + 1)),
        trace=tuple(app.trace),
    )
