"""Container runtime: initialization checks, contexts, partitioned execution.

The container owns a fixed RAM arena of ``memory_budget`` bytes. Each live
context holds one contiguous block of it: the macro-code copy, the local
variables and the operand-stack reserve. External variables stay in the
calling application's buffer and are reached only through an
:class:`ExternalRegion`.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
import logging
from dataclasses import dataclass, field

from macrocell import errors as E
from macrocell.binfmt import deserialize, header_length
from macrocell.isa import STACK_DEPTH, STACK_SLOT_BYTES, MacroCode, MachineState, Trap, run
from macrocell.memory import ExternalRegion, Region
from macrocell.perfdata import PerfData

log = logging.getLogger(__name__)

STACK_RESERVE = STACK_DEPTH * STACK_SLOT_BYTES


class InitStatus(enum.Enum):
    OK = "OK"
    ERR_FILE_PARSE = "ERR_FILE_PARSE"
    ERR_MEMORY = "ERR_MEMORY"
    ERR_TOO_MANY_PLATFORMS = "ERR_TOO_MANY_PLATFORMS"
    ERR_INCOMPATIBLE_PLATFORM = "ERR_INCOMPATIBLE_PLATFORM"
    ERR_WCET_EXCEEDS_ALLOCATION = "ERR_WCET_EXCEEDS_ALLOCATION"


class ExecStatus(enum.Enum):
    OK = "OK"
    UNKNOWN_CONTEXT = "UNKNOWN_CONTEXT"
    DIV_BY_ZERO = "DIV_BY_ZERO"
    INDEX_OUT_OF_BOUNDS = "INDEX_OUT_OF_BOUNDS"
    REGION_VIOLATION = "REGION_VIOLATION"
    STACK_OVERFLOW = "STACK_OVERFLOW"
    STACK_UNDERFLOW = "STACK_UNDERFLOW"
    FUEL_EXHAUSTED = "FUEL_EXHAUSTED"
    PC_OUT_OF_RANGE = "PC_OUT_OF_RANGE"


@dataclass(frozen=True)
class ContainerConfig:
    platform: PerfData
    memory_budget: int
    max_platform_types: int

    def __post_init__(self):
        if self.memory_budget <= 0:
            raise ValueError("memory_budget must be positive")
        if self.max_platform_types < 1:
            raise ValueError("max_platform_types must be at least 1")


class NonVolatileMemory:
    """Immutable store of data-loaded compiled files, addressed by reference."""

    def __init__(self):
        self._files: dict[str, bytes] = {}

    def store(self, ref: str, data: bytes) -> str:
        self._files[ref] = bytes(data)
        return ref

    def read(self, ref: str) -> bytes | None:
        return self._files.get(ref)


@dataclass(frozen=True)
class InitRequest:
    compiled_file_ref: str
    external_region: ExternalRegion
    allocated_time: int

    def __post_init__(self):
        if self.allocated_time < 0:
            raise ValueError("allocated_time must be non-negative")


@dataclass(frozen=True)
class InitResponse:
    status: InitStatus
    context_id: int | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status is InitStatus.OK


@dataclass(frozen=True)
class ExecRequest:
    context_id: int


@dataclass(frozen=True)
class ExecResponse:
    status: ExecStatus
    fuel_used: int = 0
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status is ExecStatus.OK


@dataclass
class MacroContext:
    context_id: int
    block_start: int
    code_length: int
    local_size: int
    macro_code: MacroCode
    external: ExternalRegion
    wcet: int
    allocated_time: int
    local: Region = field(repr=False, default=None)

    @property
    def block_size(self) -> int:
        return self.code_length + self.local_size + STACK_RESERVE

    @property
    def local_start(self) -> int:
        return self.block_start + self.code_length


class InitFailure(Exception):
    def __init__(self, status: InitStatus, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


class Container:
    """Executes macro-code on behalf of one calling application.

    Callers serialize requests on an instance; separate instances share
    nothing and may run in parallel.
    """

    def __init__(self, config: ContainerConfig, nvm: NonVolatileMemory | None = None):
        self.config = config
        self.nvm = nvm if nvm is not None else NonVolatileMemory()
        self.ram = bytearray(config.memory_budget)
        self._contexts: dict[int, MacroContext] = {}
        self._ids = itertools.count(1)

    @property
    def platform_identity(self) -> str:
        return self.config.platform.identity

    @property
    def committed(self) -> int:
        return sum(c.block_size for c in self._contexts.values())

    @property
    def remaining(self) -> int:
        return self.config.memory_budget - self.committed

    @property
    def contexts(self) -> dict[int, MacroContext]:
        return dict(self._contexts)

    def state_digest(self) -> str:
        """Hash of all observable container state (RAM and context table)."""
        h = hashlib.sha256(bytes(self.ram))
        for cid, c in sorted(self._contexts.items()):
            h.update(repr((cid, c.block_start, c.code_length, c.local_size, c.wcet,
                           c.allocated_time, c.external.start, c.external.end)).encode())
        return h.hexdigest()

    # --- initialization ----------------------------------------------------

    def initialize(self, req: InitRequest) -> InitResponse:
        try:
            ctx = self._prepare(req)
        except InitFailure as f:
            log.info("init of %s refused: %s %s", req.compiled_file_ref, f.status.value, f.detail)
            return InitResponse(f.status, None, f.detail)
        # commit: nothing above touched container state
        ctx.context_id = next(self._ids)
        start = ctx.block_start
        self.ram[start:start + ctx.code_length] = ctx.macro_code.to_bytes()
        self.ram[ctx.local_start:ctx.local_start + ctx.local_size] = bytes(ctx.local_size)
        ctx.local = Region(self.ram, ctx.local_start, ctx.local_start + ctx.local_size)
        self._contexts[ctx.context_id] = ctx
        return InitResponse(InitStatus.OK, ctx.context_id)

    def _prepare(self, req: InitRequest) -> MacroContext:
        # header parsing
        data = self.nvm.read(req.compiled_file_ref)
        if data is None:
            raise InitFailure(InitStatus.ERR_FILE_PARSE, f"no compiled file at {req.compiled_file_ref!r}")
        try:
            cf = deserialize(data)
        except E.FormatError as exc:
            raise InitFailure(InitStatus.ERR_FILE_PARSE, f"{type(exc).__name__}: {exc}") from None
        h = cf.header

        # memory check
        needed = h.macro_code_length + h.local_var_size + STACK_RESERVE
        if needed > self.remaining:
            raise InitFailure(InitStatus.ERR_MEMORY,
                              f"needs {needed} bytes, {self.remaining} of {self.config.memory_budget} left")
        if h.external_var_size != req.external_region.length:
            raise InitFailure(InitStatus.ERR_MEMORY,
                              f"external variables take {h.external_var_size} bytes, "
                              f"region has {req.external_region.length}")

        # macro-code load: private copy of the code bytes, decoded for the interpreter
        start = header_length(data)
        code = MacroCode.from_bytes(bytes(data[start:start + h.macro_code_length]))

        # initialization WCET check
        if h.platform_type_count > self.config.max_platform_types:
            raise InitFailure(InitStatus.ERR_TOO_MANY_PLATFORMS,
                              f"{h.platform_type_count} platform types, limit {self.config.max_platform_types}")

        # compatibility check
        wcet = cf.wcet_for(self.platform_identity)
        if wcet is None:
            raise InitFailure(InitStatus.ERR_INCOMPATIBLE_PLATFORM,
                              f"{self.platform_identity} not among the file's platform types")

        # execution WCET check
        if wcet > req.allocated_time:
            raise InitFailure(InitStatus.ERR_WCET_EXCEEDS_ALLOCATION,
                              f"WCET {wcet} exceeds allocated time {req.allocated_time}")

        # context creation (id and RAM assigned on commit)
        return MacroContext(
            context_id=0,
            block_start=self.committed,
            code_length=h.macro_code_length,
            local_size=h.local_var_size,
            macro_code=code,
            external=req.external_region,
            wcet=wcet,
            allocated_time=req.allocated_time,
        )

    # --- execution ---------------------------------------------------------

    def execute(self, req: ExecRequest) -> ExecResponse:
        ctx = self._contexts.get(req.context_id)
        if ctx is None:
            return ExecResponse(ExecStatus.UNKNOWN_CONTEXT, detail=f"no context {req.context_id!r}")
        # analysing the request is paid for up front
        fuel = max(0, ctx.wcet - self.config.platform.request_overhead)
        state = MachineState(local=ctx.local, external=ctx.external, fuel=fuel)
        try:
            run(ctx.macro_code, state, self.config.platform.op_costs)
        except Trap as trap:
            return ExecResponse(ExecStatus(trap.code.value), state.consumed, trap.detail)
        return ExecResponse(ExecStatus.OK, state.consumed)

    def release(self, context_id: int) -> ExecStatus:
        ctx = self._contexts.pop(context_id, None)
        if ctx is None:
            return ExecStatus.UNKNOWN_CONTEXT
        self._compact()
        return ExecStatus.OK

    def _compact(self) -> None:
        """Slide live blocks down so free memory is one run at the top."""
        pos = 0
        for ctx in sorted(self._contexts.values(), key=lambda c: c.block_start):
            if ctx.block_start != pos:
                size = ctx.block_size
                self.ram[pos:pos + size] = self.ram[ctx.block_start:ctx.block_start + size]
                ctx.block_start = pos
                ctx.local = Region(self.ram, ctx.local_start, ctx.local_start + ctx.local_size)
            pos += ctx.block_size
        self.ram[pos:] = bytes(len(self.ram) - pos)


def create_container(config: ContainerConfig, nvm: NonVolatileMemory | None = None) -> Container:
    return Container(config, nvm)
