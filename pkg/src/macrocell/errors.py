"""Exception hierarchy shared by the toolchain.

Every error raised on purpose by macrocell derives from :class:`MacrocellError`
so callers (and the CLI) can tell structured failures from programming bugs.
"""

from __future__ import annotations


class MacrocellError(Exception):
    """Base class for all toolchain errors."""


# --- front-end -------------------------------------------------------------


class CompileError(MacrocellError):
    """A diagnostic attached to a source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.column}: error: {type(self).__name__}: {self.message}"


class LexError(CompileError):
    pass


class ParseError(CompileError):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected: frozenset[str] = frozenset()):
        super().__init__(message, line, column)
        self.expected = expected


class SemanticError(CompileError):
    pass


class UndeclaredIdentifier(SemanticError):
    pass


class TypeMismatch(SemanticError):
    pass


class ConstantIndexOutOfBounds(SemanticError):
    def __init__(self, name: str, index: int, lo: int, hi: int, line: int = 0, column: int = 0):
        super().__init__(f"constant index {index} outside {name}[{lo}..{hi}]", line, column)
        self.name = name
        self.index = index
        self.lo = lo
        self.hi = hi


class NonLiteralLoopBound(SemanticError):
    pass


class DuplicateDeclaration(SemanticError):
    pass


class LoopVarNotLocalScalar(SemanticError):
    pass


class LoopVarAssigned(SemanticError):
    pass


class LoopBoundOutOfRange(SemanticError):
    pass


class LiteralOutOfRange(SemanticError):
    pass


class InvalidArrayBounds(SemanticError):
    pass


class ExpressionTooDeep(CompileError):
    pass


class JumpOutOfRange(CompileError):
    pass


class DuplicatePlatformType(CompileError):
    pass


class EmptyPerfSet(CompileError):
    pass


# --- perf data -------------------------------------------------------------


class PerfDataError(MacrocellError):
    pass


class MissingKey(PerfDataError):
    def __init__(self, key: str):
        super().__init__(f"missing key {key!r}")
        self.key = key


class MissingOpcode(MissingKey):
    def __init__(self, mnemonic: str):
        PerfDataError.__init__(self, f"missing cost for opcode {mnemonic}")
        self.key = f"op.{mnemonic}"
        self.mnemonic = mnemonic


class MissingPlatformField(MissingKey):
    pass


class UnknownKey(PerfDataError):
    def __init__(self, key: str):
        super().__init__(f"unknown key {key!r}")
        self.key = key


class DuplicateKey(PerfDataError):
    def __init__(self, key: str):
        super().__init__(f"duplicate key {key!r}")
        self.key = key


class MalformedValue(PerfDataError):
    def __init__(self, line: int, detail: str = "malformed line"):
        super().__init__(f"line {line}: {detail}")
        self.line = line


# --- macro-code decoding ---------------------------------------------------


class DecodeError(MacrocellError):
    pass


class TruncatedInstruction(DecodeError):
    pass


class UnknownOpcode(DecodeError):
    def __init__(self, byte: int, offset: int):
        super().__init__(f"unknown opcode 0x{byte:02x} at offset {offset}")
        self.byte = byte
        self.offset = offset


class MisalignedJumpTarget(DecodeError):
    def __init__(self, target: int):
        super().__init__(f"jump target {target} is not an instruction boundary")
        self.offset = target


class InvalidOperand(DecodeError):
    pass


# --- compiled file format --------------------------------------------------


class FormatError(MacrocellError):
    pass


class BadMagic(FormatError):
    pass


class UnsupportedFormatVersion(FormatError):
    pass


class ChecksumMismatch(FormatError):
    pass


class Truncated(FormatError):
    pass


class InconsistentHeader(FormatError):
    pass


class FieldOverflow(FormatError):
    pass


# --- host side -------------------------------------------------------------


class BindingError(MacrocellError):
    pass


class UnknownPath(BindingError):
    pass


class IndexOutOfDeclaredRange(BindingError):
    pass


class ValueOverflow(BindingError):
    pass
