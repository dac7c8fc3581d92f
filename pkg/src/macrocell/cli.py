"""Command-line front end: compile, inspect, wcet, run.

Exit codes: 0 success, 1 usage error, 2 compile or file-format error,
3 container initialization error, 4 runtime trap.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from macrocell import errors as E
from macrocell.binfmt import deserialize, serialize
from macrocell.compiler import build
from macrocell.container import Container, ContainerConfig, NonVolatileMemory
from macrocell.harness import (
    CallingApplication, ExternalBinding, format_value, parse_vars, source_layout,
)
from macrocell.perfdata import PlatformType, format_perf_data, read_perf_file, uniform_perf_data
from macrocell.sidecar import LayoutFileError, format_layout, parse_layout

EXIT_OK, EXIT_USAGE, EXIT_COMPILE, EXIT_INIT, EXIT_TRAP = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_perf(path: str):
    _read_text(path)
    try:
        return read_perf_file(path)
    except E.PerfDataError as exc:
        print(f"{path}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return None


def _load_compiled(path: str):
    try:
        return deserialize(_read_bytes(path))
    except E.FormatError as exc:
        print(f"{path}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return None


def cmd_compile(args) -> int:
    source = _read_text(args.source)
    perfs = [_load_perf(p) for p in args.perf]
    if any(p is None for p in perfs):
        return EXIT_COMPILE
    try:
        result = build(source, perfs)
    except E.CompileError as exc:
        if exc.line:
            print(exc.format(args.source), file=sys.stderr)
        else:
            print(f"{args.source}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPILE
    out = Path(args.output)
    out.write_bytes(serialize(result.compiled))
    layout_path = Path(args.layout) if args.layout else out.with_suffix(".layout")
    layout_path.write_text(format_layout(result.program.declarations, result.layout), encoding="utf-8")
    h = result.compiled.header
    print(f"output: {out}")
    print(f"layout: {layout_path}")
    print(f"macro_code_length: {h.macro_code_length}")
    print(f"external: {h.external_var_size} B, local: {h.local_var_size} B, platforms: {h.platform_type_count}")
    for entry in result.compiled.wcet_table:
        print(f"wcet[{entry.platform.identity}]: {entry.wcet}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    cf = _load_compiled(args.file)
    if cf is None:
        return EXIT_COMPILE
    h = cf.header
    print(f"magic: {h.magic.hex()}")
    print(f"format_version: {h.format_version}")
    print(f"compiler_type: {h.compiler_type}")
    print(f"compiler_version: {h.compiler_version}")
    print(f"macro_code_length: {h.macro_code_length}")
    print(f"external_var_size: {h.external_var_size}")
    print(f"local_var_size: {h.local_var_size}")
    print(f"platform_type_count: {h.platform_type_count}")
    print(f"content_checksum: {h.content_checksum:08x}")
    for entry in cf.wcet_table:
        print(f"wcet[{entry.platform.identity}]: {entry.wcet}")
    if args.disasm:
        for line in cf.macro_code.disassemble():
            print(line)
    return EXIT_OK


def cmd_wcet(args) -> int:
    cf = _load_compiled(args.file)
    if cf is None:
        return EXIT_COMPILE
    rows = [e for e in cf.wcet_table if args.platform is None or e.platform.identity == args.platform]
    if not rows:
        print(f"{args.file}: error: platform {args.platform} not in the WCET table", file=sys.stderr)
        return EXIT_COMPILE
    for entry in rows:
        print(f"wcet[{entry.platform.identity}]: {entry.wcet}")
    return EXIT_OK


def _run_layout(args):
    if args.src:
        try:
            return source_layout(_read_text(args.src))
        except E.CompileError as exc:
            raise UsageError(exc.format(args.src)) from None
    path = Path(args.layout) if args.layout else Path(args.file).with_suffix(".layout")
    if not path.exists():
        raise UsageError(f"no layout: pass --src or --layout (looked for {path})")
    try:
        return parse_layout(_read_text(str(path)))
    except LayoutFileError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_run(args) -> int:
    data = _read_bytes(args.file)
    perf = _load_perf(args.perf)
    if perf is None:
        return EXIT_USAGE
    layout = _run_layout(args)
    try:
        config = ContainerConfig(perf, args.budget, args.max_platforms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    nvm = NonVolatileMemory()
    ref = nvm.store(args.file, data)
    container = Container(config, nvm)
    binding = ExternalBinding.allocate(layout)
    if args.vars:
        try:
            for path, value in parse_vars(_read_text(args.vars)):
                binding.write(path, value)
        except E.BindingError as exc:
            raise UsageError(f"{args.vars}: {type(exc).__name__}: {exc}") from None
    app = CallingApplication(container, binding, args.allocated_time)
    init = app.start_up(ref)
    print(f"init: {init.status.value}")
    if not init.ok:
        print(f"detail: {init.detail}")
        return EXIT_INIT
    print(f"context: {init.context_id}")
    ctx = container.contexts[init.context_id]
    print(f"wcet: {ctx.wcet}")
    resp = app.run_adaptation()
    print(f"status: {resp.status.value}")
    print(f"fuel_used: {resp.fuel_used}")
    if resp.detail:
        print(f"detail: {resp.detail}")
    if args.dump_vars:
        for path, value in binding.dump().items():
            print(f"{path} = {format_value(value)}")
    return EXIT_OK if resp.ok else EXIT_TRAP


def cmd_perf_template(args) -> int:
    try:
        platform = PlatformType.from_identity(args.platform)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(format_perf_data(uniform_perf_data(platform, args.cost, args.overhead)))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="macrocell", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compile", help="compile adaptation source for a set of platform types")
    c.add_argument("source")
    c.add_argument("--perf", action="append", required=True, metavar="FILE.epd")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--layout", help="where to write the layout sidecar (default: OUTPUT with .layout)")
    c.set_defaults(func=cmd_compile)

    i = sub.add_parser("inspect", help="print header fields and WCET table")
    i.add_argument("file")
    i.add_argument("--disasm", action="store_true")
    i.set_defaults(func=cmd_inspect)

    w = sub.add_parser("wcet", help="print the WCET table")
    w.add_argument("file")
    w.add_argument("--platform", metavar="IDENTITY")
    w.set_defaults(func=cmd_wcet)

    r = sub.add_parser("run", help="initialize and execute once in a fresh container")
    r.add_argument("file")
    r.add_argument("--perf", required=True, help="performance data of the container's platform")
    r.add_argument("--budget", type=int, required=True)
    r.add_argument("--max-platforms", type=int, required=True)
    r.add_argument("--allocated-time", type=int, required=True)
    r.add_argument("--vars")
    r.add_argument("--src")
    r.add_argument("--layout")
    r.add_argument("--dump-vars", action="store_true")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("perf-template", help="write a uniform-cost performance data file")
    t.add_argument("--platform", required=True, metavar="HW/HWV/OS/OSV/CONTAINER")
    t.add_argument("--cost", type=int, default=1)
    t.add_argument("--overhead", type=int, default=0)
    t.set_defaults(func=cmd_perf_template)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
