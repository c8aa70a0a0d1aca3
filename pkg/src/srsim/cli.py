"""``srsim`` command-line front end."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from srsim.assembler import AsmError, assemble_with_listing, disassemble_image
from srsim.engine import Delegation, EngineConfig, SRSEngine
from srsim.image import MAGIC, Image, ImageFormatError
from srsim.instrumenter import Granularity, InstrumentError, Policy, instrument, strip
from srsim.machine import DEFAULT_MEM_SIZE, LoadError, Machine
from srsim.profiler import AccountingError, ProfileLedger, report
from srsim.scenarios import MITIGATED, ScenarioError, list_scenarios, load_scenario, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_program(path: str) -> Image:
    """An image file, or assembly source assembled on the fly."""
    blob = _read_bytes(path)
    if blob[:4] == MAGIC:
        return Image.from_bytes(blob)
    return assemble_with_listing(blob.decode("utf-8")).image


def _engine(args) -> SRSEngine:
    try:
        return SRSEngine(EngineConfig(
            bank_capacity=args.bank, max_frames=args.frames,
            delegation_mode=Delegation.STRICT if args.strict else Delegation.LAX,
            transfer_rate=args.rate))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _machine(args, image: Image, trace=None) -> Machine:
    stdin = _read_bytes(args.input) if args.input else b""
    m = Machine(_engine(args), mem_size=args.mem_size, stdin=stdin, trace=trace)
    try:
        m.load_image(image)
    except (LoadError, ValueError) as exc:
        raise UsageError(f"cannot load image: {exc}") from None
    return m


def cmd_asm(args) -> int:
    src = _read_bytes(args.input).decode("utf-8")
    asm = assemble_with_listing(src, args.text_base, args.data_base)
    asm.image.save(args.output)
    if args.listing:
        Path(args.listing).write_text(asm.render_listing() + "\n")
    return EXIT_OK


def cmd_disasm(args) -> int:
    sys.stdout.write(disassemble_image(_load_program(args.image)))
    return EXIT_OK


def cmd_instrument(args) -> int:
    src = _read_bytes(args.input).decode("utf-8")
    policy = Policy(Granularity(args.policy), emit_globals=not args.no_globals)
    out = instrument(src, policy)
    if args.strip:
        out = strip(out)
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_run(args) -> int:
    image = _load_program(args.image)
    trace = (lambda line: print(line, file=sys.stderr)) if args.trace else None
    m = _machine(args, image, trace)
    out = m.run(args.max_steps)
    sys.stdout.buffer.write(bytes(m.stdout))
    sys.stdout.flush()
    where = ""
    if out.kind == "trapped":
        fn = image.function_at(out.pc)
        where = f" in {fn}" if fn else ""
    print(f"[srsim] {out.describe()}{where}; {out.steps} instructions, {out.cycles} cycles",
          file=sys.stderr)
    return EXIT_OK if out.kind == "halted" else EXIT_FAIL


def cmd_profile(args) -> int:
    inst = _load_program(args.image)
    base = _load_program(args.baseline)
    ledger = ProfileLedger()
    m = _machine(args, inst)
    out = m.run(args.max_steps, profiler=ledger)
    mb = _machine(args, base)
    out_b = mb.run(args.max_steps)
    status = EXIT_OK
    for label, o in (("instrumented", out), ("baseline", out_b)):
        if o.kind != "halted":
            print(f"[srsim] warning: {label} run {o.describe()}", file=sys.stderr)
            status = EXIT_FAIL
    if bytes(m.stdout) != bytes(mb.stdout):
        print("[srsim] warning: console output differs between builds", file=sys.stderr)
    try:
        rep = report(ledger, mb.cycles, m.cycles)
    except AccountingError as exc:
        print(f"[srsim] accounting error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    sys.stdout.write(rep.render_csv() if args.csv else rep.render_text())
    return status


def cmd_scenario(args) -> int:
    if args.all == bool(args.name):
        raise UsageError("give a scenario NAME or --all")
    names = list_scenarios() if args.all else [args.name]
    results = [run_scenario(load_scenario(n), jobs=args.jobs) for n in names]
    for r in results:
        print(r.summary() if args.verbose or r.verdict != MITIGATED else
              f"{r.name:20s} {r.verdict}")
    good = sum(r.verdict == MITIGATED for r in results)
    print(f"{good}/{len(results)} mitigated")
    return EXIT_OK if good == len(results) else EXIT_FAIL


def _engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", metavar="FILE", help="bytes served to the program's read ecall")
    p.add_argument("--max-steps", type=_int, default=10_000_000)
    p.add_argument("--mem-size", type=_int, default=DEFAULT_MEM_SIZE, metavar="BYTES")
    p.add_argument("--bank", type=_int, default=16, help="entries per register bank")
    p.add_argument("--frames", type=_int, default=16, help="frames in protected SRS memory")
    p.add_argument("--strict", action="store_true", help="strict delegation mode")
    p.add_argument("--rate", type=_int, default=1,
                   help="frame transfer rate in entries per cycle (power of two)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srsim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asm", help="assemble a .s file into an image")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--text-base", type=_int, default=0x0)
    p.add_argument("--data-base", type=_int, default=0x10000000)
    p.add_argument("--listing", metavar="FILE")
    p.set_defaults(func=cmd_asm)

    p = sub.add_parser("disasm", help="disassemble an image")
    p.add_argument("image")
    p.set_defaults(func=cmd_disasm)

    p = sub.add_parser("instrument", help="expand scope annotations")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--policy", choices=[g.value for g in Granularity], default="function")
    p.add_argument("--no-globals", action="store_true")
    p.add_argument("--strip", action="store_true",
                   help="emit the uninstrumented baseline instead")
    p.set_defaults(func=cmd_instrument)

    p = sub.add_parser("run", help="run an image or .s file")
    p.add_argument("image")
    p.add_argument("--trace", action="store_true", help="stream the execution trace to stderr")
    _engine_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("profile", help="per-instruction overhead report")
    p.add_argument("image")
    p.add_argument("--baseline", required=True, metavar="IMG")
    p.add_argument("--csv", action="store_true")
    _engine_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("scenario", help="run bundled attack scenarios")
    p.add_argument("name", nargs="?")
    p.add_argument("--all", action="store_true")
    p.add_argument("--jobs", type=_int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_scenario)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, AsmError, InstrumentError, ImageFormatError, ScenarioError,
            UnicodeDecodeError) as exc:
        print(f"srsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
