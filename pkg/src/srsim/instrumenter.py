"""Expand scope annotations in ``.hs.s`` sources into scope-instruction sequences.

Annotation grammar (everything else passes through unchanged)::

    .func NAME [, frame=F] [, uses=SYM:SIZE ...] [, args=aK ...] [, saves=ra s0 ...]
        body lines ...
        CALL TARGET [, aK:whole | aK:sub(N) | aK:sub(REG) | aK:sub(REG+N)] ...
        ALLOC                       ; a0 = hs_malloc(a0)
        RET [REG]
    .endfunc
    .heap SIZE                      ; heap size for the bundled allocator

``frame`` is the stack frame size in bytes, ``uses`` lists the globals the
function touches directly, ``args`` names incoming pointer arguments (only
needed for the return-state policy) and ``saves`` the callee-saved registers
the standard prologue spills, top-down from ``F-4``.

Helper instructions that exist only to feed scope instructions (address
materialisation, limit arithmetic) are wrapped in ``.aux_begin``/``.aux_end``
so the assembler tags them and :func:`strip` can drop them.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Optional

from srsim.assembler import parse_line
from srsim.engine import Delegation
from srsim.isa import REGISTERS, SCOPE_MNEMONICS

ARG_REGS = tuple(f"a{i}" for i in range(8))
TEMPS = ("t0", "t1", "t2", "t3", "t4", "t5", "t6")
DEFAULT_HEAP = 4096


class InstrumentError(ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


class Granularity(str, enum.Enum):
    FUNCTION = "function"
    RETSTATE = "retstate"


@dataclass(frozen=True)
class Policy:
    granularity: Granularity = Granularity.FUNCTION
    delegation_mode: Delegation = Delegation.LAX
    emit_globals: bool = True


@dataclass(frozen=True)
class ArgDelegation:
    reg: str
    kind: str = "whole"  # "whole" | "sub"
    length_reg: Optional[str] = None
    length: int = 0


@dataclass
class Call:
    lineno: int
    target: str
    delegations: list[ArgDelegation]


@dataclass
class Ret:
    lineno: int
    reg: Optional[str]


@dataclass
class Function:
    name: str
    lineno: int
    frame: int = 16
    uses: list[tuple[str, int]] = field(default_factory=list)
    args: list[str] = field(default_factory=list)
    saves: list[str] = field(default_factory=lambda: ["ra", "s0"])
    body: list = field(default_factory=list)  # str | Call | Ret

    @property
    def save_area(self) -> int:
        return 4 * len(self.saves)


@dataclass
class ScopedModule:
    items: list = field(default_factory=list)  # str | Function, in source order
    data_symbols: set[str] = field(default_factory=set)
    heap_size: Optional[int] = None
    uses_alloc: bool = False

    @property
    def functions(self) -> list[Function]:
        return [it for it in self.items if isinstance(it, Function)]


# -- parsing -------------------------------------------------------------

_SUB_RE = re.compile(r"^sub\(\s*([^)]*?)\s*\)$")


def _int(text: str, lineno: int) -> int:
    try:
        return int(text.strip(), 0)
    except ValueError:
        raise InstrumentError(lineno, f"expected integer, got {text!r}") from None


def parse_delegation(spec: str, lineno: int) -> ArgDelegation:
    reg, _, kind = spec.partition(":")
    reg = reg.strip().lower()
    kind = kind.strip() or "whole"
    if reg not in ARG_REGS:
        raise InstrumentError(lineno, f"unknown delegation register {reg!r} (expected a0..a7)")
    if kind == "whole":
        return ArgDelegation(reg)
    m = _SUB_RE.match(kind)
    if not m:
        raise InstrumentError(lineno, f"bad delegation kind {kind!r}")
    expr = m.group(1).replace(" ", "")
    head, sign, tail = expr.partition("+")
    if not sign and "-" in expr[1:]:
        head, _, tail = expr.partition("-")
        tail = "-" + tail
    if head.lower() in REGISTERS:
        return ArgDelegation(reg, "sub", head.lower(), _int(tail, lineno) if tail else 0)
    return ArgDelegation(reg, "sub", None, _int(expr, lineno))


def _parse_func_header(args: list[str], lineno: int) -> Function:
    if not args or not args[0]:
        raise InstrumentError(lineno, ".func needs a name")
    fn = Function(args[0].strip(), lineno)
    for item in args[1:]:
        key, eq, value = item.partition("=")
        key = key.strip()
        if not eq:
            raise InstrumentError(lineno, f"expected key=value in .func, got {item!r}")
        words = value.split()
        if key == "frame":
            fn.frame = _int(value, lineno)
        elif key == "uses":
            for w in words:
                sym, colon, size = w.partition(":")
                if not colon:
                    raise InstrumentError(lineno, f"uses entry {w!r} needs SYMBOL:SIZE")
                fn.uses.append((sym, _int(size, lineno)))
        elif key == "args":
            for w in words:
                if w.lower() not in ARG_REGS:
                    raise InstrumentError(lineno, f"unknown delegation register {w!r}")
            fn.args = [w.lower() for w in words]
        elif key == "saves":
            for w in words:
                if w.lower() not in REGISTERS:
                    raise InstrumentError(lineno, f"unknown register {w!r} in saves")
            fn.saves = [w.lower() for w in words]
        else:
            raise InstrumentError(lineno, f"unknown .func attribute {key!r}")
    if fn.frame <= 0 or fn.frame % 4:
        raise InstrumentError(lineno, f"frame size {fn.frame} must be a positive multiple of 4")
    if fn.frame < fn.save_area:
        raise InstrumentError(lineno, f"frame {fn.frame} too small for saved regs "
                                      f"({fn.save_area} bytes)")
    return fn


def parse_module(source: str) -> ScopedModule:
    mod = ScopedModule()
    current: Optional[Function] = None
    section = "text"
    for lineno, line in enumerate(source.splitlines(), 1):
        labels, op, args = parse_line(line)
        if section == "data":
            mod.data_symbols.update(labels)
        if op in (".text", ".data"):
            section = op[1:]
        head = line.split(";")[0].split("#")[0].strip()
        word = head.split(None, 1)[0] if head else ""
        if op == ".func":
            if current is not None:
                raise InstrumentError(lineno, f"nested .func inside {current.name}")
            current = _parse_func_header(args, lineno)
            continue
        if op == ".endfunc":
            if current is None:
                raise InstrumentError(lineno, ".endfunc without .func")
            mod.items.append(current)
            current = None
            continue
        if op == ".heap":
            mod.heap_size = _int(args[0], lineno) if args else DEFAULT_HEAP
            continue
        if word in ("CALL", "RET", "ALLOC"):
            if current is None:
                raise InstrumentError(lineno, f"{word} annotation outside .func")
            rest = head[len(word):].strip()
            if word == "RET":
                reg = rest.lower() or None
                if reg is not None and reg not in REGISTERS:
                    raise InstrumentError(lineno, f"unknown register {rest!r} in RET")
                current.body.append(Ret(lineno, reg))
            elif word == "ALLOC":
                mod.uses_alloc = True
                current.body.append(Call(lineno, "hs_malloc", []))
            else:
                parts = [p.strip() for p in rest.split(",")] if rest else []
                if not parts or not parts[0]:
                    raise InstrumentError(lineno, "CALL needs a target")
                if len(parts) - 1 > 8:
                    raise InstrumentError(lineno, "CALL with more than 8 register args")
                dels = [parse_delegation(p, lineno) for p in parts[1:]]
                current.body.append(Call(lineno, parts[0], dels))
            continue
        if current is not None:
            current.body.append(line)
        else:
            mod.items.append(line)
    if current is not None:
        raise InstrumentError(current.lineno, f".func {current.name} without .endfunc")
    return mod


# -- emission ------------------------------------------------------------

def _fits12(v: int) -> bool:
    return -2048 <= v <= 2047


class _Emitter:
    def __init__(self, policy: Policy):
        self.policy = policy
        self.out: list[str] = []

    def ins(self, text: str) -> None:
        self.out.append(f"    {text}")

    def aux(self, *lines: str) -> None:
        self.out.append("    .aux_begin")
        for ln in lines:
            self.ins(ln)
        self.out.append("    .aux_end")

    # region helpers: emit `op base, size(base)`-style entries, expanding big immediates

    def region_from(self, op: str, base_reg: str, size: int, tmp: str = "t1") -> None:
        """``op base_reg, size(base_reg)`` for sradd/srdsub."""
        if _fits12(size):
            self.ins(f"{op} {base_reg}, {size}({base_reg})")
        else:
            self.aux(f"li {tmp}, {size}", f"add {tmp}, {base_reg}, {tmp}")
            self.ins(f"{op} {base_reg}, 0({tmp})")

    def srdda_below_sp(self, size: int, tmp: str = "t1") -> None:
        if _fits12(-size):
            self.ins(f"srdda -{size}(sp), sp")
        else:
            self.aux(f"li {tmp}, {size}", f"sub {tmp}, sp, {tmp}")
            self.ins("srdda 0({}), sp".format(tmp))

    def prologue(self, fn: Function) -> None:
        F = fn.frame
        if _fits12(F):
            self.ins(f"addi sp, sp, -{F}")
            for i, r in enumerate(fn.saves):
                self.ins(f"sw {r}, {F - 4 * (i + 1)}(sp)")
            if "s0" in fn.saves:
                self.ins(f"addi s0, sp, {F}")
        else:
            self.ins(f"li t0, {F}")
            self.ins("sub sp, sp, t0")
            self.ins("add t0, sp, t0")
            for i, r in enumerate(fn.saves):
                self.ins(f"sw {r}, {-4 * (i + 1)}(t0)")
            if "s0" in fn.saves:
                self.ins("mv s0, t0")

    def epilogue(self, fn: Function) -> None:
        F = fn.frame
        if _fits12(F):
            for i, r in enumerate(fn.saves):
                self.ins(f"lw {r}, {F - 4 * (i + 1)}(sp)")
            self.ins(f"addi sp, sp, {F}")
        else:
            self.ins(f"li t0, {F}")
            self.ins("add t0, sp, t0")
            for i, r in enumerate(fn.saves):
                if r != "t0":
                    self.ins(f"lw {r}, {-4 * (i + 1)}(t0)")
            self.ins("mv sp, t0")

    def globals(self, fn: Function) -> None:
        if not self.policy.emit_globals:
            return
        for sym, size in fn.uses:
            self.aux(f"lui t0, %hi({sym})", f"addi t0, t0, %lo({sym})")
            self.region_from("sradd", "t0", size)

    def call(self, c: Call) -> None:
        busy = {d.length_reg for d in c.delegations if d.length_reg}
        free = [t for t in TEMPS if t not in busy]
        prep, dels = [], []
        for d in c.delegations:
            if d.kind == "whole":
                dels.append(f"srdlg 0({d.reg})")
                continue
            if d.length_reg is None and _fits12(d.length):
                dels.append(f"srdsub {d.reg}, {d.length}({d.reg})")
                continue
            if not free:
                raise InstrumentError(c.lineno, "out of temporaries for sub-region limits")
            tmp = free.pop(0)
            if d.length_reg is None:
                prep += [f"li {tmp}, {d.length}", f"add {tmp}, {d.reg}, {tmp}"]
                dels.append(f"srdsub {d.reg}, 0({tmp})")
            elif _fits12(d.length):
                prep.append(f"add {tmp}, {d.reg}, {d.length_reg}")
                dels.append(f"srdsub {d.reg}, {d.length}({tmp})")
            else:
                prep += [f"add {tmp}, {d.reg}, {d.length_reg}", f"li {d.length_reg}, {d.length}",
                         f"add {tmp}, {tmp}, {d.length_reg}"]
                dels.append(f"srdsub {d.reg}, 0({tmp})")
        if prep:
            self.aux(*prep)
        for d in dels:
            self.ins(d)
        self.ins("sbent")
        self.ins(f"jal ra, {c.target}")

    def function(self, fn: Function) -> None:
        retstate = self.policy.granularity is Granularity.RETSTATE
        self.out.append(f"    .global {fn.name}")
        self.out.append(f"{fn.name}:")
        if retstate:
            self.srdda_below_sp(fn.save_area)
            self.prologue(fn)
            for a in fn.args:
                self.ins(f"srdlg 0({a})")
            self.ins("sbent")
            locals_size = fn.frame - fn.save_area
            if locals_size > 0:
                self.region_from("sradd", "sp", locals_size)
            self.globals(fn)
        else:
            self.srdda_below_sp(fn.frame)
            self.globals(fn)
            self.prologue(fn)
        for item in fn.body:
            if isinstance(item, Call):
                self.call(item)
            elif isinstance(item, Ret):
                self.ret(fn, item)
            else:
                self.out.append(item)

    def ret(self, fn: Function, r: Ret) -> None:
        if self.policy.granularity is Granularity.RETSTATE:
            if r.reg:
                self.ins(f"srdlg 0({r.reg})")
            self.ins("sbxit")
            self.epilogue(fn)
        else:
            self.epilogue(fn)
        if r.reg:
            self.ins(f"srdlg 0({r.reg})")
        self.ins("sbxit")
        self.ins("ret")


def _start_stub(em: _Emitter) -> None:
    em.out += ["    .text", "    .global _start", "_start:"]
    em.ins("sbent")
    em.call(Call(0, "main", []))
    em.ins("sbxit")
    em.ins("li a7, 0")
    em.ins("ecall")


ALLOCATOR_SOURCE = """\
    .text
.func hs_malloc, frame=16, uses=hs_heap_ctl:8
    mv t2, a0
    la t0, hs_heap_ctl
    lw a0, 0(t0)
    lw t1, 4(t0)
    beqz t2, .Lhs_null
    add t3, a0, t2
    bltu t3, a0, .Lhs_null
    bltu t1, t3, .Lhs_null
    sw t3, 0(t0)
    sradd a0, 0(t3)
    j .Lhs_done
.Lhs_null:
    li a0, 0
.Lhs_done:
    RET a0
.endfunc
"""


def wrap_allocator(policy: Optional[Policy] = None, heap_size: int = DEFAULT_HEAP) -> str:
    """Emit the ``hs_malloc`` bump allocator and its heap (heap first in ``.data``)."""
    policy = policy or Policy()
    if heap_size <= 0 or heap_size % 4:
        raise InstrumentError(0, f"heap size {heap_size} must be a positive multiple of 4")
    data = ["    .data", "    .align 2", "hs_heap:", f"    .space {heap_size}",
            "hs_heap_ctl:", "    .word hs_heap, hs_heap + " + str(heap_size), "    .text"]
    mod = parse_module(ALLOCATOR_SOURCE)
    em = _Emitter(policy)
    for item in mod.items:
        if isinstance(item, Function):
            em.function(item)
        else:
            em.out.append(item)
    return "\n".join(data + em.out) + "\n"


def instrument_module(mod: ScopedModule, policy: Optional[Policy] = None) -> str:
    policy = policy or Policy()
    em = _Emitter(policy)
    names = {fn.name for fn in mod.functions}
    for fn in mod.functions:
        for sym, _size in fn.uses:
            if sym not in mod.data_symbols:
                raise InstrumentError(fn.lineno, f"uses symbol {sym!r} is not in .data")
    needs_start = "main" in names and not any(
        isinstance(it, str) and re.match(r"^\s*_start\s*:", it) for it in mod.items)
    if needs_start:
        _start_stub(em)
    if mod.uses_alloc or mod.heap_size is not None:
        em.out.append(wrap_allocator(policy, mod.heap_size or DEFAULT_HEAP).rstrip("\n"))
        em.out.append("    .text")
    for item in mod.items:
        if isinstance(item, Function):
            em.function(item)
        else:
            em.out.append(item)
    return "\n".join(em.out) + "\n"


def instrument(source: str, policy: Optional[Policy] = None) -> str:
    """Source-to-source: annotated ``.hs.s`` text to plain assembly."""
    return instrument_module(parse_module(source), policy)


def strip(asm: str) -> str:
    """Remove scope instructions and aux blocks, keeping labels; yields the baseline build."""
    out = []
    in_aux = False
    for line in asm.splitlines():
        labels, op, _args = parse_line(line)
        if op == ".aux_begin":
            in_aux = True
            continue
        if op == ".aux_end":
            in_aux = False
            continue
        if (in_aux or op in SCOPE_MNEMONICS) and op is not None:
            out.extend(f"{lab}:" for lab in labels)
            continue
        out.append(line)
    return "\n".join(out) + "\n"
