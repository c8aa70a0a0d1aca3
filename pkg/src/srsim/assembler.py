"""Two-pass assembler and disassembler for the simulator's assembly dialect.

Pass one lays out sections and collects labels; pass two evaluates operands
and encodes. Numeric branch/jump operands are absolute addresses, symbolic
ones resolve to labels.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from srsim.image import AUX_PREFIX, Image, Symbol
from srsim.isa import (
    ABI_NAMES, BRANCH_OPS, I_OPS, LOAD_OPS, R_OPS, REGISTERS, SHIFT_OPS, STORE_OPS,
    EncodingError, IllegalInstruction, decode, encode,
)

DEFAULT_TEXT_BASE = 0x00000000
DEFAULT_DATA_BASE = 0x10000000
NOP_WORD = 0x00000013


class AsmError(Exception):
    def __init__(self, lineno: int, message: str, line: str = ""):
        self.lineno = lineno
        self.message = message
        self.line = line
        where = f"line {lineno}: " if lineno else ""
        super().__init__(f"{where}{message}" + (f"\n    {line.strip()}" if line else ""))


@dataclass
class Statement:
    lineno: int
    text: str
    op: str
    args: list[str]
    section: str = "text"
    address: int = 0
    size: int = 0


@dataclass
class ListingLine:
    address: int
    word: int
    source: str


@dataclass
class Assembly:
    image: Image
    listing: list[ListingLine] = field(default_factory=list)

    def render_listing(self) -> str:
        return "\n".join(f"{ln.address:08x}: {ln.word:08x}    {ln.source}" for ln in self.listing)


# -- lexical helpers -----------------------------------------------------

_LABEL_RE = re.compile(r"^\s*([A-Za-z_.$][\w.$]*)\s*:(?!\S*\))")
_MEM_RE = re.compile(r"^(.*)\(\s*([\w$]+)\s*\)$")
_TOKEN_RE = re.compile(r"\s*(%hi|%lo|0[xX][0-9a-fA-F]+|0[bB][01]+|\d+|'(?:\\.|[^'])'"
                       r"|[A-Za-z_.$][\w.$]*|[()+\-])")


def strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == "\\":
                continue
            if ch == quote and line[i - 1] != "\\":
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch in ";#":
            return line[:i]
    return line


def split_operands(text: str) -> list[str]:
    out, depth, cur, quote = [], 0, [], None
    for i, ch in enumerate(text):
        if quote:
            cur.append(ch)
            if ch == quote and text[i - 1] != "\\":
                quote = None
            continue
        if ch in "\"'":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
            continue
        cur.append(ch)
    tail = "".join(cur).strip()
    if tail or out:
        out.append(tail)
    return out


def parse_line(line: str) -> tuple[list[str], Optional[str], list[str]]:
    """Return (labels, op, operands) for one source line."""
    text = strip_comment(line)
    labels = []
    while True:
        m = _LABEL_RE.match(text)
        if not m:
            break
        labels.append(m.group(1))
        text = text[m.end():]
    text = text.strip()
    if not text:
        return labels, None, []
    parts = text.split(None, 1)
    op = parts[0].lower()
    args = split_operands(parts[1]) if len(parts) > 1 else []
    return labels, op, args


def hi20(value: int) -> int:
    return ((value + 0x800) >> 12) & 0xFFFFF


def lo12(value: int) -> int:
    return ((value & 0xFFF) ^ 0x800) - 0x800


def _unescape(s: str) -> bytes:
    return s.encode("utf-8").decode("unicode_escape").encode("latin-1")


class _Expr:
    """Tiny recursive-descent evaluator: terms joined by + and -, %hi/%lo, parens."""

    def __init__(self, text: str, symbols: dict[str, int]):
        self.text = text
        self.symbols = symbols
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse expression {self.text!r}")
            self.tokens.append(m.group(1))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self) -> int:
        if not self.tokens:
            raise ValueError("empty expression")
        v = self.sum()
        if self.peek() is not None:
            raise ValueError(f"trailing tokens in expression {self.text!r}")
        return v

    def sum(self) -> int:
        v = self.unary()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.unary()
            v = v + rhs if op == "+" else v - rhs
        return v

    def unary(self) -> int:
        tok = self.peek()
        if tok == "-":
            self.take()
            return -self.unary()
        if tok == "+":
            self.take()
            return self.unary()
        return self.atom()

    def atom(self) -> int:
        tok = self.take()
        if tok is None:
            raise ValueError(f"unexpected end of expression {self.text!r}")
        if tok in ("%hi", "%lo"):
            if self.take() != "(":
                raise ValueError(f"expected '(' after {tok}")
            v = self.sum()
            if self.take() != ")":
                raise ValueError("expected ')'")
            return hi20(v) if tok == "%hi" else lo12(v)
        if tok == "(":
            v = self.sum()
            if self.take() != ")":
                raise ValueError("expected ')'")
            return v
        if tok[0] == "'":
            return _unescape(tok[1:-1])[0]
        if tok[0].isdigit():
            return int(tok, 0)
        if tok in self.symbols:
            return self.symbols[tok]
        raise KeyError(tok)


def is_literal(text: str) -> bool:
    try:
        _Expr(text, {}).parse()
    except (ValueError, KeyError):
        return False
    return True


# -- assembler -----------------------------------------------------------

_PSEUDO_SIZES = {"la": 2, "mv": 1, "j": 1, "call": 1, "ret": 1, "nop": 1,
                 "beqz": 1, "bnez": 1, "jr": 1, "not": 1, "neg": 1}

_DATA_DIRECTIVES = {".word", ".half", ".byte", ".space", ".zero", ".ascii", ".asciz",
                    ".string", ".align"}


class Assembler:
    def __init__(self, text_base: int = DEFAULT_TEXT_BASE, data_base: int = DEFAULT_DATA_BASE):
        self.text_base = text_base
        self.data_base = data_base
        self.labels: dict[str, int] = {}
        self.label_section: dict[str, str] = {}
        self.equs: dict[str, int] = {}
        self.sizes: dict[str, int] = {}
        self.aux_spans: list[tuple[int, int]] = []

    # pass 1 ------------------------------------------------------------

    def _size_of(self, st: Statement, loc: int) -> int:
        op, args = st.op, st.args
        if op.startswith("."):
            if op == ".word":
                return 4 * len(args)
            if op == ".half":
                return 2 * len(args)
            if op == ".byte":
                return len(args)
            if op in (".space", ".zero"):
                return self._const(st, args[0])
            if op in (".ascii", ".asciz", ".string"):
                n = sum(len(self._string(st, a)) for a in args)
                return n + (len(args) if op != ".ascii" else 0)
            if op == ".align":
                align = 1 << self._const(st, args[0])
                return (-loc) % align
            return 0
        if st.section != "text":
            raise AsmError(st.lineno, f"instruction {op!r} outside .text", st.text)
        if op == "li":
            if len(args) != 2:
                raise AsmError(st.lineno, "li expects rd, imm", st.text)
            try:
                v = _Expr(args[1], self.equs).parse()
            except (ValueError, KeyError):
                return 8
            return 4 if -2048 <= v <= 2047 else 8
        return _PSEUDO_SIZES.get(op, 1) * 4

    def _const(self, st: Statement, text: str) -> int:
        try:
            return _Expr(text, self.equs).parse()
        except KeyError as exc:
            raise AsmError(st.lineno, f"undefined constant {exc.args[0]!r}", st.text) from None
        except ValueError as exc:
            raise AsmError(st.lineno, str(exc), st.text) from None

    def _string(self, st: Statement, text: str) -> bytes:
        text = text.strip()
        if len(text) < 2 or text[0] != '"' or text[-1] != '"':
            raise AsmError(st.lineno, f"expected string literal, got {text!r}", st.text)
        return _unescape(text[1:-1])

    def first_pass(self, source: str) -> list[Statement]:
        stmts: list[Statement] = []
        section = "text"
        locs = {"text": self.text_base, "data": self.data_base}
        aux_start = None
        for lineno, line in enumerate(source.splitlines(), 1):
            try:
                labels, op, args = parse_line(line)
            except ValueError as exc:
                raise AsmError(lineno, str(exc), line) from None
            for lab in labels:
                if lab in self.labels or lab in self.equs:
                    raise AsmError(lineno, f"duplicate label {lab!r}", line)
                self.labels[lab] = locs[section]
                self.label_section[lab] = section
            if op is None:
                continue
            st = Statement(lineno, line, op, args, section, locs[section])
            if op == ".text":
                section = "text"
                continue
            if op == ".data":
                section = "data"
                continue
            if op in (".global", ".globl", ".type", ".func_hint"):
                continue
            if op in (".equ", ".set"):
                if len(args) != 2:
                    raise AsmError(lineno, f"{op} expects NAME, value", line)
                if args[0] in self.equs or args[0] in self.labels:
                    raise AsmError(lineno, f"duplicate symbol {args[0]!r}", line)
                self.equs[args[0]] = self._const(st, args[1])
                continue
            if op == ".size":
                if len(args) != 2:
                    raise AsmError(lineno, ".size expects SYMBOL, bytes", line)
                self.sizes[args[0]] = self._const(st, args[1])
                continue
            if op == ".aux_begin":
                if aux_start is not None:
                    raise AsmError(lineno, "nested .aux_begin", line)
                aux_start = locs["text"]
                continue
            if op == ".aux_end":
                if aux_start is None:
                    raise AsmError(lineno, ".aux_end without .aux_begin", line)
                if locs["text"] > aux_start:
                    self.aux_spans.append((aux_start, locs["text"]))
                aux_start = None
                continue
            if op.startswith(".") and op not in _DATA_DIRECTIVES:
                raise AsmError(lineno, f"unknown directive {op!r}", line)
            st.size = self._size_of(st, locs[section])
            locs[section] += st.size
            stmts.append(st)
        if aux_start is not None:
            raise AsmError(0, "unterminated .aux_begin")
        self.text_end = locs["text"]
        self.data_end = locs["data"]
        return stmts

    # pass 2 ------------------------------------------------------------

    def _symtab(self) -> dict[str, int]:
        return {**self.equs, **self.labels}

    def _eval(self, st: Statement, text: str) -> int:
        try:
            return _Expr(text, self._symtab()).parse()
        except KeyError as exc:
            raise AsmError(st.lineno, f"undefined symbol {exc.args[0]!r}", st.text) from None
        except ValueError as exc:
            raise AsmError(st.lineno, str(exc), st.text) from None

    def _reg(self, st: Statement, text: str) -> int:
        r = REGISTERS.get(text.strip().lower())
        if r is None:
            raise AsmError(st.lineno, f"expected register, got {text!r}", st.text)
        return r

    def _mem(self, st: Statement, text: str) -> tuple[int, int]:
        """Parse ``imm(reg)``; returns (imm, reg)."""
        m = _MEM_RE.match(text.strip())
        if not m:
            raise AsmError(st.lineno, f"expected imm(reg), got {text!r}", st.text)
        imm_text = m.group(1).strip()
        imm = self._eval(st, imm_text) if imm_text else 0
        return imm, self._reg(st, m.group(2))

    def _is_reg(self, text: str) -> bool:
        return text.strip().lower() in REGISTERS

    def _target(self, st: Statement, text: str, pc: int) -> int:
        target = self._eval(st, text)
        if target % 4:
            raise AsmError(st.lineno, f"misaligned branch target 0x{target & 0xFFFFFFFF:x}",
                           st.text)
        return target - pc

    def _nargs(self, st: Statement, *counts: int) -> None:
        if len(st.args) not in counts:
            want = " or ".join(str(c) for c in counts)
            raise AsmError(st.lineno, f"{st.op} expects {want} operands, got {len(st.args)}",
                           st.text)

    def _encode(self, st: Statement, m: str, rd=0, rs1=0, rs2=0, imm=0) -> int:
        try:
            return encode(m, rd, rs1, rs2, imm)
        except EncodingError as exc:
            raise AsmError(st.lineno, str(exc), st.text) from None

    def instruction_words(self, st: Statement, pc: int) -> list[int]:
        op, a = st.op, st.args
        E = self._encode
        if op in R_OPS:
            self._nargs(st, 3)
            if op == "add" and not self._is_reg(a[2]):
                return [E(st, "addi", self._reg(st, a[0]), self._reg(st, a[1]),
                          imm=self._eval(st, a[2]))]
            return [E(st, op, self._reg(st, a[0]), self._reg(st, a[1]), self._reg(st, a[2]))]
        if op in I_OPS or op in SHIFT_OPS:
            self._nargs(st, 3)
            return [E(st, op, self._reg(st, a[0]), self._reg(st, a[1]), imm=self._eval(st, a[2]))]
        if op in LOAD_OPS:
            self._nargs(st, 2)
            imm, rs1 = self._mem(st, a[1])
            return [E(st, op, self._reg(st, a[0]), rs1, imm=imm)]
        if op in STORE_OPS:
            self._nargs(st, 2)
            imm, rs1 = self._mem(st, a[1])
            return [E(st, op, rs1=rs1, rs2=self._reg(st, a[0]), imm=imm)]
        if op in BRANCH_OPS:
            self._nargs(st, 3)
            return [E(st, op, rs1=self._reg(st, a[0]), rs2=self._reg(st, a[1]),
                      imm=self._target(st, a[2], pc))]
        if op in ("lui", "auipc"):
            self._nargs(st, 2)
            return [E(st, op, self._reg(st, a[0]), imm=self._eval(st, a[1]))]
        if op == "jal":
            self._nargs(st, 1, 2)
            rd = self._reg(st, a[0]) if len(a) == 2 else 1
            return [E(st, "jal", rd, imm=self._target(st, a[-1], pc))]
        if op == "jalr":
            self._nargs(st, 1, 2, 3)
            if len(a) == 1:
                return [E(st, "jalr", 1, self._reg(st, a[0]))]
            if len(a) == 2:
                imm, rs1 = self._mem(st, a[1])
                return [E(st, "jalr", self._reg(st, a[0]), rs1, imm=imm)]
            return [E(st, "jalr", self._reg(st, a[0]), self._reg(st, a[1]),
                      imm=self._eval(st, a[2]))]
        if op == "ecall":
            self._nargs(st, 0)
            return [E(st, "ecall")]
        if op in ("sbent", "sbxit"):
            self._nargs(st, 0)
            return [E(st, op)]
        if op in ("sradd", "srdsub"):
            self._nargs(st, 2)
            if self._is_reg(a[1]):
                imm, rs2 = 0, self._reg(st, a[1])
            else:
                imm, rs2 = self._mem(st, a[1])
            return [E(st, op, rs1=self._reg(st, a[0]), rs2=rs2, imm=imm)]
        if op == "srdda":
            self._nargs(st, 2)
            imm, rs1 = self._mem(st, a[0])
            return [E(st, op, rs1=rs1, rs2=self._reg(st, a[1]), imm=imm)]
        if op == "srdlg":
            self._nargs(st, 1)
            if self._is_reg(a[0]):
                return [E(st, op, rs1=self._reg(st, a[0]))]
            if _MEM_RE.match(a[0].strip()):
                imm, rs1 = self._mem(st, a[0])
                return [E(st, op, rs1=rs1, imm=imm)]
            return [E(st, op, imm=self._eval(st, a[0]))]
        # pseudo-instructions
        if op == "li":
            rd = self._reg(st, a[0])
            v = self._eval(st, a[1])
            if not -(1 << 31) <= v <= 0xFFFFFFFF:
                raise AsmError(st.lineno, f"li value {v} does not fit 32 bits", st.text)
            v &= 0xFFFFFFFF
            if st.size == 4:
                return [E(st, "addi", rd, 0, imm=lo12(v))]
            return [E(st, "lui", rd, imm=hi20(v)), E(st, "addi", rd, rd, imm=lo12(v))]
        if op == "la":
            self._nargs(st, 2)
            rd = self._reg(st, a[0])
            v = self._eval(st, a[1]) & 0xFFFFFFFF
            return [E(st, "lui", rd, imm=hi20(v)), E(st, "addi", rd, rd, imm=lo12(v))]
        if op == "mv":
            self._nargs(st, 2)
            return [E(st, "addi", self._reg(st, a[0]), self._reg(st, a[1]))]
        if op == "not":
            self._nargs(st, 2)
            return [E(st, "xori", self._reg(st, a[0]), self._reg(st, a[1]), imm=-1)]
        if op == "neg":
            self._nargs(st, 2)
            return [E(st, "sub", self._reg(st, a[0]), 0, self._reg(st, a[1]))]
        if op == "nop":
            self._nargs(st, 0)
            return [NOP_WORD]
        if op == "j":
            self._nargs(st, 1)
            return [E(st, "jal", 0, imm=self._target(st, a[0], pc))]
        if op == "call":
            self._nargs(st, 1)
            return [E(st, "jal", 1, imm=self._target(st, a[0], pc))]
        if op == "ret":
            self._nargs(st, 0)
            return [E(st, "jalr", 0, 1)]
        if op == "jr":
            self._nargs(st, 1)
            return [E(st, "jalr", 0, self._reg(st, a[0]))]
        if op in ("beqz", "bnez"):
            self._nargs(st, 2)
            return [E(st, "beq" if op == "beqz" else "bne", rs1=self._reg(st, a[0]),
                      imm=self._target(st, a[1], pc))]
        raise AsmError(st.lineno, f"unknown instruction {op!r}", st.text)

    def data_bytes(self, st: Statement, loc: int) -> bytes:
        op, a = st.op, st.args
        if op == ".word":
            return b"".join((self._eval(st, x) & 0xFFFFFFFF).to_bytes(4, "little") for x in a)
        if op == ".half":
            return b"".join((self._eval(st, x) & 0xFFFF).to_bytes(2, "little") for x in a)
        if op == ".byte":
            return bytes(self._eval(st, x) & 0xFF for x in a)
        if op in (".space", ".zero"):
            fill = self._eval(st, a[1]) & 0xFF if len(a) > 1 else 0
            return bytes([fill]) * st.size
        if op in (".ascii", ".asciz", ".string"):
            term = b"" if op == ".ascii" else b"\0"
            return b"".join(self._string(st, x) + term for x in a)
        if op == ".align":
            if st.section == "text" and st.size % 4 == 0:
                return NOP_WORD.to_bytes(4, "little") * (st.size // 4)
            return bytes(st.size)
        raise AsmError(st.lineno, f"unknown directive {op!r}", st.text)

    def assemble(self, source: str) -> Assembly:
        stmts = self.first_pass(source)
        text = bytearray()
        data = bytearray()
        listing = []
        for st in stmts:
            out = text if st.section == "text" else data
            if st.op.startswith("."):
                blob = self.data_bytes(st, st.address)
            else:
                words = self.instruction_words(st, st.address)
                if len(words) * 4 != st.size:
                    raise AsmError(st.lineno, "internal size mismatch between passes", st.text)
                blob = b"".join(w.to_bytes(4, "little") for w in words)
                for i, w in enumerate(words):
                    listing.append(ListingLine(st.address + 4 * i, w, st.text.strip()))
            out += blob
        if len(text) % 4:
            raise AsmError(0, "text segment length is not a multiple of 4")
        if text and data:
            t0, t1 = self.text_base, self.text_base + len(text)
            d0, d1 = self.data_base, self.data_base + len(data)
            if t0 < d1 and d0 < t1:
                raise AsmError(0, "text and data segments overlap")
        entry = self.labels.get("_start", self.labels.get("main", self.text_base))
        return Assembly(Image(self.text_base, bytes(text), self.data_base, bytes(data),
                              entry, self._symbols()), listing)

    def _symbols(self) -> dict[str, Symbol]:
        out: dict[str, Symbol] = {}
        ends = {"text": self.text_end, "data": self.data_end}
        for section in ("text", "data"):
            names = sorted((n for n, s in self.label_section.items()
                            if s == section and not n.startswith(".L")),
                           key=lambda n: (self.labels[n], n))
            for i, name in enumerate(names):
                addr = self.labels[name]
                nxt = ends[section]
                for later in names[i + 1:]:
                    if self.labels[later] > addr:
                        nxt = self.labels[later]
                        break
                size = self.sizes.get(name, nxt - addr)
                out[name] = Symbol(name, addr, size)
        for i, (start, end) in enumerate(self.aux_spans):
            name = f"{AUX_PREFIX}{i}"
            out[name] = Symbol(name, start, end - start)
        return out


def assemble(source: str, text_base: int = DEFAULT_TEXT_BASE,
             data_base: int = DEFAULT_DATA_BASE) -> Image:
    return Assembler(text_base, data_base).assemble(source).image


def assemble_with_listing(source: str, text_base: int = DEFAULT_TEXT_BASE,
                          data_base: int = DEFAULT_DATA_BASE) -> Assembly:
    return Assembler(text_base, data_base).assemble(source)


def assemble_instruction(text: str, pc: int = 0) -> int:
    """Assemble a single (non-pseudo-expanding) instruction placed at ``pc``."""
    img = assemble(text, text_base=pc)
    if len(img.text) != 4:
        raise AsmError(0, f"{text!r} does not assemble to exactly one word")
    return int.from_bytes(img.text, "little")


# -- disassembler --------------------------------------------------------

def _r(i: int) -> str:
    return ABI_NAMES[i]


def disassemble(word: int, pc: int = 0) -> str:
    """Canonical text for one word; unknown words fall back to ``.word 0x...``."""
    try:
        ins = decode(word)
    except IllegalInstruction:
        return f".word 0x{word & 0xFFFFFFFF:08x}"
    m = ins.mnemonic
    if m in BRANCH_OPS or m == "jal":
        if ins.imm % 4:
            # legal encoding, but no 4-byte-aligned target to name
            return f".word 0x{word:08x}  # {m} offset {ins.imm}, misaligned target"
    if m in R_OPS:
        return f"{m} {_r(ins.rd)}, {_r(ins.rs1)}, {_r(ins.rs2)}"
    if m in I_OPS or m in SHIFT_OPS:
        return f"{m} {_r(ins.rd)}, {_r(ins.rs1)}, {ins.imm}"
    if m in LOAD_OPS:
        return f"{m} {_r(ins.rd)}, {ins.imm}({_r(ins.rs1)})"
    if m in STORE_OPS:
        return f"{m} {_r(ins.rs2)}, {ins.imm}({_r(ins.rs1)})"
    if m in BRANCH_OPS:
        return f"{m} {_r(ins.rs1)}, {_r(ins.rs2)}, {hex(pc + ins.imm)}"
    if m in ("lui", "auipc"):
        return f"{m} {_r(ins.rd)}, {hex(ins.imm)}"
    if m == "jal":
        return f"jal {_r(ins.rd)}, {hex(pc + ins.imm)}"
    if m == "jalr":
        return f"jalr {_r(ins.rd)}, {ins.imm}({_r(ins.rs1)})"
    if m in ("ecall", "sbent", "sbxit"):
        return m
    if m in ("sradd", "srdsub"):
        return f"{m} {_r(ins.rs1)}, {ins.imm}({_r(ins.rs2)})"
    if m == "srdda":
        return f"srdda {ins.imm}({_r(ins.rs1)}), {_r(ins.rs2)}"
    if m == "srdlg":
        return f"srdlg {ins.imm}({_r(ins.rs1)})"
    raise AssertionError(m)


def disassemble_image(image: Image) -> str:
    """Re-assemblable source for an image.

    Labels, symbol sizes and aux spans come from the symbol table, so
    reassembling at the same bases reproduces the image byte for byte.
    """
    by_addr: dict[tuple[str, int], list[str]] = {}
    aux_starts, aux_ends = set(), set()
    text_end = image.text_base + len(image.text)
    for sym in image.symbols.values():
        if sym.name.startswith(AUX_PREFIX):
            aux_starts.add(sym.address)
            aux_ends.add(sym.address + sym.size)
            continue
        in_text = image.text_base <= sym.address <= text_end and not (
            image.data and image.data_base <= sym.address < image.data_base + len(image.data))
        by_addr.setdefault(("text" if in_text else "data", sym.address), []).append(sym.name)

    def labels(section: str, addr: int) -> list[str]:
        out = []
        for name in sorted(by_addr.get((section, addr), [])):
            out += [f"{name}:", f"    .size {name}, {image.symbols[name].size}"]
        return out

    lines = [".text"]
    for i, word in enumerate(image.words):
        pc = image.text_base + 4 * i
        if pc in aux_ends and i:
            lines.append("    .aux_end")
        lines += labels("text", pc)
        if pc in aux_starts:
            lines.append("    .aux_begin")
        lines.append(f"    {disassemble(word, pc)}")
    if text_end in aux_ends and image.text:
        lines.append("    .aux_end")
    lines += labels("text", text_end)
    lines.append(".data")
    for i, b in enumerate(image.data):
        lines += labels("data", image.data_base + i)
        lines.append(f"    .byte {b}")
    lines += labels("data", image.data_base + len(image.data))
    return "\n".join(lines) + "\n"
