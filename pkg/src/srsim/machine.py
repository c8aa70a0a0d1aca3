"""RV32I-subset core hosting the SRS engine.

Every load and store is checked against the engine's active bank before it
reaches memory; scope instructions are dispatched to the engine with their
operand arithmetic done here. All base instructions cost one cycle.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

from srsim.engine import EngineFault, FaultKind, SRSEngine
from srsim.image import Image
from srsim.isa import CONTEXT_SWITCHES, ABI_NAMES, IllegalInstruction, Instruction, decode

log = logging.getLogger(__name__)

MASK = 0xFFFFFFFF
DEFAULT_MEM_SIZE = 1 << 20

ECALL_EXIT, ECALL_PRINT_INT, ECALL_PRINT_BYTE, ECALL_READ_BYTE = 0, 1, 2, 3


class TrapKind(str, enum.Enum):
    ILLEGAL_INSTRUCTION = "illegal_instruction"
    MISALIGNED_ACCESS = "misaligned_access"
    OUT_OF_RANGE = "out_of_range"


class MachineTrap(Exception):
    def __init__(self, kind: TrapKind, detail: str, addr: Optional[int] = None):
        self.kind = TrapKind(kind)
        self.detail = detail
        self.addr = addr
        super().__init__(f"{self.kind.value}: {detail}")


Fault = Union[MachineTrap, EngineFault]


class LoadError(ValueError):
    pass


def _signed(v: int) -> int:
    return v - (1 << 32) if v & 0x80000000 else v


class Memory:
    """RAM at ``[0, size)`` plus extra windows for segments mapped above it."""

    def __init__(self, size: int = DEFAULT_MEM_SIZE):
        if size <= 0 or size > (1 << 32):
            raise ValueError("memory size must be in (0, 4 GiB]")
        self.size = size
        self.ram = bytearray(size)
        self.windows: list[tuple[int, bytearray]] = []

    def map_window(self, base: int, length: int) -> None:
        if base < self.size:
            raise LoadError(f"window at 0x{base:08x} overlaps RAM")
        if base + length > (1 << 32):
            raise LoadError(f"window at 0x{base:08x} (+{length}) exceeds 32-bit space")
        for wb, buf in self.windows:
            if base < wb + len(buf) and wb < base + length:
                raise LoadError(f"window at 0x{base:08x} overlaps window at 0x{wb:08x}")
        self.windows.append((base, bytearray(length)))

    def _locate(self, addr: int, size: int) -> tuple[bytearray, int]:
        if addr + size <= self.size:
            return self.ram, addr
        for base, buf in self.windows:
            if base <= addr and addr + size <= base + len(buf):
                return buf, addr - base
        raise MachineTrap(TrapKind.OUT_OF_RANGE,
                          f"{size}-byte access at 0x{addr:08x} outside mapped memory", addr)

    def read(self, addr: int, size: int) -> int:
        buf, off = self._locate(addr, size)
        return int.from_bytes(buf[off:off + size], "little")

    def write(self, addr: int, size: int, value: int) -> None:
        buf, off = self._locate(addr, size)
        buf[off:off + size] = (value & ((1 << (8 * size)) - 1)).to_bytes(size, "little")

    def read_bytes(self, addr: int, n: int) -> bytes:
        buf, off = self._locate(addr, n)
        return bytes(buf[off:off + n])

    def write_bytes(self, addr: int, blob: bytes) -> None:
        if not blob:
            return
        buf, off = self._locate(addr, len(blob))
        buf[off:off + len(blob)] = blob

    def is_mapped(self, addr: int, size: int = 4) -> bool:
        try:
            self._locate(addr, size)
        except MachineTrap:
            return False
        return True


class Status(str, enum.Enum):
    RUNNING = "running"
    HALTED = "halted"
    TRAPPED = "trapped"


@dataclass
class StepResult:
    instruction: Optional[Instruction]
    pc: int
    cycle_cost: int = 0
    stall_cycles: int = 0
    trap: Optional[Fault] = None
    aux: bool = False


@dataclass
class RunOutcome:
    kind: str  # "halted" | "trapped" | "step_limit"
    exit_code: Optional[int] = None
    fault: Optional[Fault] = None
    pc: int = 0
    steps: int = 0
    cycles: int = 0

    @property
    def fault_kind(self) -> Optional[str]:
        return self.fault.kind.value if self.fault is not None else None

    def describe(self) -> str:
        if self.kind == "halted":
            return f"halted({self.exit_code})"
        if self.kind == "trapped":
            return f"trapped({self.fault}) at pc=0x{self.pc:08x}"
        return f"step_limit after {self.steps} steps"


class Machine:
    """Single-hart interpreter. ``trace`` receives one text line per event."""

    def __init__(self, engine: Optional[SRSEngine] = None, mem_size: int = DEFAULT_MEM_SIZE,
                 stdin: bytes = b"", trace: Optional[Callable[[str], None]] = None,
                 audit: bool = False):
        self.engine = engine if engine is not None else SRSEngine()
        self.mem = Memory(mem_size)
        self.regs = [0] * 32
        self.pc = 0
        self.cycles = 0
        self.retired = 0
        self.status = Status.RUNNING
        self.exit_code: Optional[int] = None
        self.fault: Optional[Fault] = None
        self.stdin = bytes(stdin)
        self._stdin_pos = 0
        self.stdout = bytearray()
        self.trace = trace
        self.audit = audit
        self.audit_violations = 0
        self.aux: frozenset[int] = frozenset()
        self.image: Optional[Image] = None
        self._icache: dict[int, Instruction] = {}
        self._exec = {
            "lui": self._lui, "auipc": self._auipc, "jal": self._jal, "jalr": self._jalr,
            "ecall": self._ecall,
            "sbent": self._sbent, "sbxit": self._sbxit, "sradd": self._sradd,
            "srdda": self._srdda, "srdlg": self._srdlg, "srdsub": self._srdsub,
        }
        for m in ("addi", "slti", "sltiu", "xori", "ori", "andi", "slli", "srli", "srai"):
            self._exec[m] = self._alu_imm
        for m in ("add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and"):
            self._exec[m] = self._alu_reg
        for m in ("lb", "lbu", "lh", "lhu", "lw"):
            self._exec[m] = self._load
        for m in ("sb", "sh", "sw"):
            self._exec[m] = self._store
        for m in ("beq", "bne", "blt", "bge", "bltu", "bgeu"):
            self._exec[m] = self._branch

    # -- loading ----------------------------------------------------------

    def load_image(self, image: Image) -> None:
        if not image.text:
            raise LoadError("image has no text segment (no entry point)")
        segs = [("text", image.text_base, image.text), ("data", image.data_base, image.data)]
        segs = [s for s in segs if s[2]]
        for i, (na, ba, blob_a) in enumerate(segs):
            for nb, bb, blob_b in segs[i + 1:]:
                if ba < bb + len(blob_b) and bb < ba + len(blob_a):
                    raise LoadError(f"{na} and {nb} segments overlap")
        for name, base, blob in segs:
            end = base + len(blob)
            if base < self.mem.size:
                if end > self.mem.size:
                    raise LoadError(f"{name} segment [0x{base:08x}, 0x{end:08x}) "
                                    f"beyond memory size 0x{self.mem.size:x}")
            else:
                self.mem.map_window(base, len(blob))
            self.mem.write_bytes(base, blob)
        if not image.text_base <= image.entry < image.text_base + len(image.text):
            raise LoadError(f"entry 0x{image.entry:08x} outside text segment")
        self.image = image
        self.aux = image.aux_addresses()
        self._icache.clear()
        self.regs = [0] * 32
        self.regs[2] = self.mem.size & ~15 & MASK
        self.pc = image.entry
        self.status = Status.RUNNING

    # -- execution --------------------------------------------------------

    def fetch(self, pc: int) -> Instruction:
        ins = self._icache.get(pc)
        if ins is None:
            if pc & 3:
                raise MachineTrap(TrapKind.MISALIGNED_ACCESS, f"fetch at 0x{pc:08x}", pc)
            try:
                word = self.mem.read(pc, 4)
            except MachineTrap as exc:
                raise MachineTrap(TrapKind.OUT_OF_RANGE, f"fetch at 0x{pc:08x}", pc) from exc
            try:
                ins = decode(word)
            except IllegalInstruction as exc:
                raise MachineTrap(TrapKind.ILLEGAL_INSTRUCTION, f"{exc} at pc=0x{pc:08x}", pc)
            self._icache[pc] = ins
        return ins

    def step(self) -> StepResult:
        if self.status is not Status.RUNNING:
            raise RuntimeError(f"machine is {self.status.value}")
        pc = self.pc
        result = StepResult(None, pc, aux=pc in self.aux)
        try:
            ins = self.fetch(pc)
            result.instruction = ins
            if self.trace is not None:
                self.trace(f"0x{pc:08x} {ins.mnemonic}")
            self._stall = 0
            next_pc = self._exec[ins.mnemonic](ins)
        except (MachineTrap, EngineFault) as exc:
            self.status = Status.TRAPPED
            self.fault = exc
            result.trap = exc
            if self.trace is not None:
                self.trace(f"{self.cycles} trap {exc} pc=0x{pc:08x}")
            return result
        self.regs[0] = 0
        cost = 1 + self._stall
        result.cycle_cost = cost
        result.stall_cycles = self._stall
        self.cycles += cost
        self.retired += 1
        if ins.mnemonic not in CONTEXT_SWITCHES:
            self.engine.tick(cost)
        if self.status is Status.RUNNING:
            self.pc = next_pc & MASK
        return result

    def run(self, max_steps: int = 10_000_000, profiler=None) -> RunOutcome:
        steps = 0
        while self.status is Status.RUNNING:
            if steps >= max_steps:
                return RunOutcome("step_limit", pc=self.pc, steps=steps, cycles=self.cycles)
            res = self.step()
            steps += 1
            if profiler is not None:
                profiler.record(res)
        if profiler is not None:
            profiler.absorb_engine(self.engine)
        if self.status is Status.HALTED:
            return RunOutcome("halted", exit_code=self.exit_code, pc=self.pc,
                              steps=steps, cycles=self.cycles)
        return RunOutcome("trapped", fault=self.fault, pc=self.pc, steps=steps,
                          cycles=self.cycles)

    # -- base instructions -----------------------------------------------

    def _lui(self, ins):
        self.regs[ins.rd] = (ins.imm << 12) & MASK
        return self.pc + 4

    def _auipc(self, ins):
        self.regs[ins.rd] = (self.pc + (ins.imm << 12)) & MASK
        return self.pc + 4

    def _jal(self, ins):
        self.regs[ins.rd] = (self.pc + 4) & MASK
        return self.pc + ins.imm

    def _jalr(self, ins):
        target = (self.regs[ins.rs1] + ins.imm) & ~1
        self.regs[ins.rd] = (self.pc + 4) & MASK
        return target

    def _alu_imm(self, ins):
        a = self.regs[ins.rs1]
        imm = ins.imm
        m = ins.mnemonic
        if m == "addi":
            r = a + imm
        elif m == "andi":
            r = a & imm
        elif m == "ori":
            r = a | imm
        elif m == "xori":
            r = a ^ imm
        elif m == "slti":
            r = int(_signed(a) < imm)
        elif m == "sltiu":
            r = int(a < (imm & MASK))
        elif m == "slli":
            r = a << imm
        elif m == "srli":
            r = a >> imm
        else:  # srai
            r = _signed(a) >> imm
        self.regs[ins.rd] = r & MASK
        return self.pc + 4

    def _alu_reg(self, ins):
        a = self.regs[ins.rs1]
        b = self.regs[ins.rs2]
        m = ins.mnemonic
        if m == "add":
            r = a + b
        elif m == "sub":
            r = a - b
        elif m == "and":
            r = a & b
        elif m == "or":
            r = a | b
        elif m == "xor":
            r = a ^ b
        elif m == "sll":
            r = a << (b & 31)
        elif m == "srl":
            r = a >> (b & 31)
        elif m == "sra":
            r = _signed(a) >> (b & 31)
        elif m == "slt":
            r = int(_signed(a) < _signed(b))
        else:  # sltu
            r = int(a < b)
        self.regs[ins.rd] = r & MASK
        return self.pc + 4

    def _branch(self, ins):
        a = self.regs[ins.rs1]
        b = self.regs[ins.rs2]
        m = ins.mnemonic
        if m == "beq":
            taken = a == b
        elif m == "bne":
            taken = a != b
        elif m == "blt":
            taken = _signed(a) < _signed(b)
        elif m == "bge":
            taken = _signed(a) >= _signed(b)
        elif m == "bltu":
            taken = a < b
        else:
            taken = a >= b
        return self.pc + ins.imm if taken else self.pc + 4

    def _checked(self, addr: int, size: int, what: str) -> None:
        if size > 1 and addr % size:
            raise MachineTrap(TrapKind.MISALIGNED_ACCESS,
                              f"{size}-byte {what} at 0x{addr:08x}", addr)
        eng = self.engine
        if eng.enabled:
            if not eng.allows(addr, size):
                raise EngineFault(
                    FaultKind.ACCESS_VIOLATION,
                    f"{size}-byte {what} at 0x{addr:08x} (range [0x{addr:08x}, "
                    f"0x{addr + size:08x})) not covered by active frame",
                    addr=addr, limit=addr + size)
            if self.audit and not any(e.base <= addr and addr + size <= e.limit
                                      for e in eng.active.entries):
                self.audit_violations += 1

    def _load(self, ins):
        m = ins.mnemonic
        size = 4 if m == "lw" else 2 if m in ("lh", "lhu") else 1
        addr = (self.regs[ins.rs1] + ins.imm) & MASK
        self._checked(addr, size, "load")
        v = self.mem.read(addr, size)
        if m == "lb" and v & 0x80:
            v -= 0x100
        elif m == "lh" and v & 0x8000:
            v -= 0x10000
        self.regs[ins.rd] = v & MASK
        return self.pc + 4

    def _store(self, ins):
        m = ins.mnemonic
        size = 4 if m == "sw" else 2 if m == "sh" else 1
        addr = (self.regs[ins.rs1] + ins.imm) & MASK
        self._checked(addr, size, "store")
        self.mem.write(addr, size, self.regs[ins.rs2])
        if self._icache:
            for a in range(addr & ~3, addr + size, 4):
                self._icache.pop(a, None)
        return self.pc + 4

    def _ecall(self, ins):
        code = self.regs[17]
        a0 = self.regs[10]
        if code == ECALL_EXIT:
            self.status = Status.HALTED
            self.exit_code = _signed(a0)
        elif code == ECALL_PRINT_INT:
            self.stdout += str(_signed(a0)).encode()
        elif code == ECALL_PRINT_BYTE:
            self.stdout.append(a0 & 0xFF)
        elif code == ECALL_READ_BYTE:
            if self._stdin_pos < len(self.stdin):
                self.regs[10] = self.stdin[self._stdin_pos]
                self._stdin_pos += 1
            else:
                self.regs[10] = MASK
        else:
            raise MachineTrap(TrapKind.ILLEGAL_INSTRUCTION,
                              f"unknown ecall service a7={code}", self.pc)
        return self.pc + 4

    # -- scope instructions -----------------------------------------------

    def _note(self, text: str) -> None:
        if self.trace is not None:
            self.trace(f"{self.cycles} {text}")

    def _sbent(self, ins):
        self._stall = self.engine.sbent()
        self._note(f"sbent stall={self._stall} depth={self.engine.frame_count}")
        return self.pc + 4

    def _sbxit(self, ins):
        self._stall = self.engine.sbxit()
        self._note(f"sbxit stall={self._stall} depth={self.engine.frame_count}")
        return self.pc + 4

    def _sradd(self, ins):
        base = self.regs[ins.rs1]
        limit = (self.regs[ins.rs2] + ins.imm) & MASK
        entry = self.engine.sradd(base, limit)
        self._note(f"sradd {entry if entry else 'ignored (disabled)'}")
        return self.pc + 4

    def _srdda(self, ins):
        base = (self.regs[ins.rs1] + ins.imm) & MASK
        limit = self.regs[ins.rs2]
        entry = self.engine.sradd(base, limit)
        self._note(f"srdda {entry if entry else 'ignored (disabled)'}")
        return self.pc + 4

    def _delegation_stall(self) -> None:
        nxt = self.pc + 4
        if self.mem.is_mapped(nxt):
            try:
                follower = self.fetch(nxt)
            except MachineTrap:
                return
            if follower.mnemonic in CONTEXT_SWITCHES:
                self._stall = 1

    def _srdlg(self, ins):
        addr = (self.regs[ins.rs1] + ins.imm) & MASK
        entry = self.engine.srdlg(addr)
        self._delegation_stall()
        self._note(f"srdlg addr=0x{addr:08x} -> {entry if entry else 'no_match'}")
        return self.pc + 4

    def _srdsub(self, ins):
        base = self.regs[ins.rs1]
        limit = (self.regs[ins.rs2] + ins.imm) & MASK
        entry = self.engine.srdsub(base, limit)
        self._delegation_stall()
        self._note(f"srdsub [0x{base:08x}, 0x{limit:08x}) -> {entry if entry else 'no_match'}")
        return self.pc + 4

    # -- inspection -------------------------------------------------------

    def describe_fault_context(self) -> Optional[str]:
        if self.image is None:
            return None
        return self.image.function_at(self.pc)

    def dump_regs(self) -> str:
        rows = []
        for r in range(0, 32, 4):
            rows.append("  ".join(f"{ABI_NAMES[i]:>4}=0x{self.regs[i]:08x}" for i in range(r, r + 4)))
        rows.append(f"  pc=0x{self.pc:08x} cycles={self.cycles}")
        return "\n".join(rows)
