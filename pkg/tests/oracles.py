"""Independent oracles used by the tests.

Nothing here imports the engine or the encoder; values computed here are
compared against (or frozen into) the tests.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

# -- bit-packing oracle for the S-type scope layout ----------------------


def bits(value: int, width: int) -> str:
    return format(value & ((1 << width) - 1), f"0{width}b")


def pack_s_type(imm: int, rs2: int, rs1: int, funct3: int, opcode: int) -> int:
    """imm[11:5] | rs2 | rs1 | funct3 | imm[4:0] | opcode, assembled as a bit string."""
    imm12 = bits(imm, 12)
    word = imm12[:7] + bits(rs2, 5) + bits(rs1, 5) + bits(funct3, 3) + imm12[7:] + bits(opcode, 7)
    assert len(word) == 32
    return int(word, 2)


SCOPE_OPCODE = 0b0001011
SCOPE_FUNCT3 = {"sbent": 0, "sbxit": 1, "sradd": 2, "srdda": 3, "srdlg": 4, "srdsub": 5}


# -- cycle-by-cycle stall oracle ------------------------------------------


@dataclass
class FrameInfo:
    entries: int = 0
    has_sp_entry: bool = False  # holds an entry containing sp (so srdlg 0(sp) matches)


class StallOracle:
    """Replays a straight-line microprogram one cycle at a time.

    Background transfers move ``rate`` entries per elapsed cycle of ordinary
    instructions; a blocking switch burns cycles until the transfer is empty.
    Context switches themselves do not advance the transfer they start.
    """

    def __init__(self, rate: int = 1):
        self.rate = rate
        self.frames: list[FrameInfo] = []
        self.spare = FrameInfo()
        self.remaining = 0
        self.direction = None  # "to_stack" | "from_stack" | None

    def _elapse(self, cycles: int) -> None:
        for _ in range(cycles):
            if self.remaining:
                self.remaining = max(0, self.remaining - self.rate)
        if not self.remaining:
            self.direction = None

    def _block(self) -> int:
        stalled = 0
        while self.remaining:
            self.remaining = max(0, self.remaining - self.rate)
            stalled += 1
        self.direction = None
        return stalled

    def sbent(self) -> int:
        if self.direction == "to_stack":
            stall = self._block()
        else:
            stall = 0
            self.remaining, self.direction = 0, None
        outgoing = self.frames[-1].entries if self.frames else 0
        self.frames.append(self.spare)
        self.spare = FrameInfo()
        if outgoing:
            self.remaining, self.direction = outgoing, "to_stack"
        return stall

    def sbxit(self) -> int:
        stall = self._block()
        self.frames.pop()
        if self.frames:
            top = self.frames[-1]
            self.frames[-1] = FrameInfo(top.entries + self.spare.entries,
                                        top.has_sp_entry or self.spare.has_sp_entry)
        self.spare = FrameInfo()
        if len(self.frames) >= 2 and self.frames[-2].entries:
            self.remaining, self.direction = self.frames[-2].entries, "from_stack"
        return stall

    def ordinary(self, op: str, next_op: str) -> int:
        cost = 1
        enabled = bool(self.frames)
        if op in ("srdlg", "srdsub") and next_op in ("sbent", "sbxit"):
            cost = 2
        if enabled:
            if op == "sradd":
                self.frames[-1].entries += 1
                self.frames[-1].has_sp_entry = True
            elif op == "srdda":
                self.frames[-1].entries += 1
            elif op in ("srdlg", "srdsub") and self.frames[-1].has_sp_entry:
                self.spare.entries += 1
                self.spare.has_sp_entry = True
        self._elapse(cost)
        return cost

    def predict(self, ops: list[str]) -> list[tuple[int, int]]:
        """(cycle_cost, stall) for every op of a straight-line program."""
        out = []
        for i, op in enumerate(ops):
            nxt = ops[i + 1] if i + 1 < len(ops) else ""
            if op == "sbent":
                s = self.sbent()
                out.append((1 + s, s))
            elif op == "sbxit":
                s = self.sbxit()
                out.append((1 + s, s))
            else:
                c = self.ordinary(op, nxt)
                out.append((c, c - 1))
        return out


# -- microprogram generators -----------------------------------------------

ASM = {
    "sbent": "sbent",
    "sbxit": "sbxit",
    "sradd": "sradd sp, 32(sp)",
    "srdda": "srdda -16(sp), sp",
    "srdlg": "srdlg 0(sp)",
    "srdsub": "srdsub sp, 4(sp)",
    "nop": "nop",
    "exit_a7": "li a7, 0",
    "exit": "ecall",
}


@dataclass
class Microprogram:
    ops: list[str] = field(default_factory=list)

    def source(self) -> str:
        return "\n".join(ASM[op] for op in self.ops) + "\n"


def random_microprogram(rng: random.Random, bank: int = 16, max_frames: int = 16,
                        length: int = 60) -> Microprogram:
    """Random straight-line scope program that never faults at the given sizes."""
    ops = ["sbent"]
    frames = [0]
    spare = 0
    for _ in range(length):
        choice = rng.choices(
            ["sradd", "srdda", "srdlg", "srdsub", "nop", "sbent", "sbxit"],
            weights=[5, 2, 3, 2, 3, 3, 3])[0]
        if choice in ("sradd", "srdda") and frames[-1] >= bank:
            choice = "nop"
        if choice in ("srdlg", "srdsub") and (
                spare >= bank or (len(frames) >= 2 and frames[-2] + spare >= bank)):
            choice = "nop"
        if choice == "sbent" and len(frames) > max_frames:
            choice = "nop"
        if choice == "sbxit" and (len(frames) < 2 or frames[-2] + spare > bank):
            choice = "nop"
        ops.append(choice)
        if choice in ("sradd", "srdda"):
            frames[-1] += 1
        elif choice in ("srdlg", "srdsub"):
            spare += 1  # over-approximation: keeps capacity safe even if no match
        elif choice == "sbent":
            frames.append(spare)
            spare = 0
        elif choice == "sbxit":
            restored = frames[-2] + spare
            frames.pop()
            frames[-1] = restored
            spare = 0
        if rng.random() < 0.15 and choice in ("srdlg", "srdsub"):
            # bias toward delegation immediately before a switch
            if len(frames) <= max_frames:
                ops.append("sbent")
                frames.append(spare)
                spare = 0
    while len(frames) > 1:
        assert frames[-2] + spare <= bank
        ops.append("sbxit")
        restored = frames[-2] + spare
        frames.pop()
        frames[-1] = restored
        spare = 0
    ops.append("sbxit")
    ops += ["exit_a7", "exit"]
    return Microprogram(ops)


def stall_heavy_microprogram(rng: random.Random, bank: int = 16,
                             max_frames: int = 16) -> Microprogram:
    """Nest with non-decreasing frame sizes, then unwind with back-to-back sbxit.

    Every blocking event is a switch issued with zero elapsed cycles since its
    transfer started, so stalls scale exactly with 1/rate.
    """
    depth = rng.randint(3, max_frames)
    sizes = sorted(rng.randint(1, bank) for _ in range(depth))
    ops = ["sbent"]
    for k in sizes:
        ops += ["sradd"] * k
        ops.append("sbent")
    ops += ["sbxit"] * (depth + 1)
    ops += ["exit_a7", "exit"]
    return Microprogram(ops)


# -- randomized engine traces ---------------------------------------------

ADDR_POOL = [0x1000 + 0x10 * i for i in range(12)] + [0, 0xFFFFFFF0]


def random_trace(rng: random.Random, length: int = 24, tick: bool = True) -> list[tuple]:
    trace = []
    for _ in range(length):
        r = rng.random()
        if r < 0.18:
            trace.append(("sbent",))
        elif r < 0.30:
            trace.append(("sbxit",))
        elif r < 0.55:
            b = rng.choice(ADDR_POOL[:-2])
            trace.append(("sradd", b, b + rng.choice((4, 8, 16, 32, 64))))
        elif r < 0.72:
            trace.append(("srdlg", rng.choice(ADDR_POOL) + rng.choice((0, 1, 3, 8))
                          if rng.random() < 0.9 else 0))
        elif r < 0.88:
            b = rng.choice(ADDR_POOL[:-1]) + rng.choice((0, 4))
            trace.append(("srdsub", b, b + rng.choice((1, 4, 12, 16, 40))))
        elif tick:
            trace.append(("tick", rng.randint(1, 6)))
        else:
            trace.append(("sradd", 0x1000, 0x1004))
    return trace


def random_probes(rng: random.Random, n: int = 3) -> list[tuple[int, int]]:
    return [(rng.choice(ADDR_POOL[:-2]) + rng.randint(-4, 70), rng.choice((1, 2, 4)))
            for _ in range(n)]


def table3_overhead(cycles: int, baseline: int) -> str:
    """Percent at one decimal, computed with exact rational rounding."""
    from fractions import Fraction
    v = Fraction(cycles * 100, baseline)
    tenths = (v * 10 + Fraction(1, 2)).__floor__()
    return f"{tenths // 10}.{tenths % 10}%"
