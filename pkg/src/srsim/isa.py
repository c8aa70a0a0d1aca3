"""RV32I subset plus the six scope instructions: encoding and decoding.

Scope instructions live under the custom-0 major opcode (``0b0001011``) using
the S-type layout ``imm[11:5] | rs2 | rs1 | funct3 | imm[4:0] | opcode``.
"""
from __future__ import annotations

from dataclasses import dataclass

from srsim.kernels import decode_fields

ABI_NAMES = ("zero ra sp gp tp t0 t1 t2 s0 s1 a0 a1 a2 a3 a4 a5 a6 a7 "
             "s2 s3 s4 s5 s6 s7 s8 s9 s10 s11 t3 t4 t5 t6").split()

REGISTERS = {name: i for i, name in enumerate(ABI_NAMES)}
REGISTERS.update({f"x{i}": i for i in range(32)})
REGISTERS["fp"] = 8

OP_LUI, OP_AUIPC, OP_JAL, OP_JALR = 0x37, 0x17, 0x6F, 0x67
OP_BRANCH, OP_LOAD, OP_STORE = 0x63, 0x03, 0x23
OP_IMM, OP_REG, OP_SYSTEM, OP_SCOPE = 0x13, 0x33, 0x73, 0x0B

ECALL_WORD = 0x00000073

R_OPS = {  # mnemonic: (funct3, funct7)
    "add": (0, 0x00), "sub": (0, 0x20), "sll": (1, 0x00), "slt": (2, 0x00),
    "sltu": (3, 0x00), "xor": (4, 0x00), "srl": (5, 0x00), "sra": (5, 0x20),
    "or": (6, 0x00), "and": (7, 0x00),
}
I_OPS = {"addi": 0, "slti": 2, "sltiu": 3, "xori": 4, "ori": 6, "andi": 7}
SHIFT_OPS = {"slli": (1, 0x00), "srli": (5, 0x00), "srai": (5, 0x20)}
LOAD_OPS = {"lb": 0, "lh": 1, "lw": 2, "lbu": 4, "lhu": 5}
STORE_OPS = {"sb": 0, "sh": 1, "sw": 2}
BRANCH_OPS = {"beq": 0, "bne": 1, "blt": 4, "bge": 5, "bltu": 6, "bgeu": 7}
SCOPE_OPS = {"sbent": 0, "sbxit": 1, "sradd": 2, "srdda": 3, "srdlg": 4, "srdsub": 5}

SCOPE_MNEMONICS = frozenset(SCOPE_OPS)
CONTEXT_SWITCHES = frozenset({"sbent", "sbxit"})

_R_BY_FIELDS = {v: k for k, v in R_OPS.items()}
_I_BY_F3 = {v: k for k, v in I_OPS.items()}
_SHIFT_BY_FIELDS = {v: k for k, v in SHIFT_OPS.items()}
_LOAD_BY_F3 = {v: k for k, v in LOAD_OPS.items()}
_STORE_BY_F3 = {v: k for k, v in STORE_OPS.items()}
_BRANCH_BY_F3 = {v: k for k, v in BRANCH_OPS.items()}
_SCOPE_BY_F3 = {v: k for k, v in SCOPE_OPS.items()}

MNEMONICS = tuple(
    ["lui", "auipc"] + list(I_OPS) + list(SHIFT_OPS) + list(R_OPS) + list(LOAD_OPS)
    + list(STORE_OPS) + list(BRANCH_OPS) + ["jal", "jalr", "ecall"] + list(SCOPE_OPS)
)


class IllegalInstruction(ValueError):
    def __init__(self, word: int, reason: str = "undefined encoding"):
        self.word = word
        super().__init__(f"illegal instruction 0x{word:08x}: {reason}")


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    """A decoded instruction; unused operand fields stay 0."""

    mnemonic: str
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    imm: int = 0
    raw: int = 0

    @property
    def is_scope(self) -> bool:
        return self.mnemonic in SCOPE_MNEMONICS


def _check_reg(*regs: int) -> None:
    for r in regs:
        if not 0 <= r < 32:
            raise EncodingError(f"register x{r} out of range")


def _check_signed(value: int, bits: int, what: str) -> None:
    lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
    if not lo <= value <= hi:
        raise EncodingError(f"{what} {value} out of signed {bits}-bit range [{lo}, {hi}]")


def _i_type(imm, rs1, funct3, rd, opcode):
    return ((imm & 0xFFF) << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode


def _s_type(imm, rs2, rs1, funct3, opcode):
    imm &= 0xFFF
    return ((imm >> 5) << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) \
        | ((imm & 0x1F) << 7) | opcode


def encode(mnemonic: str, rd: int = 0, rs1: int = 0, rs2: int = 0, imm: int = 0) -> int:
    """Encode one instruction to its 32-bit word; raises EncodingError on bad operands."""
    m = mnemonic
    _check_reg(rd, rs1, rs2)
    if m in R_OPS:
        f3, f7 = R_OPS[m]
        return (f7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | OP_REG
    if m in I_OPS:
        _check_signed(imm, 12, "immediate")
        return _i_type(imm, rs1, I_OPS[m], rd, OP_IMM)
    if m in SHIFT_OPS:
        if not 0 <= imm < 32:
            raise EncodingError(f"shift amount {imm} out of range [0, 31]")
        f3, f7 = SHIFT_OPS[m]
        return (f7 << 25) | (imm << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | OP_IMM
    if m in LOAD_OPS:
        _check_signed(imm, 12, "offset")
        return _i_type(imm, rs1, LOAD_OPS[m], rd, OP_LOAD)
    if m in STORE_OPS:
        _check_signed(imm, 12, "offset")
        return _s_type(imm, rs2, rs1, STORE_OPS[m], OP_STORE)
    if m in BRANCH_OPS:
        _check_signed(imm, 13, "branch offset")
        if imm & 1:
            raise EncodingError(f"branch offset {imm} is not 2-byte aligned")
        i = imm & 0x1FFF
        return (((i >> 12) & 1) << 31) | (((i >> 5) & 0x3F) << 25) | (rs2 << 20) \
            | (rs1 << 15) | (BRANCH_OPS[m] << 12) | (((i >> 1) & 0xF) << 8) \
            | (((i >> 11) & 1) << 7) | OP_BRANCH
    if m in ("lui", "auipc"):
        if not 0 <= imm <= 0xFFFFF:
            raise EncodingError(f"upper immediate 0x{imm:x} out of 20-bit range")
        return (imm << 12) | (rd << 7) | (OP_LUI if m == "lui" else OP_AUIPC)
    if m == "jal":
        _check_signed(imm, 21, "jump offset")
        if imm & 1:
            raise EncodingError(f"jump offset {imm} is not 2-byte aligned")
        i = imm & 0x1FFFFF
        return (((i >> 20) & 1) << 31) | (((i >> 1) & 0x3FF) << 21) | (((i >> 11) & 1) << 20) \
            | (((i >> 12) & 0xFF) << 12) | (rd << 7) | OP_JAL
    if m == "jalr":
        _check_signed(imm, 12, "offset")
        return _i_type(imm, rs1, 0, rd, OP_JALR)
    if m == "ecall":
        return ECALL_WORD
    if m in SCOPE_OPS:
        if m in CONTEXT_SWITCHES and (rs1 or rs2 or imm):
            raise EncodingError(f"{m} takes no operands")
        if m == "srdlg" and rs2:
            raise EncodingError("srdlg has no second register operand")
        _check_signed(imm, 12, "immediate")
        return _s_type(imm, rs2, rs1, SCOPE_OPS[m], OP_SCOPE)
    raise EncodingError(f"unknown mnemonic {mnemonic!r}")


def encode_instruction(ins: Instruction) -> int:
    return encode(ins.mnemonic, ins.rd, ins.rs1, ins.rs2, ins.imm)


def decode(word: int) -> Instruction:
    """Decode a 32-bit word; raises IllegalInstruction for anything outside the subset."""
    word &= 0xFFFFFFFF
    (opcode, rd, f3, rs1, rs2, f7, imm_i, imm_s, imm_b, imm_u, imm_j) = decode_fields(word)
    if opcode == OP_REG:
        m = _R_BY_FIELDS.get((f3, f7))
        if m:
            return Instruction(m, rd, rs1, rs2, 0, word)
    elif opcode == OP_IMM:
        if f3 in (1, 5):
            m = _SHIFT_BY_FIELDS.get((f3, f7))
            if m:
                return Instruction(m, rd, rs1, 0, rs2, word)
        else:
            return Instruction(_I_BY_F3[f3], rd, rs1, 0, imm_i, word)
    elif opcode == OP_LOAD:
        m = _LOAD_BY_F3.get(f3)
        if m:
            return Instruction(m, rd, rs1, 0, imm_i, word)
    elif opcode == OP_STORE:
        m = _STORE_BY_F3.get(f3)
        if m:
            return Instruction(m, 0, rs1, rs2, imm_s, word)
    elif opcode == OP_BRANCH:
        m = _BRANCH_BY_F3.get(f3)
        if m:
            return Instruction(m, 0, rs1, rs2, imm_b, word)
    elif opcode == OP_LUI:
        return Instruction("lui", rd, 0, 0, imm_u >> 12, word)
    elif opcode == OP_AUIPC:
        return Instruction("auipc", rd, 0, 0, imm_u >> 12, word)
    elif opcode == OP_JAL:
        return Instruction("jal", rd, 0, 0, imm_j, word)
    elif opcode == OP_JALR:
        if f3 == 0:
            return Instruction("jalr", rd, rs1, 0, imm_i, word)
    elif opcode == OP_SYSTEM:
        if word == ECALL_WORD:
            return Instruction("ecall", raw=word)
    elif opcode == OP_SCOPE:
        m = _SCOPE_BY_F3.get(f3)
        if m in CONTEXT_SWITCHES:
            if word == _s_type(0, 0, 0, f3, OP_SCOPE):
                return Instruction(m, raw=word)
            raise IllegalInstruction(word, f"{m} with nonzero operand fields")
        if m == "srdlg" and rs2:
            raise IllegalInstruction(word, "srdlg with nonzero rs2")
        if m:
            return Instruction(m, 0, rs1, rs2, imm_s, word)
    raise IllegalInstruction(word)
