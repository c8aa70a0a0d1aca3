import random

import pytest
from hypothesis import given, strategies as st

from oracles import SCOPE_FUNCT3, SCOPE_OPCODE, pack_s_type
from operands import sample_operands
from srsim.isa import (
    MNEMONICS, REGISTERS, EncodingError, IllegalInstruction, Instruction, decode, encode,
)

# Frozen from the bit-packing oracle in oracles.py.
SRADD_T0_23_T0 = 0x0052AB8B
SBENT = 0x0000000B


def test_frozen_words_match_oracle():
    assert pack_s_type(23, 5, 5, SCOPE_FUNCT3["sradd"], SCOPE_OPCODE) == SRADD_T0_23_T0
    assert pack_s_type(0, 0, 0, SCOPE_FUNCT3["sbent"], SCOPE_OPCODE) == SBENT


def test_decode_sradd(backend):
    assert decode(SRADD_T0_23_T0) == Instruction("sradd", 0, 5, 5, 23, SRADD_T0_23_T0)


def test_decode_sbent(backend):
    ins = decode(SBENT)
    assert ins.mnemonic == "sbent" and (ins.rs1, ins.rs2, ins.imm) == (0, 0, 0)


@pytest.mark.parametrize("word", [0xFFFFFFFF, 0x00000000, 0x0000700B, 0x0010008B, 0x0000100B | (1 << 20)])
def test_illegal_words(word, backend):
    with pytest.raises(IllegalInstruction):
        decode(word)


@pytest.mark.parametrize("m", sorted(SCOPE_FUNCT3))
def test_scope_encoding_matches_oracle(m):
    rng = random.Random(m)
    for _ in range(200):
        _, rs1, rs2, imm = sample_operands(m, rng)
        assert encode(m, 0, rs1, rs2, imm) == pack_s_type(imm, rs2, rs1, SCOPE_FUNCT3[m],
                                                          SCOPE_OPCODE)


@pytest.mark.parametrize("m", MNEMONICS)
def test_round_trip_per_mnemonic(m, backend):
    rng = random.Random(f"rt-{m}")
    for _ in range(100):
        rd, rs1, rs2, imm = sample_operands(m, rng)
        word = encode(m, rd, rs1, rs2, imm)
        assert decode(word) == Instruction(m, rd, rs1, rs2, imm, word)
        assert encode(m, rd, rs1, rs2, imm) == word


@given(st.integers(0, 0xFFFFFFFF))
def test_decode_encode_is_identity_on_legal_words(word):
    try:
        ins = decode(word)
    except IllegalInstruction:
        return
    assert encode(ins.mnemonic, ins.rd, ins.rs1, ins.rs2, ins.imm) == word


@pytest.mark.parametrize("args", [
    ("addi", 1, 0, 0, 2048), ("addi", 1, 0, 0, -2049), ("sradd", 0, 5, 5, 5000),
    ("slli", 1, 1, 0, 32), ("beq", 0, 1, 2, 3), ("jal", 1, 0, 0, 1 << 20),
    ("lui", 1, 0, 0, 1 << 20), ("sbent", 0, 1, 0, 0), ("srdlg", 0, 1, 2, 0),
    ("add", 32, 0, 0, 0), ("frob", 0, 0, 0, 0),
])
def test_encode_rejects(args):
    with pytest.raises(EncodingError):
        encode(*args)


def test_register_names():
    assert REGISTERS["sp"] == 2 and REGISTERS["ra"] == 1 and REGISTERS["s0"] == 8
    assert REGISTERS["fp"] == 8
    assert [REGISTERS[f"a{i}"] for i in range(8)] == list(range(10, 18))
    assert REGISTERS["t0"] == 5 and REGISTERS["t6"] == 31
    assert REGISTERS["x31"] == 31


def test_supported_mnemonic_set():
    base = {"lui", "auipc", "addi", "andi", "ori", "xori", "slti", "sltiu", "slli", "srli",
            "srai", "add", "sub", "and", "or", "xor", "sll", "srl", "sra", "slt", "sltu", "lb",
            "lbu", "lh", "lhu", "lw", "sb", "sh", "sw", "beq", "bne", "blt", "bge", "bltu",
            "bgeu", "jal", "jalr", "ecall"}
    scope = {"sbent", "sbxit", "sradd", "srdda", "srdlg", "srdsub"}
    assert set(MNEMONICS) == base | scope
