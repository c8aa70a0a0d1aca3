import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import SCOPE_FUNCT3, SCOPE_OPCODE, pack_s_type
from operands import sample_operands
from srsim.assembler import (
    AsmError, assemble, assemble_instruction, assemble_with_listing, disassemble,
    disassemble_image, hi20, lo12,
)
from srsim.image import Image, ImageFormatError
from srsim.isa import MNEMONICS, decode, encode
from srsim.scenarios import build, list_scenarios, load_scenario


def s_word(m, rs1, rs2, imm):
    return pack_s_type(imm, rs2, rs1, SCOPE_FUNCT3[m], SCOPE_OPCODE)


def test_srdda_listing_form():
    assert assemble_instruction("srdda -16(sp), sp") == s_word("srdda", 2, 2, -16)


def test_srdsub_listing_form():
    assert assemble_instruction("srdsub a1,1024(a1)") == s_word("srdsub", 11, 11, 1024)


@pytest.mark.parametrize("text,expected", [
    ("sradd t0, 23(t0)", s_word("sradd", 5, 5, 23)),
    ("sradd t0, t1", s_word("sradd", 5, 6, 0)),
    ("srdlg a0", s_word("srdlg", 10, 0, 0)),
    ("srdlg 8(a0)", s_word("srdlg", 10, 0, 8)),
    ("srdlg 0x104", s_word("srdlg", 0, 0, 0x104)),
    ("sbent", s_word("sbent", 0, 0, 0)),
    ("sbxit", s_word("sbxit", 0, 0, 0)),
])
def test_scope_operand_forms(text, expected):
    assert assemble_instruction(text) == expected


def test_sradd_immediate_out_of_range():
    with pytest.raises(AsmError, match="out of signed 12-bit range"):
        assemble("sradd t0, 5000(t0)")


@pytest.mark.parametrize("src,msg", [
    ("j nowhere", "undefined symbol"),
    ("a:\na:\nnop", "duplicate label"),
    ("addi a0, a0, 4096", "out of signed 12-bit range"),
    ("beq a0, a1, 6", "misaligned branch target"),
    ("frob a0", "unknown instruction"),
    ("lw a0, 0(q9)", "expected register"),
    (".aux_begin\nnop", "unterminated"),
])
def test_assembly_errors(src, msg):
    with pytest.raises(AsmError, match=msg):
        assemble(src)


def test_error_reports_line_number():
    with pytest.raises(AsmError) as ei:
        assemble("nop\nnop\nj missing\n")
    assert ei.value.lineno == 3


def test_disassemble_canonical_forms():
    assert disassemble(assemble_instruction("sbent")) == "sbent"
    assert disassemble(assemble_instruction("srdlg a0")) == "srdlg 0(a0)"
    assert disassemble(assemble_instruction("srdda -16(sp), sp")) == "srdda -16(sp), sp"
    assert disassemble(assemble_instruction("sradd t0, 23(t0)")) == "sradd t0, 23(t0)"
    assert disassemble(0xFFFFFFFF) == ".word 0xffffffff"


def test_forward_references_and_pseudo_ops():
    src = """
    main:
        la a0, value
        lw a0, 0(a0)
        call helper
        li a7, 0
        ecall
    helper:
        addi a0, a0, 1
        ret
    .data
    value: .word 41
    """
    from srsim.machine import Machine
    m = Machine()
    m.load_image(assemble(src))
    assert m.run().exit_code == 42


def test_li_large_and_negative():
    from srsim.machine import Machine
    for v in (0, 2047, -2048, 0x12345678, -1, 0x800, 0x7FFFF800, -0x80000000):
        m = Machine()
        m.load_image(assemble(f"li a0, {v}\nli a7, 0\necall\n"))
        m.run()
        assert m.regs[10] == v & 0xFFFFFFFF


def test_hi_lo_split():
    for v in (0, 0x10000080, 0x10000800, 0xFFFFFFFF, 0x7FF, 0x800):
        assert ((hi20(v) << 12) + lo12(v)) & 0xFFFFFFFF == v


def test_data_directives_and_symbols():
    img = assemble(".data\na: .byte 1, 2\n.align 2\nb: .half 0x1234\n.align 2\nc: .word b\n"
                   "d: .asciz \"hi\"\ne: .space 3\n.size e, 8\n")
    assert img.data[:2] == b"\x01\x02"
    assert img.symbols["b"].address == 0x10000004
    assert img.data[4:6] == b"\x34\x12"
    assert int.from_bytes(img.data[8:12], "little") == 0x10000004
    assert img.data[12:15] == b"hi\x00"
    assert img.symbols["a"].size == 4 and img.symbols["e"].size == 8


def test_entry_point_selection():
    assert assemble("nop\nmain: nop\n").entry == 4
    assert assemble("nop\nmain: nop\n_start: nop\n").entry == 8
    assert assemble("nop\n", text_base=0x400).entry == 0x400


def test_aux_spans_become_symbols():
    img = assemble("nop\n.aux_begin\nnop\nnop\n.aux_end\nnop\n")
    assert img.aux_addresses() == frozenset({4, 8})


def test_listing_has_address_and_word():
    lst = assemble_with_listing("main: sbent\n").render_listing()
    assert lst.startswith("00000000: 0000000b")


def test_image_byte_stability_and_format():
    src = "main: li a0, 1\nsbent\nsbxit\nret\n.data\nx: .word 7\n"
    a, b = assemble(src).to_bytes(), assemble(src).to_bytes()
    assert a == b
    assert a[:4] == b"HSIM" and a[4:6] == b"\x01\x00"
    img = Image.from_bytes(a)
    assert img.to_bytes() == a and img.symbols["x"].address == 0x10000000


@pytest.mark.parametrize("blob", [b"", b"NOPE" + bytes(20), b"HSIM\x02\x00" + bytes(20),
                                  b"HSIM\x01\x00\x00\x00\x00\x00\x00\x00"])
def test_bad_image_rejected(blob):
    with pytest.raises(ImageFormatError):
        Image.from_bytes(blob)


def test_image_save_load(tmp_path):
    img = assemble("main: nop\n")
    img.save(tmp_path / "a.img")
    assert Image.load(tmp_path / "a.img") == img


@pytest.mark.parametrize("name", list_scenarios())
def test_reassembly_of_bundled_corpus(name):
    for img in build(load_scenario(name)):
        again = assemble(disassemble_image(img), img.text_base, img.data_base)
        assert again.to_bytes() == img.to_bytes()


@pytest.mark.parametrize("m", MNEMONICS)
def test_disassemble_assemble_single(m):
    rng = random.Random(f"asm-{m}")
    for _ in range(50):
        rd, rs1, rs2, imm = sample_operands(m, rng)
        word = encode(m, rd, rs1, rs2, imm)
        pc = 0x4000
        assert assemble_instruction(disassemble(word, pc), pc) == word


@settings(max_examples=200)
@given(st.integers(0, 0xFFFFFFFF))
def test_disassembly_of_any_word_reassembles(word):
    text = disassemble(word, 0x100000)
    again = assemble_instruction(text, 0x100000)
    assert again == word
    if not text.startswith(".word"):
        assert decode(again).mnemonic == text.split()[0]
