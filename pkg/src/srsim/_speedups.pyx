# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels: bank scan for access checks and instruction field split."""


def last_containing(list entries, long long lo, long long hi):
    cdef Py_ssize_t i
    cdef tuple e
    cdef long long base, limit
    for i in range(len(entries) - 1, -1, -1):
        e = <tuple>entries[i]
        base = e[0]
        limit = e[1]
        if base <= lo and hi <= limit:
            return i
    return -1


def decode_fields(unsigned int word):
    cdef unsigned int opcode = word & 0x7F
    cdef unsigned int rd = (word >> 7) & 0x1F
    cdef unsigned int funct3 = (word >> 12) & 0x7
    cdef unsigned int rs1 = (word >> 15) & 0x1F
    cdef unsigned int rs2 = (word >> 20) & 0x1F
    cdef unsigned int funct7 = word >> 25
    cdef int imm_i = (<int>word) >> 20
    cdef int imm_s = (((<int>word) >> 25) << 5) | <int>rd
    cdef int imm_b = (((<int>word) >> 31) << 12) | <int>(((word >> 7) & 1) << 11) \
        | <int>(((word >> 25) & 0x3F) << 5) | <int>(((word >> 8) & 0xF) << 1)
    cdef unsigned int imm_u = word & 0xFFFFF000u
    cdef int imm_j = (((<int>word) >> 31) << 20) | <int>(((word >> 12) & 0xFF) << 12) \
        | <int>(((word >> 20) & 1) << 11) | <int>(((word >> 21) & 0x3FF) << 1)
    return (opcode, rd, funct3, rs1, rs2, funct7, imm_i, imm_s, imm_b, imm_u, imm_j)
