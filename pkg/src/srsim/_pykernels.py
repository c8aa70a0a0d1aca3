"""Pure-Python versions of the hot kernels (fallback for ``_speedups``)."""


def last_containing(entries, lo, hi):
    """Index of the newest ``(base, limit)`` entry with base <= lo and hi <= limit, else -1."""
    for i in range(len(entries) - 1, -1, -1):
        base, limit = entries[i]
        if base <= lo and hi <= limit:
            return i
    return -1


def decode_fields(word):
    """Split a 32-bit word into (opcode, rd, funct3, rs1, rs2, funct7, imm_i, imm_s, imm_b, imm_u, imm_j)."""
    opcode = word & 0x7F
    rd = (word >> 7) & 0x1F
    funct3 = (word >> 12) & 0x7
    rs1 = (word >> 15) & 0x1F
    rs2 = (word >> 20) & 0x1F
    funct7 = word >> 25
    imm_i = word >> 20
    if imm_i & 0x800:
        imm_i -= 0x1000
    imm_s = (funct7 << 5) | rd
    if imm_s & 0x800:
        imm_s -= 0x1000
    imm_b = (((word >> 31) & 1) << 12) | (((word >> 7) & 1) << 11) \
        | (((word >> 25) & 0x3F) << 5) | (((word >> 8) & 0xF) << 1)
    if imm_b & 0x1000:
        imm_b -= 0x2000
    imm_u = word & 0xFFFFF000
    imm_j = (((word >> 31) & 1) << 20) | (((word >> 12) & 0xFF) << 12) \
        | (((word >> 20) & 1) << 11) | (((word >> 21) & 0x3FF) << 1)
    if imm_j & 0x100000:
        imm_j -= 0x200000
    return (opcode, rd, funct3, rs1, rs2, funct7, imm_i, imm_s, imm_b, imm_u, imm_j)
