"""Flat program image and its on-disk format.

Layout (all little-endian)::

    "HSIM" | version u16 | entry u32
    text:  base u32 | length u32 | bytes
    data:  base u32 | length u32 | bytes
    symbols: count u32, then per symbol
             name_len u16 | name (utf-8) | address u32 | size u32
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

MAGIC = b"HSIM"
VERSION = 1
AUX_PREFIX = "$aux"


class ImageFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Symbol:
    name: str
    address: int
    size: int


@dataclass
class Image:
    text_base: int = 0
    text: bytes = b""
    data_base: int = 0x10000000
    data: bytes = b""
    entry: int = 0
    symbols: dict[str, Symbol] = field(default_factory=dict)

    @property
    def words(self) -> list[int]:
        return [w for (w,) in struct.iter_unpack("<I", self.text)]

    def aux_addresses(self) -> frozenset[int]:
        """Addresses of instrumentation-only helper instructions."""
        out = set()
        for sym in self.symbols.values():
            if sym.name.startswith(AUX_PREFIX):
                out.update(range(sym.address, sym.address + sym.size, 4))
        return frozenset(out)

    def function_at(self, addr: int) -> Optional[str]:
        """Name of the text symbol whose extent covers ``addr``."""
        best = None
        for sym in self.symbols.values():
            if sym.name.startswith((AUX_PREFIX, ".")):
                continue
            if not self.text_base <= sym.address < self.text_base + len(self.text):
                continue
            if sym.address <= addr < sym.address + max(sym.size, 1):
                if best is None or sym.address > best.address:
                    best = sym
        return best.name if best else None

    # -- serialisation ----------------------------------------------------

    def to_bytes(self) -> bytes:
        out = bytearray(MAGIC)
        out += struct.pack("<HI", VERSION, self.entry)
        for base, blob in ((self.text_base, self.text), (self.data_base, self.data)):
            out += struct.pack("<II", base, len(blob))
            out += blob
        syms = sorted(self.symbols.values(), key=lambda s: (s.address, s.name))
        out += struct.pack("<I", len(syms))
        for sym in syms:
            name = sym.name.encode("utf-8")
            out += struct.pack("<H", len(name)) + name + struct.pack("<II", sym.address, sym.size)
        return bytes(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Image":
        if blob[:4] != MAGIC:
            raise ImageFormatError("bad magic (not an HSIM image)")
        try:
            version, entry = struct.unpack_from("<HI", blob, 4)
            if version != VERSION:
                raise ImageFormatError(f"unsupported image version {version}")
            off = 10
            segs = []
            for _ in range(2):
                base, length = struct.unpack_from("<II", blob, off)
                off += 8
                seg = bytes(blob[off:off + length])
                if len(seg) != length:
                    raise ImageFormatError("truncated segment")
                segs.append((base, seg))
                off += length
            (count,) = struct.unpack_from("<I", blob, off)
            off += 4
            symbols = {}
            for _ in range(count):
                (n,) = struct.unpack_from("<H", blob, off)
                off += 2
                name = blob[off:off + n].decode("utf-8")
                off += n
                addr, size = struct.unpack_from("<II", blob, off)
                off += 8
                symbols[name] = Symbol(name, addr, size)
        except struct.error as exc:
            raise ImageFormatError(f"truncated image: {exc}") from None
        (tb, text), (db, data) = segs
        return cls(tb, text, db, data, entry, symbols)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Image":
        return cls.from_bytes(Path(path).read_bytes())
