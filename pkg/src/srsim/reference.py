"""Flat reference model of the SRS semantics.

No banks, no background transfers: the stack is a plain list of frames whose
last element is the active one. Used as a differential oracle for the banked
engine; it raises the same fault kinds in the same situations.
"""
from __future__ import annotations

from typing import Optional

from srsim.engine import Delegation, EngineFault, FaultKind, RegionEntry

_MASK = 0xFFFFFFFF


class FlatSRS:
    def __init__(self, bank_capacity: int = 16, max_frames: int = 16,
                 delegation_mode: Delegation = Delegation.LAX):
        self.cap = bank_capacity
        self.max_frames = max_frames
        self.strict = Delegation(delegation_mode) is Delegation.STRICT
        self.frames: list[list[tuple[int, int]]] = []
        self.spare: list[tuple[int, int]] = []
        self.warnings = 0

    @property
    def enabled(self) -> bool:
        return bool(self.frames)

    @property
    def depth(self) -> int:
        return len(self.frames)

    def _entry(self, base: int, limit: int) -> tuple[int, int]:
        if not (0 <= base <= _MASK and 0 <= limit <= _MASK) or base >= limit:
            raise EngineFault(FaultKind.INVALID_REGION, "bad region")
        return (base, limit)

    def _find(self, lo: int, hi: int) -> Optional[tuple[int, int]]:
        for base, limit in reversed(self.frames[-1]):
            if base <= lo and hi <= limit:
                return (base, limit)
        return None

    def _to_spare(self, entry: tuple[int, int]) -> None:
        if len(self.spare) >= self.cap:
            raise EngineFault(FaultKind.BANK_OVERFLOW, "spare full")
        self.spare.append(entry)

    def sbent(self) -> None:
        if len(self.frames) > self.max_frames:
            raise EngineFault(FaultKind.SRS_OVERFLOW, "too deep")
        self.frames.append(self.spare)
        self.spare = []

    def sbxit(self) -> None:
        if not self.frames:
            raise EngineFault(FaultKind.SRS_UNDERFLOW, "empty")
        if len(self.frames) >= 2 and len(self.frames[-2]) + len(self.spare) > self.cap:
            raise EngineFault(FaultKind.BANK_OVERFLOW, "restored frame too large")
        self.frames.pop()
        if self.frames:
            self.frames[-1] = self.frames[-1] + self.spare
        self.spare = []

    def sradd(self, base: int, limit: int) -> Optional[RegionEntry]:
        if not self.frames:
            self.warnings += 1
            return None
        entry = self._entry(base, limit)
        if len(self.frames[-1]) >= self.cap:
            raise EngineFault(FaultKind.BANK_OVERFLOW, "active full")
        self.frames[-1].append(entry)
        return RegionEntry(*entry)

    def srdlg(self, addr: int) -> Optional[RegionEntry]:
        if not self.frames:
            self.warnings += 1
            return None
        hit = self._find(addr, addr + 1)
        if hit is None:
            if self.strict and addr != 0:
                raise EngineFault(FaultKind.STRICT_DELEGATION_MISS, "no match")
            return None
        self._to_spare(hit)
        return RegionEntry(*hit)

    def srdsub(self, base: int, limit: int) -> Optional[RegionEntry]:
        if not self.frames:
            self.warnings += 1
            return None
        entry = self._entry(base, limit)
        if self._find(base, limit) is None:
            if self.strict and base != 0:
                raise EngineFault(FaultKind.STRICT_DELEGATION_MISS, "no match")
            return None
        self._to_spare(entry)
        return RegionEntry(*entry)

    def allows(self, addr: int, size: int) -> bool:
        return not self.frames or self._find(addr, addr + size) is not None

    def active_entries(self) -> list[tuple[int, int]]:
        return list(self.frames[-1]) if self.frames else []


def apply_op(model, op: tuple) -> Optional[RegionEntry]:
    """Apply one trace op (``("sbent",)``, ``("sradd", b, l)``, ``("tick", n)`` ...)."""
    name, *args = op
    if name == "tick":
        tick = getattr(model, "tick", None)
        if tick is not None:
            tick(*args)
        return None
    return getattr(model, name)(*args)
