"""Storage Region Stack (SRS) engine.

The engine keeps the per-context memory access rules of the simulated core.
It mirrors the banked hardware organisation: an *active* bank checked on every
load/store, a *spare* bank that accumulates delegations for the next context,
and a *cache* bank holding a copy of the topmost suspended frame while it is
drained to (or refilled from) protected memory in the background.

All intervals are half-open ``[base, limit)`` over unsigned 32-bit addresses.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

from srsim.kernels import last_containing

ADDR_MASK = 0xFFFFFFFF


class FaultKind(str, enum.Enum):
    ACCESS_VIOLATION = "access_violation"
    STRICT_DELEGATION_MISS = "strict_delegation_miss"
    SRS_UNDERFLOW = "srs_underflow"
    SRS_OVERFLOW = "srs_overflow"
    BANK_OVERFLOW = "bank_overflow"
    INVALID_REGION = "invalid_region"


class EngineFault(Exception):
    """A hardware fault raised by the SRS unit."""

    def __init__(self, kind: FaultKind, detail: str, *, addr: Optional[int] = None,
                 limit: Optional[int] = None):
        self.kind = FaultKind(kind)
        self.detail = detail
        self.addr = addr
        self.limit = limit
        super().__init__(f"{self.kind.value}: {detail}")


class RegionEntry(NamedTuple):
    base: int
    limit: int

    def contains(self, lo: int, hi: int) -> bool:
        return self.base <= lo and hi <= self.limit

    def __str__(self) -> str:
        return f"[0x{self.base:08x}, 0x{self.limit:08x})"


def make_entry(base: int, limit: int) -> RegionEntry:
    if not (0 <= base <= ADDR_MASK and 0 <= limit <= ADDR_MASK):
        raise EngineFault(FaultKind.INVALID_REGION,
                          f"region [0x{base:x}, 0x{limit:x}) outside 32-bit space",
                          addr=base, limit=limit)
    if base >= limit:
        raise EngineFault(FaultKind.INVALID_REGION,
                          f"empty or inverted region [0x{base:08x}, 0x{limit:08x})",
                          addr=base, limit=limit)
    return RegionEntry(base, limit)


class Bank:
    """Fixed-capacity ordered register bank; index order is insertion order."""

    __slots__ = ("name", "capacity", "entries")

    def __init__(self, name: str, capacity: int, entries=()):
        self.name = name
        self.capacity = capacity
        self.entries: list[RegionEntry] = list(entries)

    def append(self, entry: RegionEntry) -> None:
        if len(self.entries) >= self.capacity:
            raise EngineFault(FaultKind.BANK_OVERFLOW,
                              f"{self.name} bank full ({self.capacity} entries) adding {entry}",
                              addr=entry.base, limit=entry.limit)
        self.entries.append(entry)

    def load(self, entries) -> None:
        entries = list(entries)
        if len(entries) > self.capacity:
            raise EngineFault(FaultKind.BANK_OVERFLOW,
                              f"{self.name} bank cannot hold {len(entries)} entries "
                              f"(capacity {self.capacity})")
        self.entries = entries

    def clear(self) -> None:
        self.entries = []

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[RegionEntry]:
        return iter(self.entries)

    def __repr__(self) -> str:
        return f"Bank({self.name}, {[str(e) for e in self.entries]})"


@dataclass
class FrameStack:
    max_frames: int
    frames: list[list[RegionEntry]] = field(default_factory=list)

    def push(self, frame: list[RegionEntry]) -> None:
        if len(self.frames) >= self.max_frames:
            raise EngineFault(FaultKind.SRS_OVERFLOW,
                              f"protected SRS memory full ({self.max_frames} frames)")
        self.frames.append(list(frame))


class Delegation(str, enum.Enum):
    LAX = "lax"
    STRICT = "strict"


class TransferDir(str, enum.Enum):
    NONE = "none"
    TO_STACK = "to_stack"
    FROM_STACK = "from_stack"


@dataclass(frozen=True)
class EngineConfig:
    bank_capacity: int = 16
    max_frames: int = 16
    delegation_mode: Delegation = Delegation.LAX
    transfer_rate: int = 1

    def __post_init__(self):
        if self.bank_capacity < 1:
            raise ValueError("bank_capacity must be positive")
        if self.max_frames < 1:
            raise ValueError("max_frames must be positive")
        rate = self.transfer_rate
        if rate < 1 or rate & (rate - 1):
            raise ValueError("transfer_rate must be a power of two >= 1")
        object.__setattr__(self, "delegation_mode", Delegation(self.delegation_mode))


class AccessDecision(NamedTuple):
    allowed: bool
    matched_index: Optional[int]


@dataclass
class EngineStats:
    max_depth: int = 0
    min_frame_entries: Optional[int] = None
    max_frame_entries: int = 0
    warnings: int = 0

    def note_frame(self, n: int) -> None:
        if self.min_frame_entries is None or n < self.min_frame_entries:
            self.min_frame_entries = n
        if n > self.max_frame_entries:
            self.max_frame_entries = n


class SRSEngine:
    """Banked SRS unit with background cache/stack transfers.

    Scope instructions other than ``sbent`` executed while enforcement is
    disabled are no-ops and only bump ``stats.warnings``.
    """

    def __init__(self, config: Optional[EngineConfig] = None):
        self.config = config or EngineConfig()
        n = self.config.bank_capacity
        self.active = Bank("active", n)
        self.spare = Bank("spare", n)
        self.cache = Bank("cache", n)
        self.stack = FrameStack(self.config.max_frames)
        self.enabled = False
        self.frame_count = 0
        self.pending = 0
        self.pending_dir = TransferDir.NONE
        self.stats = EngineStats()

    # -- background transfers -------------------------------------------

    def tick(self, cycles: int = 1) -> None:
        if self.pending == 0:
            return
        self.pending = max(0, self.pending - cycles * self.config.transfer_rate)
        if self.pending == 0:
            self._land_transfer()

    def _land_transfer(self) -> None:
        if self.pending_dir is TransferDir.TO_STACK:
            self.stack.push(self.cache.entries)
        self.pending = 0
        self.pending_dir = TransferDir.NONE

    def _drain_stall(self) -> int:
        if self.pending == 0:
            return 0
        return -(-self.pending // self.config.transfer_rate)

    # -- context switches -------------------------------------------------

    def sbent(self) -> int:
        """Enter a new context; returns the stall cycles charged."""
        if self.frame_count > self.config.max_frames:
            raise EngineFault(FaultKind.SRS_OVERFLOW,
                              f"SRS depth {self.frame_count + 1} exceeds "
                              f"{self.config.max_frames} stored frames + active")
        stall = 0
        if self.pending_dir is TransferDir.TO_STACK:
            stall = self._drain_stall()
            self._land_transfer()
        elif self.pending_dir is TransferDir.FROM_STACK:
            # partial refill is discarded without stalling
            self.pending = 0
            self.pending_dir = TransferDir.NONE

        if self.frame_count >= 1:
            self.stats.note_frame(len(self.active))
        self.cache.load(self.active.entries)
        self.active.load(self.spare.entries)
        self.spare.clear()
        if self.frame_count >= 1:
            if self.cache.entries:
                self.pending = len(self.cache)
                self.pending_dir = TransferDir.TO_STACK
            else:
                self.stack.push([])
        self.frame_count += 1
        self.enabled = True
        if self.frame_count > self.stats.max_depth:
            self.stats.max_depth = self.frame_count
        return stall

    def sbxit(self) -> int:
        """Leave the current context; returns the stall cycles charged."""
        if self.frame_count == 0:
            raise EngineFault(FaultKind.SRS_UNDERFLOW, "sbxit with empty SRS")
        restored = self.cache.entries + self.spare.entries
        if self.frame_count > 1 and len(restored) > self.config.bank_capacity:
            raise EngineFault(FaultKind.BANK_OVERFLOW,
                              f"restored frame needs {len(restored)} entries "
                              f"(capacity {self.config.bank_capacity})")
        stall = self._drain_stall()
        if self.pending:
            self._land_transfer()

        self.stats.note_frame(len(self.active))
        self.spare.clear()
        self.frame_count -= 1
        if self.frame_count == 0:
            self.active.clear()
            self.cache.clear()
            self.stack.frames.clear()
            self.enabled = False
            return stall

        self.active.load(restored)
        # the restored frame is live again; drop its at-rest copy
        self.stack.frames.pop()
        if self.frame_count >= 2:
            top = self.stack.frames[-1]
            self.cache.load(top)
            if top:
                self.pending = len(top)
                self.pending_dir = TransferDir.FROM_STACK
        else:
            self.cache.clear()
        return stall

    # -- entry creation and delegation ----------------------------------

    def sradd(self, base: int, limit: int) -> Optional[RegionEntry]:
        """Add ``[base, limit)`` to the active frame (sradd and srdda)."""
        if not self.enabled:
            self.stats.warnings += 1
            return None
        entry = make_entry(base, limit)
        self.active.append(entry)
        return entry

    def srdlg(self, addr: int) -> Optional[RegionEntry]:
        """Delegate the newest active entry containing ``addr``; None if no match."""
        if not self.enabled:
            self.stats.warnings += 1
            return None
        idx = last_containing(self.active.entries, addr, addr + 1)
        if idx < 0:
            if self.config.delegation_mode is Delegation.STRICT and addr != 0:
                raise EngineFault(FaultKind.STRICT_DELEGATION_MISS,
                                  f"no active entry contains 0x{addr:08x}", addr=addr)
            return None
        entry = self.active.entries[idx]
        self.spare.append(entry)
        return entry

    def srdsub(self, base: int, limit: int) -> Optional[RegionEntry]:
        """Delegate sub-region ``[base, limit)`` if some active entry covers it."""
        if not self.enabled:
            self.stats.warnings += 1
            return None
        entry = make_entry(base, limit)
        if last_containing(self.active.entries, base, limit) < 0:
            if self.config.delegation_mode is Delegation.STRICT and base != 0:
                raise EngineFault(FaultKind.STRICT_DELEGATION_MISS,
                                  f"no active entry covers {entry}", addr=base, limit=limit)
            return None
        self.spare.append(entry)
        return entry

    # -- enforcement ------------------------------------------------------

    def check_access(self, addr: int, size: int) -> AccessDecision:
        if not self.enabled:
            return AccessDecision(True, None)
        idx = last_containing(self.active.entries, addr, addr + size)
        if idx < 0:
            return AccessDecision(False, None)
        return AccessDecision(True, idx)

    def allows(self, addr: int, size: int) -> bool:
        return not self.enabled or last_containing(self.active.entries, addr, addr + size) >= 0

    def __repr__(self) -> str:
        return (f"SRSEngine(depth={self.frame_count}, active={len(self.active)}, "
                f"spare={len(self.spare)}, cache={len(self.cache)}, "
                f"pending={self.pending}/{self.pending_dir.value})")
