"""Per-instruction overhead ledger and report rendering."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from srsim.isa import SCOPE_MNEMONICS

ROW_ORDER = ("sbent", "sbxit", "sradd", "srdda", "srdlg", "srdsub", "Other")
NO_STALL_ROWS = frozenset({"sradd", "srdda", "Other"})
SWITCH_ROWS = frozenset({"sbent", "sbxit"})


class AccountingError(AssertionError):
    """The cycle ledger does not add up; always a simulator bug."""


@dataclass
class Row:
    instructions: int = 0
    cycles: int = 0
    stalls: int = 0

    def add(self, other: "Row") -> "Row":
        return Row(self.instructions + other.instructions, self.cycles + other.cycles,
                   self.stalls + other.stalls)


def _merge_min(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass
class ProfileLedger:
    rows: dict[str, Row] = field(default_factory=lambda: {k: Row() for k in ROW_ORDER})
    run_cycles: Optional[int] = None
    max_depth: int = 0
    min_frame_entries: Optional[int] = None
    max_frame_entries: int = 0
    warnings: int = 0

    def record(self, step) -> None:
        """Account one StepResult; base (non-aux) instructions only feed ``run_cycles``."""
        if step.trap is not None or step.instruction is None:
            return
        self.run_cycles = (self.run_cycles or 0) + step.cycle_cost
        m = step.instruction.mnemonic
        if m in SCOPE_MNEMONICS:
            key = m
        elif step.aux:
            key = "Other"
        else:
            return
        row = self.rows[key]
        row.instructions += 1
        row.cycles += step.cycle_cost
        row.stalls += step.stall_cycles

    def absorb_engine(self, engine) -> None:
        st = engine.stats
        self.max_depth = max(self.max_depth, st.max_depth)
        self.min_frame_entries = _merge_min(self.min_frame_entries, st.min_frame_entries)
        self.max_frame_entries = max(self.max_frame_entries, st.max_frame_entries)
        self.warnings += st.warnings

    def merge(self, other: "ProfileLedger") -> "ProfileLedger":
        run = None
        if self.run_cycles is not None or other.run_cycles is not None:
            run = (self.run_cycles or 0) + (other.run_cycles or 0)
        return ProfileLedger(
            {k: self.rows[k].add(other.rows[k]) for k in ROW_ORDER}, run,
            max(self.max_depth, other.max_depth),
            _merge_min(self.min_frame_entries, other.min_frame_entries),
            max(self.max_frame_entries, other.max_frame_entries),
            self.warnings + other.warnings,
        )

    def set_row(self, name: str, instructions: int, cycles: int, stalls: int = 0) -> None:
        self.rows[name] = Row(instructions, cycles, stalls)

    @property
    def total(self) -> Row:
        out = Row()
        for k in ROW_ORDER:
            out = out.add(self.rows[k])
        return out

    def check(self) -> None:
        for name, row in self.rows.items():
            if row.cycles < row.instructions:
                raise AccountingError(f"{name}: cycles {row.cycles} < instructions "
                                      f"{row.instructions}")
            if name in SWITCH_ROWS and row.stalls != row.cycles - row.instructions:
                raise AccountingError(f"{name}: stalls {row.stalls} != cycles - instructions")
            if name in NO_STALL_ROWS and row.stalls:
                raise AccountingError(f"{name}: unexpected stalls {row.stalls}")


def pct(cycles: int, baseline: int) -> str:
    if baseline <= 0:
        return "n/a"
    return f"{100.0 * cycles / baseline:.1f}%"


@dataclass
class ProfileReport:
    ledger: ProfileLedger
    baseline_cycles: int
    instrumented_cycles: int

    def overhead(self, name: str) -> str:
        row = self.ledger.total if name == "total" else self.ledger.rows[name]
        return pct(row.cycles, self.baseline_cycles)

    def table(self) -> list[list[str]]:
        rows = [["", "# instr", "# cycles", "# stalls", "overhead"]]
        for name in ROW_ORDER:
            r = self.ledger.rows[name]
            stalls = "-" if name in NO_STALL_ROWS else str(r.stalls)
            rows.append([name, str(r.instructions), str(r.cycles), stalls, self.overhead(name)])
        t = self.ledger.total
        rows.append(["total", str(t.instructions), str(t.cycles), str(t.stalls),
                     self.overhead("total")])
        return rows

    def render_text(self) -> str:
        rows = self.table()
        widths = [max(len(r[i]) for r in rows) for i in range(5)]
        lines = []
        for i, r in enumerate(rows):
            cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
            lines.append("  ".join(cells).rstrip())
            if i == 0 or i == len(ROW_ORDER):
                lines.append("-" * len(lines[0]))
        led = self.ledger
        lines.append(f"baseline cycles: {self.baseline_cycles}   "
                     f"instrumented cycles: {self.instrumented_cycles}")
        if led.run_cycles is not None:
            lo = led.min_frame_entries if led.min_frame_entries is not None else 0
            lines.append(f"SRS: max depth {led.max_depth}, entries per frame {lo}-"
                         f"{led.max_frame_entries}, warnings {led.warnings}")
        return "\n".join(lines) + "\n"

    def render_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "instructions", "cycles", "stalls", "overhead_pct"])
        for name in ROW_ORDER:
            r = self.ledger.rows[name]
            w.writerow([name, r.instructions, r.cycles, "" if name in NO_STALL_ROWS else r.stalls,
                        self.overhead(name).rstrip("%")])
        t = self.ledger.total
        w.writerow(["total", t.instructions, t.cycles, t.stalls, self.overhead("total").rstrip("%")])
        return buf.getvalue()


def report(ledger: ProfileLedger, baseline_cycles: int,
           instrumented_cycles: Optional[int] = None) -> ProfileReport:
    """Build a report, enforcing instrumented = baseline + sum of rows."""
    ledger.check()
    extra = ledger.total.cycles
    if instrumented_cycles is None:
        instrumented_cycles = ledger.run_cycles
    if instrumented_cycles is None:
        instrumented_cycles = baseline_cycles + extra
    if instrumented_cycles != baseline_cycles + extra:
        raise AccountingError(
            f"identity violated: instrumented {instrumented_cycles} != baseline "
            f"{baseline_cycles} + rows {extra} (diff {instrumented_cycles - baseline_cycles - extra})")
    return ProfileReport(ledger, baseline_cycles, instrumented_cycles)
