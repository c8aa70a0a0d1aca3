"""Bundled attack fixtures and the four-way mitigation matrix.

Each fixture directory holds ``program.hs.s``, ``benign.in``, ``benign.out``,
``attack.in`` and ``expect.toml``. A scenario is *mitigated* when the stripped
build shows the corruption on the attack input, every declared instrumented
attack run traps with the declared fault kind inside the declared function,
and benign output is identical across builds and matches ``benign.out``.
"""
from __future__ import annotations

import collections
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from srsim.assembler import assemble
from srsim.engine import Delegation, EngineConfig, SRSEngine
from srsim.image import Image
from srsim.instrumenter import Granularity, Policy, instrument, strip
from srsim.machine import Machine, RunOutcome

SCENARIO_ROOT = Path(__file__).with_name("scenarios")
MAX_STEPS = 1_000_000

MITIGATED = "mitigated"
NOT_MITIGATED = "NOT_mitigated"
BENIGN_BROKEN = "benign_broken"


class ScenarioError(Exception):
    pass


@dataclass(frozen=True)
class Patch:
    """Pre-run memory corruption: ``*(symbol + offset) = value`` (a symbol or integer)."""

    symbol: str
    offset: int
    value: Union[str, int]


@dataclass(frozen=True)
class TrapExpect:
    mode: str
    kind: str
    symbol: str
    input: str = "attack"
    patches: tuple[Patch, ...] = ()


@dataclass
class Scenario:
    name: str
    path: Path
    source: str
    benign_in: bytes
    benign_out: bytes
    attack_in: bytes
    policy: Granularity
    corrupt_marker: bytes
    traps: list[TrapExpect]

    @property
    def modes(self) -> list[str]:
        seen = ["lax"]
        for t in self.traps:
            if t.mode not in seen:
                seen.append(t.mode)
        return seen


@dataclass
class Cell:
    label: str
    outcome: RunOutcome
    stdout: bytes
    symbol: Optional[str] = None
    trace_tail: list[str] = field(default_factory=list)


@dataclass
class ScenarioResult:
    name: str
    verdict: str
    cells: list[Cell]
    reasons: list[str]
    elapsed: float

    def summary(self) -> str:
        head = f"{self.name:20s} {self.verdict}  ({self.elapsed * 1000:.0f} ms)"
        lines = [head]
        for c in self.cells:
            where = f" in {c.symbol}" if c.symbol else ""
            lines.append(f"    {c.label:28s} {c.outcome.describe()}{where}")
        lines += [f"    ! {r}" for r in self.reasons]
        return "\n".join(lines)


def list_scenarios(root: Path = SCENARIO_ROOT) -> list[str]:
    return sorted(p.name for p in root.iterdir() if (p / "expect.toml").is_file())


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError:
        raise ScenarioError(f"missing fixture file {path}") from None


def load_scenario(name: str, root: Path = SCENARIO_ROOT) -> Scenario:
    path = root / name
    if not path.is_dir():
        raise ScenarioError(f"unknown scenario {name!r} (have: {', '.join(list_scenarios(root))})")
    expect = tomllib.loads(_read(path / "expect.toml").decode("utf-8"))
    traps = []
    for t in expect.get("trap", []):
        patches = tuple(Patch(p["symbol"], p.get("offset", 0), p["value"])
                        for p in t.get("patches", []))
        traps.append(TrapExpect(t.get("mode", "lax"), t["kind"], t["symbol"],
                                t.get("input", "attack"), patches))
    if not traps:
        raise ScenarioError(f"{name}: expect.toml declares no [[trap]]")
    return Scenario(
        name, path, _read(path / "program.hs.s").decode("utf-8"),
        _read(path / "benign.in"), _read(path / "benign.out"), _read(path / "attack.in"),
        Granularity(expect.get("policy", "function")),
        expect["corrupt_marker"].encode("utf-8"), traps,
    )


def build(scn: Scenario) -> tuple[Image, Image]:
    """(instrumented, stripped) images for a scenario."""
    asm = instrument(scn.source, Policy(scn.policy))
    return assemble(asm), assemble(strip(asm))


def _resolve(image: Image, value: Union[str, int]) -> int:
    if isinstance(value, int):
        return value
    if value not in image.symbols:
        raise ScenarioError(f"patch refers to unknown symbol {value!r}")
    return image.symbols[value].address


def run_cell(label: str, image: Image, stdin: bytes, mode: str = "lax",
             patches: tuple[Patch, ...] = (), max_steps: int = MAX_STEPS) -> Cell:
    tail: collections.deque[str] = collections.deque(maxlen=12)
    engine = SRSEngine(EngineConfig(delegation_mode=Delegation(mode)))
    m = Machine(engine, stdin=stdin, trace=tail.append)
    m.load_image(image)
    for p in patches:
        m.mem.write(_resolve(image, p.symbol) + p.offset, 4, _resolve(image, p.value))
    out = m.run(max_steps)
    symbol = image.function_at(out.pc) if out.kind == "trapped" else None
    return Cell(label, out, bytes(m.stdout), symbol, list(tail))


def _inputs(scn: Scenario) -> dict[str, bytes]:
    return {"benign": scn.benign_in, "attack": scn.attack_in}


def run_scenario(scn: Union[str, Scenario], jobs: int = 1) -> ScenarioResult:
    if isinstance(scn, str):
        scn = load_scenario(scn)
    t0 = time.perf_counter()
    inst, stripped = build(scn)
    inputs = _inputs(scn)
    jobs_spec = [("stripped/benign", stripped, scn.benign_in, "lax", ()),
                 ("stripped/attack", stripped, scn.attack_in, "lax", ())]
    for mode in scn.modes:
        jobs_spec.append((f"instrumented/benign/{mode}", inst, scn.benign_in, mode, ()))
    for i, t in enumerate(scn.traps):
        if t.input not in inputs:
            raise ScenarioError(f"{scn.name}: trap input {t.input!r} is not benign/attack")
        tag = "+patched" if t.patches else ""
        jobs_spec.append((f"instrumented/{t.input}{tag}/{t.mode}#{i}", inst, inputs[t.input],
                          t.mode, t.patches))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(lambda a: run_cell(*a), jobs_spec))
    else:
        cells = [run_cell(*a) for a in jobs_spec]
    by_label = {c.label: c for c in cells}

    reasons: list[str] = []
    sb = by_label["stripped/benign"]
    benign_ok = True
    if sb.outcome.kind != "halted":
        benign_ok = False
        reasons.append(f"stripped benign did not halt: {sb.outcome.describe()}")
    if sb.stdout != scn.benign_out:
        benign_ok = False
        reasons.append(f"stripped benign output {sb.stdout!r} != benign.out {scn.benign_out!r}")
    for mode in scn.modes:
        ib = by_label[f"instrumented/benign/{mode}"]
        if (ib.outcome.kind, ib.outcome.exit_code, ib.stdout) != \
                (sb.outcome.kind, sb.outcome.exit_code, sb.stdout):
            benign_ok = False
            reasons.append(f"instrumented benign ({mode}) diverges: {ib.outcome.describe()} "
                           f"{ib.stdout!r}")
    if not benign_ok:
        return ScenarioResult(scn.name, BENIGN_BROKEN, cells, reasons, time.perf_counter() - t0)

    sa = by_label["stripped/attack"]
    if scn.corrupt_marker not in sa.stdout:
        reasons.append(f"stripped attack shows no corruption (marker {scn.corrupt_marker!r} "
                       f"absent from {sa.stdout!r})")
    for i, t in enumerate(scn.traps):
        tag = "+patched" if t.patches else ""
        c = by_label[f"instrumented/{t.input}{tag}/{t.mode}#{i}"]
        if c.outcome.kind != "trapped":
            reasons.append(f"{c.label}: expected {t.kind} trap, got {c.outcome.describe()}")
        elif c.outcome.fault_kind != t.kind or c.symbol != t.symbol:
            reasons.append(f"{c.label}: expected {t.kind} in {t.symbol}, got "
                           f"{c.outcome.fault_kind} in {c.symbol}")
        elif scn.corrupt_marker in c.stdout:
            reasons.append(f"{c.label}: corruption visible before the trap")
    verdict = NOT_MITIGATED if reasons else MITIGATED
    return ScenarioResult(scn.name, verdict, cells, reasons, time.perf_counter() - t0)


def run_all(jobs: int = 1, root: Path = SCENARIO_ROOT) -> list[ScenarioResult]:
    return [run_scenario(load_scenario(n, root), jobs) for n in list_scenarios(root)]
