"""Hypothesis properties of the SRS engine."""
import copy
import math

import hypothesis.strategies as st
from hypothesis import given, settings
from hypothesis.stateful import RuleBasedStateMachine, invariant, precondition, rule

from differential import replay
from srsim.engine import EngineConfig, EngineFault, FaultKind, SRSEngine
from srsim.reference import FlatSRS

addrs = st.integers(min_value=0x1000, max_value=0x1100)
sizes = st.sampled_from([1, 2, 4])
widths = st.sampled_from([1, 4, 8, 16, 48])

op_strategy = st.one_of(
    st.just(("sbent",)),
    st.just(("sbxit",)),
    st.builds(lambda b, w: ("sradd", b, b + w), addrs, widths),
    st.builds(lambda a: ("srdlg", a), st.one_of(addrs, st.just(0))),
    st.builds(lambda b, w: ("srdsub", b, b + w), addrs, widths),
    st.builds(lambda n: ("tick", n), st.integers(1, 8)),
)


@settings(max_examples=300, deadline=None)
@given(st.lists(op_strategy, max_size=40), st.lists(st.tuples(addrs, sizes), max_size=4),
       st.sampled_from([1, 2, 4]))
def test_banked_matches_flat_model(trace, probes, rate):
    rep = replay(trace, probes, bank=6, frames=4, rate=rate)
    assert not rep.disagreements
    assert not rep.escalations
    assert not rep.strict_mismatches


@settings(max_examples=200, deadline=None)
@given(st.lists(op_strategy, max_size=40))
def test_stack_discipline(trace):
    e = SRSEngine(EngineConfig(bank_capacity=8, max_frames=4))
    entered = exited = 0
    for op in trace:
        try:
            if op[0] == "tick":
                e.tick(op[1])
            else:
                getattr(e, op[0])(*op[1:])
        except EngineFault:
            break
        entered += op[0] == "sbent"
        exited += op[0] == "sbxit"
        assert e.frame_count == entered - exited
        assert e.enabled == (e.frame_count >= 1)
        assert (e.pending == 0) == (e.pending_dir.value == "none")


@settings(max_examples=200, deadline=None)
@given(st.lists(op_strategy, max_size=40), st.sampled_from([1, 2, 4]), st.integers(1, 16))
def test_stall_bound(trace, rate, n):
    e = SRSEngine(EngineConfig(bank_capacity=n, max_frames=6, transfer_rate=rate))
    bound = math.ceil(n / rate)
    for op in trace:
        try:
            if op[0] == "tick":
                e.tick(op[1])
            elif op[0] in ("sbent", "sbxit"):
                assert getattr(e, op[0])() <= bound
            else:
                getattr(e, op[0])(*op[1:])
        except EngineFault:
            break


def _snapshot(e):
    return (list(e.active), list(e.spare), list(e.cache), copy.deepcopy(e.stack.frames),
            e.enabled, e.frame_count, e.pending, e.pending_dir, copy.copy(e.stats))


@settings(max_examples=200, deadline=None)
@given(st.lists(op_strategy, max_size=30), st.lists(st.tuples(addrs, sizes), min_size=1,
                                                   max_size=6))
def test_check_access_is_pure(trace, probes):
    e = SRSEngine(EngineConfig(bank_capacity=8, max_frames=4))
    for op in trace:
        try:
            if op[0] == "tick":
                e.tick(op[1])
            else:
                getattr(e, op[0])(*op[1:])
        except EngineFault:
            break
    before = _snapshot(e)
    for addr, size in probes:
        e.check_access(addr, size)
    assert _snapshot(e) == before


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(addrs, widths), max_size=8), st.lists(st.tuples(addrs, widths),
                                                                max_size=8),
       st.integers(0, 20))
def test_restoration_fidelity(outer, inner, ticks):
    e = SRSEngine(EngineConfig(bank_capacity=8))
    e.sbent()
    for b, w in outer:
        e.sradd(b, b + w)
    snapshot = list(e.active)
    e.sbent()
    for b, w in inner:
        e.sradd(b, b + w)
    e.tick(ticks)
    e.sbxit()
    assert list(e.active) == snapshot


class EngineVsFlat(RuleBasedStateMachine):
    """Drives both models with the same operations; faults must agree."""

    def __init__(self):
        super().__init__()
        self.banked = SRSEngine(EngineConfig(bank_capacity=4, max_frames=3))
        self.flat = FlatSRS(bank_capacity=4, max_frames=3)
        self.dead = False

    def _both(self, name, *args):
        outcomes = []
        for model in (self.banked, self.flat):
            try:
                r = getattr(model, name)(*args)
                outcomes.append(None if name in ("sbent", "sbxit") else r)
            except EngineFault as exc:
                outcomes.append(exc.kind)
        assert outcomes[0] == outcomes[1]
        if isinstance(outcomes[0], FaultKind):
            self.dead = True

    @precondition(lambda self: not self.dead)
    @rule()
    def enter(self):
        self._both("sbent")

    @precondition(lambda self: not self.dead)
    @rule()
    def leave(self):
        self._both("sbxit")

    @precondition(lambda self: not self.dead)
    @rule(b=addrs, w=widths)
    def add(self, b, w):
        self._both("sradd", b, b + w)

    @precondition(lambda self: not self.dead)
    @rule(a=addrs)
    def delegate(self, a):
        self._both("srdlg", a)

    @precondition(lambda self: not self.dead)
    @rule(b=addrs, w=widths)
    def delegate_sub(self, b, w):
        self._both("srdsub", b, b + w)

    @rule(n=st.integers(1, 6))
    def tick(self, n):
        self.banked.tick(n)

    @invariant()
    def same_view(self):
        if self.dead:
            return
        assert [tuple(x) for x in self.banked.active] == self.flat.active_entries()
        assert self.banked.frame_count == self.flat.depth
        assert [tuple(x) for x in self.banked.spare] == self.flat.spare


TestEngineVsFlat = EngineVsFlat.TestCase
TestEngineVsFlat.settings = settings(max_examples=100, stateful_step_count=40, deadline=None)
