import shutil

import pytest

from srsim.scenarios import (
    MITIGATED, NOT_MITIGATED, ScenarioError, list_scenarios, load_scenario, run_scenario,
)

NAMES = list_scenarios()


def test_five_fixtures_bundled():
    assert NAMES == ["delegation_abc", "mons_exfiltration", "retstate_rop",
                     "sreplace_overflow", "strict_vs_lax"]


@pytest.mark.parametrize("name", NAMES)
def test_scenario_mitigated(name):
    r = run_scenario(name)
    assert r.verdict == MITIGATED, r.summary()


@pytest.mark.parametrize("name", NAMES)
def test_benign_cells_agree_with_expected_output(name):
    scn = load_scenario(name)
    r = run_scenario(scn)
    benign = [c for c in r.cells if "/benign" in c.label and "+patched" not in c.label]
    assert len(benign) >= 2
    assert all(c.stdout == scn.benign_out and c.outcome.kind == "halted" for c in benign)


@pytest.mark.parametrize("name", NAMES)
def test_stripped_attack_shows_corruption(name):
    scn = load_scenario(name)
    cell = next(c for c in run_scenario(scn).cells if c.label == "stripped/attack")
    assert scn.corrupt_marker in cell.stdout


@pytest.mark.parametrize("name,expected", [
    ("delegation_abc", {("access_violation", "C")}),
    ("retstate_rop", {("access_violation", "vuln")}),
    ("strict_vs_lax", {("access_violation", "show"), ("strict_delegation_miss", "handler")}),
])
def test_trap_symbols(name, expected):
    r = run_scenario(name)
    got = {(c.outcome.fault_kind, c.symbol) for c in r.cells if c.outcome.kind == "trapped"}
    assert got == expected


def test_trap_tail_ends_at_faulting_instruction():
    r = run_scenario("sreplace_overflow")
    trapped = [c for c in r.cells if c.outcome.kind == "trapped"]
    assert trapped and all(c.trace_tail for c in trapped)
    pc = trapped[0].outcome.pc
    assert any(line.startswith(f"0x{pc:08x}") for line in trapped[0].trace_tail)


def test_parallel_jobs_same_verdicts():
    for name in NAMES:
        seq, par = run_scenario(name), run_scenario(name, jobs=4)
        assert [(c.label, c.outcome.describe(), c.stdout) for c in seq.cells] == \
               [(c.label, c.outcome.describe(), c.stdout) for c in par.cells]


def test_unknown_scenario():
    with pytest.raises(ScenarioError, match="unknown scenario"):
        load_scenario("nope")


def test_missing_fixture_file(tmp_path):
    src = load_scenario("delegation_abc").path
    shutil.copytree(src, tmp_path / "broken")
    (tmp_path / "broken" / "attack.in").unlink()
    with pytest.raises(ScenarioError, match="missing fixture"):
        load_scenario("broken", tmp_path)


def test_unprotected_expectation_is_not_mitigated(tmp_path):
    src = load_scenario("delegation_abc").path
    shutil.copytree(src, tmp_path / "weak")
    toml = tmp_path / "weak" / "expect.toml"
    toml.write_text(toml.read_text().replace('symbol = "C"', 'symbol = "B"'))
    r = run_scenario(load_scenario("weak", tmp_path))
    assert r.verdict == NOT_MITIGATED and r.reasons
