"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are written with capture disabled so they show up in plain
``pytest -v`` output. Criteria 1 and 3 share the depth-3 exhaustive run.
"""

import random
import time

import pytest

from ltl_gen import random_formula, random_trace
from ucca_sim.corpus import first_violation, get_scenario, run_program, run_scenario, scenarios
from ucca_sim.hwmod import MUTATION_NAMES, UccConfig, validate_config
from ucca_sim.hwmod.fsm import MUTATIONS
from ucca_sim.hwmod.monitor import REPORTED_COST, estimate_hardware_cost
from ucca_sim.isa import estimate_marshal_cost
from ucca_sim.ltl import brute_oracle, evaluate
from ucca_sim.verify import exhaustive_check, random_check

CFG = UccConfig.of((0xC100, 0xC1FE))
TEN_MINUTES = 600.0


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    return emit


@pytest.fixture(scope="module")
def exhaustive_runs():
    """Depth-3 exhaustive runs on the shipped monitor and on every mutant."""
    runs = {}
    start = time.perf_counter()
    runs[None] = exhaustive_check(CFG, depth=3)
    runs[None].wall = time.perf_counter() - start
    for m in MUTATIONS:
        runs[m] = exhaustive_check(CFG, depth=3, mutations=m)
    return runs


def test_criterion_1_exhaustive(exhaustive_runs, report):
    r = exhaustive_runs[None]
    ok = r.ok and len(r.spec_ids) == 13 and r.wall <= TEN_MINUTES
    report(1, ok, f"{r.traces_examined} traces, {len(r.violations)} violations, {r.wall:.1f}s")
    assert ok


def test_criterion_2_random(report):
    a = random_check(CFG, n_traces=10**6, length=20, seed=0x5EED)
    b = random_check(CFG, n_traces=10**6, length=20, seed=0x5EED)
    same = (a.violation_counts == b.violation_counts
            and [w.to_dict() for w in a.violations] == [w.to_dict() for w in b.violations])
    ok = a.ok and a.traces_examined == 10**6 and same
    report(2, ok, f"{a.traces_examined} traces of length 20, violations={sum(a.violation_counts.values())}, "
                  f"replay identical={same}")
    assert ok


def test_criterion_3_mutants(exhaustive_runs, report):
    caught = {MUTATION_NAMES[m]: exhaustive_runs[m].violated_specs for m in MUTATIONS}
    ok = len(caught) == 6 and all(caught.values())
    report(3, ok, ", ".join(f"{name}->{specs}" for name, specs in caught.items()))
    assert ok


def test_criterion_4_scenarios(report):
    shipped = scenarios()
    mismatched, late = [], []
    for s in shipped:
        result = run_scenario(s)
        if not result.matched:
            mismatched.append(s.name)
        if not s.expected.completes and result.outcome.first_reset != first_violation(s):
            late.append(s.name)
    ok = len(shipped) >= 14 and not mismatched and not late
    report(4, ok, f"{len(shipped)} scenarios, mismatched={mismatched}, latency errors={late}")
    assert ok


def test_criterion_5_oracle(report):
    rng = random.Random(0x0A11)
    disagreements = 0
    for _ in range(10**4):
        f = random_formula(rng, depth=rng.randint(1, 4))
        t = random_trace(rng, rng.randint(1, 8))
        fast = evaluate(f, t.columns(), t.regions)[0]
        slow = [brute_oracle(f, t, i) for i in range(len(t.records))]
        disagreements += [bool(v) for v in fast] != slow
    report(5, disagreements == 0, f"10000 pairs, {disagreements} disagreements")
    assert disagreements == 0


def test_criterion_6_analytic(report):
    registers_off, luts_off = [], []
    for n in range(1, 9):
        cost = estimate_hardware_cost(n)
        table_regs, table_luts = REPORTED_COST[n]
        if cost.registers != table_regs:
            registers_off.append(n)
        if abs(cost.luts - table_luts) > 2:
            luts_off.append((n, cost.luts - table_luts))
    marshal = estimate_marshal_cost(2)
    ok = not registers_off and not luts_off and marshal == 1
    report(6, ok, f"register mismatches={registers_off}, LUT deltas beyond 2={luts_off}, "
                  f"marshal(2)={marshal}")
    assert ok


def test_criterion_7_non_interference(report):
    s = get_scenario("benign-bystander")
    program, config = s.build()
    rng = random.Random(7)
    bad = []
    for trial in range(100):
        schedule = sorted([rng.randint(0, 60), 2]
                          for _ in range(rng.randint(1, 4)))
        out = run_program(program.image, config, schedule, max_steps=s.max_steps)
        completed = out.state.halted and not out.resets
        if not completed or any(v.reset for v in out.verdicts):
            bad.append(trial)
    report(7, not bad, f"100 schedules, failing={bad}")
    assert not bad


def test_criterion_8_config_rules(report):
    single = validate_config(UccConfig.of((0xC100, 0xC100))) == []
    nested = validate_config(UccConfig.of((0xC100, 0xC1FE), (0xC120, 0xC140))) == []
    partial = any(e.startswith("partial-overlap")
                  for e in validate_config(UccConfig.of((0xC100, 0xC140), (0xC120, 0xC1FE))))
    ok = single and nested and partial
    report(8, ok, f"single-function accepted={single}, nesting accepted={nested}, "
                  f"partial overlap rejected={partial}")
    assert ok
