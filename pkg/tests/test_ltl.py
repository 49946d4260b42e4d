import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltl_gen import REGIONS, random_formula, random_trace
from ucca_sim.ltl import (LtlError, Record, Regions, Trace, TraceError, brute_oracle,
                          builtin_specs, check, eval_formula, evaluate, format_catalog,
                          format_formula, parse_formula, select_specs)
from ucca_sim.ltl.syntax import (And, Cmp, Const, Flag, Globally, Implies, In, Next, NextF, Not,
                                 Prev, Sig, WeakUntil, Yesterday)

ONE = Regions(((0xC100, 0xC1FE),), (0x0100, 0x011F))


def rec(i, pc=0xC000, sp=0x0A00, d=None, w=0, irq=0, ret=None, reset=0, ret_exp=0, bp=0x0A00):
    return Record(i, pc, sp, d, w, irq, ret, reset, (ret_exp,), (bp,))


def trace(*records):
    return Trace(tuple(records), ONE)


class TestParser:
    def test_cr_property(self):
        f = parse_formula("G( (d_addr in CR & w_en) -> reset )")
        assert f == Globally(Implies(And(In(Sig("d_addr"), "CR"), Flag("w_en")), Flag("reset")))

    def test_single_atom(self):
        assert parse_formula("pc = 0") == Cmp("=", Sig("pc"), Const(0))

    def test_unknown_signal(self):
        with pytest.raises(LtlError) as exc:
            parse_formula("G( x )")
        assert exc.value.kind == "unknown-signal" and exc.value.position == 3

    def test_unknown_region(self):
        with pytest.raises(LtlError) as exc:
            parse_formula("pc in HEAP")
        assert exc.value.kind == "unknown-region"

    def test_region_index_beyond_config(self):
        with pytest.raises(LtlError) as exc:
            parse_formula("pc in UCC2", n_ucc=2)
        assert exc.value.kind == "unknown-region"

    def test_syntax_error_position(self):
        with pytest.raises(LtlError) as exc:
            parse_formula("G(pc = )")
        assert exc.value.kind == "syntax-error" and exc.value.position == 7

    def test_term_versus_operator(self):
        assert parse_formula("X(ret_exp) = op_ret") == Cmp("=", Next(Sig("ret_exp", 0)),
                                                           Sig("op_ret"))
        assert parse_formula("X(reset)") == NextF(Flag("reset"))
        assert parse_formula("Y(pc) in UCC") == In(Prev(Sig("pc")), "UCC0")
        assert parse_formula("Y(pc = 0)") == Yesterday(Cmp("=", Sig("pc"), Const(0)))

    def test_precedence(self):
        f = parse_formula("reset -> pc = 0 | w_en W irq_jmp")
        assert f == Implies(Flag("reset"), WeakUntil(
            parse_formula("pc = 0 | w_en"), Flag("irq_jmp")))

    def test_not_binds_tight(self):
        assert parse_formula("!reset & w_en") == And(Not(Flag("reset")), Flag("w_en"))

    @settings(max_examples=300, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_round_trip(self, rng):
        f = random_formula(rng, depth=5)
        assert parse_formula(format_formula(f)) == f


class TestFiniteTraceConventions:
    def test_globally_true(self):
        assert eval_formula(parse_formula("G(true)"), trace(rec(0), rec(1)))

    def test_yesterday_term_false_at_origin(self):
        t = trace(rec(0), rec(1))
        f = parse_formula("Y(pc) = pc")
        assert not eval_formula(f, t, 0) and eval_formula(f, t, 1)

    def test_yesterday_term_negated_still_false(self):
        # Undefined past makes the atom false, so its negation holds.
        assert eval_formula(parse_formula("!(Y(pc) = pc)"), trace(rec(0)), 0)

    def test_next_weak_at_end(self):
        t = trace(rec(0, pc=1), rec(1, pc=2))
        assert eval_formula(parse_formula("X(pc) = 7"), t, 1)
        assert eval_formula(parse_formula("X(false)"), t, 1)
        assert not eval_formula(parse_formula("X(pc) = 7"), t, 0)

    def test_yesterday_operator(self):
        t = trace(rec(0, reset=1), rec(1))
        f = parse_formula("Y(reset)")
        assert not eval_formula(f, t, 0) and eval_formula(f, t, 1)

    def test_weak_until(self):
        t = trace(rec(0, w=1, d=2), rec(1, w=1, d=2), rec(2, irq=1), rec(3))
        assert eval_formula(parse_formula("w_en W irq_jmp"), t, 0)
        assert not eval_formula(parse_formula("w_en W reset"), t, 0)
        assert eval_formula(parse_formula("w_en W reset"), trace(rec(0, w=1, d=2)), 0)

    def test_position_out_of_range(self):
        with pytest.raises(LtlError) as exc:
            eval_formula(parse_formula("true"), trace(rec(0)), 1)
        assert exc.value.kind == "position-out-of-range"


class TestCheck:
    def test_cr_property_witness(self):
        t = trace(rec(0), rec(1, d=0x0104, w=1), rec(2))
        cr_prop = builtin_specs(1)[0].formula
        res = check(cr_prop, t)
        assert not res.holds and res.witness == 1
        assert brute_oracle(cr_prop, t) is False

    def test_non_globally_witness_zero(self):
        assert check(parse_formula("reset"), trace(rec(0))).witness == 0

    def test_holds(self):
        assert check(parse_formula("G(pc != 0)"), trace(rec(0), rec(1))).holds

    @pytest.mark.parametrize("text", ["G(pc = 0)", "X(pc) = 0", "Y(reset) W w_en",
                                      "d_addr >= sp", "G(X(Y(pc)) = pc)"])
    def test_length_one_zero_trace(self, text):
        t = Trace((Record(0, 0, 0, 0, 0, 0, 0, 0, (0,), (0,)),), ONE)
        f = parse_formula(text)
        assert check(f, t).holds == brute_oracle(f, t)


class TestOracle:
    @settings(max_examples=400, deadline=None)
    @given(st.randoms(use_true_random=False), st.integers(1, 8))
    def test_eval_matches_oracle_everywhere(self, rng, length):
        f = random_formula(rng, depth=4)
        t = random_trace(rng, length)
        fast = evaluate(f, t.columns(), t.regions)[0]
        assert [bool(v) for v in fast] == [brute_oracle(f, t, i) for i in range(length)]

    def test_globally_weak_until_spot(self):
        rng = random.Random(5)
        f = parse_formula("G(w_en) W reset")
        for _ in range(50):
            t = random_trace(rng, rng.randint(1, 6))
            assert eval_formula(f, t) == brute_oracle(f, t)


class TestBuiltins:
    def test_counts(self):
        assert [s.id for s in builtin_specs(1)] == [str(i) for i in range(1, 14)]
        specs = builtin_specs(2)
        assert len(specs) == 25 and sum(s.eq == 1 for s in specs) == 1

    def test_stack_write_atoms(self):
        text = next(s.text for s in builtin_specs(1) if s.eq == 12)
        for atom in ("pc in UCC0", "w_en", "d_addr >= bp0", "reset"):
            assert atom in text

    def test_bracketing_notes_recorded(self):
        notes = {s.eq: s.bracketing for s in builtin_specs(1)}
        assert notes[2] and notes[3] and notes[7]

    def test_second_ucc_indices(self):
        spec = next(s for s in builtin_specs(2) if s.id == "6.1")
        assert "UCC1" in spec.text and "ret_exp1" in spec.text

    def test_select(self):
        specs = builtin_specs(2)
        assert [s.id for s in select_specs(specs, "12")] == ["12", "12.1"]
        assert [s.id for s in select_specs(specs, "1,6.1")] == ["1", "6.1"]
        with pytest.raises(KeyError):
            select_specs(specs, "14")

    def test_catalog(self):
        lines = format_catalog(builtin_specs(1)).splitlines()
        assert lines[0].startswith("id\teq") and len(lines) == 14

    @settings(max_examples=150, deadline=None)
    @given(st.randoms(use_true_random=False), st.integers(1, 8), st.integers(1, 6))
    def test_monotone_prefix(self, rng, length, extra):
        """A violation found at k stays at k however the trace continues."""
        longer = random_trace(rng, length + extra)
        prefix = Trace(longer.records[:length], longer.regions)
        for spec in builtin_specs(2):
            res = check(spec.formula, prefix)
            if not res.holds:
                assert check(spec.formula, longer) == res, spec.id


class TestTraceFormat:
    def test_jsonl_round_trip(self):
        rng = random.Random(3)
        t = random_trace(rng, 6)
        t = replace(t, records=tuple(replace(r, state=("Out", "In")) for r in t.records),
                    verdicts=("ok",) * 6)
        back = Trace.from_jsonl(t.to_jsonl())
        assert back == t and back.verdicts == t.verdicts

    def test_empty(self):
        with pytest.raises(TraceError):
            Trace.from_jsonl("")

    def test_header_only(self):
        header = trace(rec(0)).to_jsonl().splitlines()[0]
        with pytest.raises(TraceError):
            Trace.from_jsonl(header + "\n")

    def test_gap_in_steps(self):
        with pytest.raises(TraceError):
            Trace((rec(0), rec(2)), ONE)

    def test_bad_address(self):
        text = trace(rec(0)).to_jsonl().replace('"pc": "0xC000"', '"pc": "zz"')
        with pytest.raises(TraceError) as exc:
            Trace.from_jsonl(text)
        assert exc.value.line == 2


def test_regions_shared_fixture_has_nesting():
    assert REGIONS.uccs[1][0] >= REGIONS.uccs[0][0]
