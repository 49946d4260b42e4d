import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucca_sim.hwmod import (IN, IRQ, OUT, RESET, ConfigError, MonitorState, Mutation, UccConfig,
                            UccDefinition, estimate_hardware_cost, observe, require_valid,
                            validate_config)
from ucca_sim.hwmod import fsm
from ucca_sim.hwmod.monitor import snapshot_signals
from ucca_sim.isa import SignalSnapshot

UCC = (0xC100, 0xC1FE)
CFG = UccConfig.of(UCC)


def snap(pc, sp=0x09F0, d=None, w=0, irq=0, ret=None, step=0):
    return SignalSnapshot(step, pc, d, w, sp, irq, ret)


def feed(*snaps, config=CFG, mutations=Mutation.NONE):
    mon = MonitorState.initial(config, mutations=mutations)
    verdicts = []
    for s in snaps:
        mon, v = observe(mon, s)
        verdicts.append(v)
    return mon, verdicts


def call_into(target=0xC100, sp=0x09F0, at=0xC010):
    """A CALL outside the UCC followed by the first UCC instruction."""
    return [snap(at, sp, d=sp - 2, w=1, ret=at + 4), snap(target, sp - 2)]


class TestConfigValidation:
    def test_single_function_ucc_valid(self):
        assert validate_config(UccConfig.of((0xC100, 0xC100))) == []

    def test_nesting_accepted(self):
        assert validate_config(UccConfig.of((0xC100, 0xC1FE), (0xC120, 0xC140))) == []

    def test_partial_overlap_rejected(self):
        errors = validate_config(UccConfig.of((0xC100, 0xC140), (0xC120, 0xC1FE)))
        assert errors == ["partial-overlap(0,1)"]

    def test_disjoint_accepted(self):
        assert validate_config(UccConfig.of((0xC100, 0xC140), (0xC200, 0xC240))) == []

    def test_duplicate_rejected(self):
        assert validate_config(UccConfig.of(UCC, UCC)) == ["duplicate(0,1)"]

    def test_out_of_program(self):
        assert "out-of-program(0)" in validate_config(UccConfig.of((0x0300, 0x0310)))

    def test_reset_sentinel(self):
        assert "contains-reset-sentinel(0)" in validate_config(UccConfig.of((0x0000, 0x0010)))

    def test_too_many(self):
        pairs = [(0xC000 + 0x40 * i, 0xC000 + 0x40 * i + 0x10) for i in range(9)]
        assert "too-many-uccs(9)" in validate_config(UccConfig.of(*pairs))

    def test_cr_misplaced(self):
        assert "cr-misplaced" in validate_config(UccConfig.of(UCC, cr_base=0x0300))

    def test_require_valid_raises(self):
        with pytest.raises(ConfigError) as exc:
            require_valid(UccConfig.of((0xC100, 0xC140), (0xC120, 0xC1FE)))
        assert exc.value.errors == ["partial-overlap(0,1)"]

    def test_definition_relations(self):
        a, b = UccDefinition(0xC100, 0xC1FE), UccDefinition(0xC120, 0xC140)
        assert b.nested_in(a) and not a.nested_in(b) and not a.disjoint(b)

    def test_json_round_trip_with_labels(self):
        cfg = UccConfig.from_json('{"uccs": [{"min": "f", "max": "0xC110"}]}', {"f": 0xC100})
        assert cfg.uccs == (UccDefinition(0xC100, 0xC110),)
        assert UccConfig.from_json(cfg.to_json()) == cfg

    def test_cr_image_layout(self):
        cr = UccConfig.of((0xC100, 0xC1FE)).cr
        assert (cr.lo, cr.hi) == (0x0100, 0x011F)
        assert cr.to_bytes()[:4] == bytes([0x00, 0xC1, 0xFE, 0xC1])


class TestReturnIntegrity:
    def test_entry_latches_return(self):
        mon, v = feed(*call_into())
        assert all(x.ok for x in v)
        assert mon.fsm_state == (IN,) and mon.ret_exp == (0xC014,) and mon.bp == (0x09F0,)

    def test_correct_return(self):
        mon, v = feed(*call_into(), snap(0xC104, 0x09EE), snap(0xC014, 0x09F0))
        assert all(x.ok for x in v) and mon.fsm_state == (OUT,)

    def test_wrong_return(self):
        _, v = feed(*call_into(), snap(0xC104, 0x09EE), snap(0xC020, 0x09F0))
        assert str(v[-1]) == "reset(ret-integrity(0))"

    def test_fallthrough_entry(self):
        _, v = feed(snap(0xC0FC), snap(0xC100))
        assert str(v[-1]) == "reset(ret-integrity(0))"

    def test_interrupt_round_trip(self):
        mon, v = feed(*call_into(),
                      snap(0xC104, 0x09EE, d=0x09EC, w=1, irq=1, ret=0xC104),  # IRQ entry step
                      snap(0xC400, 0x09EC),                                     # ISR outside
                      snap(0xC404, 0x09EC),
                      snap(0xC104, 0x09EE),                                     # resumed
                      snap(0xC108, 0x09EE),
                      snap(0xC014, 0x09F0))
        assert all(x.ok for x in v)

    def test_irq_state_and_bp_frozen(self):
        mon, _ = feed(*call_into(), snap(0xC104, 0x09EE, d=0x09EC, w=1, irq=1, ret=0xC104),
                      snap(0xC400, 0x09EC), snap(0xC404, 0x09E0))
        assert mon.fsm_state == (IRQ,) and mon.bp == (0x09F0,)


class TestStackIntegrity:
    def test_write_inside_frame(self):
        _, v = feed(*call_into(), snap(0xC104, 0x09EE, d=0x09EC, w=1))
        assert v[-1].ok

    def test_write_at_bp(self):
        _, v = feed(*call_into(), snap(0xC104, 0x09EE, d=0x09F0, w=1))
        assert str(v[-1]) == "reset(stack-integrity(0))"

    def test_exit_with_wrong_sp(self):
        _, v = feed(*call_into(), snap(0xC104, 0x09EE), snap(0xC014, 0x09EC))
        assert str(v[-1]) == "reset(stack-integrity(0))"

    def test_bp_tracks_outside(self):
        mon, _ = feed(snap(0xC000, 0x09F0), snap(0xC004, 0x09E0))
        assert mon.bp == (0x09E0,)


class TestCrAndReset:
    def test_cr_write_anywhere(self):
        _, v = feed(snap(0xC000, d=0x0104, w=1))
        assert str(v[0]) == "reset(cr-integrity)"

    def test_reset_sticky_until_sentinel(self):
        mon, v = feed(snap(0xC000, d=0x0104, w=1), snap(0xC004), snap(0, 0x0A00), snap(0xC000))
        assert [x.reset for x in v] == [True, True, False, False]
        assert mon.cr_state == fsm.RUN and mon.fsm_state == (OUT,)

    def test_aggregated_reset_pulls_every_module(self):
        cfg = UccConfig.of(UCC, (0xC200, 0xC2FE))
        mon, v = feed(snap(0xC000, d=0x0100, w=1), config=cfg)
        assert mon.fsm_state == (RESET, RESET) and mon.cr_state == RESET

    def test_sentinel_with_cr_write_stays(self):
        mon, _ = feed(snap(0xC000, d=0x0104, w=1), snap(0, d=0x0100, w=1))
        assert mon.cr_state == RESET


class TestBatchMatchesScalar:
    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from([0, 0xC0FC, 0xC100, 0xC150, 0xC1FE, 0xC200]),
                              st.sampled_from([None, 0x0100, 0x09E0]),
                              st.sampled_from([0x09E0, 0x09DE]),
                              st.booleans(),
                              st.sampled_from([None, 0xC0FC, 0xC200])),
                    min_size=1, max_size=10))
    def test_same_registers(self, rows):
        snaps = [snap(pc, sp, d=d, w=int(d is not None), irq=int(irq), ret=ret, step=i)
                 for i, (pc, d, sp, irq, ret) in enumerate(rows)]
        mon, _ = feed(*snaps)
        # Three identical lanes advanced together must each match the scalar monitor.
        regs = fsm.Registers.initial(1, 3, bp=0x0A00)
        for s in snaps:
            res = fsm.transition(regs, snapshot_signals([s, s, s]), [UCC], (0x0100, 0x011F))
            regs = res.regs
        assert regs.state[0].tolist() == [mon.fsm_state[0]] * 3
        assert regs.bp[0].tolist() == [mon.bp[0]] * 3
        assert res.reset.tolist() == [mon.reset_out] * 3


class TestHardwareCost:
    def test_registers_exact(self):
        assert [estimate_hardware_cost(n).registers for n in range(1, 9)] == [
            86, 121, 156, 191, 226, 261, 296, 331]

    def test_lut_formula(self):
        assert estimate_hardware_cost(1).luts == 85
        assert estimate_hardware_cost(2).luts == 147

    def test_zero_regions(self):
        with pytest.raises(ValueError):
            estimate_hardware_cost(0)

    def test_reported_table_attached(self):
        assert estimate_hardware_cost(8).luts_reported == 520


def test_mutation_names_cover_six():
    assert len(fsm.MUTATIONS) == 6 and len(set(fsm.MUTATION_NAMES.values())) == 6


def test_signals_encode_missing_as_none():
    sig = snapshot_signals([snap(0xC000)])
    assert sig.d_addr[0] == fsm.NONE and sig.op_ret[0] == fsm.NONE
    assert isinstance(sig.pc, np.ndarray)
