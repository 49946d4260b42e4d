from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..isa import DEFAULT_MEMMAP, MemoryMap, SignalSnapshot
from . import fsm
from .config import UccConfig, require_valid
from .fsm import NONE, Mutation


def _enc(v: int | None) -> int:
    return NONE if v is None else v


def _dec(v: int) -> int | None:
    return None if v == NONE else int(v)


@dataclass(frozen=True)
class Verdict:
    reset: bool
    causes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.reset

    def __str__(self) -> str:
        return "ok" if self.ok else "reset(" + ", ".join(self.causes) + ")"


OK = Verdict(False)


@dataclass(frozen=True)
class MonitorState:
    """Registers of HW-Mod after the most recent snapshot."""

    config: UccConfig
    cr_state: int = fsm.RUN
    fsm_state: tuple[int, ...] = ()
    ret_exp: tuple[int | None, ...] = ()
    bp: tuple[int, ...] = ()
    prev: SignalSnapshot | None = None
    reset_out: bool = False
    mutations: Mutation = Mutation.NONE

    @classmethod
    def initial(cls, config: UccConfig, memmap: MemoryMap = DEFAULT_MEMMAP,
                mutations: Mutation = Mutation.NONE, validate: bool = True) -> "MonitorState":
        if validate:
            require_valid(config, memmap)
        n = len(config.uccs)
        return cls(config, fsm.RUN, (fsm.OUT,) * n, (0,) * n, (memmap.stack_init,) * n,
                   mutations=mutations)

    def registers(self) -> fsm.Registers:
        prev = self.prev
        return fsm.Registers(
            cr=np.array([self.cr_state], np.int64),
            state=np.array(self.fsm_state, np.int64).reshape(-1, 1),
            ret_exp=np.array([_enc(r) for r in self.ret_exp], np.int64).reshape(-1, 1),
            bp=np.array(self.bp, np.int64).reshape(-1, 1),
            prev_pc=np.array([NONE if prev is None else prev.pc], np.int64),
            prev_op_ret=np.array([NONE if prev is None else _enc(prev.op_ret)], np.int64),
        )

    def describe(self) -> dict:
        return {
            "cr": fsm.CR_STATE_NAMES[self.cr_state],
            "uccs": [{"state": fsm.STATE_NAMES[s], "ret_exp": r, "bp": b}
                     for s, r, b in zip(self.fsm_state, self.ret_exp, self.bp)],
            "reset": int(self.reset_out),
        }


def snapshot_signals(snaps: list[SignalSnapshot]) -> fsm.Signals:
    return fsm.Signals(
        pc=np.array([s.pc for s in snaps], np.int64),
        d_addr=np.array([_enc(s.d_addr) for s in snaps], np.int64),
        w_en=np.array([s.w_en for s in snaps], np.int64),
        sp=np.array([s.sp for s in snaps], np.int64),
        irq_jmp=np.array([s.irq_jmp for s in snaps], np.int64),
        op_ret=np.array([_enc(s.op_ret) for s in snaps], np.int64),
    )


def observe(monitor: MonitorState, snapshot: SignalSnapshot) -> tuple[MonitorState, Verdict]:
    """Advance HW-Mod by one snapshot and report whether it asserts reset."""
    cfg = monitor.config
    bounds = [(u.r_min, u.r_max) for u in cfg.uccs]
    res = fsm.transition(monitor.registers(), snapshot_signals([snapshot]), bounds,
                         (cfg.cr.lo, cfg.cr.hi), monitor.mutations)
    r = res.regs
    causes = []
    if res.cr_fault[0]:
        causes.append("cr-integrity")
    for i in range(len(bounds)):
        if res.ret_fault[i, 0]:
            causes.append(f"ret-integrity({i})")
        if res.stack_fault[i, 0]:
            causes.append(f"stack-integrity({i})")
    reset = bool(res.reset[0])
    new = MonitorState(
        cfg,
        int(r.cr[0]),
        tuple(int(s) for s in r.state[:, 0]),
        tuple(_dec(v) for v in r.ret_exp[:, 0]),
        tuple(int(v) for v in r.bp[:, 0]),
        snapshot,
        reset,
        monitor.mutations,
    )
    return new, Verdict(reset, tuple(causes)) if reset else OK


@dataclass(frozen=True)
class HardwareCost:
    registers: int
    luts: int
    luts_reported: int | None = None


# Added hardware measured on the FPGA prototype for 1..8 UCCs: (registers, LUTs).
REPORTED_COST = {1: (86, 85), 2: (121, 145), 3: (156, 205), 4: (191, 265),
                 5: (226, 327), 6: (261, 389), 7: (296, 450), 8: (331, 520)}


def estimate_hardware_cost(n_ucc: int) -> HardwareCost:
    """Linear cost model: registers are exact, LUTs an average-slope estimate."""
    if n_ucc < 1:
        raise ValueError("zero-regions: at least one UCC is required")
    reported = REPORTED_COST.get(n_ucc)
    return HardwareCost(registers=35 * (n_ucc - 1) + 86, luts=62 * (n_ucc - 1) + 85,
                        luts_reported=reported[1] if reported else None)
