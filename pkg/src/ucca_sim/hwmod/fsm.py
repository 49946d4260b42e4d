"""Transition functions of the monitor FSMs, written over numpy arrays.

The same code advances a single monitor (arrays of length 1) and millions
of independent monitors at once, which is what the verifier needs. Missing
addresses (no data access, no return address) are encoded as ``NONE``.

Edge priority inside each state follows the order of the ``np.select``
condition lists below; the first matching condition wins.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

NONE = -1

OUT, IN, IRQ, RESET = 0, 1, 2, 3
RUN = 0
STATE_NAMES = {OUT: "Out", IN: "In", IRQ: "IRQ", RESET: "Reset"}
CR_STATE_NAMES = {RUN: "Run", RESET: "Reset"}


class Mutation(enum.Flag):
    """Single-edit faults injected into the FSMs for mutation testing."""

    NONE = 0
    FLIP_STACK_CMP = enum.auto()      # d_addr <= bp instead of d_addr >= bp
    SKIP_RET_LATCH = enum.auto()      # ret_exp not captured on entry
    SKIP_BP_FREEZE_IRQ = enum.auto()  # bp keeps tracking sp while interrupted
    DROP_SP_CHECK = enum.auto()       # exit without sp == bp accepted
    DROP_CR_CHECK = enum.auto()       # writes to CR ignored
    ALLOW_FALLTHROUGH = enum.auto()   # entry without a call/interrupt accepted


MUTATIONS = tuple(m for m in Mutation if m is not Mutation.NONE)
MUTATION_NAMES = {
    Mutation.FLIP_STACK_CMP: "flip-stack-cmp",
    Mutation.SKIP_RET_LATCH: "skip-ret-latch",
    Mutation.SKIP_BP_FREEZE_IRQ: "skip-bp-freeze-irq",
    Mutation.DROP_SP_CHECK: "drop-sp-check",
    Mutation.DROP_CR_CHECK: "drop-cr-check",
    Mutation.ALLOW_FALLTHROUGH: "allow-fallthrough",
}


@dataclass
class Signals:
    """One snapshot per lane; every field is an int64 array of the batch shape."""

    pc: np.ndarray
    d_addr: np.ndarray
    w_en: np.ndarray
    sp: np.ndarray
    irq_jmp: np.ndarray
    op_ret: np.ndarray


@dataclass
class Registers:
    """Monitor registers for K UCCs over a batch of B lanes."""

    cr: np.ndarray        # (B,)
    state: np.ndarray     # (K, B)
    ret_exp: np.ndarray   # (K, B)
    bp: np.ndarray        # (K, B)
    prev_pc: np.ndarray   # (B,) pc of the previous snapshot, NONE before the first
    prev_op_ret: np.ndarray

    @classmethod
    def initial(cls, n_ucc: int, batch: int, bp: int = 0) -> "Registers":
        return cls(
            cr=np.full(batch, RUN, np.int64),
            state=np.full((n_ucc, batch), OUT, np.int64),
            ret_exp=np.zeros((n_ucc, batch), np.int64),
            bp=np.full((n_ucc, batch), bp, np.int64),
            prev_pc=np.full(batch, NONE, np.int64),
            prev_op_ret=np.full(batch, NONE, np.int64),
        )

    def copy(self) -> "Registers":
        return Registers(self.cr.copy(), self.state.copy(), self.ret_exp.copy(),
                         self.bp.copy(), self.prev_pc.copy(), self.prev_op_ret.copy())


@dataclass
class StepResult:
    regs: Registers
    reset: np.ndarray         # (B,) aggregated reset output
    cr_fault: np.ndarray      # (B,) CR module newly entered Reset this step
    ret_fault: np.ndarray     # (K, B) return module newly entered Reset
    stack_fault: np.ndarray   # (K, B) stack module newly entered Reset


def cr_next(cr: np.ndarray, sig: Signals, cr_lo: int, cr_hi: int,
            mutations: Mutation = Mutation.NONE) -> np.ndarray:
    write_cr = (sig.w_en != 0) & (sig.d_addr >= cr_lo) & (sig.d_addr <= cr_hi)
    if mutations & Mutation.DROP_CR_CHECK:
        write_cr = np.zeros_like(write_cr)
    # Reset is left on the PC=0 sentinel only if that same step is not itself a CR write.
    return np.where(cr == RUN,
                    np.where(write_cr, RESET, RUN),
                    np.where((sig.pc == 0) & ~write_cr, RUN, RESET))


def ret_next(state, ret_exp, sig: Signals, prev_op_ret, r_min: int, r_max: int,
             mutations: Mutation = Mutation.NONE):
    in_ucc = (sig.pc >= r_min) & (sig.pc <= r_max)
    irq = sig.irq_jmp != 0
    called = prev_op_ret != NONE
    if mutations & Mutation.ALLOW_FALLTHROUGH:
        called = np.ones_like(called)
    is_out, is_in, is_irq = state == OUT, state == IN, state == IRQ

    nxt = np.select(
        [is_out & in_ucc & ~called,
         is_out & in_ucc & irq,
         is_out & in_ucc,
         is_out,
         is_in & ~in_ucc & (sig.pc == ret_exp),
         is_in & ~in_ucc,
         is_in & irq,
         is_in,
         is_irq & in_ucc & ~irq,
         is_irq,
         (sig.pc == 0) & in_ucc,
         sig.pc == 0],
        [RESET, IRQ, IN, OUT,
         OUT, RESET, IRQ, IN,
         IN, IRQ,
         IN, OUT],
        default=RESET)

    latch = is_out & in_ucc
    if mutations & Mutation.SKIP_RET_LATCH:
        latch = np.zeros_like(latch)
    elif mutations & Mutation.ALLOW_FALLTHROUGH:
        latch &= prev_op_ret != NONE
    new_ret = np.where(latch, prev_op_ret, ret_exp)
    return nxt, new_ret


def stack_next(state, bp, sig: Signals, r_min: int, r_max: int,
               mutations: Mutation = Mutation.NONE):
    in_ucc = (sig.pc >= r_min) & (sig.pc <= r_max)
    irq = sig.irq_jmp != 0
    write = sig.w_en != 0
    if mutations & Mutation.FLIP_STACK_CMP:
        outside_frame = write & (sig.d_addr != NONE) & (sig.d_addr <= bp)
    else:
        outside_frame = write & (sig.d_addr >= bp)
    bad_write = in_ucc & outside_frame
    sp_ok = sig.sp == bp
    if mutations & Mutation.DROP_SP_CHECK:
        sp_ok = np.ones_like(sp_ok)
    is_out, is_in, is_irq = state == OUT, state == IN, state == IRQ
    pc_zero_quiet = (sig.pc == 0) & ~write

    nxt = np.select(
        [is_out & bad_write,
         is_out & in_ucc & irq,
         is_out & in_ucc,
         is_out,
         is_in & bad_write,
         is_in & ~in_ucc & sp_ok,
         is_in & ~in_ucc,
         is_in & irq,
         is_in,
         is_irq & bad_write,
         is_irq & in_ucc & ~irq,
         is_irq,
         pc_zero_quiet & in_ucc,
         pc_zero_quiet],
        [RESET, IRQ, IN, OUT,
         RESET, OUT, RESET, IRQ, IN,
         RESET, IN, IRQ,
         IN, OUT],
        default=RESET)

    return nxt


def bp_next(bp, sig: Signals, prev_pc, state, mutations: Mutation = Mutation.NONE):
    """bp follows sp whenever the instruction changes while outside the UCC.

    ``state`` is the module's successor after reset synchronisation, so bp is
    frozen on entry, inside, while interrupted and while resetting.
    """
    pc_changed = sig.pc != prev_pc
    track = pc_changed & (state == OUT)
    if mutations & Mutation.SKIP_BP_FREEZE_IRQ:
        track |= pc_changed & (state == IRQ)
    return np.where(track, sig.sp, bp)


def transition(regs: Registers, sig: Signals, bounds: list[tuple[int, int]],
               cr_bounds: tuple[int, int], mutations: Mutation = Mutation.NONE) -> StepResult:
    """Advance every sub-module on one snapshot and aggregate their resets."""
    cr = cr_next(regs.cr, sig, *cr_bounds, mutations)
    cr_fault = (cr == RESET) & (regs.cr != RESET)
    any_reset = cr == RESET

    k = len(bounds)
    ret_state = np.empty_like(regs.state)
    stk_state = np.empty_like(regs.state)
    ret_exp = np.empty_like(regs.ret_exp)
    for i, (lo, hi) in enumerate(bounds):
        ret_state[i], ret_exp[i] = ret_next(regs.state[i], regs.ret_exp[i], sig,
                                            regs.prev_op_ret, lo, hi, mutations)
        stk_state[i] = stack_next(regs.state[i], regs.bp[i], sig, lo, hi, mutations)
    was_reset = regs.state == RESET
    ret_fault = (ret_state == RESET) & ~was_reset
    stack_fault = (stk_state == RESET) & ~was_reset
    if k:
        any_reset = any_reset | (ret_state == RESET).any(axis=0) | (stk_state == RESET).any(axis=0)

    # Both per-UCC modules share the Out/In/IRQ classification, so their
    # non-reset successors agree; reset_ucca then pulls every module to Reset.
    state = np.where(any_reset, RESET, ret_state)
    cr = np.where(any_reset, RESET, cr)
    bp = bp_next(regs.bp, sig, regs.prev_pc, state, mutations)

    new = Registers(cr=cr, state=state, ret_exp=ret_exp, bp=bp,
                    prev_pc=sig.pc.copy(), prev_op_ret=sig.op_ret.copy())
    return StepResult(new, any_reset, cr_fault, ret_fault, stack_fault)
