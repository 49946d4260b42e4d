"""Instruction-level emulator of a small MSP430-flavoured 16-bit MCU.

Every retired instruction (and every interrupt entry) yields one
:class:`SignalSnapshot` carrying the core signals the hardware monitor
watches: PC, data address, write enable, SP, interrupt jump and the
return address pushed by calls/interrupts.

Instructions are two words: an opcode word (opcode in the high byte,
source register in bits 7..4, destination register in bits 3..0) followed
by an operand word (immediate, absolute address or branch target).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

WORD_MASK = 0xFFFF
INSN_SIZE = 4
IVT_SLOTS = 16

REG_SP = 1
GPR_FIRST = 4
GPR_LAST = 12


class IsaError(Exception):
    """Raised for emulator faults; ``kind`` is a stable machine-readable tag."""

    def __init__(self, kind: str, message: str = ""):
        super().__init__(f"{kind}: {message}" if message else kind)
        self.kind = kind


@dataclass(frozen=True)
class MemoryMap:
    cr_base: int = 0x0100
    cr_limit: int = 0x01FF
    ram_base: int = 0x0200
    ram_limit: int = 0x09FF
    stack_init: int = 0x0A00
    prog_base: int = 0xC000
    prog_limit: int = 0xFFDF
    ivt_base: int = 0xFFE0

    def __post_init__(self):
        order = [self.cr_base, self.cr_limit, self.ram_base, self.ram_limit,
                 self.prog_base, self.prog_limit, self.ivt_base]
        if any(a >= b for a, b in zip(order, order[1:])):
            raise ValueError("memory regions must be disjoint and ordered CR < RAM < program < IVT")
        if self.stack_init != self.ram_limit + 1:
            raise ValueError("stack_init must sit at the top of RAM")
        if self.ivt_base + 2 * IVT_SLOTS - 1 != WORD_MASK:
            raise ValueError("IVT must occupy the top 16 words of the address space")
        if self.stack_init % 2 or self.prog_base % 2:
            raise ValueError("stack_init and prog_base must be word aligned")

    def in_program(self, addr: int) -> bool:
        return self.prog_base <= addr <= self.prog_limit

    def in_ram(self, addr: int) -> bool:
        return self.ram_base <= addr <= self.ram_limit

    def in_cr_region(self, addr: int) -> bool:
        return self.cr_base <= addr <= self.cr_limit


DEFAULT_MEMMAP = MemoryMap()


class Op(IntEnum):
    NOP = 0x01
    HALT = 0x02
    MOV_IMM = 0x10   # MOV #imm, Rd
    MOV_RR = 0x11    # MOV Rs, Rd
    MOV_RA = 0x12    # MOV Rs, &abs
    MOV_AR = 0x13    # MOV &abs, Rd
    MOV_RI = 0x14    # MOV Rs, @Rd
    MOV_IR = 0x15    # MOV @Rs, Rd
    MOV_PA = 0x16    # MOV @Rs+, &abs  (word copy, one instruction)
    PUSH_R = 0x20
    PUSH_I = 0x21
    POP = 0x22
    CALL_I = 0x30
    CALL_R = 0x31
    RET = 0x32
    RETI = 0x33
    JMP = 0x40
    BR = 0x41
    JZ = 0x42
    ADD_I = 0x50
    ADD_R = 0x51
    SUB_I = 0x52
    SUB_R = 0x53
    CMP_I = 0x54
    CMP_R = 0x55


# Which register fields each opcode consumes, and whether it writes memory.
# The write column backs the single-write audit.
OPERAND_SHAPE: dict[Op, tuple[bool, bool, bool]] = {
    #            src    dst    writes
    Op.NOP:     (False, False, False),
    Op.HALT:    (False, False, False),
    Op.MOV_IMM: (False, True, False),
    Op.MOV_RR:  (True, True, False),
    Op.MOV_RA:  (True, False, True),
    Op.MOV_AR:  (False, True, False),
    Op.MOV_RI:  (True, True, True),
    Op.MOV_IR:  (True, True, False),
    Op.MOV_PA:  (True, False, True),
    Op.PUSH_R:  (True, False, True),
    Op.PUSH_I:  (False, False, True),
    Op.POP:     (False, True, False),
    Op.CALL_I:  (False, False, True),
    Op.CALL_R:  (True, False, True),
    Op.RET:     (False, False, False),
    Op.RETI:    (False, False, False),
    Op.JMP:     (False, False, False),
    Op.BR:      (True, False, False),
    Op.JZ:      (False, False, False),
    Op.ADD_I:   (False, True, False),
    Op.ADD_R:   (True, True, False),
    Op.SUB_I:   (False, True, False),
    Op.SUB_R:   (True, True, False),
    Op.CMP_I:   (False, True, False),
    Op.CMP_R:   (True, True, False),
}


@dataclass(frozen=True)
class Instruction:
    op: Op
    src: int = 0
    dst: int = 0
    operand: int = 0

    def encode(self) -> tuple[int, int]:
        return ((int(self.op) << 8) | (self.src << 4) | self.dst, self.operand & WORD_MASK)

    @classmethod
    def decode(cls, word0: int, word1: int) -> "Instruction":
        try:
            op = Op(word0 >> 8)
        except ValueError:
            raise IsaError("decode-error", f"undefined opcode 0x{word0 >> 8:02X}") from None
        src, dst = (word0 >> 4) & 0xF, word0 & 0xF
        uses_src, uses_dst, _ = OPERAND_SHAPE[op]
        for used, reg in ((uses_src, src), (uses_dst, dst)):
            if used and not valid_register(reg):
                raise IsaError("decode-error", f"invalid register R{reg} for {op.name}")
            if not used and reg:
                raise IsaError("decode-error", f"stray register field in {op.name}")
        return cls(op, src, dst, word1)


def valid_register(reg: int) -> bool:
    return reg == REG_SP or GPR_FIRST <= reg <= GPR_LAST


@dataclass(frozen=True)
class SignalSnapshot:
    step: int
    pc: int
    d_addr: int | None
    w_en: int
    sp: int
    irq_jmp: int
    op_ret: int | None
    reset: int = 0

    def __post_init__(self):
        if self.w_en and self.d_addr is None:
            raise ValueError("w_en requires a data address")

    def as_dict(self) -> dict:
        return {"step": self.step, "pc": self.pc, "d_addr": self.d_addr, "w_en": self.w_en,
                "sp": self.sp, "irq_jmp": self.irq_jmp, "op_ret": self.op_ret, "reset": self.reset}


@dataclass
class MachineState:
    pc: int
    sp: int
    zflag: int = 0
    gpr: list[int] = field(default_factory=lambda: [0] * (GPR_LAST - GPR_FIRST + 1))
    mem: bytearray = field(default_factory=lambda: bytearray(0x10000))
    halted: bool = False
    in_reset_routine: bool = False
    pending_irq: int | None = None
    memmap: MemoryMap = DEFAULT_MEMMAP
    entry: int = 0
    steps: int = 0

    def copy(self) -> "MachineState":
        return replace(self, gpr=list(self.gpr), mem=bytearray(self.mem))

    def read_word(self, addr: int) -> int:
        if addr % 2:
            raise IsaError("unaligned-access", f"word read at 0x{addr:04X}")
        return self.mem[addr] | (self.mem[addr + 1] << 8)

    def write_word(self, addr: int, value: int) -> None:
        if addr % 2:
            raise IsaError("unaligned-access", f"word write at 0x{addr:04X}")
        self.mem[addr] = value & 0xFF
        self.mem[addr + 1] = (value >> 8) & 0xFF

    def reg(self, r: int) -> int:
        if r == REG_SP:
            return self.sp
        return self.gpr[r - GPR_FIRST]

    def set_reg(self, r: int, value: int) -> None:
        value &= WORD_MASK
        if r == REG_SP:
            if value % 2:
                raise IsaError("unaligned-access", f"odd stack pointer 0x{value:04X}")
            if value > self.memmap.stack_init:
                raise IsaError("stack-underflow", f"SP 0x{value:04X} above stack_init")
            self.sp = value
        else:
            self.gpr[r - GPR_FIRST] = value


# ---------------------------------------------------------------- loading

def load_program(image: bytes, memmap: MemoryMap = DEFAULT_MEMMAP) -> MachineState:
    """Build a fresh machine from ``[entry][IVT x16][program words]`` (little endian)."""
    header = 2 * (1 + IVT_SLOTS)
    if len(image) < header or len(image) % 2:
        raise IsaError("malformed-image", "image shorter than header or odd length")
    words = [image[i] | (image[i + 1] << 8) for i in range(0, len(image), 2)]
    entry, ivt, program = words[0], words[1:1 + IVT_SLOTS], words[1 + IVT_SLOTS:]
    capacity = (memmap.prog_limit + 1 - memmap.prog_base) // 2
    if len(program) > capacity:
        raise IsaError("image-too-large", f"{len(program)} words, capacity {capacity}")
    if entry % 2:
        raise IsaError("misaligned-entry", f"entry 0x{entry:04X}")
    if not memmap.in_program(entry):
        raise IsaError("entry-outside-program-region", f"entry 0x{entry:04X}")

    state = MachineState(pc=entry, sp=memmap.stack_init, memmap=memmap, entry=entry)
    for i, w in enumerate(program):
        state.write_word(memmap.prog_base + 2 * i, w)
    for i, w in enumerate(ivt):
        state.write_word(memmap.ivt_base + 2 * i, w)
    return state


def ivt_entry(state: MachineState, irq: int) -> int:
    if not 0 <= irq < IVT_SLOTS:
        raise IsaError("bad-irq", f"irq {irq} outside 0..{IVT_SLOTS - 1}")
    return state.read_word(state.memmap.ivt_base + 2 * irq)


# ---------------------------------------------------------------- execution

def step(state: MachineState, irq: int | None = None) -> tuple[MachineState, SignalSnapshot]:
    """Execute one instruction, or take an interrupt, on a copy of ``state``.

    The input state is left untouched so a supervisor can drop the result
    when the monitor vetoes the step.
    """
    if state.halted:
        raise IsaError("halted-machine")
    s = state.copy()
    if irq is not None:
        s.pending_irq = irq
    if s.pending_irq is not None and not s.in_reset_routine:
        snap = _interrupt_entry(s, s.pending_irq)
    else:
        snap = _execute(s)
    s.steps += 1
    return s, snap


def _push(s: MachineState, value: int) -> int:
    new_sp = (s.sp - 2) & WORD_MASK
    s.write_word(new_sp, value)
    s.sp = new_sp
    return new_sp


def _pop(s: MachineState) -> int:
    addr = s.sp
    value = s.read_word(addr)
    s.set_reg(REG_SP, addr + 2)
    return value


def _interrupt_entry(s: MachineState, irq: int) -> SignalSnapshot:
    target = ivt_entry(s, irq)
    if target == 0:
        raise IsaError("unhandled-interrupt", f"IVT slot {irq} is empty")
    pc, sp = s.pc, s.sp
    d_addr = _push(s, pc)
    s.pc = target
    s.pending_irq = None
    return SignalSnapshot(s.steps, pc, d_addr, 1, sp, 1, pc)


def _check_branch(target: int) -> int:
    if target % 2:
        raise IsaError("unaligned-access", f"branch to odd address 0x{target:04X}")
    return target


def _execute(s: MachineState) -> SignalSnapshot:
    pc, sp = s.pc, s.sp
    if pc % 2:
        raise IsaError("unaligned-access", f"fetch at 0x{pc:04X}")
    insn = Instruction.decode(s.read_word(pc), s.read_word((pc + 2) & WORD_MASK))
    op, k = insn.op, insn.operand
    nxt = (pc + INSN_SIZE) & WORD_MASK
    d_addr, w_en, op_ret = None, 0, None

    if op is Op.NOP:
        pass
    elif op is Op.HALT:
        s.halted = True
        nxt = pc
    elif op is Op.MOV_IMM:
        s.set_reg(insn.dst, k)
    elif op is Op.MOV_RR:
        s.set_reg(insn.dst, s.reg(insn.src))
    elif op is Op.MOV_RA:
        d_addr, w_en = k, 1
        s.write_word(k, s.reg(insn.src))
    elif op is Op.MOV_AR:
        d_addr = k
        s.set_reg(insn.dst, s.read_word(k))
    elif op is Op.MOV_RI:
        d_addr, w_en = s.reg(insn.dst), 1
        s.write_word(d_addr, s.reg(insn.src))
    elif op is Op.MOV_IR:
        d_addr = s.reg(insn.src)
        s.set_reg(insn.dst, s.read_word(d_addr))
    elif op is Op.MOV_PA:
        ptr = s.reg(insn.src)
        value = s.read_word(ptr)
        s.set_reg(insn.src, ptr + 2)
        d_addr, w_en = k, 1
        s.write_word(k, value)
    elif op in (Op.PUSH_R, Op.PUSH_I):
        value = s.reg(insn.src) if op is Op.PUSH_R else k
        d_addr, w_en = _push(s, value), 1
    elif op is Op.POP:
        d_addr = s.sp
        value = _pop(s)
        s.set_reg(insn.dst, value)
    elif op in (Op.CALL_I, Op.CALL_R):
        target = _check_branch(k if op is Op.CALL_I else s.reg(insn.src))
        op_ret = nxt
        d_addr, w_en = _push(s, nxt), 1
        nxt = target
    elif op in (Op.RET, Op.RETI):
        d_addr = s.sp
        nxt = _check_branch(_pop(s))
    elif op is Op.JMP:
        nxt = _check_branch(k)
    elif op is Op.BR:
        nxt = _check_branch(s.reg(insn.src))
    elif op is Op.JZ:
        if s.zflag:
            nxt = _check_branch(k)
    elif op in (Op.ADD_I, Op.ADD_R, Op.SUB_I, Op.SUB_R, Op.CMP_I, Op.CMP_R):
        src = k if op in (Op.ADD_I, Op.SUB_I, Op.CMP_I) else s.reg(insn.src)
        dst = s.reg(insn.dst)
        result = (dst + src) if op in (Op.ADD_I, Op.ADD_R) else (dst - src)
        result &= WORD_MASK
        s.zflag = int(result == 0)
        if op not in (Op.CMP_I, Op.CMP_R):
            s.set_reg(insn.dst, result)
    else:  # pragma: no cover - Op is exhaustive
        raise IsaError("decode-error", op.name)

    s.pc = nxt
    return SignalSnapshot(s.steps, pc, d_addr, w_en, sp, 0, op_ret)


def perform_reset(state: MachineState) -> tuple[MachineState, SignalSnapshot]:
    """Run the reset routine: one PC=0 sentinel snapshot, then a fresh machine.

    Program memory, IVT and the configuration region survive; RAM and
    registers are cleared and execution restarts at the entry vector.
    """
    mm = state.memmap
    s = state.copy()
    snap = SignalSnapshot(s.steps, 0, None, 0, mm.stack_init, 0, None)
    s.mem[mm.ram_base:mm.ram_limit + 1] = bytes(mm.ram_limit + 1 - mm.ram_base)
    s.gpr = [0] * len(s.gpr)
    s.pc, s.sp, s.zflag = s.entry, mm.stack_init, 0
    s.halted = False
    s.in_reset_routine = False
    s.pending_irq = None
    s.steps += 1
    return s, snap


def estimate_marshal_cost(n_bytes: int) -> int:
    """Instruction steps needed to copy ``n_bytes`` with one word-copy MOV per word."""
    if n_bytes < 0:
        raise ValueError("n_bytes must be non-negative")
    return math.ceil(n_bytes / 2)
