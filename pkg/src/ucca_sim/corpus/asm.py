"""Two-pass assembler and disassembler for the emulator's instruction set.

Source syntax (one statement per line, ``;`` starts a comment)::

    .equ NAME, expr          ; symbolic constant
    .org expr                ; move the location counter (program region only)
    .entry expr              ; entry vector (defaults to the first instruction)
    .ivt slot, expr          ; interrupt vector slot 0..15
    .word expr[, expr...]    ; raw data words
    label:  MNEMONIC operands

Operand forms: ``Rn``/``SP`` register, ``#expr`` immediate, ``&expr``
absolute address, ``@Rn`` indirect, ``@Rn+`` post-increment (copy source
of ``MOV @Rn+, &addr``). Branch targets may be written as ``#expr`` or
bare ``expr``. Expressions are sums and differences of numbers, labels and
``.equ`` names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..isa import (DEFAULT_MEMMAP, GPR_FIRST, GPR_LAST, INSN_SIZE, IVT_SLOTS, REG_SP,
                   Instruction, IsaError, MemoryMap, Op)


class AsmError(ValueError):
    def __init__(self, kind: str, message: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{kind}{where}: {message}")
        self.kind = kind
        self.line = line


@dataclass
class Program:
    image: bytes
    entry: int
    labels: dict[str, int]
    listing: list[tuple[int, str]] = field(default_factory=list)  # (address, source text)

    def label(self, name: str) -> int:
        return self.labels[name]


# ------------------------------------------------------------------ operands

_REG = re.compile(r"^(?:R(\d+)|SP)$", re.I)


@dataclass(frozen=True)
class _Operand:
    kind: str          # reg, imm, abs, ind, inc, expr
    reg: int = 0
    expr: str = ""


def _parse_reg(text: str, line: int) -> int | None:
    m = _REG.match(text)
    if not m:
        return None
    if m.group(1) is None:
        return REG_SP
    n = int(m.group(1))
    if n == REG_SP or GPR_FIRST <= n <= GPR_LAST:
        return n
    raise AsmError("syntax-error", f"register {text} is not usable (SP, R4-R12)", line)


def _operand(text: str, line: int) -> _Operand:
    text = text.strip()
    if not text:
        raise AsmError("syntax-error", "empty operand", line)
    if text.startswith("#"):
        return _Operand("imm", expr=text[1:])
    if text.startswith("&"):
        return _Operand("abs", expr=text[1:])
    if text.startswith("@"):
        inc = text.endswith("+")
        reg = _parse_reg(text[1:-1] if inc else text[1:], line)
        if reg is None:
            raise AsmError("syntax-error", f"bad indirect operand {text!r}", line)
        return _Operand("inc" if inc else "ind", reg)
    reg = _parse_reg(text, line)
    if reg is not None:
        return _Operand("reg", reg)
    return _Operand("expr", expr=text)


# Mnemonic + operand kinds -> (opcode, how the fields are filled)
_TWO = {
    ("MOV", "imm", "reg"): Op.MOV_IMM, ("MOV", "reg", "reg"): Op.MOV_RR,
    ("MOV", "reg", "abs"): Op.MOV_RA, ("MOV", "abs", "reg"): Op.MOV_AR,
    ("MOV", "reg", "ind"): Op.MOV_RI, ("MOV", "ind", "reg"): Op.MOV_IR,
    ("MOV", "inc", "abs"): Op.MOV_PA,
    ("ADD", "imm", "reg"): Op.ADD_I, ("ADD", "reg", "reg"): Op.ADD_R,
    ("SUB", "imm", "reg"): Op.SUB_I, ("SUB", "reg", "reg"): Op.SUB_R,
    ("CMP", "imm", "reg"): Op.CMP_I, ("CMP", "reg", "reg"): Op.CMP_R,
}
_ONE = {
    ("PUSH", "reg"): Op.PUSH_R, ("PUSH", "imm"): Op.PUSH_I, ("POP", "reg"): Op.POP,
    ("CALL", "imm"): Op.CALL_I, ("CALL", "expr"): Op.CALL_I, ("CALL", "reg"): Op.CALL_R,
    ("JMP", "imm"): Op.JMP, ("JMP", "expr"): Op.JMP, ("BR", "reg"): Op.BR,
    ("JZ", "imm"): Op.JZ, ("JZ", "expr"): Op.JZ,
}
_NONE = {"NOP": Op.NOP, "HALT": Op.HALT, "RET": Op.RET, "RETI": Op.RETI}


def _split_operands(text: str) -> list[str]:
    return [p.strip() for p in text.split(",")] if text.strip() else []


# ------------------------------------------------------------------ expressions

_EXPR_TOKEN = re.compile(r"\s*([+-])?\s*([A-Za-z_.$][\w.$]*|0[xX][0-9a-fA-F]+|\d+)\s*")


def _eval(expr: str, symbols: dict[str, int], line: int) -> int:
    expr = expr.strip()
    if not expr:
        raise AsmError("syntax-error", "missing expression", line)
    pos, total, first = 0, 0, True
    while pos < len(expr):
        m = _EXPR_TOKEN.match(expr, pos)
        if not m or m.end() == pos or (m.group(1) is None and not first):
            raise AsmError("syntax-error", f"bad expression {expr!r}", line)
        sign = -1 if m.group(1) == "-" else 1
        atom = m.group(2)
        if atom[0].isdigit():
            value = int(atom, 0)
        elif atom in symbols:
            value = symbols[atom]
        else:
            raise AsmError("undefined-label", f"{atom!r} is not defined", line)
        total += sign * value
        pos, first = m.end(), False
    return total & 0xFFFF


# ------------------------------------------------------------------ assembler

@dataclass
class _Stmt:
    line: int
    addr: int
    kind: str           # insn, word
    text: str
    mnemonic: str = ""
    operands: tuple = ()


_LABEL = re.compile(r"^([A-Za-z_.][\w.]*)\s*:\s*(.*)$")


def assemble(source: str, memmap: MemoryMap = DEFAULT_MEMMAP) -> Program:
    symbols: dict[str, int] = {}
    labels: dict[str, int] = {}
    stmts: list[_Stmt] = []
    ivt: dict[int, tuple[str, int]] = {}
    entry_expr: tuple[str, int] | None = None
    pc = memmap.prog_base

    def place(size: int, line: int) -> int:
        if not (memmap.in_program(pc) and memmap.in_program(pc + size - 1)):
            raise AsmError("region-overflow",
                           f"0x{pc:04X}+{size} leaves the program region", line)
        return pc

    # pass 1: addresses
    for n, raw in enumerate(source.splitlines(), 1):
        text = raw.split(";", 1)[0].strip()
        while text:
            m = _LABEL.match(text)
            if not m or text.startswith("."):
                break
            name = m.group(1)
            if name in labels or name in symbols:
                raise AsmError("syntax-error", f"duplicate symbol {name!r}", n)
            labels[name] = symbols[name] = pc
            text = m.group(2).strip()
        if not text:
            continue
        head, _, rest = text.partition(" ")
        head_u = head.upper()
        if head.startswith("."):
            args = _split_operands(rest)
            if head_u == ".EQU":
                if len(args) != 2 or not re.fullmatch(r"[A-Za-z_][\w]*", args[0]):
                    raise AsmError("syntax-error", ".equ expects NAME, expr", n)
                if args[0] in symbols:
                    raise AsmError("syntax-error", f"duplicate symbol {args[0]!r}", n)
                symbols[args[0]] = _eval(args[1], symbols, n)
            elif head_u == ".ORG":
                if len(args) != 1:
                    raise AsmError("syntax-error", ".org expects one address", n)
                pc = _eval(args[0], symbols, n)
                if not memmap.in_program(pc):
                    raise AsmError("region-overflow", f".org 0x{pc:04X} outside program region", n)
                if pc % 2:
                    raise AsmError("syntax-error", f".org 0x{pc:04X} is odd", n)
            elif head_u == ".ENTRY":
                if len(args) != 1:
                    raise AsmError("syntax-error", ".entry expects one address", n)
                entry_expr = (args[0], n)
            elif head_u == ".IVT":
                if len(args) != 2:
                    raise AsmError("syntax-error", ".ivt expects slot, address", n)
                slot = _eval(args[0], symbols, n)
                if slot >= IVT_SLOTS:
                    raise AsmError("syntax-error", f"IVT slot {slot} outside 0..{IVT_SLOTS - 1}", n)
                ivt[slot] = (args[1], n)
            elif head_u == ".WORD":
                if not args:
                    raise AsmError("syntax-error", ".word expects at least one value", n)
                for a in args:
                    stmts.append(_Stmt(n, place(2, n), "word", a))
                    pc += 2
            else:
                raise AsmError("syntax-error", f"unknown directive {head}", n)
            continue
        ops = tuple(_operand(o, n) for o in _split_operands(rest))
        stmts.append(_Stmt(n, place(INSN_SIZE, n), "insn", text, head_u, ops))
        pc += INSN_SIZE

    # pass 2: encode
    words: dict[int, int] = {}
    listing = []
    for st in stmts:
        if st.addr in words:
            raise AsmError("region-overflow", f"0x{st.addr:04X} emitted twice", st.line)
        if st.kind == "word":
            words[st.addr] = _eval(st.text, symbols, st.line)
        else:
            w0, w1 = _encode(st, symbols).encode()
            if st.addr + 2 in words:
                raise AsmError("region-overflow", f"0x{st.addr + 2:04X} emitted twice", st.line)
            words[st.addr], words[st.addr + 2] = w0, w1
        listing.append((st.addr, st.text))

    if entry_expr is not None:
        entry = _eval(entry_expr[0], symbols, entry_expr[1])
    else:
        first = next((s for s in stmts if s.kind == "insn"), None)
        entry = first.addr if first else memmap.prog_base
    vectors = [0] * IVT_SLOTS
    for slot, (expr, n) in ivt.items():
        vectors[slot] = _eval(expr, symbols, n)

    top = max(words) + 2 if words else memmap.prog_base
    body = [words.get(a, 0) for a in range(memmap.prog_base, top, 2)]
    image = b"".join(w.to_bytes(2, "little") for w in [entry, *vectors, *body])
    return Program(image, entry, labels, listing)


def _encode(st: _Stmt, symbols: dict[str, int]) -> Instruction:
    m, ops, n = st.mnemonic, st.operands, st.line
    kinds = tuple(o.kind for o in ops)
    if m in _NONE:
        if ops:
            raise AsmError("syntax-error", f"{m} takes no operands", n)
        return Instruction(_NONE[m])
    if len(ops) == 1 and (m, kinds[0]) in _ONE:
        op = _ONE[(m, kinds[0])]
        o = ops[0]
        if o.kind == "reg":
            return Instruction(op, src=o.reg) if op is not Op.POP else Instruction(op, dst=o.reg)
        return Instruction(op, operand=_eval(o.expr, symbols, n))
    if len(ops) == 2 and (m, *kinds) in _TWO:
        op = _TWO[(m, *kinds)]
        a, b = ops
        src = a.reg if a.kind in ("reg", "ind", "inc") else 0
        dst = b.reg if b.kind in ("reg", "ind") else 0
        operand = 0
        if a.kind in ("imm", "abs"):
            operand = _eval(a.expr, symbols, n)
        elif b.kind == "abs":
            operand = _eval(b.expr, symbols, n)
        return Instruction(op, src, dst, operand)
    known = {k[0] for k in _TWO} | {k[0] for k in _ONE} | set(_NONE)
    if m not in known:
        raise AsmError("syntax-error", f"unknown mnemonic {m!r}", n)
    raise AsmError("syntax-error", f"operand combination not valid for {m}", n)


# ------------------------------------------------------------------ disassembler

def _reg_name(r: int) -> str:
    return "SP" if r == REG_SP else f"R{r}"


def format_instruction(insn: Instruction) -> str:
    op, s, d, k = insn.op, _reg_name(insn.src), _reg_name(insn.dst), f"0x{insn.operand:04X}"
    table = {
        Op.NOP: "NOP", Op.HALT: "HALT", Op.RET: "RET", Op.RETI: "RETI",
        Op.MOV_IMM: f"MOV #{k}, {d}", Op.MOV_RR: f"MOV {s}, {d}", Op.MOV_RA: f"MOV {s}, &{k}",
        Op.MOV_AR: f"MOV &{k}, {d}", Op.MOV_RI: f"MOV {s}, @{d}", Op.MOV_IR: f"MOV @{s}, {d}",
        Op.MOV_PA: f"MOV @{s}+, &{k}", Op.PUSH_R: f"PUSH {s}", Op.PUSH_I: f"PUSH #{k}",
        Op.POP: f"POP {d}", Op.CALL_I: f"CALL #{k}", Op.CALL_R: f"CALL {s}",
        Op.JMP: f"JMP #{k}", Op.BR: f"BR {s}", Op.JZ: f"JZ #{k}",
        Op.ADD_I: f"ADD #{k}, {d}", Op.ADD_R: f"ADD {s}, {d}", Op.SUB_I: f"SUB #{k}, {d}",
        Op.SUB_R: f"SUB {s}, {d}", Op.CMP_I: f"CMP #{k}, {d}", Op.CMP_R: f"CMP {s}, {d}",
    }
    return table[op]


def disassemble(image: bytes, memmap: MemoryMap = DEFAULT_MEMMAP) -> str:
    """Render an image back to source that reassembles to the same bytes."""
    words = [image[i] | (image[i + 1] << 8) for i in range(0, len(image), 2)]
    entry, ivt, body = words[0], words[1:1 + IVT_SLOTS], words[1 + IVT_SLOTS:]
    out = [f".entry 0x{entry:04X}"]
    out += [f".ivt {i}, 0x{v:04X}" for i, v in enumerate(ivt) if v]
    out.append(f".org 0x{memmap.prog_base:04X}")
    i = 0
    while i < len(body):
        addr = memmap.prog_base + 2 * i
        if i + 1 < len(body):
            try:
                insn = Instruction.decode(body[i], body[i + 1])
            except IsaError:
                insn = None
            if insn is not None:
                out.append(f"    {format_instruction(insn):<24}; 0x{addr:04X}")
                i += 2
                continue
        out.append(f"    .word 0x{body[i]:04X}{'':<12}; 0x{addr:04X}")
        i += 1
    return "\n".join(out) + "\n"


def marshal_stub(src: str | int, dst: str | int, n_bytes: int, ptr: str = "R4") -> str:
    """Copy ``n_bytes`` from ``src`` to ``dst`` with one ``MOV @ptr+, &dst`` per word.

    ``src`` may be an address, a label, or a register name (copied into the
    pointer register first). The copy itself takes ``ceil(n_bytes / 2)``
    instructions; the pointer set-up adds one more.
    """
    fmt = lambda v: f"0x{v:04X}" if isinstance(v, int) else v  # noqa: E731
    setup = (f"MOV {src}, {ptr}" if isinstance(src, str) and _REG.match(src)
             else f"MOV #{fmt(src)}, {ptr}")
    lines = [f"    {setup}"]
    for i in range((n_bytes + 1) // 2):
        target = f"{fmt(dst)}+{2 * i}" if i else fmt(dst)
        lines.append(f"    MOV @{ptr}+, &{target}")
    return "\n".join(lines) + "\n"
