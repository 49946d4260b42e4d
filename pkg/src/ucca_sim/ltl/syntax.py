"""Formula syntax: AST, parser and printer.

Grammar, loosest binding first::

    formula  := weak ('->' formula)?
    weak     := disj ('W' weak)?
    disj     := conj ('|' conj)*
    conj     := unary ('&' unary)*
    unary    := '!' unary | 'G' unary | 'X' unary | 'Y' unary | primary
    primary  := '(' formula ')' | 'true' | 'false' | atom
    atom     := term ('=' | '!=' | '>=') term | term 'in' REGION | FLAG
    term     := SIGNAL | NUMBER | 'X' '(' term ')' | 'Y' '(' term ')'

``X(t)``/``Y(t)`` directly followed by a comparator or ``in`` are terms
(value of ``t`` one step later/earlier); otherwise they are the temporal
operators. Signals: pc, sp, d_addr, op_ret, ret_exp<k>, bp<k> (addresses)
and w_en, irq_jmp, reset (bits). Regions: UCC<k>, CR. ``ret_exp``, ``bp``
and ``UCC`` without an index mean index 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

ADDRESS_SIGNALS = ("pc", "sp", "d_addr", "op_ret")
INDEXED_SIGNALS = ("ret_exp", "bp")
FLAG_SIGNALS = ("w_en", "irq_jmp", "reset")
COMPARATORS = ("=", "!=", ">=")


class LtlError(ValueError):
    def __init__(self, kind: str, message: str, position: int | None = None):
        where = f" at {position}" if position is not None else ""
        super().__init__(f"{kind}{where}: {message}")
        self.kind = kind
        self.position = position


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Sig:
    name: str
    index: int | None = None

    @property
    def key(self) -> str:
        return self.name if self.index is None else f"{self.name}{self.index}"


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Next:
    term: "Term"


@dataclass(frozen=True)
class Prev:
    term: "Term"


Term = Sig | Const | Next | Prev


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class Flag:
    name: str


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class In:
    term: Term
    region: str  # "CR" or "UCC<k>"


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Globally:
    arg: "Formula"


@dataclass(frozen=True)
class NextF:
    arg: "Formula"


@dataclass(frozen=True)
class Yesterday:
    arg: "Formula"


@dataclass(frozen=True)
class WeakUntil:
    left: "Formula"
    right: "Formula"


Formula = (Bool | Flag | Cmp | In | Not | And | Or | Implies | Globally | NextF
           | Yesterday | WeakUntil)


def regions_used(f) -> set[str]:
    if isinstance(f, In):
        return {f.region}
    out: set[str] = set()
    for child in _children(f):
        out |= regions_used(child)
    return out


def _children(f) -> tuple:
    if isinstance(f, (Not, Globally, NextF, Yesterday)):
        return (f.arg,)
    if isinstance(f, (And, Or, Implies, WeakUntil)):
        return (f.left, f.right)
    return ()


def depth(f) -> int:
    kids = _children(f)
    return 1 + max((depth(k) for k in kids), default=0)


# ---------------------------------------------------------------- printer

def format_term(t: Term) -> str:
    if isinstance(t, Sig):
        return t.key
    if isinstance(t, Const):
        return f"0x{t.value:04X}" if t.value > 9 else str(t.value)
    if isinstance(t, Next):
        return f"X({format_term(t.term)})"
    if isinstance(t, Prev):
        return f"Y({format_term(t.term)})"
    raise TypeError(t)


def format_formula(f) -> str:
    """Print ``f`` so that :func:`parse_formula` rebuilds the same tree."""
    if isinstance(f, Bool):
        return "true" if f.value else "false"
    if isinstance(f, Flag):
        return f.name
    if isinstance(f, Cmp):
        return f"{format_term(f.left)} {f.op} {format_term(f.right)}"
    if isinstance(f, In):
        return f"{format_term(f.term)} in {f.region}"
    if isinstance(f, Not):
        return f"!({format_formula(f.arg)})"
    if isinstance(f, Globally):
        return f"G({format_formula(f.arg)})"
    if isinstance(f, NextF):
        return f"X({format_formula(f.arg)})"
    if isinstance(f, Yesterday):
        return f"Y({format_formula(f.arg)})"
    sym = {And: "&", Or: "|", Implies: "->", WeakUntil: "W"}[type(f)]
    return f"({format_formula(f.left)} {sym} {format_formula(f.right)})"


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"\s*(?:(->|!=|>=|[()!&|=])|(0[xX][0-9a-fA-F]+|\d+)|([A-Za-z_][A-Za-z0-9_]*))")
_KEYWORDS = {"G", "X", "Y", "W", "in", "true", "false"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise LtlError("syntax-error", f"unexpected character {text[start]!r}", start)
        start = m.start(m.lastindex)
        kind = ("op", "num", "name")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n_ucc: int | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.n_ucc = n_ucc

    @property
    def tok(self):
        return self.toks[self.i]

    def at(self, value: str) -> bool:
        kind, text, _ = self.tok
        return kind != "end" and text == value

    def expect(self, value: str):
        if not self.at(value):
            self.fail(f"expected {value!r}")
        self.i += 1

    def fail(self, message: str):
        kind, text, pos = self.tok
        found = "end of input" if kind == "end" else repr(text)
        raise LtlError("syntax-error", f"{message}, found {found}", pos)

    def formula(self):
        left = self.weak()
        if self.at("->"):
            self.i += 1
            return Implies(left, self.formula())
        return left

    def weak(self):
        left = self.disj()
        if self.at("W"):
            self.i += 1
            return WeakUntil(left, self.weak())
        return left

    def disj(self):
        left = self.conj()
        while self.at("|"):
            self.i += 1
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.at("&"):
            self.i += 1
            left = And(left, self.unary())
        return left

    def unary(self):
        if self.at("!"):
            self.i += 1
            return Not(self.unary())
        if self.at("G"):
            self.i += 1
            return Globally(self.unary())
        if self.at("X") or self.at("Y"):
            saved = self.i
            try:
                term = self.term()
            except LtlError:
                term = None
            if term is not None and (self.tok[1] in COMPARATORS or self.at("in")):
                self.i = saved
                return self.atom()
            self.i = saved + 1
            arg = self.unary()
            return NextF(arg) if self.toks[saved][1] == "X" else Yesterday(arg)
        return self.primary()

    def primary(self):
        if self.at("("):
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        if self.at("true") or self.at("false"):
            value = self.tok[1] == "true"
            self.i += 1
            return Bool(value)
        return self.atom()

    def atom(self):
        kind, text, pos = self.tok
        if kind == "name" and text in FLAG_SIGNALS:
            nxt = self.toks[self.i + 1][1]
            if nxt not in COMPARATORS and nxt != "in":
                self.i += 1
                return Flag(text)
        left = self.term()
        if self.tok[1] in COMPARATORS and self.tok[0] == "op":
            op = self.tok[1]
            self.i += 1
            return Cmp(op, left, self.term())
        if self.at("in"):
            self.i += 1
            return In(left, self.region())
        self.fail("expected comparator or 'in' after term")

    def term(self) -> Term:
        kind, text, pos = self.tok
        if kind == "num":
            self.i += 1
            return Const(int(text, 0))
        if kind == "name" and text in ("X", "Y"):
            self.i += 1
            self.expect("(")
            inner = self.term()
            self.expect(")")
            return Next(inner) if text == "X" else Prev(inner)
        if kind == "name" and text not in _KEYWORDS:
            self.i += 1
            return self.signal(text, pos)
        self.fail("expected a term")

    def signal(self, name: str, pos: int) -> Sig:
        if name in ADDRESS_SIGNALS or name in FLAG_SIGNALS:
            return Sig(name)
        m = re.fullmatch(r"(ret_exp|bp)(\d*)", name)
        if m:
            index = int(m.group(2) or 0)
            self._check_index(index, pos, "unknown-signal", name)
            return Sig(m.group(1), index)
        raise LtlError("unknown-signal", f"no signal named {name!r}", pos)

    def region(self) -> str:
        kind, text, pos = self.tok
        self.i += 1
        if text == "CR":
            return "CR"
        m = re.fullmatch(r"UCC(\d*)", text)
        if kind == "name" and m:
            index = int(m.group(1) or 0)
            self._check_index(index, pos, "unknown-region", text)
            return f"UCC{index}"
        raise LtlError("unknown-region", f"no region named {text!r}", pos)

    def _check_index(self, index: int, pos: int, kind: str, name: str):
        if self.n_ucc is not None and index >= self.n_ucc:
            raise LtlError(kind, f"{name!r} refers to UCC {index}, only {self.n_ucc} declared", pos)


def parse_formula(text: str, n_ucc: int | None = None):
    """Parse ``text``; with ``n_ucc`` given, indexed names beyond it are rejected."""
    p = _Parser(text, n_ucc)
    f = p.formula()
    if p.tok[0] != "end":
        p.fail("trailing input")
    return f
