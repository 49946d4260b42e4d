"""Random formulas and traces for oracle cross-checks (shared by several test modules)."""

import random

from ucca_sim.ltl import Record, Regions, Trace
from ucca_sim.ltl.syntax import (And, Bool, Cmp, Const, Flag, Globally, Implies, In, Next, NextF,
                                 Not, Or, Prev, Sig, WeakUntil, Yesterday)

REGIONS = Regions(((0xC100, 0xC1FE), (0xC120, 0xC140)), (0x0100, 0x011F))
ADDRS = [0, 0x0100, 0x09DE, 0x09E0, 0xC0FC, 0xC100, 0xC130, 0xC1FE, 0xC200]
ADDR_SIGNALS = ["pc", "sp", "d_addr", "op_ret"]


def random_term(rng: random.Random, depth: int = 2):
    roll = rng.random()
    if depth > 0 and roll < 0.25:
        inner = random_term(rng, depth - 1)
        return Next(inner) if rng.random() < 0.5 else Prev(inner)
    if roll < 0.35:
        return Const(rng.choice(ADDRS))
    name = rng.choice(ADDR_SIGNALS + ["ret_exp", "bp", "w_en", "reset"])
    if name in ("ret_exp", "bp"):
        return Sig(name, rng.randrange(len(REGIONS.uccs)))
    return Sig(name)


def random_atom(rng: random.Random):
    roll = rng.random()
    if roll < 0.1:
        return Bool(rng.random() < 0.5)
    if roll < 0.35:
        return Flag(rng.choice(["w_en", "irq_jmp", "reset"]))
    if roll < 0.6:
        region = rng.choice(["CR", "UCC0", "UCC1"])
        return In(random_term(rng), region)
    return Cmp(rng.choice(["=", "!=", ">="]), random_term(rng), random_term(rng))


def random_formula(rng: random.Random, depth: int = 4):
    """A formula whose operator nesting is at most ``depth``."""
    if depth <= 1 or rng.random() < 0.2:
        return random_atom(rng)
    kind = rng.choice(["not", "and", "or", "implies", "G", "X", "Y", "W"])
    sub = lambda: random_formula(rng, depth - 1)  # noqa: E731
    if kind == "not":
        return Not(sub())
    if kind == "G":
        return Globally(sub())
    if kind == "X":
        return NextF(sub())
    if kind == "Y":
        return Yesterday(sub())
    cls = {"and": And, "or": Or, "implies": Implies, "W": WeakUntil}[kind]
    return cls(sub(), sub())


def random_trace(rng: random.Random, length: int) -> Trace:
    def addr(optional=False):
        if optional and rng.random() < 0.3:
            return None
        return rng.choice(ADDRS)

    records = []
    for i in range(length):
        d = addr(optional=True)
        records.append(Record(
            step=i, pc=addr(), sp=addr(), d_addr=d, w_en=int(d is not None and rng.random() < 0.6),
            irq_jmp=int(rng.random() < 0.3), op_ret=addr(optional=True),
            reset=int(rng.random() < 0.3),
            ret_exp=(addr(), addr()), bp=(addr(), addr())))
    return Trace(tuple(records), REGIONS)
