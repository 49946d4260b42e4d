"""Reference semantics by plain recursion over the trace records.

Deliberately naive: no sharing, no memoisation, position by position. It
exists only to cross-check the array evaluator.
"""

from __future__ import annotations

from .semantics import compare
from .syntax import (And, Bool, Cmp, Const, Flag, Globally, Implies, In, Next, NextF, Not, Or,
                     Prev, Sig, WeakUntil, Yesterday)
from .trace import NONE, Trace

PAST, FUTURE = "past", "future"


def _term(t, trace: Trace, i: int):
    if isinstance(t, Sig):
        return trace.records[i].value(t.key)
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Next):
        return FUTURE if i + 1 >= len(trace) else _term(t.term, trace, i + 1)
    if isinstance(t, Prev):
        return PAST if i == 0 else _term(t.term, trace, i - 1)
    raise TypeError(t)


def _atom(values, test) -> bool:
    if PAST in values:
        return False
    if FUTURE in values:
        return True
    return bool(test(*values))


def holds_at(f, trace: Trace, i: int) -> bool:
    n = len(trace)
    if isinstance(f, Bool):
        return f.value
    if isinstance(f, Flag):
        return trace.records[i].value(f.name) != 0
    if isinstance(f, Cmp):
        vals = (_term(f.left, trace, i), _term(f.right, trace, i))
        return _atom(vals, lambda a, b: compare(f.op, a, b))
    if isinstance(f, In):
        lo, hi = trace.regions.bounds(f.region)
        return _atom((_term(f.term, trace, i),), lambda v: v != NONE and lo <= v <= hi)
    if isinstance(f, Not):
        return not holds_at(f.arg, trace, i)
    if isinstance(f, And):
        return holds_at(f.left, trace, i) and holds_at(f.right, trace, i)
    if isinstance(f, Or):
        return holds_at(f.left, trace, i) or holds_at(f.right, trace, i)
    if isinstance(f, Implies):
        return (not holds_at(f.left, trace, i)) or holds_at(f.right, trace, i)
    if isinstance(f, NextF):
        return True if i == n - 1 else holds_at(f.arg, trace, i + 1)
    if isinstance(f, Yesterday):
        return False if i == 0 else holds_at(f.arg, trace, i - 1)
    if isinstance(f, Globally):
        return all(holds_at(f.arg, trace, j) for j in range(i, n))
    if isinstance(f, WeakUntil):
        for j in range(i, n):
            if holds_at(f.right, trace, j):
                return True
            if not holds_at(f.left, trace, j):
                return False
        return True
    raise TypeError(f)


def brute_oracle(f, trace: Trace, i: int = 0) -> bool:
    return holds_at(f, trace, i)
