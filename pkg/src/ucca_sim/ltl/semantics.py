"""Array evaluator for finite-trace formulas.

Every formula is evaluated at all positions of a batch of equal-length
traces at once: columns are int64 arrays of shape (batch, length) and the
result is a bool array of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .syntax import (And, Bool, Cmp, Const, Flag, Globally, Implies, In, LtlError, Next, NextF,
                     Not, Or, Prev, Sig, WeakUntil, Yesterday)
from .trace import NONE, Regions, Trace


def _term(t, cols):
    """Return (values, past_undefined, future_undefined) for a term."""
    if isinstance(t, Sig):
        try:
            v = cols[t.key]
        except KeyError:
            raise LtlError("unknown-signal", f"trace has no column {t.key!r}") from None
        z = np.zeros(v.shape, bool)
        return v, z, z
    if isinstance(t, Const):
        shape = next(iter(cols.values())).shape
        z = np.zeros(shape, bool)
        return np.full(shape, t.value, np.int64), z, z
    v, p, f = _term(t.term, cols)
    v2, p2, f2 = np.zeros_like(v), np.zeros_like(p), np.zeros_like(f)
    if isinstance(t, Next):
        v2[:, :-1], p2[:, :-1], f2[:, :-1] = v[:, 1:], p[:, 1:], f[:, 1:]
        f2[:, -1] = True
    elif isinstance(t, Prev):
        v2[:, 1:], p2[:, 1:], f2[:, 1:] = v[:, :-1], p[:, :-1], f[:, :-1]
        p2[:, 0] = True
    else:
        raise TypeError(t)
    return v2, p2, f2


def _atom(value, past, future):
    # Past-undefined makes an atom false, future-undefined makes it true (weak).
    return np.where(past, False, np.where(future, True, value))


def compare(op: str, a, b):
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == ">=":
        return (a != NONE) & (b != NONE) & (a >= b)
    raise ValueError(op)


def evaluate(f, cols: dict[str, np.ndarray], regions: Regions) -> np.ndarray:
    if isinstance(f, Bool):
        shape = next(iter(cols.values())).shape
        return np.full(shape, f.value, bool)
    if isinstance(f, Flag):
        return cols[f.name] != 0
    if isinstance(f, Cmp):
        a, pa, fa = _term(f.left, cols)
        b, pb, fb = _term(f.right, cols)
        return _atom(compare(f.op, a, b), pa | pb, fa | fb)
    if isinstance(f, In):
        try:
            lo, hi = regions.bounds(f.region)
        except KeyError:
            raise LtlError("unknown-region", f"trace declares no region {f.region}") from None
        v, p, fu = _term(f.term, cols)
        return _atom((v != NONE) & (v >= lo) & (v <= hi), p, fu)
    if isinstance(f, Not):
        return ~evaluate(f.arg, cols, regions)
    if isinstance(f, And):
        return evaluate(f.left, cols, regions) & evaluate(f.right, cols, regions)
    if isinstance(f, Or):
        return evaluate(f.left, cols, regions) | evaluate(f.right, cols, regions)
    if isinstance(f, Implies):
        return ~evaluate(f.left, cols, regions) | evaluate(f.right, cols, regions)
    if isinstance(f, NextF):
        a = evaluate(f.arg, cols, regions)
        out = np.ones_like(a)
        out[:, :-1] = a[:, 1:]
        return out
    if isinstance(f, Yesterday):
        a = evaluate(f.arg, cols, regions)
        out = np.zeros_like(a)
        out[:, 1:] = a[:, :-1]
        return out
    if isinstance(f, Globally):
        a = evaluate(f.arg, cols, regions)
        return np.logical_and.accumulate(a[:, ::-1], axis=1)[:, ::-1]
    if isinstance(f, WeakUntil):
        psi = evaluate(f.left, cols, regions)
        phi = evaluate(f.right, cols, regions)
        out = np.empty_like(psi)
        later = np.ones(psi.shape[0], bool)
        for i in range(psi.shape[1] - 1, -1, -1):
            later = phi[:, i] | (psi[:, i] & later)
            out[:, i] = later
        return out
    raise TypeError(f"not a formula: {f!r}")


def eval_formula(f, trace: Trace, i: int = 0) -> bool:
    if not 0 <= i < len(trace):
        raise LtlError("position-out-of-range", f"{i} not in [0, {len(trace)})")
    return bool(evaluate(f, trace.columns(), trace.regions)[0, i])


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    witness: int | None = None

    def __str__(self) -> str:
        return "holds" if self.holds else f"violated at {self.witness}"


def witnesses(f, cols, regions: Regions) -> np.ndarray:
    """Per lane: first failing position of the G body (or 0), -1 when ``f`` holds."""
    if isinstance(f, Globally):
        body = evaluate(f.arg, cols, regions)
        bad = ~body
        return np.where(bad.any(axis=1), bad.argmax(axis=1), -1)
    return np.where(evaluate(f, cols, regions)[:, 0], -1, 0)


def check(f, trace: Trace) -> CheckResult:
    w = int(witnesses(f, trace.columns(), trace.regions)[0])
    return CheckResult(True) if w < 0 else CheckResult(False, w)
