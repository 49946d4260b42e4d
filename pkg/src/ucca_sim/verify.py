"""Bounded verification of the monitor against the built-in properties.

Signal sequences are drawn from a small alphabet of representative
snapshots (each address comparison the properties make is hit on both
sides), fed to the array form of the monitor FSMs, extended with the
monitor registers and checked against every built-in property at once.
"""

from __future__ import annotations

import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .hwmod import MUTATION_NAMES, Mutation, MonitorState, UccConfig, observe, require_valid
from .hwmod import fsm
from .isa import DEFAULT_MEMMAP, MemoryMap, SignalSnapshot
from .ltl import Regions, Trace, builtin_specs, check, witnesses

DEFAULT_CHUNK = 1 << 15
WITNESSES_PER_SPEC = 3


class BudgetExceeded(RuntimeError):
    def __init__(self, needed: int, cap: int):
        super().__init__(f"budget-exceeded: {needed} traces requested, cap is {cap}")
        self.needed = needed
        self.cap = cap


@dataclass(frozen=True)
class Symbol:
    """One abstract snapshot."""

    pc: int
    d_addr: int | None
    w_en: int
    sp: int
    irq_jmp: int
    op_ret: int | None

    def snapshot(self, step: int) -> SignalSnapshot:
        return SignalSnapshot(step, self.pc, self.d_addr, self.w_en, self.sp, self.irq_jmp,
                              self.op_ret)

    def to_dict(self) -> dict:
        h = lambda v: None if v is None else f"0x{v:04X}"  # noqa: E731
        return {"pc": h(self.pc), "d_addr": h(self.d_addr), "w_en": self.w_en, "sp": h(self.sp),
                "irq_jmp": self.irq_jmp, "op_ret": h(self.op_ret)}

    @classmethod
    def from_dict(cls, d: dict) -> "Symbol":
        a = lambda v: None if v is None else int(v, 16)  # noqa: E731
        return cls(a(d["pc"]), a(d["d_addr"]), int(d["w_en"]), a(d["sp"]), int(d["irq_jmp"]),
                   a(d["op_ret"]))


@dataclass
class ReducedAlphabet:
    """Cartesian product of small per-signal domains."""

    pcs: tuple[int, ...]
    writes: tuple[int | None, ...]   # data address written, None for no write
    sps: tuple[int, ...]
    irqs: tuple[int, ...] = (0, 1)
    op_rets: tuple[int | None, ...] = (None,)
    symbols: list[Symbol] = field(init=False, repr=False)

    def __post_init__(self):
        self.symbols = [Symbol(pc, d, int(d is not None), sp, irq, ret)
                        for pc, d, sp, irq, ret in itertools.product(
                            self.pcs, self.writes, self.sps, self.irqs, self.op_rets)]
        enc = lambda v: fsm.NONE if v is None else v  # noqa: E731
        self.table = {
            "pc": np.array([s.pc for s in self.symbols], np.int64),
            "d_addr": np.array([enc(s.d_addr) for s in self.symbols], np.int64),
            "w_en": np.array([s.w_en for s in self.symbols], np.int64),
            "sp": np.array([s.sp for s in self.symbols], np.int64),
            "irq_jmp": np.array([s.irq_jmp for s in self.symbols], np.int64),
            "op_ret": np.array([enc(s.op_ret) for s in self.symbols], np.int64),
        }

    def __len__(self) -> int:
        return len(self.symbols)

    @classmethod
    def default(cls, config: UccConfig, memmap: MemoryMap = DEFAULT_MEMMAP) -> "ReducedAlphabet":
        """pc: 0 plus, per UCC, both neighbours, both bounds and a midpoint.

        Writes: none, the first CR word, and the stack word s0. sp: s0 and
        s0 - 2, so a latched bp can sit below a written address. op_ret:
        none, the word just below the first UCC and the word just above it.
        """
        pcs = [0]
        for u in config.uccs:
            mid = (u.r_min + (u.r_max - u.r_min) // 2) & ~1
            for a in (u.r_min - 2, u.r_min, mid, u.r_max, u.r_max + 2):
                if a not in pcs:
                    pcs.append(a)
        s0 = memmap.stack_init - 0x20
        first = config.uccs[0]
        return cls(pcs=tuple(pcs), writes=(None, config.cr.lo, s0), sps=(s0, s0 - 2),
                   irqs=(0, 1), op_rets=(None, first.r_min - 2, first.r_max + 2))

    def describe(self) -> dict:
        h = lambda v: None if v is None else f"0x{v:04X}"  # noqa: E731
        return {"size": len(self), "pc": [h(v) for v in self.pcs],
                "write": [h(v) for v in self.writes], "sp": [h(v) for v in self.sps],
                "irq_jmp": list(self.irqs), "op_ret": [h(v) for v in self.op_rets]}


def enumerate_traces(alphabet: ReducedAlphabet, depth: int):
    """Every sequence in alphabet^depth once, in lexicographic order of symbol index."""
    if depth < 1:
        return
    yield from itertools.product(alphabet.symbols, repeat=depth)


def index_block(n_symbols: int, depth: int, start: int, stop: int) -> np.ndarray:
    """Symbol indices of sequences ``start..stop-1`` in enumeration order, shape (n, depth)."""
    ids = np.arange(start, stop, dtype=np.int64)
    out = np.empty((len(ids), depth), np.int64)
    for j in range(depth - 1, -1, -1):
        out[:, j] = ids % n_symbols
        ids //= n_symbols
    return out


# ---------------------------------------------------------------- batch pipeline

def monitor_columns(config: UccConfig, table: dict, idx: np.ndarray,
                    memmap: MemoryMap = DEFAULT_MEMMAP,
                    mutations: Mutation = Mutation.NONE) -> dict[str, np.ndarray]:
    """Run the FSMs over each row of ``idx`` and return monitor-extended columns."""
    batch, length = idx.shape
    k = len(config.uccs)
    cols = {name: table[name][idx] for name in ("pc", "d_addr", "w_en", "sp", "irq_jmp", "op_ret")}
    reset = np.empty((batch, length), np.int64)
    ret_exp = np.empty((k, batch, length), np.int64)
    bp = np.empty((k, batch, length), np.int64)
    regs = fsm.Registers.initial(k, batch, bp=memmap.stack_init)
    bounds = [(u.r_min, u.r_max) for u in config.uccs]
    cr = (config.cr.lo, config.cr.hi)
    for t in range(length):
        sig = fsm.Signals(*(cols[n][:, t] for n in ("pc", "d_addr", "w_en", "sp", "irq_jmp",
                                                    "op_ret")))
        res = fsm.transition(regs, sig, bounds, cr, mutations)
        regs = res.regs
        reset[:, t] = res.reset
        ret_exp[:, :, t] = regs.ret_exp
        bp[:, :, t] = regs.bp
    cols["reset"] = reset
    for i in range(k):
        cols[f"ret_exp{i}"] = ret_exp[i]
        cols[f"bp{i}"] = bp[i]
    return cols


@dataclass
class Witness:
    spec: str
    step: int
    trace: list[Symbol]

    def to_dict(self) -> dict:
        return {"spec": self.spec, "step": self.step, "trace": [s.to_dict() for s in self.trace]}


@dataclass
class CheckReport:
    mode: str
    traces_examined: int
    length: int
    spec_ids: list[str]
    violation_counts: dict[str, int]
    violations: list[Witness]
    elapsed: float = 0.0
    seed: int | None = None
    alphabet: dict | None = None
    mutations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(self.violation_counts.values())

    @property
    def violated_specs(self) -> list[str]:
        return [s for s in self.spec_ids if self.violation_counts.get(s)]

    def to_json(self) -> str:
        return json.dumps({
            "mode": self.mode,
            "seed": None if self.seed is None else f"0x{self.seed:X}",
            "length": self.length,
            "traces_examined": self.traces_examined,
            "elapsed_s": round(self.elapsed, 3),
            "mutations": self.mutations,
            "alphabet": self.alphabet,
            "specs": {s: {"holds": not self.violation_counts.get(s),
                          "violations": self.violation_counts.get(s, 0)} for s in self.spec_ids},
            "witnesses": [w.to_dict() for w in self.violations],
        }, indent=2)

    def summary(self) -> str:
        head = f"{self.mode}: {self.traces_examined} traces of length {self.length}"
        if self.ok:
            return f"{head}, no violations ({self.elapsed:.1f}s)"
        bad = ", ".join(f"{s}x{self.violation_counts[s]}" for s in self.violated_specs)
        return f"{head}, violations: {bad} ({self.elapsed:.1f}s)"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("UCCA_SIM_THREADS", "1")))
    except ValueError:
        return 1


class _Campaign:
    def __init__(self, config, alphabet, memmap, mutations):
        self.config = require_valid(config, memmap)
        self.alphabet = alphabet
        self.memmap = memmap
        self.mutations = mutations
        self.specs = builtin_specs(len(config.uccs))
        self.regions = Regions.from_config(config)

    def check_block(self, idx: np.ndarray):
        cols = monitor_columns(self.config, self.alphabet.table, idx, self.memmap, self.mutations)
        counts, found = {}, {}
        for spec in self.specs:
            w = witnesses(spec.formula, cols, self.regions)
            bad = np.flatnonzero(w >= 0)
            counts[spec.id] = len(bad)
            found[spec.id] = [(idx[b], int(w[b])) for b in bad[:WITNESSES_PER_SPEC]]
        return counts, found

    def run(self, blocks, mode: str, length: int, seed=None) -> CheckReport:
        start = time.perf_counter()
        counts = {s.id: 0 for s in self.specs}
        kept: list[Witness] = []
        per_spec = {s.id: 0 for s in self.specs}
        examined = 0

        def merge(idx, result):
            nonlocal examined
            examined += len(idx)
            c, found = result
            for sid, n in c.items():
                counts[sid] += n
                for row, step in found[sid]:
                    if per_spec[sid] < WITNESSES_PER_SPEC:
                        per_spec[sid] += 1
                        kept.append(Witness(sid, step, [self.alphabet.symbols[i] for i in row]))

        threads = _threads()
        if threads == 1:
            for idx in blocks:
                merge(idx, self.check_block(idx))
        else:
            # Results are merged in block order, so output does not depend on scheduling.
            with ThreadPoolExecutor(threads) as pool:
                pending = []
                for idx in blocks:
                    pending.append((idx, pool.submit(self.check_block, idx)))
                    if len(pending) >= 2 * threads:
                        i, fut = pending.pop(0)
                        merge(i, fut.result())
                for i, fut in pending:
                    merge(i, fut.result())
        return CheckReport(mode, examined, length, [s.id for s in self.specs], counts, kept,
                           time.perf_counter() - start, seed, self.alphabet.describe(),
                           [MUTATION_NAMES[m] for m in fsm.MUTATIONS if m & self.mutations])


def exhaustive_check(config: UccConfig, alphabet: ReducedAlphabet | None = None, depth: int = 3,
                     *, memmap: MemoryMap = DEFAULT_MEMMAP, mutations: Mutation = Mutation.NONE,
                     max_traces: int = 50_000_000, chunk: int = DEFAULT_CHUNK) -> CheckReport:
    alphabet = alphabet or ReducedAlphabet.default(config, memmap)
    total = len(alphabet) ** depth if depth >= 1 else 0
    if total > max_traces:
        raise BudgetExceeded(total, max_traces)
    campaign = _Campaign(config, alphabet, memmap, mutations)
    blocks = (index_block(len(alphabet), depth, a, min(a + chunk, total))
              for a in range(0, total, chunk))
    return campaign.run(blocks, "exhaustive", depth)


def random_check(config: UccConfig, alphabet: ReducedAlphabet | None = None,
                 n_traces: int = 10_000, length: int = 20, seed: int = 0, *,
                 memmap: MemoryMap = DEFAULT_MEMMAP, mutations: Mutation = Mutation.NONE,
                 chunk: int = DEFAULT_CHUNK) -> CheckReport:
    if length < 2:
        raise ValueError("length must be at least 2")
    alphabet = alphabet or ReducedAlphabet.default(config, memmap)
    campaign = _Campaign(config, alphabet, memmap, mutations)
    rng = np.random.default_rng(seed)
    blocks = (rng.integers(0, len(alphabet), size=(min(chunk, n_traces - a), length))
              for a in range(0, n_traces, chunk))
    return campaign.run(blocks, "random", length, seed)


def replay_witness(config: UccConfig, witness: Witness, memmap: MemoryMap = DEFAULT_MEMMAP,
                   mutations: Mutation = Mutation.NONE) -> tuple[Trace, object]:
    """Re-run a stored witness through the single-step monitor and re-check its spec."""
    mon = MonitorState.initial(config, memmap, mutations)
    snaps, mons, verdicts = [], [], []
    for i, sym in enumerate(witness.trace):
        snap = sym.snapshot(i)
        mon, verdict = observe(mon, snap)
        snaps.append(snap)
        mons.append(mon)
        verdicts.append(verdict)
    trace = Trace.from_run(snaps, mons, Regions.from_config(config), verdicts)
    spec = next(s for s in builtin_specs(len(config.uccs)) if s.id == witness.spec)
    return trace, check(spec.formula, trace)
