"""Finite traces of monitor-extended snapshots, and their line-delimited JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

NONE = -1  # missing address (no data access / no return address)

BASE_FIELDS = ("pc", "sp", "d_addr", "w_en", "irq_jmp", "op_ret", "reset")
_OPTIONAL = ("d_addr", "op_ret")
FORMAT_TAG = "ucca-trace/1"


class TraceError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"malformed-trace{where}: {message}")
        self.line = line


@dataclass(frozen=True)
class Regions:
    """Address ranges that membership atoms may refer to."""

    uccs: tuple[tuple[int, int], ...]
    cr: tuple[int, int]

    @classmethod
    def from_config(cls, config) -> "Regions":
        return cls(tuple((u.r_min, u.r_max) for u in config.uccs), (config.cr.lo, config.cr.hi))

    def bounds(self, name: str) -> tuple[int, int]:
        if name == "CR":
            return self.cr
        index = int(name[3:])
        if index >= len(self.uccs):
            raise KeyError(name)
        return self.uccs[index]


@dataclass(frozen=True)
class Record:
    """One snapshot plus the monitor registers after observing it."""

    step: int
    pc: int
    sp: int
    d_addr: int | None = None
    w_en: int = 0
    irq_jmp: int = 0
    op_ret: int | None = None
    reset: int = 0
    ret_exp: tuple[int | None, ...] = ()
    bp: tuple[int, ...] = ()
    state: tuple[str, ...] = ()

    def value(self, key: str) -> int:
        """Column value with missing addresses encoded as ``NONE``."""
        if key in BASE_FIELDS:
            v = getattr(self, key)
        elif key.startswith("ret_exp"):
            v = self.ret_exp[int(key[7:])]
        elif key.startswith("bp"):
            v = self.bp[int(key[2:])]
        else:
            raise KeyError(key)
        return NONE if v is None else v


@dataclass(frozen=True)
class Trace:
    records: tuple[Record, ...]
    regions: Regions
    verdicts: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.records:
            raise TraceError("trace is empty")
        for i, r in enumerate(self.records):
            if r.step != i:
                raise TraceError(f"step ordinal {r.step} at position {i}, expected {i}")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_ucc(self) -> int:
        return len(self.regions.uccs)

    def columns(self) -> dict[str, np.ndarray]:
        """Every signal as an int64 array of shape (1, length)."""
        keys = list(BASE_FIELDS)
        keys += [f"ret_exp{i}" for i in range(self.n_ucc)] + [f"bp{i}" for i in range(self.n_ucc)]
        return {k: np.array([[r.value(k) for r in self.records]], np.int64) for k in keys}

    @classmethod
    def from_run(cls, snapshots, monitors, regions: Regions, verdicts=()) -> "Trace":
        """Pair each snapshot with the monitor state produced by observing it.

        ``reset`` is taken from the monitor output, not from the snapshot.
        """
        from ..hwmod.fsm import STATE_NAMES

        records = []
        for i, (snap, mon) in enumerate(zip(snapshots, monitors)):
            records.append(Record(i, snap.pc, snap.sp, snap.d_addr, snap.w_en, snap.irq_jmp,
                                  snap.op_ret, int(mon.reset_out), tuple(mon.ret_exp),
                                  tuple(mon.bp), tuple(STATE_NAMES[s] for s in mon.fsm_state)))
        return cls(tuple(records), regions, tuple(str(v) for v in verdicts))

    # ------------------------------------------------------------ JSON lines

    def to_jsonl(self) -> str:
        header = {"format": FORMAT_TAG, "cr": [_hex(a) for a in self.regions.cr],
                  "uccs": [[_hex(lo), _hex(hi)] for lo, hi in self.regions.uccs]}
        lines = [json.dumps(header)]
        for i, r in enumerate(self.records):
            row = {"step": r.step}
            for k in BASE_FIELDS:
                v = getattr(r, k)
                row[k] = v if k in ("w_en", "irq_jmp", "reset") else _hex(v)
            row["uccs"] = [{"state": r.state[j] if r.state else None,
                            "ret_exp": _hex(r.ret_exp[j]), "bp": _hex(r.bp[j])}
                           for j in range(len(r.bp))]
            if self.verdicts:
                row["verdict"] = self.verdicts[i]
            lines.append(json.dumps(row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        lines = [(n, ln) for n, ln in enumerate(text.splitlines(), 1) if ln.strip()]
        if not lines:
            raise TraceError("file is empty")
        n, first = lines[0]
        header = _load(first, n)
        if header.get("format") != FORMAT_TAG:
            raise TraceError(f"expected header with format {FORMAT_TAG!r}", n)
        try:
            regions = Regions(tuple((_addr(lo), _addr(hi)) for lo, hi in header["uccs"]),
                              tuple(_addr(a) for a in header["cr"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceError(f"bad header: {exc}", n) from None
        records, verdicts = [], []
        for n, line in lines[1:]:
            row = _load(line, n)
            try:
                base = {k: (int(row[k]) if k in ("w_en", "irq_jmp", "reset") else _addr(row[k]))
                        for k in BASE_FIELDS}
                uccs = row.get("uccs", [])
                if len(uccs) != len(regions.uccs):
                    raise ValueError(f"{len(uccs)} UCC entries, header declares {len(regions.uccs)}")
                states = tuple(u["state"] for u in uccs)
                records.append(Record(
                    int(row["step"]), **base,
                    ret_exp=tuple(_addr(u["ret_exp"]) for u in uccs),
                    bp=tuple(_addr(u["bp"]) for u in uccs),
                    state=() if any(s is None for s in states) else states))
            except (KeyError, TypeError, ValueError) as exc:
                raise TraceError(str(exc), n) from None
            if "verdict" in row:
                verdicts.append(row["verdict"])
        if not records:
            raise TraceError("no records after header")
        if verdicts and len(verdicts) != len(records):
            raise TraceError("verdict present on some records only")
        return cls(tuple(records), regions, tuple(verdicts))


def _hex(v: int | None) -> str | None:
    return None if v is None else f"0x{v:04X}"


def _addr(v) -> int | None:
    if v is None:
        return None
    if isinstance(v, str):
        out = int(v, 16)
    elif isinstance(v, int) and not isinstance(v, bool):
        out = v
    else:
        raise ValueError(f"bad address {v!r}")
    if not 0 <= out <= 0xFFFF:
        raise ValueError(f"address {v!r} out of range")
    return out


def _load(line: str, n: int) -> dict:
    try:
        row = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceError(exc.msg, n) from None
    if not isinstance(row, dict):
        raise TraceError("record is not an object", n)
    return row
