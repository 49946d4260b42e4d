"""UCC definitions, the configuration region image, and their validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..isa import DEFAULT_MEMMAP, MemoryMap

DEFAULT_CAPACITY = 8
CR_BYTES_PER_UCC = 4


@dataclass(frozen=True)
class UccDefinition:
    r_min: int
    r_max: int

    def contains(self, pc: int) -> bool:
        return self.r_min <= pc <= self.r_max

    def nested_in(self, other: "UccDefinition") -> bool:
        return other.r_min <= self.r_min and self.r_max <= other.r_max

    def disjoint(self, other: "UccDefinition") -> bool:
        return self.r_max < other.r_min or other.r_max < self.r_min


@dataclass(frozen=True)
class UccConfig:
    uccs: tuple[UccDefinition, ...]
    cr_base: int = DEFAULT_MEMMAP.cr_base
    capacity: int = DEFAULT_CAPACITY

    @classmethod
    def of(cls, *pairs: tuple[int, int], cr_base: int = DEFAULT_MEMMAP.cr_base,
           capacity: int = DEFAULT_CAPACITY) -> "UccConfig":
        return cls(tuple(UccDefinition(lo, hi) for lo, hi in pairs), cr_base, capacity)

    @property
    def cr(self) -> "CrImage":
        return CrImage(self.cr_base, self.capacity,
                       tuple((u.r_min, u.r_max) for u in self.uccs))

    def to_json(self) -> str:
        return json.dumps({
            "cr_base": f"0x{self.cr_base:04X}",
            "uccs": [{"min": f"0x{u.r_min:04X}", "max": f"0x{u.r_max:04X}"} for u in self.uccs],
        }, indent=2)

    @classmethod
    def from_dict(cls, data: dict, labels: dict[str, int] | None = None) -> "UccConfig":
        """Parse ``{"cr_base": hex, "uccs": [{"min": hex|label, "max": hex|label}]}``."""
        labels = labels or {}

        def addr(v) -> int:
            if isinstance(v, int):
                return v
            if v in labels:
                return labels[v]
            try:
                return int(v, 0)
            except (TypeError, ValueError):
                raise ConfigError([f"bad-address({v!r})"]) from None

        try:
            uccs = tuple(UccDefinition(addr(u["min"]), addr(u["max"])) for u in data.get("uccs", []))
        except (KeyError, TypeError):
            raise ConfigError(["malformed-config"]) from None
        cr_base = addr(data.get("cr_base", DEFAULT_MEMMAP.cr_base))
        return cls(uccs, cr_base, int(data.get("capacity", DEFAULT_CAPACITY)))

    @classmethod
    def from_json(cls, text: str, labels: dict[str, int] | None = None) -> "UccConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"malformed-config({exc.msg})"]) from None
        return cls.from_dict(data, labels)


@dataclass(frozen=True)
class CrImage:
    """Layout of the protected configuration region: one (r_min, r_max) word pair per slot."""

    base: int
    capacity: int = DEFAULT_CAPACITY
    contents: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    @property
    def lo(self) -> int:
        return self.base

    @property
    def hi(self) -> int:
        return self.base + CR_BYTES_PER_UCC * self.capacity - 1

    def contains(self, addr: int | None) -> bool:
        return addr is not None and self.lo <= addr <= self.hi

    def to_bytes(self) -> bytes:
        out = bytearray(CR_BYTES_PER_UCC * self.capacity)
        for i, (lo, hi) in enumerate(self.contents):
            out[4 * i:4 * i + 4] = lo.to_bytes(2, "little") + hi.to_bytes(2, "little")
        return bytes(out)

    def materialize(self, mem: bytearray) -> None:
        mem[self.lo:self.hi + 1] = self.to_bytes()


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def validate_config(config: UccConfig, memmap: MemoryMap = DEFAULT_MEMMAP) -> list[str]:
    """Return the list of rule violations (empty when the configuration is usable)."""
    errors: list[str] = []
    cr = config.cr
    if not (memmap.in_cr_region(cr.lo) and memmap.in_cr_region(cr.hi)) or cr.base % 2:
        errors.append("cr-misplaced")
    if len(config.uccs) > config.capacity:
        errors.append(f"too-many-uccs({len(config.uccs)})")
    for i, u in enumerate(config.uccs):
        if u.r_min <= 0 <= u.r_max:
            errors.append(f"contains-reset-sentinel({i})")
        if (u.r_min > u.r_max or u.r_min % 2 or u.r_max % 2
                or not memmap.in_program(u.r_min) or not memmap.in_program(u.r_max)):
            errors.append(f"out-of-program({i})")
    for i, a in enumerate(config.uccs):
        for j in range(i + 1, len(config.uccs)):
            b = config.uccs[j]
            if a == b:
                errors.append(f"duplicate({i},{j})")
            elif not (a.disjoint(b) or a.nested_in(b) or b.nested_in(a)):
                errors.append(f"partial-overlap({i},{j})")
    return errors


def require_valid(config: UccConfig, memmap: MemoryMap = DEFAULT_MEMMAP) -> UccConfig:
    errors = validate_config(config, memmap)
    if errors:
        raise ConfigError(errors)
    return config
