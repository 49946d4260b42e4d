"""Scenario model and the lock-step runner (emulator + monitor)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fnmatch import fnmatch
from importlib import resources

from ..hwmod import MonitorState, UccConfig, Verdict, observe, require_valid
from ..isa import DEFAULT_MEMMAP, MachineState, MemoryMap, load_program, perform_reset, step
from ..ltl import CheckResult, Regions, Trace, builtin_specs, check
from .asm import Program, assemble


class StepBudgetExceeded(RuntimeError):
    def __init__(self, max_steps: int):
        super().__init__(f"step-budget-exceeded: no completion within {max_steps} steps")
        self.max_steps = max_steps


@dataclass(frozen=True)
class Expectation:
    """Either ``completes`` or a reset whose causes include ``cause`` (e.g. ``ret-integrity(0)``)."""

    cause: str | None = None

    @property
    def completes(self) -> bool:
        return self.cause is None

    def __str__(self) -> str:
        return "completes" if self.completes else f"reset-at {self.cause}"

    @classmethod
    def parse(cls, value) -> "Expectation":
        if value == "completes":
            return cls()
        if isinstance(value, dict) and "reset" in value:
            module = value["reset"]
            return cls(module if module == "cr-integrity" else f"{module}({value.get('ucc', 0)})")
        raise ValueError(f"bad expectation {value!r}")


@dataclass
class Scenario:
    name: str
    source: str
    config: dict                       # UCC bounds may name labels of the source
    schedule: list[tuple[int, int]] = field(default_factory=list)
    expected: Expectation = Expectation()
    max_steps: int = 1000
    description: str = ""

    @property
    def is_attack(self) -> bool:
        return not self.expected.completes

    def build(self, memmap: MemoryMap = DEFAULT_MEMMAP) -> tuple[Program, UccConfig]:
        program = assemble(self.source, memmap)
        config = require_valid(UccConfig.from_dict(self.config, program.labels), memmap)
        return program, config

    @classmethod
    def from_manifest(cls, manifest: dict, source: str) -> "Scenario":
        return cls(
            name=manifest["name"],
            source=source,
            config=manifest["config"],
            schedule=[(int(s), int(i)) for s, i in manifest.get("schedule", [])],
            expected=Expectation.parse(manifest.get("expected", "completes")),
            max_steps=int(manifest.get("max_steps", 1000)),
            description=manifest.get("description", ""),
        )


@dataclass
class RunOutcome:
    """Raw lock-step run: everything the monitor saw and the machine that resulted."""

    snapshots: list
    monitors: list
    verdicts: list[Verdict]
    state: MachineState
    resets: list[int]                  # trace positions where the monitor asserted reset
    regions: Regions

    @property
    def trace(self) -> Trace:
        return Trace.from_run(self.snapshots, self.monitors, self.regions, self.verdicts)

    @property
    def first_reset(self) -> int | None:
        return self.resets[0] if self.resets else None


def run_program(image: bytes, config: UccConfig, schedule=(), *, max_steps: int = 1000,
                memmap: MemoryMap = DEFAULT_MEMMAP, mode: str = "single-shot",
                max_resets: int = 3, enforce: bool = True) -> RunOutcome:
    """Execute ``image`` under the monitor.

    ``schedule`` maps machine step numbers to interrupt numbers. On a reset
    verdict the violating step's effects are discarded and the reset routine
    runs; ``single-shot`` then stops, ``continuous`` keeps going until halt,
    ``max_resets`` or the step budget. With ``enforce=False`` the monitor
    only observes, which is how violation points are located independently.
    """
    if mode not in ("single-shot", "continuous"):
        raise ValueError(f"unknown mode {mode!r}")
    state = load_program(image, memmap)
    config.cr.materialize(state.mem)
    mon = MonitorState.initial(config, memmap)
    irqs = dict(schedule)
    snaps, mons, verdicts, resets = [], [], [], []

    def record(snap, m, v):
        snaps.append(snap)
        mons.append(m)
        verdicts.append(v)

    while not state.halted:
        if state.steps >= max_steps:
            raise StepBudgetExceeded(max_steps)
        nxt, snap = step(state, irqs.get(state.steps))
        mon, verdict = observe(mon, snap)
        record(snap, mon, verdict)
        if verdict.reset and enforce:
            resets.append(len(snaps) - 1)
            state, sentinel = perform_reset(state)
            mon, v2 = observe(mon, sentinel)
            record(sentinel, mon, v2)
            if mode == "single-shot" or len(resets) >= max_resets:
                break
            continue
        state = nxt
    return RunOutcome(snaps, mons, verdicts, state, resets, Regions.from_config(config))


@dataclass
class ScenarioResult:
    scenario: Scenario
    outcome: RunOutcome
    spec_results: dict[str, CheckResult]

    @property
    def verdict(self) -> Verdict:
        i = self.outcome.first_reset
        return self.outcome.verdicts[i] if i is not None else Verdict(False)

    @property
    def actual(self) -> str:
        return "completes" if self.verdict.ok else str(self.verdict)

    @property
    def matched(self) -> bool:
        exp = self.scenario.expected
        if exp.completes:
            return self.verdict.ok and self.outcome.state.halted
        return self.verdict.reset and exp.cause in self.verdict.causes

    @property
    def specs_hold(self) -> bool:
        return all(r.holds for r in self.spec_results.values())

    def row(self) -> dict:
        return {"name": self.scenario.name, "expected": str(self.scenario.expected),
                "actual": self.actual, "pass": self.matched and self.specs_hold,
                "steps": len(self.outcome.snapshots), "reset_at": self.outcome.first_reset,
                "specs_hold": self.specs_hold}


def run_scenario(s: Scenario, memmap: MemoryMap = DEFAULT_MEMMAP,
                 mode: str = "single-shot") -> ScenarioResult:
    program, config = s.build(memmap)
    outcome = run_program(program.image, config, s.schedule, max_steps=s.max_steps,
                          memmap=memmap, mode=mode)
    trace = outcome.trace
    results = {spec.id: check(spec.formula, trace) for spec in builtin_specs(len(config.uccs))}
    return ScenarioResult(s, outcome, results)


def first_violation(s: Scenario, memmap: MemoryMap = DEFAULT_MEMMAP) -> int | None:
    """Position of the first snapshot that breaks a property when nothing enforces them.

    The program runs with the monitor observing but never resetting; the
    reset column is then forced to 0 and the properties that fire on a
    single step (CR writes, stack writes, exits) locate the violation.
    """
    program, config = s.build(memmap)
    try:
        outcome = run_program(program.image, config, s.schedule, max_steps=s.max_steps,
                              memmap=memmap, enforce=False)
    except Exception:  # the unprotected flow may crash the machine later; keep what ran
        return None
    trace = outcome.trace
    quiet = Trace(tuple(replace(r, reset=0) for r in trace.records), trace.regions)
    hits = []
    for spec in builtin_specs(len(config.uccs)):
        if spec.eq not in (1, 6, 12, 13):
            continue
        res = check(spec.formula, quiet)
        if not res.holds:
            # exit properties are judged on the last in-UCC step; the violation is the next one
            hits.append(res.witness + (1 if spec.eq in (6, 13) else 0))
    return min(hits) if hits else None


# ------------------------------------------------------------------ catalog

def scenarios(pattern: str = "*") -> list[Scenario]:
    """Shipped scenarios whose names match ``pattern`` (shell-style), sorted by name."""
    root = resources.files(__package__) / "scenarios"
    out = []
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".json"):
            continue
        manifest = json.loads(entry.read_text())
        if not fnmatch(manifest["name"], pattern):
            continue
        source = (root / manifest.get("source", entry.name[:-5] + ".s")).read_text()
        out.append(Scenario.from_manifest(manifest, source))
    return out


def get_scenario(name: str) -> Scenario:
    for s in scenarios(name):
        if s.name == name:
            return s
    raise KeyError(name)


def matrix(results: list[ScenarioResult]) -> str:
    return json.dumps([r.row() for r in results], indent=2)
