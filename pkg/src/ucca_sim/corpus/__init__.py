"""Assembler and the benign/attack scenario catalog."""

from .asm import AsmError, Program, assemble, disassemble, format_instruction, marshal_stub
from .harness import (Expectation, RunOutcome, Scenario, ScenarioResult, StepBudgetExceeded,
                      first_violation, get_scenario, matrix, run_program, run_scenario, scenarios)

__all__ = [
    "AsmError", "Program", "assemble", "disassemble", "format_instruction", "marshal_stub",
    "Expectation", "RunOutcome", "Scenario", "ScenarioResult", "StepBudgetExceeded",
    "first_violation", "get_scenario", "matrix", "run_program", "run_scenario", "scenarios",
]
