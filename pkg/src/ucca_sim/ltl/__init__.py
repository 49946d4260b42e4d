"""Finite-trace temporal logic over monitor snapshots."""

from .oracle import brute_oracle
from .semantics import CheckResult, check, eval_formula, evaluate, witnesses
from .specs import Spec, builtin_specs, format_catalog, select_specs
from .syntax import LtlError, format_formula, parse_formula
from .trace import Record, Regions, Trace, TraceError

__all__ = [
    "brute_oracle", "CheckResult", "check", "eval_formula", "evaluate", "witnesses",
    "Spec", "builtin_specs", "format_catalog", "select_specs",
    "LtlError", "format_formula", "parse_formula",
    "Record", "Regions", "Trace", "TraceError",
]
