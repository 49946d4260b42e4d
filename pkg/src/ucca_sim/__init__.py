"""Instruction-level MCU simulator with a UCC compartment monitor, a finite-trace
LTL checker for the monitor's specifications, and an attack scenario corpus."""

__version__ = "0.1.0"
