"""Software model of the UCC hardware monitor (HW-Mod)."""

from .config import (ConfigError, CrImage, UccConfig, UccDefinition, require_valid,
                     validate_config)
from .fsm import IN, IRQ, MUTATION_NAMES, MUTATIONS, OUT, RESET, RUN, Mutation
from .monitor import (OK, HardwareCost, MonitorState, Verdict, estimate_hardware_cost,
                      observe)

__all__ = [
    "ConfigError", "CrImage", "UccConfig", "UccDefinition", "require_valid", "validate_config",
    "IN", "IRQ", "OUT", "RESET", "RUN", "MUTATIONS", "MUTATION_NAMES", "Mutation",
    "OK", "HardwareCost", "MonitorState", "Verdict", "estimate_hardware_cost", "observe",
]
