"""Cycle-level simulator for storage-region-stack scope enforcement on an RV32 subset."""
from srsim.engine import (
    Delegation, EngineConfig, EngineFault, FaultKind, RegionEntry, SRSEngine,
)
from srsim.image import Image, Symbol
from srsim.kernels import BACKEND

__all__ = [
    "BACKEND", "Delegation", "EngineConfig", "EngineFault", "FaultKind", "Image",
    "RegionEntry", "SRSEngine", "Symbol",
]
__version__ = "0.1.0"
