"""Data-oriented energy-efficiency metrics for adaptive transmission over fading channels."""

from dataeff.errors import (
    DegenerateCutoffError,
    DomainError,
    RegimeError,
    ResourceError,
)
from dataeff.fading import FadingModel, reg_lower_gamma
from dataeff.link import LinkParams
from dataeff.metrics import (
    HELD,
    CpaConfig,
    CraConfig,
    eor_cpa,
    eor_cra,
    ior_cpa,
    ior_cra,
    mec_cpa,
    mec_cra,
    mid_cpa,
    mid_cra_multi,
    mid_cra_single,
)
from dataeff.montecarlo import (
    OutageEstimate,
    SimConfig,
    estimate_eor,
    estimate_ior,
    estimate_ior_multiblock,
)

__version__ = "0.1.0"

__all__ = [
    "HELD",
    "CpaConfig",
    "CraConfig",
    "DegenerateCutoffError",
    "DomainError",
    "FadingModel",
    "LinkParams",
    "OutageEstimate",
    "RegimeError",
    "ResourceError",
    "SimConfig",
    "eor_cpa",
    "eor_cra",
    "estimate_eor",
    "estimate_ior",
    "estimate_ior_multiblock",
    "ior_cpa",
    "ior_cra",
    "mec_cpa",
    "mec_cra",
    "mid_cpa",
    "mid_cra_multi",
    "mid_cra_single",
    "reg_lower_gamma",
]
