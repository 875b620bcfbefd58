"""Outage probabilities of two-user cooperative NOMA with imperfect CSI.

Closed forms, quadrature cross-checks, high-SNR asymptotics and a seeded
Monte-Carlo simulator of the decode-and-forward protocol.
"""

__version__ = "0.1.0"

from .model import (
    ConstantVariance,
    DerivedQuantities,
    PerfectCsi,
    ScaledVariance,
    SystemConfig,
    config_for_power_sweep,
    default_config,
    derive,
    rate_to_threshold,
)
from .quadrature import QuadratureSpec, integrate, theta_integral
from .analytic import (
    OutageResult,
    p_ovr_ue2_approx,
    p_ovr_ue2_exact,
    p_out1_ue2,
    p_out2_ue2_approx,
    p_out2_ue2_exact,
    p_out_ue1,
    p_un_ue1,
)
from .montecarlo import McConfig, McEstimate, Quantity, estimate

__all__ = [
    "ConstantVariance", "DerivedQuantities", "PerfectCsi", "ScaledVariance", "SystemConfig",
    "config_for_power_sweep", "default_config", "derive", "rate_to_threshold",
    "QuadratureSpec", "integrate", "theta_integral",
    "OutageResult", "p_ovr_ue2_approx", "p_ovr_ue2_exact", "p_out1_ue2", "p_out2_ue2_approx",
    "p_out2_ue2_exact", "p_out_ue1", "p_un_ue1",
    "McConfig", "McEstimate", "Quantity", "estimate",
]
