"""High-SNR behaviour: outage floors under constant error variance, decay
asymptotes under SNR-scaled error variance, and empirical slope fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit
from .model import ConstantVariance, DerivedQuantities, PerfectCsi, ScaledVariance
from .quadrature import DEFAULT_SPEC, QuadratureSpec, theta_integral_with_error

DEFAULT_WINDOW = (35.0, 55.0)


def _sigma_c_sq(d: DerivedQuantities) -> float:
    model = d.config.error_model
    if isinstance(model, ConstantVariance):
        return model.sigma_c_sq
    if isinstance(model, PerfectCsi):
        return 0.0
    raise ValueError(f"floors need a constant-variance error model, got {model!r}")


def _eta(d: DerivedQuantities) -> float:
    model = d.config.error_model
    if isinstance(model, ScaledVariance):
        return model.eta
    if isinstance(model, PerfectCsi):
        return 0.0
    raise ValueError(f"decay asymptotes need a scaled-variance error model, got {model!r}")


def floor_ue1_const(d: DerivedQuantities) -> float:
    """Limit of the UE1 outage as all powers grow with the error variance fixed."""
    if d.degenerate:
        return 1.0
    x = (1 + d.lambda_p) * d.chi_m * _sigma_c_sq(d) / d.link_stats[0].hat_sigma_sq
    return x / (1.0 + x)


def floor_ue2_terms(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC):
    """``(mu1, mu2, bracket)`` of the UE2 floor; the floor exponent is ``log(bracket)``.

    ``bracket`` is the high-SNR limit of the relayed-case survival factor,
    obtained from the overall approximation with ``1/rho`` terms dropped.
    """
    sc = _sigma_c_sq(d)
    lam, chi = d.lambda_p, d.chi
    h1, h2, h3 = (s.hat_sigma_sq for s in d.link_stats)
    kx = sc * (1 + lam) / h2
    ky = sc / h3
    mu1 = 1.0 / (1.0 + chi * (1 + lam) * sc / h1)
    mu2 = 1.0 / (1.0 + chi * (1 + lam) * sc / h2)
    integral, _ = theta_integral_with_error(chi, kx, ky * lam, spec, shift=ky * lam / (1.0 + chi))
    bracket = math.exp(-kx * chi) + kx * integral
    return mu1, mu2, bracket


def floor_exponent(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return math.log(floor_ue2_terms(d, spec)[2])


def floor_ue2_const(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Limit of the overall UE2 outage approximation with the error variance fixed."""
    if d.degenerate:
        return 1.0
    mu1, mu2, bracket = floor_ue2_terms(d, spec)
    return min(max(1.0 - mu2 + mu1 * mu2 - mu1 * bracket, 0.0), 1.0)


def asym_ue1_var(d: DerivedQuantities) -> float:
    """First-order UE1 outage when the error variance scales as ``eta/SNR``."""
    if d.degenerate:
        return 1.0
    eta = _eta(d)
    return d.chi_m / d.rho11 * ((1 + d.lambda_p) * eta / d.link_stats[0].hat_sigma_sq + 1.0)


@dataclass(frozen=True)
class AsymptoteInput:
    d: DerivedQuantities
    c3: float
    regime: str = "scaled"

    def __post_init__(self):
        if not self.c3 > 0:
            raise ValueError(f"c3 must be > 0, got {self.c3}")
        if self.regime not in ("scaled", "constant"):
            raise ValueError(f"unknown regime {self.regime!r}")

    @classmethod
    def from_derived(cls, d: DerivedQuantities) -> "AsymptoteInput":
        regime = "constant" if isinstance(d.config.error_model, ConstantVariance) else "scaled"
        return cls(d=d, c3=d.c3, regime=regime)


@dataclass(frozen=True)
class AsymptoteValue:
    value: float
    negative: bool = False


def asym_ue2_var(inp: AsymptoteInput) -> AsymptoteValue:
    """Second-order UE2 asymptote in ``1/rho12`` under SNR-scaled error variance.

    The bracketed factor can be non-positive for some parameter combinations;
    such values are returned unclamped with ``negative`` set.
    """
    d = inp.d
    if d.degenerate:
        return AsymptoteValue(1.0)
    eta = _eta(d)
    lam, chi = d.lambda_p, d.chi
    h2 = d.link_stats[1].hat_sigma_sq
    h3 = d.link_stats[2].hat_sigma_sq
    a = eta * (1 + lam) / (lam * h2) + 1.0
    bracket = a * chi**2 / 2.0 - (lam / inp.c3) * (eta / h3 + 1.0) * math.log1p(chi)
    value = a * bracket / d.rho12**2
    return AsymptoteValue(value, negative=not bracket > 0)


def asym_ue2_leading(d: DerivedQuantities) -> float:
    """Leading ``1/rho^2`` term of the overall UE2 outage approximation.

    Product of first-order SIC-failure and direct-link outages plus the small-
    argument limit of the relayed case. Valid whenever every error-to-estimate
    ratio vanishes like ``1/rho`` (perfect or SNR-scaled CSI).
    """
    if d.degenerate:
        return 1.0
    lam, chi = d.lambda_p, d.chi
    k1 = d.link_stats[0].error_ratio
    k2 = d.link_stats[1].error_ratio
    p_un = chi * (1 + lam) * k1 + chi / d.rho11
    p_direct = chi * (1 + lam) * k2 + chi / d.rho12
    relayed = (lam * math.log1p(chi) - d.gamma_bar2) / (d.rho_xt * d.rho_yt)
    return p_un * p_direct + relayed


def fit_diversity_order(points) -> float:
    """Least-squares slope of ``-log10(outage)`` against ``snr_db / 10``."""
    pts = [(float(s), float(p)) for s, p in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    snr = np.array([s for s, _ in pts])
    p = np.array([q for _, q in pts])
    if np.any(np.diff(snr) <= 0):
        raise ValueError("snr values must be strictly increasing")
    if np.any(~np.isfinite(p)) or np.any(p <= 0):
        raise DegenerateFit("outage values must be positive and finite")
    if np.any(p >= 1):
        raise ValueError("outage values must be below 1")
    y = -np.log10(p)
    if np.ptp(y) == 0:
        raise DegenerateFit("outage values are constant")
    slope, _ = np.polyfit(snr / 10.0, y, 1)
    return float(slope)
