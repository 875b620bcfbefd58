"""System parameters, imperfect-CSI error models and derived shorthand quantities.

Every analytic, asymptotic and simulated quantity in the package is a function
of a :class:`DerivedQuantities`, built once from a :class:`SystemConfig` by
:func:`derive`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import InfeasibleErrorVariance, ValidationError

#: dB offset between the total base-station power and the relay power.
RELAY_OFFSET_DB = 5.0


@dataclass(frozen=True)
class PerfectCsi:
    """Receivers know every channel exactly."""

    kind = "perfect"

    @property
    def parameter(self) -> float:
        return 0.0

    def error_variances(self, powers, sigma_sq, n0):
        return (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ConstantVariance:
    """Every link has the same estimation-error variance ``sigma_c_sq``."""

    sigma_c_sq: float
    kind = "constant"

    def __post_init__(self):
        if not (self.sigma_c_sq >= 0.0 and math.isfinite(self.sigma_c_sq)):
            raise ValidationError("sigma_c_sq", f"must be finite and >= 0, got {self.sigma_c_sq}")

    @property
    def parameter(self) -> float:
        return self.sigma_c_sq

    def error_variances(self, powers, sigma_sq, n0):
        return (self.sigma_c_sq,) * 3


@dataclass(frozen=True)
class ScaledVariance:
    """Error variance inversely proportional to the received SNR of each link.

    Link ``i`` uses ``eta * n0 / (P_i * sigma_i^2)`` with ``P = (p1, p2, p3)``.
    """

    eta: float
    kind = "scaled"

    def __post_init__(self):
        if not (self.eta >= 0.0 and math.isfinite(self.eta)):
            raise ValidationError("eta", f"must be finite and >= 0, got {self.eta}")

    @property
    def parameter(self) -> float:
        return self.eta

    def error_variances(self, powers, sigma_sq, n0):
        return tuple(self.eta * n0 / (p * s) for p, s in zip(powers, sigma_sq))


ErrorModel = Union[PerfectCsi, ConstantVariance, ScaledVariance]


def describe_error_model(model: ErrorModel) -> str:
    if isinstance(model, PerfectCsi):
        return "perfect"
    if isinstance(model, ConstantVariance):
        return f"constant(sigma_c_sq={model.sigma_c_sq:g})"
    return f"scaled(eta={model.eta:g})"


def rate_to_threshold(rate: float) -> float:
    """SINR threshold for a target rate under two equal-length time slots."""
    if rate < 0:
        raise ValidationError("rate", f"must be >= 0, got {rate}")
    return 2.0 ** (2.0 * rate) - 1.0


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters of the two-user cooperative NOMA downlink.

    Powers are linear. ``gamma_bar1``/``gamma_bar2``, when given, override the
    thresholds that would otherwise follow from ``rate1``/``rate2``.
    """

    p1: float
    p2: float
    p3: float
    n0: float = 1.0
    sigma1_sq: float = 0.36
    sigma2_sq: float = 0.16
    sigma3_sq: float = 0.64
    error_model: ErrorModel = field(default_factory=PerfectCsi)
    rate1: float = 1.5
    rate2: float = 1.0
    gamma_bar1: Optional[float] = None
    gamma_bar2: Optional[float] = None

    def __post_init__(self):
        for name in ("p1", "p2", "p3", "n0", "sigma1_sq", "sigma2_sq", "sigma3_sq"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(name, f"must be finite and > 0, got {v}")
        if not self.p2 > self.p1:
            raise ValidationError(
                "p2", f"NOMA power ordering requires p1 < p2, got p1={self.p1}, p2={self.p2}"
            )
        if not self.sigma1_sq > self.sigma2_sq:
            raise ValidationError(
                "sigma1_sq",
                f"near user must have the stronger channel, got sigma1_sq={self.sigma1_sq}, "
                f"sigma2_sq={self.sigma2_sq}",
            )
        for name in ("rate1", "rate2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValidationError(name, f"must be finite and >= 0, got {v}")
        for name in ("gamma_bar1", "gamma_bar2"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v >= 0):
                raise ValidationError(name, f"must be finite and >= 0, got {v}")

    @property
    def powers(self):
        return (self.p1, self.p2, self.p3)

    @property
    def sigma_sq(self):
        return (self.sigma1_sq, self.sigma2_sq, self.sigma3_sq)

    @property
    def thresholds(self):
        g1 = self.gamma_bar1 if self.gamma_bar1 is not None else rate_to_threshold(self.rate1)
        g2 = self.gamma_bar2 if self.gamma_bar2 is not None else rate_to_threshold(self.rate2)
        return g1, g2


@dataclass(frozen=True)
class LinkStats:
    hat_sigma_sq: float
    err_sigma_sq: float

    @property
    def error_ratio(self) -> float:
        """Error-to-estimate variance ratio of the link."""
        return self.err_sigma_sq / self.hat_sigma_sq


@dataclass(frozen=True)
class DerivedQuantities:
    """Shorthand symbols shared by the closed forms.

    When ``degenerate`` is set (power ratio not above the UE2 threshold) the
    threshold-dependent fields ``chi``, ``chi_m`` and ``beta1`` are infinite and
    every outage probability is one.
    """

    config: SystemConfig
    link_stats: tuple
    lambda_p: float
    gamma_bar1: float
    gamma_bar2: float
    chi: float
    chi_m: float
    beta1: float
    rho11: float
    rho12: float
    rho3: float
    i_xt: float
    i_yt: float
    rho_xt: float
    rho_yt: float
    mu1: float
    mu2: float
    degenerate: bool

    @property
    def c3(self) -> float:
        """Relay-link to direct-link SNR ratio."""
        return self.rho3 / self.rho12


def _mu(chi, lambda_p, stats: LinkStats):
    if stats.err_sigma_sq == 0.0:
        return 1.0
    return 1.0 / (1.0 + chi * (1.0 + lambda_p) * stats.error_ratio)


def derive(config: SystemConfig) -> DerivedQuantities:
    """Resolve error variances and compute every derived quantity of ``config``.

    Raises :class:`InfeasibleErrorVariance` if a link's error variance is not
    strictly below its channel variance.
    """
    p1, p2, p3 = config.powers
    n0 = config.n0
    errs = config.error_model.error_variances(config.powers, config.sigma_sq, n0)
    stats = []
    for i, (s, e) in enumerate(zip(config.sigma_sq, errs), start=1):
        if not e < s:
            raise InfeasibleErrorVariance(i, e, s)
        stats.append(LinkStats(hat_sigma_sq=s - e, err_sigma_sq=e))
    l1, l2, l3 = stats

    lambda_p = p2 / p1
    g1, g2 = config.thresholds
    degenerate = not lambda_p > g2
    if degenerate:
        chi = chi_m = beta1 = math.inf
    else:
        chi = g2 / (lambda_p - g2)
        chi_m = max(chi, g1)
        beta1 = max(g2 / (p2 - p1 * g2), g1 / p1)

    i_xt = l2.err_sigma_sq * (p1 + p2) + n0
    i_yt = l3.err_sigma_sq * p3 + n0
    return DerivedQuantities(
        config=config,
        link_stats=tuple(stats),
        lambda_p=lambda_p,
        gamma_bar1=g1,
        gamma_bar2=g2,
        chi=chi,
        chi_m=chi_m,
        beta1=beta1,
        rho11=p1 * l1.hat_sigma_sq / n0,
        rho12=p1 * l2.hat_sigma_sq / n0,
        rho3=p3 * l3.hat_sigma_sq / n0,
        i_xt=i_xt,
        i_yt=i_yt,
        rho_xt=p1 * l2.hat_sigma_sq / i_xt,
        rho_yt=p3 * l3.hat_sigma_sq / i_yt,
        mu1=_mu(chi, lambda_p, l1),
        mu2=_mu(chi, lambda_p, l2),
        degenerate=degenerate,
    )


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def config_for_power_sweep(
    base: SystemConfig, pt_db: float, relay_offset_db: float = RELAY_OFFSET_DB
) -> SystemConfig:
    """Place ``base`` at total BS power ``pt_db`` (dB relative to the noise power).

    The power ratio ``p2/p1`` of ``base`` is kept; the relay transmits
    ``relay_offset_db`` below the BS total.
    """
    if not math.isfinite(pt_db):
        raise ValidationError("pt_db", f"must be finite, got {pt_db}")
    lambda_p = base.p2 / base.p1
    pt = db_to_linear(pt_db) * base.n0
    p1 = pt / (1.0 + lambda_p)
    return replace(
        base,
        p1=p1,
        p2=lambda_p * p1,
        p3=db_to_linear(pt_db - relay_offset_db) * base.n0,
    )


def default_config(
    pt_db: float = 20.0, error_model: ErrorModel = PerfectCsi(), lambda_p: float = 5.0
) -> SystemConfig:
    """Reference operating point: near/far/inter-user variances 0.36/0.16/0.64,
    unit noise, ``p2/p1 = 5``, rates 1.5 and 1 bit/s/Hz."""
    base = SystemConfig(p1=1.0, p2=lambda_p, p3=1.0, error_model=error_model)
    return config_for_power_sweep(base, pt_db)
