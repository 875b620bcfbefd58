"""Closed-form outage probabilities and the distributions they are built from.

Notation follows :class:`cnoma.model.DerivedQuantities`. ``X`` is the direct
BS-to-UE2 SINR, ``Y`` the relay-to-UE2 SINR; the tilded variants replace each
random error power by its mean. All probabilities are returned as
:class:`OutageResult` and are exactly one in the degenerate regime.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import DerivedQuantities
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate, scale_knots, theta_integral_with_error

_EPS = float(np.finfo(float).eps)
CLAMP_SLACK = 1e-12


class Formula(enum.Enum):
    UE1_OUTAGE = "ue1_outage"
    UE2_DIRECT = "ue2_direct"
    UE2_RELAYED_EXACT = "ue2_relayed_exact"
    UE2_RELAYED_COMPOSITION = "ue2_relayed_composition"
    UE2_RELAYED_APPROX = "ue2_relayed_approx"
    UE2_RELAYED_APPROX_COMPOSITION = "ue2_relayed_approx_composition"
    UE2_OVERALL_APPROX = "ue2_overall_approx"
    UE2_OVERALL_EXACT = "ue2_overall_exact"
    UE1_SIC_FAILURE = "ue1_sic_failure"


@dataclass(frozen=True)
class OutageResult:
    value: float
    formula: Formula
    degenerate: bool = False
    error_estimate: float = 0.0

    def __float__(self):
        return self.value


def _clamp(raw, slack=0.0):
    tol = CLAMP_SLACK + slack
    assert -tol <= raw <= 1.0 + tol, f"probability {raw!r} outside [0, 1] by more than {tol:g}"
    return min(max(raw, 0.0), 1.0)


def _result(raw, formula, slack=0.0):
    return OutageResult(_clamp(raw, slack), formula, False, slack)


def _degenerate(formula):
    return OutageResult(1.0, formula, True)


def one_minus_ratio_exp(b, t):
    """``1 - exp(-t) / (1 + b)`` without cancellation for small ``b`` and ``t``."""
    return (b - np.expm1(-t)) / (1.0 + b)


# --- outage probabilities in closed form --------------------------------------


def p_out_ue1(d: DerivedQuantities) -> OutageResult:
    """UE1 outage: failing either SIC stage at the near user."""
    if d.degenerate:
        return _degenerate(Formula.UE1_OUTAGE)
    k1 = d.link_stats[0].error_ratio
    raw = one_minus_ratio_exp(d.chi_m * (1 + d.lambda_p) * k1, d.chi_m / d.rho11)
    return _result(float(raw), Formula.UE1_OUTAGE)


def p_out1_ue2(d: DerivedQuantities) -> OutageResult:
    """UE2 outage when only the direct link is available."""
    if d.degenerate:
        return _degenerate(Formula.UE2_DIRECT)
    k2 = d.link_stats[1].error_ratio
    raw = one_minus_ratio_exp(d.chi * (1 + d.lambda_p) * k2, d.chi / d.rho12)
    return _result(float(raw), Formula.UE2_DIRECT)


def p_un_ue1(d: DerivedQuantities) -> OutageResult:
    """Probability that UE1 fails to decode the far user's signal."""
    if d.degenerate:
        return _degenerate(Formula.UE1_SIC_FAILURE)
    k1 = d.link_stats[0].error_ratio
    raw = one_minus_ratio_exp(d.chi * (1 + d.lambda_p) * k1, d.chi / d.rho11)
    return _result(float(raw), Formula.UE1_SIC_FAILURE)


# --- distributions of the UE2 SINR components ---------------------------------


def _nonneg(v, name):
    arr = np.asarray(v, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError(f"{name} must be >= 0")
    return arr


def _scalar_or_array(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def cdf_x(x, d: DerivedQuantities):
    """CDF of the direct UE2 SINR with a random error power."""
    xa = _nonneg(x, "x")
    lam = d.lambda_p
    k2 = d.link_stats[1].error_ratio
    inside = xa < lam
    xs = np.where(inside, xa, 0.0)
    r = xs / (lam - xs)
    out = np.where(inside, one_minus_ratio_exp(r * (1 + lam) * k2, r / d.rho12), 1.0)
    return _scalar_or_array(out, x)


def survival_x(x, d: DerivedQuantities):
    """``1 - cdf_x`` evaluated directly."""
    xa = _nonneg(x, "x")
    lam = d.lambda_p
    k2 = d.link_stats[1].error_ratio
    inside = xa < lam
    xs = np.where(inside, xa, 0.0)
    r = xs / (lam - xs)
    out = np.where(inside, np.exp(-r / d.rho12) / (1.0 + r * (1 + lam) * k2), 0.0)
    return _scalar_or_array(out, x)


def pdf_y(y, d: DerivedQuantities):
    """Density of the relay-link SINR with a random error power."""
    ya = _nonneg(y, "y")
    k3 = d.link_stats[2].error_ratio
    q = 1.0 + k3 * ya
    out = (1.0 / (d.rho3 * q) + k3 / q**2) * np.exp(-ya / d.rho3)
    return _scalar_or_array(out, y)


def cdf_y(y, d: DerivedQuantities):
    ya = _nonneg(y, "y")
    k3 = d.link_stats[2].error_ratio
    out = one_minus_ratio_exp(k3 * ya, ya / d.rho3)
    return _scalar_or_array(out, y)


def cdf_x_tilde(x, d: DerivedQuantities):
    """CDF of the direct UE2 SINR with the error power replaced by its mean."""
    xa = _nonneg(x, "x")
    lam = d.lambda_p
    inside = xa < lam
    xs = np.where(inside, xa, 0.0)
    out = np.where(inside, -np.expm1(-xs / ((lam - xs) * d.rho_xt)), 1.0)
    return _scalar_or_array(out, x)


def pdf_y_tilde(y, d: DerivedQuantities):
    """Density of the relay-link SINR with the error power replaced by its mean."""
    ya = _nonneg(y, "y")
    c = 1.0 / d.rho_yt
    out = c * np.exp(-c * ya)
    return _scalar_or_array(out, y)


# --- relayed (case 2) outage of UE2 -------------------------------------------


def _refined_spec(spec, abs_target):
    return QuadratureSpec(rel_tol=_EPS, abs_tol=abs_target, max_depth=spec.max_depth)


def _relay_knots(d, rho_y, rho_x):
    """Breakpoints on ``[0, gamma_bar2]`` for the relay density near 0 and the
    direct CDF factor near ``gamma_bar2``."""
    g2 = d.gamma_bar2
    k3 = d.link_stats[2].error_ratio
    knots = scale_knots(0.0, g2, rho_y) + scale_knots(0.0, g2, d.lambda_p * rho_x, from_end=True)
    if k3 > 0:
        knots += scale_knots(0.0, g2, 1.0 / k3)
    return knots


def _relayed_kernel(d):
    lam, g2 = d.lambda_p, d.gamma_bar2
    k2 = d.link_stats[1].error_ratio
    k3 = d.link_stats[2].error_ratio

    def kernel(y):
        q = 1.0 + k3 * y
        r = (g2 - y) / (lam - g2 + y)
        dens = 1.0 / (d.rho3 * q) + k3 / q**2
        return dens / (1.0 + r * (1 + lam) * k2) * np.exp(-r / d.rho12 - y / d.rho3)

    return kernel


def p_out2_ue2_exact(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC) -> OutageResult:
    """Relayed UE2 outage ``P{X + Y < gamma_bar2}`` via the closed kernel.

    The result is the relay CDF at the threshold minus a kernel integral, so
    the integral's absolute tolerance is tightened until it is ``rel_tol``
    relative to the outage itself.
    """
    if d.degenerate:
        return _degenerate(Formula.UE2_RELAYED_EXACT)
    g2 = d.gamma_bar2
    if g2 == 0:
        return _result(0.0, Formula.UE2_RELAYED_EXACT)
    head = float(cdf_y(g2, d))
    kernel = _relayed_kernel(d)
    knots = _relay_knots(d, d.rho3, d.rho12)
    tail, err = integrate(kernel, 0.0, g2, spec, knots)
    raw = head - tail
    need = spec.rel_tol * abs(raw)
    if err > need:
        tail, err = integrate(kernel, 0.0, g2, _refined_spec(spec, need), knots)
        raw = head - tail
    return _result(raw, Formula.UE2_RELAYED_EXACT, err)


def p_out2_ue2_composition(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC) -> OutageResult:
    """Relayed UE2 outage as the convolution of the relay density with the direct CDF."""
    if d.degenerate:
        return _degenerate(Formula.UE2_RELAYED_COMPOSITION)
    g2 = d.gamma_bar2
    val, err = integrate(
        lambda y: pdf_y(y, d) * cdf_x(g2 - y, d), 0.0, g2, spec, _relay_knots(d, d.rho3, d.rho12)
    )
    return _result(val, Formula.UE2_RELAYED_COMPOSITION, err)


def _theta_args(d):
    c_x = 1.0 / d.rho_xt
    c = 1.0 / d.rho_yt
    return c_x, c, c * d.lambda_p


def _with_theta(d, spec, amp, shift, assemble):
    """Evaluate ``assemble(t)`` where ``t = amp * exp(shift) * theta``.

    The shift goes inside the integrand so a huge ``exp(shift)`` never forms on
    its own; the integral error is tightened until it is small next to the result.
    """
    c_x, _, c_y = _theta_args(d)
    t, err = theta_integral_with_error(d.chi, c_x, c_y, spec, shift)
    raw = assemble(amp * t)
    need = spec.rel_tol * abs(raw)
    if amp * err > need and amp > 0:
        t, err = theta_integral_with_error(d.chi, c_x, c_y, _refined_spec(spec, need / amp), shift)
        raw = assemble(amp * t)
    return raw, amp * err


def p_out2_ue2_approx(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC) -> OutageResult:
    """Approximate relayed UE2 outage with mean error powers."""
    if d.degenerate:
        return _degenerate(Formula.UE2_RELAYED_APPROX)
    c_x, c, _ = _theta_args(d)
    head = -math.expm1(-c_x * d.chi)
    raw, err = _with_theta(d, spec, c_x, c * (d.lambda_p - d.gamma_bar2), lambda t: head - t)
    return _result(raw, Formula.UE2_RELAYED_APPROX, err)


def p_out2_ue2_approx_composition(
    d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC
) -> OutageResult:
    if d.degenerate:
        return _degenerate(Formula.UE2_RELAYED_APPROX_COMPOSITION)
    g2 = d.gamma_bar2
    val, err = integrate(
        lambda y: pdf_y_tilde(y, d) * cdf_x_tilde(g2 - y, d), 0.0, g2, spec,
        _relay_knots(d, d.rho_yt, d.rho_xt),
    )
    return _result(val, Formula.UE2_RELAYED_APPROX_COMPOSITION, err)


# --- overall UE2 outage --------------------------------------------------------


def p_ovr_ue2_approx(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC) -> OutageResult:
    """Overall UE2 outage with the mean-error approximation of the relayed case,
    in fully expanded form."""
    if d.degenerate:
        return _degenerate(Formula.UE2_OVERALL_APPROX)
    chi, mu1, mu2 = d.chi, d.mu1, d.mu2
    a11 = chi / d.rho11
    a12 = chi / d.rho12
    base = (
        1.0
        - mu2 * math.exp(-a12)
        + mu1 * mu2 * math.exp(-a11 - a12)
        - mu1 * math.exp(-a11 - chi / d.rho_xt)
    )
    shift = (d.lambda_p - d.gamma_bar2) / d.rho_yt - a11
    raw, err = _with_theta(d, spec, mu1 / d.rho_xt, shift, lambda t: base - t)
    return _result(raw, Formula.UE2_OVERALL_APPROX, err)


def combine_overall(p_un: float, p_direct: float, p_relayed: float) -> float:
    """UE2 outage given SIC-failure, direct-only and relayed outage probabilities."""
    return p_un * p_direct + (1.0 - p_un) * p_relayed


def p_ovr_ue2_exact(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC) -> OutageResult:
    """Overall UE2 outage using the exact relayed-case probability."""
    if d.degenerate:
        return _degenerate(Formula.UE2_OVERALL_EXACT)
    relayed = p_out2_ue2_exact(d, spec)
    raw = combine_overall(p_un_ue1(d).value, p_out1_ue2(d).value, relayed.value)
    return _result(raw, Formula.UE2_OVERALL_EXACT, relayed.error_estimate)


def all_outages(d: DerivedQuantities, spec: QuadratureSpec = DEFAULT_SPEC) -> dict:
    """Every closed-form quantity at one operating point, keyed by name."""
    return {
        "p_ue1": p_out_ue1(d),
        "p_un_ue1": p_un_ue1(d),
        "p_ue2_direct": p_out1_ue2(d),
        "p_ue2_relayed_exact": p_out2_ue2_exact(d, spec),
        "p_ue2_relayed_approx": p_out2_ue2_approx(d, spec),
        "p_ue2_ovr_exact": p_ovr_ue2_exact(d, spec),
        "p_ue2_ovr_approx": p_ovr_ue2_approx(d, spec),
    }
