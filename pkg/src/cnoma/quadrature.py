"""Globally adaptive 7/15-point Gauss-Kronrod quadrature on finite intervals.

Integrands must accept and return numpy arrays; each panel is evaluated with a
single vectorised call.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ToleranceNotReached, ValidationError

# Kronrod abscissae on [0, 1) in decreasing order; odd indices are the Gauss nodes.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps
_MAX_PANELS = 20000


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 50

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValidationError("rel_tol", f"must be > 0, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise ValidationError("abs_tol", f"must be >= 0, got {self.abs_tol}")
        if not self.max_depth >= 1:
            raise ValidationError("max_depth", f"must be >= 1, got {self.max_depth}")

    def with_abs_tol(self, abs_tol: float) -> "QuadratureSpec":
        return QuadratureSpec(self.rel_tol, abs_tol, self.max_depth)


DEFAULT_SPEC = QuadratureSpec()


def _panel(f, a, b):
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fx = np.asarray(f(centre + half * NODES), dtype=float)
    if fx.shape != NODES.shape:
        fx = np.broadcast_to(fx, NODES.shape)
    if not np.all(np.isfinite(fx)):
        raise ValueError(f"integrand is not finite on [{a!r}, {b!r}]")
    k = half * float(KRONROD_WEIGHTS @ fx)
    g = half * float(GAUSS_WEIGHTS @ fx)
    kabs = abs(half) * float(KRONROD_WEIGHTS @ np.abs(fx))
    return k, abs(k - g), kabs


def integrate(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC, points=()):
    """Integrate ``f`` over ``[a, b]``; returns ``(value, error_estimate)``.

    ``points`` are optional interior breakpoints used as initial panel edges;
    pass them where ``f`` varies on a scale much shorter than ``b - a``.

    Panels are bisected, worst first, until the summed error estimate is at
    most ``max(abs_tol, rel_tol * |value|)``. The target never goes below the
    round-off level of the sum. Raises :class:`ToleranceNotReached`, with the
    best value attached, when only panels at ``max_depth`` remain to be split.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration limits must be finite (truncate improper integrals)")
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0, 0.0

    edges = [a, *sorted({float(p) for p in points if a < p < b}), b]
    heap = []
    for lo, hi in zip(edges, edges[1:]):
        k, err, kabs = _panel(f, lo, hi)
        heap.append((-err, lo, hi, k, kabs, 0))
    heapq.heapify(heap)
    total = math.fsum(p[3] for p in heap)
    total_err = math.fsum(-p[0] for p in heap)
    total_abs = math.fsum(p[4] for p in heap)
    frozen_err = 0.0
    frozen_val = 0.0
    panels = len(heap)
    while True:
        target = max(spec.abs_tol, spec.rel_tol * abs(total), 50.0 * _EPS * total_abs)
        if total_err <= target:
            return total, total_err
        if not heap or panels >= _MAX_PANELS:
            raise ToleranceNotReached(total, total_err, target)
        neg_err, lo, hi, val, vabs, depth = heapq.heappop(heap)
        if depth >= spec.max_depth:
            frozen_err += -neg_err
            frozen_val += val
            continue
        mid = 0.5 * (lo + hi)
        k1, e1, a1 = _panel(f, lo, mid)
        k2, e2, a2 = _panel(f, mid, hi)
        total += k1 + k2 - val
        total_err += e1 + e2 + neg_err
        total_abs += a1 + a2 - vabs
        heapq.heappush(heap, (-e1, lo, mid, k1, a1, depth + 1))
        heapq.heappush(heap, (-e2, mid, hi, k2, a2, depth + 1))
        panels += 1
        if panels % 64 == 0:
            # resum to keep drift from incremental updates out of the estimate
            total = frozen_val + math.fsum(p[3] for p in heap)
            total_err = frozen_err + math.fsum(-p[0] for p in heap)


def scale_knots(a: float, b: float, scale: float, from_end: bool = False, ratio: float = 4.0):
    """Breakpoints ``scale * ratio**k`` away from one end of ``[a, b]``.

    Resolves features of width ``scale`` at ``a`` (or at ``b`` if
    ``from_end``) that a single panel across ``[a, b]`` would step over.
    """
    width = b - a
    if not (scale > 0 and math.isfinite(scale)) or scale >= width:
        return []
    out = []
    x = scale
    while x < width:
        out.append(b - x if from_end else a + x)
        x *= ratio
    return out


def exponential_cutoff(rate: float, abs_tol: float, amplitude: float = 1.0) -> float:
    """Point past which ``amplitude * exp(-rate * x)`` stays below ``abs_tol``."""
    if rate <= 0:
        raise ValueError("rate must be > 0")
    if abs_tol <= 0:
        raise ValueError("abs_tol must be > 0 to truncate")
    return max(0.0, math.log(amplitude / abs_tol) / rate)


def theta_integral(chi: float, c_x: float, c_y: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integral of ``exp(-c_x*u - c_y/(1+u))`` for ``u`` from 0 to ``chi``."""
    return theta_integral_with_error(chi, c_x, c_y, spec)[0]


def theta_integral_with_error(chi, c_x, c_y, spec=DEFAULT_SPEC, shift=0.0):
    """``(value, err)`` of the integral of ``exp(shift - c_x*u - c_y/(1+u))`` over ``[0, chi]``.

    ``shift`` lets callers fold a large prefactor ``exp(shift)`` into the
    integrand, where it cancels against ``c_y/(1+u)`` instead of overflowing.
    """
    if chi < 0 or c_x < 0 or c_y < 0:
        raise ValueError(f"need chi, c_x, c_y >= 0, got {chi}, {c_x}, {c_y}")
    if chi == 0:
        return 0.0, 0.0
    if c_x == 0 and c_y == 0:
        return float(chi) * math.exp(shift), 0.0
    knots = []
    if c_x > 0:
        knots += scale_knots(0.0, chi, 1.0 / c_x)
    if c_y > 0:
        knots += scale_knots(0.0, chi, (1.0 + chi) ** 2 / c_y, from_end=True)
    return integrate(lambda u: np.exp(shift - c_x * u - c_y / (1.0 + u)), 0.0, chi, spec, knots)
