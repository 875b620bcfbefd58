"""Seeded Monte-Carlo simulation of the two-slot cooperative NOMA protocol.

Trials are split into fixed-size chunks. Chunk ``k`` draws from its own
generator keyed on ``(seed, k)``, so estimates do not depend on how many
workers process the chunks or in which order they finish.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import NamedTuple, Union

import numpy as np

from .errors import ValidationError
from .model import DerivedQuantities, SystemConfig, derive

WILSON_MIN_COUNT = 20


@dataclass(frozen=True)
class McConfig:
    trials: int = 1_000_000
    seed: int = 0
    chunk_size: int = 1 << 16
    confidence: float = 0.99

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials", f"must be >= 1, got {self.trials}")
        if self.chunk_size < 1:
            raise ValidationError("chunk_size", f"must be >= 1, got {self.chunk_size}")
        if not 0 < self.confidence < 1:
            raise ValidationError("confidence", f"must be in (0, 1), got {self.confidence}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed", "must fit in 64 unsigned bits")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    ci_lo: float
    ci_hi: float
    trials: int
    seed: int
    hits: int

    def covers(self, value: float, n_se: float) -> bool:
        """Whether ``value`` is within ``n_se`` standard errors of ``p_hat``."""
        return abs(value - self.p_hat) <= n_se * self.std_err


class Quantity(enum.Enum):
    UE1 = "ue1"
    UE2_OVERALL = "ue2"
    UE2_DIRECT = "ue2_direct"
    UE2_CASE2_CONDITIONAL = "ue2_relayed"
    P_UN_UE1 = "un_ue1"


@dataclass(frozen=True)
class CdfX:
    """Event ``X <= x`` for the direct UE2 SINR ``X``."""

    x: float


Which = Union[Quantity, CdfX]


@dataclass
class TrialDraw:
    hat_h1: np.ndarray
    hat_h2: np.ndarray
    hat_h3: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray


class Sinrs(NamedTuple):
    gamma21: np.ndarray
    gamma1: np.ndarray
    gamma2_direct: np.ndarray
    relay_increment: np.ndarray


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _complex_normal(z_re, z_im, var):
    return math.sqrt(var / 2.0) * (z_re + 1j * z_im)


def sample_trial(d: DerivedQuantities, rng: np.random.Generator, n: int = 1) -> TrialDraw:
    """Draw ``n`` independent channel estimates and estimation errors."""
    z = rng.standard_normal((2, 6, n))
    hats = [s.hat_sigma_sq for s in d.link_stats]
    errs = [s.err_sigma_sq for s in d.link_stats]
    return TrialDraw(
        *(_complex_normal(z[0, i], z[1, i], v) for i, v in enumerate(hats)),
        *(_complex_normal(z[0, 3 + i], z[1, 3 + i], v) for i, v in enumerate(errs)),
    )


def trial_sinrs(draw: TrialDraw, config: SystemConfig) -> Sinrs:
    p1, p2, p3 = config.powers
    n0 = config.n0
    a1, a2, a3 = (np.abs(h) ** 2 for h in (draw.hat_h1, draw.hat_h2, draw.hat_h3))
    b1, b2, b3 = (np.abs(e) ** 2 for e in (draw.e1, draw.e2, draw.e3))
    interf1 = b1 * (p1 + p2) + n0
    return Sinrs(
        gamma21=a1 * p2 / (a1 * p1 + interf1),
        gamma1=a1 * p1 / interf1,
        gamma2_direct=a2 * p2 / (a2 * p1 + b2 * (p1 + p2) + n0),
        relay_increment=a3 * p3 / (b3 * p3 + n0),
    )


def trial_outcomes(sinrs: Sinrs, d: DerivedQuantities):
    """``(ue1_outage, ue2_outage)``; UE1 relays only after decoding the far signal."""
    g1, g2 = d.gamma_bar1, d.gamma_bar2
    ue1 = (sinrs.gamma21 < g2) | (sinrs.gamma1 < g1)
    relay = sinrs.gamma21 >= g2
    ue2_sinr = np.where(relay, sinrs.gamma2_direct + sinrs.relay_increment, sinrs.gamma2_direct)
    return ue1, ue2_sinr < g2


def _event_counts(d, sinrs, cdf_points):
    ue1, ue2 = trial_outcomes(sinrs, d)
    g2 = d.gamma_bar2
    counts = Counter({
        Quantity.UE1: int(ue1.sum()),
        Quantity.UE2_OVERALL: int(ue2.sum()),
        Quantity.UE2_DIRECT: int((sinrs.gamma2_direct < g2).sum()),
        Quantity.UE2_CASE2_CONDITIONAL: int(
            (sinrs.gamma2_direct + sinrs.relay_increment < g2).sum()
        ),
        Quantity.P_UN_UE1: int((sinrs.gamma21 < g2).sum()),
    })
    for x in cdf_points:
        counts[CdfX(x)] = int((sinrs.gamma2_direct <= x).sum())
    return counts


def _chunk_sizes(mc: McConfig):
    full, rest = divmod(mc.trials, mc.chunk_size)
    return [mc.chunk_size] * full + ([rest] if rest else [])


def simulate_counts(config: SystemConfig, mc: McConfig, workers: int = 1, cdf_points=()):
    """Event counts over all trials, keyed by :class:`Quantity` or :class:`CdfX`."""
    d = derive(config)
    cdf_points = tuple(float(x) for x in cdf_points)

    def run(chunk):
        k, n = chunk
        rng = chunk_rng(mc.seed, k)
        return _event_counts(d, trial_sinrs(sample_trial(d, rng, n), config), cdf_points)

    chunks = list(enumerate(_chunk_sizes(mc)))
    total = Counter({q: 0 for q in Quantity})
    total.update({CdfX(x): 0 for x in cdf_points})
    if workers <= 1:
        parts = map(run, chunks)
        for part in parts:
            total.update(part)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(run, chunks):
                total.update(part)
    return d, dict(total)


def make_estimate(hits: int, mc: McConfig) -> McEstimate:
    """Frequency estimate with a normal interval, or Wilson's when either count is small."""
    n = mc.trials
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / n)
    z = NormalDist().inv_cdf(0.5 + mc.confidence / 2.0)
    if hits < WILSON_MIN_COUNT or n - hits < WILSON_MIN_COUNT:
        denom = 1.0 + z * z / n
        centre = (p + z * z / (2 * n)) / denom
        half = z / denom * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
        lo, hi = centre - half, centre + half
    else:
        lo, hi = p - z * se, p + z * se
    return McEstimate(
        p_hat=p,
        std_err=se,
        ci_lo=max(0.0, min(lo, p)),
        ci_hi=min(1.0, max(hi, p)),
        trials=n,
        seed=mc.seed,
        hits=hits,
    )


def estimates_from_counts(d: DerivedQuantities, counts: dict, mc: McConfig) -> dict:
    out = {}
    for which, hits in counts.items():
        if which is Quantity.UE2_CASE2_CONDITIONAL and d.degenerate:
            # UE1 can never relay here; the conditional outage is defined as one
            hits = mc.trials
        out[which] = make_estimate(hits, mc)
    return out


def estimate(config: SystemConfig, mc: McConfig, which: Which, workers: int = 1) -> McEstimate:
    """Monte-Carlo estimate of one outage event (or a point of the CDF of ``X``)."""
    cdf_points = (which.x,) if isinstance(which, CdfX) else ()
    d, counts = simulate_counts(config, mc, workers, cdf_points)
    return estimates_from_counts(d, counts, mc)[which]


def sample_direct_sinr(d: DerivedQuantities, n: int, seed: int = 0) -> np.ndarray:
    """``n`` draws of the direct UE2 SINR ``X``."""
    draw = sample_trial(d, chunk_rng(seed, 0), n)
    return trial_sinrs(draw, d.config).gamma2_direct
