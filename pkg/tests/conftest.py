import math

import numpy as np
import pytest
from hypothesis import strategies as st

from cnoma.model import (
    ConstantVariance,
    PerfectCsi,
    ScaledVariance,
    SystemConfig,
    default_config,
    derive,
)

REFERENCE_MODELS = [
    PerfectCsi(),
    ScaledVariance(1.0),
    ScaledVariance(5.0),
    ScaledVariance(20.0),
    ConstantVariance(1e-3),
    ConstantVariance(3.3e-3),
    ConstantVariance(1e-2),
]


def reference_grid(pts):
    """Feasible (model, pt_db, DerivedQuantities) triples of the reference scenario."""
    out = []
    for model in REFERENCE_MODELS:
        for pt in pts:
            try:
                out.append((model, pt, derive(default_config(pt, model))))
            except ValueError:
                continue
    return out


_fraction = st.one_of(st.just(0.0), st.floats(1e-6, 0.95))


@st.composite
def system_configs(draw, error_models=("perfect", "constant", "scaled"), nondegenerate=True):
    """Feasible configurations over wide power and variance ranges."""
    p1 = draw(st.floats(0.01, 2e4))
    lam = draw(st.floats(1.05, 50.0))
    p3 = draw(st.floats(0.01, 1e6))
    s2 = draw(st.floats(0.01, 9.0))
    s1 = draw(st.floats(s2 * 1.01, 10.0))
    s3 = draw(st.floats(0.01, 10.0))
    n0 = draw(st.floats(0.1, 10.0))
    g2_max = lam * 0.95 if nondegenerate else 2 * lam
    g2 = draw(st.one_of(st.just(0.0), st.floats(1e-3, g2_max)))
    g1 = draw(st.one_of(st.just(0.0), st.floats(1e-3, 20.0)))
    kind = draw(st.sampled_from(error_models))
    powers = (p1, lam * p1, p3)
    sig = (s1, s2, s3)
    if kind == "perfect":
        model = PerfectCsi()
    elif kind == "constant":
        model = ConstantVariance(draw(_fraction) * min(sig))
    else:
        eta_max = min(s * p * s / n0 for p, s in zip(powers, sig))
        model = ScaledVariance(draw(_fraction) * eta_max)
    return SystemConfig(
        p1=p1, p2=lam * p1, p3=p3, n0=n0, sigma1_sq=s1, sigma2_sq=s2, sigma3_sq=s3,
        error_model=model, gamma_bar1=g1, gamma_bar2=g2,
    )


def random_operating_config(rng: np.random.Generator) -> SystemConfig:
    """Moderate random operating points where outages are neither ~0 nor ~1."""
    while True:
        s2 = rng.uniform(0.05, 0.5)
        s1 = rng.uniform(s2 * 1.2, 1.5)
        s3 = rng.uniform(0.1, 1.5)
        r1 = rng.uniform(0.3, 1.5)
        r2 = rng.uniform(0.2, 1.0)
        g2 = 2 ** (2 * r2) - 1
        lam = rng.uniform(g2 + 0.5, g2 + 8.0)
        pt = 10 ** (rng.uniform(15, 40) / 10)
        p1 = pt / (1 + lam)
        p3 = pt * 10 ** rng.uniform(-1.0, 0.0)
        kind = rng.integers(3)
        sig = (s1, s2, s3)
        powers = (p1, lam * p1, p3)
        if kind == 0:
            model = PerfectCsi()
        elif kind == 1:
            model = ConstantVariance(rng.uniform(0.0, 0.3) * min(sig))
        else:
            eta_max = min(s * p * s for p, s in zip(powers, sig))
            model = ScaledVariance(min(rng.uniform(0.1, 20.0), 0.5 * eta_max))
        cfg = SystemConfig(
            p1=p1, p2=lam * p1, p3=p3, sigma1_sq=s1, sigma2_sq=s2, sigma3_sq=s3,
            error_model=model, rate1=r1, rate2=r2,
        )
        d = derive(cfg)
        if not d.degenerate and math.isfinite(d.chi):
            return cfg


@pytest.fixture
def ref_derived():
    """Reference scenario at 20 dB with perfect CSI."""
    return derive(default_config(20.0))


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
