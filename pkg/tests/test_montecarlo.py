import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from cnoma import analytic as an
from cnoma.errors import InfeasibleErrorVariance, ValidationError
from cnoma.model import ConstantVariance, PerfectCsi, ScaledVariance, SystemConfig, default_config, derive
from cnoma.montecarlo import (
    CdfX,
    McConfig,
    McEstimate,
    Quantity,
    Sinrs,
    TrialDraw,
    chunk_rng,
    estimate,
    make_estimate,
    sample_direct_sinr,
    sample_trial,
    simulate_counts,
    trial_outcomes,
    trial_sinrs,
)


def draw_of(a1=0.0, a2=0.0, a3=0.0, b1=0.0, b2=0.0, b3=0.0):
    # magnitudes as real parts: |h|^2 = value
    arr = lambda v: np.array([math.sqrt(v) + 0j])
    return TrialDraw(arr(a1), arr(a2), arr(a3), arr(b1), arr(b2), arr(b3))


def ks_critical(n, level=0.99):
    return stats.kstwo.ppf(level, n)


# --- SINRs and outcomes ------------------------------------------------------------


def test_pinned_far_user_sinr():
    cfg = SystemConfig(p1=1.0, p2=5.0, p3=1.0)
    s = trial_sinrs(draw_of(a1=1.0, b1=0.1), cfg)
    assert s.gamma21[0] == pytest.approx(1.923077, abs=1e-6)
    assert s.gamma21[0] == pytest.approx(5 / 2.6, rel=1e-14)
    assert s.gamma1[0] == pytest.approx(1 / 1.6, rel=1e-14)


def test_far_user_sinr_limit():
    cfg = SystemConfig(p1=1.0, p2=5.0, p3=1.0)
    s = trial_sinrs(draw_of(a1=1e15), cfg)
    assert s.gamma21[0] == pytest.approx(5.0, rel=1e-12) and s.gamma21[0] < 5.0


def test_zero_channels_give_zero_sinrs():
    cfg = SystemConfig(p1=1.0, p2=5.0, p3=2.0)
    s = trial_sinrs(draw_of(b1=1.0, b2=1.0, b3=1.0), cfg)
    assert all(v[0] == 0.0 for v in s)


def _sinrs(g21, g1, g2d, inc):
    a = lambda v: np.array([float(v)])
    return Sinrs(a(g21), a(g1), a(g2d), a(inc))


def test_outcomes_all_good():
    d = derive(default_config(20))
    ue1, ue2 = trial_outcomes(_sinrs(1e9, 1e9, 0.0, 10.0), d)
    assert not ue1[0] and not ue2[0]


def test_outcomes_direct_link_alone():
    d = derive(default_config(20))
    g2 = d.gamma_bar2
    ue1, ue2 = trial_outcomes(_sinrs(0.5 * g2, 1e9, 1.2 * g2, 10.0), d)
    assert ue1[0] and not ue2[0]


def test_outcomes_relay_inactive_drops_increment():
    d = derive(default_config(20))
    g2 = d.gamma_bar2
    _, ue2 = trial_outcomes(_sinrs(0.5 * g2, 1e9, 0.4 * g2, 10 * g2), d)
    assert ue2[0]


def test_outcomes_combining_crosses_threshold():
    d = derive(default_config(20))
    g2 = d.gamma_bar2
    ue1, ue2 = trial_outcomes(_sinrs(2 * g2, 1e9, 0.4 * g2, 0.7 * g2), d)
    assert not ue1[0] and not ue2[0]


def test_outcomes_near_user_own_signal():
    d = derive(default_config(20))
    ue1, _ = trial_outcomes(_sinrs(1e9, 0.5 * d.gamma_bar1, 0.0, 0.0), d)
    assert ue1[0]


# --- sampling ----------------------------------------------------------------------


def test_perfect_csi_errors_are_zero():
    d = derive(default_config(20))
    draw = sample_trial(d, chunk_rng(1, 0), 1000)
    for e in (draw.e1, draw.e2, draw.e3):
        assert np.all(e == 0)


def test_estimate_power_mean():
    d = derive(default_config(30, ScaledVariance(5.0)))
    n = 1_000_000
    draw = sample_trial(d, chunk_rng(7, 0), n)
    for h, s in zip((draw.hat_h1, draw.e1), (d.link_stats[0].hat_sigma_sq, d.link_stats[0].err_sigma_sq)):
        sq = np.abs(h) ** 2
        assert abs(sq.mean() - s) < 4 * s / math.sqrt(n)


def test_components_have_half_variance():
    d = derive(default_config(30, ConstantVariance(1e-2)))
    h = sample_trial(d, chunk_rng(3, 0), 200_000).hat_h3
    v = d.link_stats[2].hat_sigma_sq / 2
    assert np.var(h.real) == pytest.approx(v, rel=0.02)
    assert np.var(h.imag) == pytest.approx(v, rel=0.02)
    assert abs(np.corrcoef(h.real, h.imag)[0, 1]) < 0.01


@pytest.mark.parametrize("link", [0, 1, 2])
def test_channel_power_is_exponential(link):
    d = derive(default_config(30, ConstantVariance(1e-2)))
    n = 100_000
    draw = sample_trial(d, chunk_rng(11, 0), n)
    h = (draw.hat_h1, draw.hat_h2, draw.hat_h3)[link]
    res = stats.kstest(np.abs(h) ** 2, stats.expon(scale=d.link_stats[link].hat_sigma_sq).cdf)
    assert res.statistic < ks_critical(n)


@pytest.mark.parametrize("model", [PerfectCsi(), ConstantVariance(1e-2), ScaledVariance(5.0)], ids=str)
def test_direct_sinr_matches_cdf(model):
    d = derive(default_config(30, model))
    n = 100_000
    x = sample_direct_sinr(d, n, seed=5)
    res = stats.kstest(x, lambda t: an.cdf_x(np.asarray(t), d))
    assert res.statistic < ks_critical(n)
    # pointwise on a 20-point grid inside a DKW band at the same level
    grid = np.linspace(0.0, d.lambda_p, 22)[1:-1]
    emp = np.searchsorted(np.sort(x), grid, side="right") / n
    band = math.sqrt(math.log(2 / 0.01) / (2 * n))
    assert np.all(np.abs(emp - an.cdf_x(grid, d)) < band)


def test_far_user_sinr_bounded():
    d = derive(default_config(60, ConstantVariance(1e-3)))
    s = trial_sinrs(sample_trial(d, chunk_rng(0, 0), 100_000), d.config)
    assert np.all(s.gamma21 < d.lambda_p)
    assert all(np.all(np.isfinite(v) & (v >= 0)) for v in s)


# --- estimates ----------------------------------------------------------------------


SMALL = McConfig(trials=200_000, seed=3, chunk_size=10_000)


def test_degenerate_estimates_are_one():
    cfg = SystemConfig(p1=1.0, p2=2.5, p3=1.0, error_model=ConstantVariance(1e-3))
    assert derive(cfg).degenerate
    for q in Quantity:
        if q is Quantity.UE2_DIRECT:
            continue
        for trials in (1, 1000):
            assert estimate(cfg, McConfig(trials=trials), q).p_hat == 1.0, q


def test_perfect_csi_huge_power_never_fails():
    cfg = default_config(150)
    est = estimate(cfg, McConfig(trials=1_000_000), Quantity.UE1)
    assert est.p_hat == 0.0 and est.hits == 0
    assert est.ci_lo == 0.0 and est.ci_hi > 0.0


def test_infeasible_propagates():
    with pytest.raises(InfeasibleErrorVariance):
        estimate(default_config(20, ScaledVariance(5.0)), SMALL, Quantity.UE2_OVERALL)


def test_overall_ue2_interval_overlaps_exact():
    # the nearest feasible power to 20 dB for eta = 5
    cfg = default_config(25, ScaledVariance(5.0))
    mc = McConfig(trials=1_000_000, seed=0, confidence=0.999)
    est = estimate(cfg, mc, Quantity.UE2_OVERALL)
    exact = an.p_ovr_ue2_exact(derive(cfg)).value
    assert est.ci_lo <= exact <= est.ci_hi


def test_determinism_across_workers():
    cfg = default_config(25, ConstantVariance(1e-2))
    _, c1 = simulate_counts(cfg, SMALL, workers=1, cdf_points=(1.0,))
    _, c4 = simulate_counts(cfg, SMALL, workers=4, cdf_points=(1.0,))
    _, c16 = simulate_counts(cfg, SMALL, workers=16, cdf_points=(1.0,))
    assert c1 == c4 == c16
    _, other = simulate_counts(cfg, McConfig(trials=SMALL.trials, seed=4, chunk_size=SMALL.chunk_size))
    assert other[Quantity.UE1] != c1[Quantity.UE1]


def test_partial_last_chunk_counted():
    cfg = default_config(20)
    # the two full chunks are shared, the remainder only adds
    _, full = simulate_counts(cfg, McConfig(trials=20_000, chunk_size=10_000))
    _, more = simulate_counts(cfg, McConfig(trials=25_001, chunk_size=10_000))
    for q in Quantity:
        assert 0 <= more[q] - full[q] <= 5_001


def test_cdf_point_estimator():
    cfg = default_config(25, ScaledVariance(1.0))
    est = estimate(cfg, SMALL, CdfX(1.5))
    assert est.covers(an.cdf_x(1.5, derive(cfg)), 4.0)


def test_case_counts_are_nested():
    cfg = default_config(20)
    _, c = simulate_counts(cfg, SMALL)
    assert c[Quantity.P_UN_UE1] <= c[Quantity.UE1]
    assert c[Quantity.UE2_CASE2_CONDITIONAL] <= c[Quantity.UE2_OVERALL] <= c[Quantity.UE2_DIRECT]


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**7), st.floats(0.0, 1.0), st.floats(0.5, 0.9999))
def test_interval_invariants(n, frac, conf):
    hits = int(frac * n)
    e = make_estimate(hits, McConfig(trials=n, confidence=conf))
    assert 0.0 <= e.ci_lo <= e.p_hat <= e.ci_hi <= 1.0
    assert e.std_err == pytest.approx(math.sqrt(e.p_hat * (1 - e.p_hat) / n), abs=1e-15)


def test_wilson_interval_for_rare_events():
    mc = McConfig(trials=10_000, confidence=0.99)
    e = make_estimate(5, mc)
    z = stats.norm.ppf(0.995)
    p, n = 5e-4, 10_000
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    assert (e.ci_lo, e.ci_hi) == pytest.approx((centre - half, centre + half), rel=1e-12)
    normal = make_estimate(5000, mc)
    assert normal.ci_hi - normal.p_hat == pytest.approx(z * normal.std_err, rel=1e-12)


@pytest.mark.parametrize("kw", [dict(trials=0), dict(chunk_size=0), dict(confidence=1.0), dict(seed=-1)])
def test_mc_config_validation(kw):
    with pytest.raises(ValidationError):
        McConfig(**kw)


def test_covers():
    e = McEstimate(p_hat=0.1, std_err=0.01, ci_lo=0.07, ci_hi=0.13, trials=1000, seed=0, hits=100)
    assert e.covers(0.13, 3.0) and not e.covers(0.14, 3.0)
