import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from conftest import assert_self_consistent
from reactfn.empirical import EmpiricalDistribution, build_histogram
from reactfn.errors import CalibrationError
from reactfn.reaction import (CENTRAL, EMPTY_BIN, LOG_DOMAIN, VALID, HypotheticalNormal, ReactionCurve, ReactionPoint,
                              calibrate_normal, curve_summary, estimate, reaction_curve, reconstruct_density)
from reactfn.synth import GeneratorSpec, ReactionShape, oracle_curve, pushforward_masses


def normal_masses(edges, mu=0.0, sigma=1.0):
    return ndtr((edges[1:] - mu) / sigma) - ndtr((edges[:-1] - mu) / sigma)


@pytest.fixture(scope="module")
def normal_1e6():
    x = np.random.default_rng(20240611).normal(0.0, 0.01, 10**6)
    return x, *estimate(x, 150)


def test_calibrate_on_discretised_standard_normal():
    # bins of width 0.02 with one centred on 0
    edges = np.arange(-400, 401) * 0.02 + 0.01
    d = EmpiricalDistribution.from_masses(edges, normal_masses(edges))
    n = calibrate_normal(d, mu=0.0)
    assert (n.mu_minus, n.mu_plus) == pytest.approx((-0.01, 0.01))
    # 0.02 / (sqrt(2 pi) (Phi(0.01) - Phi(-0.01))), evaluated with mpmath
    assert n.sigma == pytest.approx(1.00001666669444, abs=1e-12)
    assert n.sigma == pytest.approx(1.0, abs=1e-4)


def test_calibrate_uniform():
    u = np.random.default_rng(0).uniform(0, 1, 1000)
    d = EmpiricalDistribution(np.linspace(0, 1, 11), np.full(10, 0.1))
    n = calibrate_normal(d, u)
    assert n.sigma == pytest.approx(0.398942280401433, rel=1e-12)


def test_calibration_identity_holds():
    x = np.random.default_rng(5).normal(size=5000)
    d = build_histogram(x, 150)
    for w in (0, 1, 3):
        n = calibrate_normal(d, x, w)
        assert n.mu_minus <= n.mu <= n.mu_plus
        assert n.sigma == (n.mu_plus - n.mu_minus) / (math.sqrt(2 * math.pi) * n.central_mass)
        assert n.central_bin - w >= 0


def test_calibration_window_clamped():
    d = EmpiricalDistribution.from_masses(np.linspace(0, 1, 6), [0.5, 0.2, 0.1, 0.1, 0.1])
    n = calibrate_normal(d, mu=0.05, window=2)
    assert n.clamped
    assert n.mu_minus == 0.0 and n.mu_plus == pytest.approx(0.6)
    assert n.central_mass == pytest.approx(0.8)


def test_calibration_without_mass_fails():
    d = EmpiricalDistribution.from_masses(np.linspace(0, 1, 6), [0.5, 0.0, 0.0, 0.0, 0.5])
    with pytest.raises(CalibrationError):
        calibrate_normal(d, mu=0.5)


def test_median_on_edge_goes_to_lower_bin():
    d = EmpiricalDistribution.from_masses(np.linspace(-1, 1, 5), [0.1, 0.4, 0.4, 0.1])
    n = calibrate_normal(d, mu=0.0)
    assert n.central_bin == 1
    assert (n.mu_minus, n.mu_plus) == (-0.5, 0.0)


def test_statuses():
    d = EmpiricalDistribution.from_masses(np.linspace(-2, 2, 9), [0, 0.02, 0.1, 0.38, 0.38, 0.1, 0.02, 0])
    n = HypotheticalNormal(0.1, 1.0, 0.0, 0.5, 0.38)
    c = reaction_curve(d, n)
    st_ = c.statuses
    assert st_[0] == st_[-1] == EMPTY_BIN
    assert st_[4] == CENTRAL and c.points[4].value == 0.0
    # 0.38 / 0.5 * sqrt(2 pi) > 1
    assert st_[3] == LOG_DOMAIN
    assert st_[1] == VALID
    assert sum(s == CENTRAL for s in st_) == 1
    for p in c.points:
        assert p.has_value == (p.status in (VALID, CENTRAL))


def test_value_at_two_sigma_on_exact_normal():
    # width 0.1 sigma centred at 2 sigma; the midpoint-density value (mpmath) is 1.000312386
    edges = np.arange(-60, 61) * 0.1 - 0.05
    d = EmpiricalDistribution.from_masses(edges, normal_masses(edges))
    n = HypotheticalNormal(0.0, 1.0, -0.05, 0.05, float(d.masses[60]))
    c = reaction_curve(d, n)
    p = c.nearest_valid(2.0)
    assert p.r_mid == pytest.approx(2.0)
    assert p.value == pytest.approx(1.00031238613540, rel=1e-9)
    assert p.value == pytest.approx(1.0, rel=0.01)
    assert_self_consistent(c)


def test_linear_vee_matches_jacobian_aware_oracle():
    # The histogram inversion sees the pushforward density phi(z) / (sigma g'(r)).
    # Solving the per-bin relation with that midpoint density gives a closed form the
    # estimator must reproduce up to within-bin averaging.
    for a in (0.5, 1.0, 2.0):
        spec = GeneratorSpec(0.0, 0.01, ReactionShape.linear_vee(a))
        edges = np.linspace(-0.06, 0.06, 151)
        d = EmpiricalDistribution.from_masses(edges, pushforward_masses(spec, edges))
        n = calibrate_normal(d, mu=0.0)
        c = reaction_curve(d, n)
        A = math.sqrt(2 * math.pi) * n.sigma * spec.density(d.mids)
        expected = np.abs(d.mids) / (n.sigma * np.sqrt(-2 * np.log(A)))
        sel = (c.ratios > 0.01) & (c.ratios < 0.9) & ~np.isnan(c.values)
        assert sel.sum() > 100
        np.testing.assert_allclose(c.values[sel], expected[sel], atol=5e-3)
        assert_self_consistent(c)


@pytest.mark.xfail(strict=True, reason="estimator omits the Jacobian of g; see acceptance criterion 2")
def test_linear_vee_matches_generating_reaction():
    spec = GeneratorSpec(0.0, 0.01, ReactionShape.linear_vee(1.0))
    edges = np.linspace(-0.06, 0.06, 151)
    d = EmpiricalDistribution.from_masses(edges, pushforward_masses(spec, edges))
    c = reaction_curve(d, calibrate_normal(d, mu=0.0))
    sel = (c.ratios > 0.01) & (c.ratios < 0.9) & ~np.isnan(c.values)
    np.testing.assert_allclose(c.values[sel], oracle_curve(spec, edges)[sel], atol=0.05)


def test_reconstruct_density():
    x = np.random.default_rng(3).standard_t(4, 20000)
    d, n, c = estimate(x, 100)
    model = reconstruct_density(c)
    assert {m.status for m in model} <= {VALID, CENTRAL}
    assert len(model) == c.status_counts()[VALID] + 1
    for m in model:
        if m.status == VALID:
            assert m.model_mass == pytest.approx(m.delta_f, rel=1e-9)
    assert_self_consistent(c)


def test_reconstruct_central_on_exact_normal():
    edges = np.arange(-400, 401) * 0.02 + 0.01
    d = EmpiricalDistribution.from_masses(edges, normal_masses(edges))
    c = reaction_curve(d, calibrate_normal(d, mu=0.0))
    central = next(m for m in reconstruct_density(c) if m.status == CENTRAL)
    exact = ndtr(0.01) - ndtr(-0.01)
    # calibrated sigma makes the central model mass equal the bin mass exactly
    assert central.model_mass == pytest.approx(exact, rel=1e-12)
    # against the true sigma = 1 the gap is the O(width^2) discretisation error
    assert 0.02 / math.sqrt(2 * math.pi) == pytest.approx(exact, rel=2e-5)


def test_identity_recovery(normal_1e6):
    x, d, n, c = normal_1e6
    assert 0.0097 <= n.sigma <= 0.0103
    band = [p for p in c.valid() if 0.5 * n.sigma < abs(p.r_mid - n.mu) < 2.5 * n.sigma]
    assert len(band) > 50
    assert all(abs(p.value - 1) <= 0.1 for p in band)
    assert_self_consistent(c)


def test_non_negative(normal_1e6):
    *_, c = normal_1e6
    assert all(p.value >= 0 for p in c.points if p.has_value)


def test_mirror_symmetry():
    x = np.random.default_rng(9).normal(0.001, 0.01, 200_000)
    _, n1, c1 = estimate(x)
    _, n2, c2 = estimate(-x)
    assert n2.mu == pytest.approx(-n1.mu, abs=1e-15)
    p1 = list(c1.points)
    p2 = list(reversed(c2.points))
    width = p1[0].r_hi - p1[0].r_lo
    diffs = []
    for a, b in zip(p1, p2):
        assert a.r_mid == pytest.approx(-b.r_mid, abs=1e-9 * width + 1e-15)
        if a.status == b.status == VALID:
            diffs.append(abs(a.value - b.value))
    assert diffs and max(diffs) < 1e-6
    assert_self_consistent(c1)
    assert_self_consistent(c2)


@given(st.floats(0.1, 50), st.floats(-1, 1))
@settings(max_examples=15, deadline=None)
def test_affine_equivariance(scale, shift):
    x = np.random.default_rng(4).normal(0, 0.01, 20_000)
    _, n1, c1 = estimate(x)
    _, n2, c2 = estimate(scale * x + shift)
    assert n2.sigma == pytest.approx(scale * n1.sigma, rel=1e-6)
    assert n2.mu == pytest.approx(scale * n1.mu + shift, rel=1e-9, abs=1e-9 * scale)
    assert c2.r_mid == pytest.approx(scale * c1.r_mid + shift, rel=1e-9, abs=1e-9 * scale)
    both = [(a, b) for a, b in zip(c1.points, c2.points) if a.status == b.status == VALID]
    assert len(both) > 0.9 * c1.status_counts()[VALID]
    for a, b in both:
        assert b.value == pytest.approx(a.value, rel=1e-5)


def _flat_curve(values, mu=0.0, sigma=1.0):
    pts = []
    n = len(values)
    for i, v in enumerate(values):
        lo = -n / 2 + i
        if lo < 0 <= lo + 1:
            pts.append(ReactionPoint(lo, lo + 1, 0.3, CENTRAL, 0.0, 1.0))
        else:
            pts.append(ReactionPoint(lo, lo + 1, 0.01, VALID, v, 0.5))
    return ReactionCurve(HypotheticalNormal(mu, sigma, -0.5, 0.5, 0.3), tuple(pts))


def test_summary_flat_curve():
    s = curve_summary(_flat_curve([1.0] * 11))
    assert s.crossings_pos == () and s.crossings_neg == ()
    assert s.asymmetry == {1: 0.0, 2: 0.0, 3: 0.0}


def test_summary_interpolates_crossing():
    vals = [2.0, 1.5, 0.5, 0.8, 0.9, 0, 0.9, 0.8, 0.5, 1.5, 2.0]
    # unit bins from -5.5; index 5 is the central bin
    c = _flat_curve(vals)
    s = curve_summary(c)
    r = [p.r_mid for p in c.points]
    assert len(s.crossings_pos) == 1 and len(s.crossings_neg) == 1
    assert s.crossings_pos[0] == pytest.approx(r[8] + 0.5 * (r[9] - r[8]))
    assert s.crossings_neg[0] == pytest.approx(-s.crossings_pos[0])


def test_summary_not_computable():
    s = curve_summary(_flat_curve([1.0, 1.0, 0.0, 1.0, 1.0]))
    assert s.crossings_pos is None and s.crossings_neg is None
    assert s.asymmetry[2] is None


def _asym_curve(a_pos, a_neg):
    spec = GeneratorSpec(0.0, 0.01, ReactionShape.asymmetric(a_pos, a_neg))
    edges = np.linspace(float(spec.g(-0.03)), float(spec.g(0.03)), 151)
    d = EmpiricalDistribution.from_masses(edges, pushforward_masses(spec, edges))
    return spec, d, reaction_curve(d, calibrate_normal(d, mu=0.0))


@pytest.mark.parametrize("a_pos,a_neg", [(1.0, 0.5), (0.5, 0.0), (1.2, 1.0), (2.0, 0.2)])
def test_summary_asymmetry_matches_jacobian_aware_prediction(a_pos, a_neg):
    spec, d, c = _asym_curve(a_pos, a_neg)
    s = curve_summary(c)
    sigma = c.normal.sigma
    up = c.nearest_valid(2 * sigma)
    down = c.nearest_valid(-2 * sigma)
    A = math.sqrt(2 * math.pi) * sigma * spec.density(np.array([up.r_mid, down.r_mid]))
    pred = np.abs([up.r_mid, down.r_mid]) / (sigma * np.sqrt(-2 * np.log(A)))
    assert s.asymmetry[2] == pytest.approx(pred[0] - pred[1], abs=5e-3)
    assert_self_consistent(c)


def test_summary_positive_asymmetry_for_steeper_positive_side():
    *_, c = _asym_curve(0.5, 0.0)
    assert curve_summary(c).asymmetry[2] > 0


@pytest.mark.xfail(strict=True, reason="sign at equal observed distance depends on the Jacobian of g, "
                                       "not only on which side is steeper; see acceptance criterion 2")
def test_summary_positive_asymmetry_any_steeper_positive_side():
    *_, c = _asym_curve(1.0, 0.5)
    assert curve_summary(c).asymmetry[2] > 0
