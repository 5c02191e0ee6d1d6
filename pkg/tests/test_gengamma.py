import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats
from hypothesis import given, settings, strategies as st

from gasqueue.gengamma import (
    GenGammaParams,
    fisher_alpha,
    log_pdf,
    mean,
    sample,
    score_alpha,
    variance,
)

# shapes spanning the fitted eight-model range plus harder corners
SHAPE_GRID = [(1.0, 1.0), (1.15, 0.90), (1.08, 0.93), (1.0, 0.9), (1.2, 1.0),
              (0.5, 0.7), (2.0, 1.5)]


def test_parameter_validation():
    with pytest.raises(ValueError):
        GenGammaParams(alpha=0.0, psi=-1.0, phi=1.0)
    with pytest.raises(ValueError):
        GenGammaParams(alpha=0.0, psi=1.0, phi=0.0)
    with pytest.raises(ValueError):
        GenGammaParams(alpha=math.nan, psi=1.0, phi=1.0)


def test_family_classification():
    assert GenGammaParams(0.0, 1.0, 1.0).family == "exponential"
    assert GenGammaParams(0.2, 1.0, 0.9).family == "weibull"
    assert GenGammaParams(0.2, 1.3, 1.0).family == "gamma"
    assert GenGammaParams(0.2, 1.3, 0.9).family == "generalized_gamma"


def test_log_pdf_exponential_case():
    p = GenGammaParams(alpha=0.0, psi=1.0, phi=1.0)
    assert log_pdf(1.0, p) == pytest.approx(-1.0)
    assert log_pdf(2.0, p) == pytest.approx(-2.0)


def test_log_pdf_exponential_collapse_exact():
    # psi = phi = 1 must reduce to -alpha - y * exp(-alpha)
    p = GenGammaParams(alpha=0.4, psi=1.0, phi=1.0)
    y = np.array([0.1, 1.0, 3.0, 20.0])
    np.testing.assert_allclose(log_pdf(y, p), -p.alpha - y * math.exp(-p.alpha),
                               rtol=1e-12)


def test_log_pdf_against_scipy():
    # independent parametrization: scipy's gengamma(a=psi, c=phi, scale=e^alpha)
    for alpha in (-0.5, -0.06, 0.0, 1.2):
        for psi, phi in SHAPE_GRID:
            p = GenGammaParams(alpha, psi, phi)
            ref = scipy.stats.gengamma(a=psi, c=phi, scale=math.exp(alpha))
            y = np.array([0.05, 0.5, 1.5, 4.0])
            np.testing.assert_allclose(log_pdf(y, p), ref.logpdf(y), rtol=1e-10)


def test_log_pdf_overflow_guard():
    p = GenGammaParams(alpha=-400.0, psi=1.0, phi=2.0)
    assert log_pdf(1e6, p) == -math.inf


def test_log_pdf_rejects_nonpositive():
    p = GenGammaParams(0.0, 1.0, 1.0)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            log_pdf(bad, p)
        with pytest.raises(ValueError):
            score_alpha(bad, p)


def test_density_normalization_by_quadrature():
    for psi, phi in SHAPE_GRID:
        p = GenGammaParams(alpha=0.3, psi=psi, phi=phi)
        total, err = scipy.integrate.quad(lambda y: math.exp(log_pdf(y, p)),
                                          0.0, np.inf, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)


def test_mean_variance_closed_forms():
    assert mean(GenGammaParams(0.0, 1.0, 1.0)) == pytest.approx(1.0)
    assert mean(GenGammaParams(math.log(2.0), 1.0, 1.0)) == pytest.approx(2.0)
    assert variance(GenGammaParams(0.0, 1.0, 1.0)) == pytest.approx(1.0)
    assert variance(GenGammaParams(math.log(3.0), 1.0, 1.0)) == pytest.approx(9.0)


def test_mean_variance_against_scipy_moments():
    for psi, phi in SHAPE_GRID:
        p = GenGammaParams(alpha=-0.2, psi=psi, phi=phi)
        ref = scipy.stats.gengamma(a=psi, c=phi, scale=math.exp(p.alpha))
        assert mean(p) == pytest.approx(ref.mean(), rel=1e-10)
        assert variance(p) == pytest.approx(ref.var(), rel=1e-9)


def test_score_examples():
    assert score_alpha(1.0, GenGammaParams(0.0, 1.0, 1.0)) == pytest.approx(0.0)
    assert score_alpha(2.0, GenGammaParams(0.0, 1.0, 1.0)) == pytest.approx(1.0)


@settings(max_examples=300, deadline=None)
@given(
    y=st.floats(0.01, 50.0),
    alpha=st.floats(-2.0, 2.0),
    psi=st.floats(0.3, 4.0),
    phi=st.floats(0.3, 4.0),
)
def test_score_matches_finite_difference(y, alpha, psi, phi):
    h = 1e-6
    up = log_pdf(y, GenGammaParams(alpha + h, psi, phi))
    dn = log_pdf(y, GenGammaParams(alpha - h, psi, phi))
    fd = (up - dn) / (2.0 * h)
    s = score_alpha(y, GenGammaParams(alpha, psi, phi))
    assert s == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_score_zero_mean():
    rng = np.random.default_rng(41)
    p = GenGammaParams(alpha=0.1, psi=1.15, phi=0.90)
    s = score_alpha(sample(p, rng, 1_000_000), p)
    assert abs(s.mean()) < 4.0 * s.std() / math.sqrt(s.size)


def test_fisher_examples():
    assert fisher_alpha(GenGammaParams(0.0, 1.0, 1.0)) == pytest.approx(1.0)
    assert fisher_alpha(GenGammaParams(5.0, 1.15, 0.90)) == pytest.approx(0.9315)


def test_fisher_matches_monte_carlo_score_second_moment():
    rng = np.random.default_rng(7)
    p = GenGammaParams(alpha=-0.3, psi=1.15, phi=0.90)
    s2 = score_alpha(sample(p, rng, 1_000_000), p) ** 2
    assert s2.mean() == pytest.approx(fisher_alpha(p), rel=0.03)


def test_sample_exponential_ks():
    rng = np.random.default_rng(11)
    draws = sample(GenGammaParams(0.0, 1.0, 1.0), rng, 1_000_000)
    stat = scipy.stats.kstest(draws, "expon").statistic
    assert stat < 0.002


def test_sample_moments():
    rng = np.random.default_rng(3)
    p = GenGammaParams(alpha=0.0, psi=1.15, phi=0.90)
    draws = sample(p, rng, 1_000_000)
    se = math.sqrt(variance(p) / draws.size)
    assert abs(draws.mean() - mean(p)) < 3.0 * se


def test_sample_determinism():
    p = GenGammaParams(alpha=0.2, psi=1.08, phi=0.93)
    a = sample(p, np.random.default_rng(123), 1000)
    b = sample(p, np.random.default_rng(123), 1000)
    np.testing.assert_array_equal(a, b)
