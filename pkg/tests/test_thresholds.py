"""Reflected KDE of within-class statistics and rejection-threshold tuning."""

import numpy as np
import pytest
from scipy.integrate import quad

from kldiag import (
    FaultMode,
    GaussianPdf,
    fit_kde,
    select_threshold,
    tune,
)


def test_fit_kde_input_validation():
    with pytest.raises(ValueError, match="at least 5"):
        fit_kde([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(ValueError, match="non-negative"):
        fit_kde([1.0, 2.0, 3.0, 4.0, -0.1])
    with pytest.raises(ValueError, match="finite"):
        fit_kde([1.0, 2.0, 3.0, 4.0, np.nan])


def test_degenerate_sample_falls_back_to_tiny_bandwidth():
    kde = fit_kde([3.0] * 8)
    assert kde.bandwidth == pytest.approx(0.03)
    # all mass concentrates near 3: the cdf jumps across it
    assert kde.cdf(2.8) < 1e-6
    assert kde.cdf(3.2) > 1.0 - 1e-6
    zero = fit_kde([0.0] * 8)
    assert zero.bandwidth == pytest.approx(1e-6)


def test_silverman_bandwidth_formula():
    values = np.arange(1.0, 101.0)
    kde = fit_kde(values)
    sd = values.std(ddof=1)
    iqr = np.quantile(values, 0.75) - np.quantile(values, 0.25)
    expected = 0.9 * min(sd, iqr / 1.34) * 100 ** (-0.2)
    assert kde.bandwidth == pytest.approx(expected, rel=1e-12)


def test_cdf_boundary_and_monotonicity():
    kde = fit_kde(np.random.default_rng(0).exponential(1.0, size=200))
    assert kde.cdf(0.0) == 0.0
    assert kde.cdf(-1.0) == 0.0
    assert kde.density(-0.5) == 0.0
    grid = np.linspace(0.0, 12.0, 400)
    values = kde.cdf(grid)
    assert np.all(np.diff(values) >= -1e-12)
    assert values[-1] > 1.0 - 1e-6
    assert np.all((values >= 0.0) & (values <= 1.0))


def test_density_integrates_to_one_on_the_half_line():
    kde = fit_kde(np.random.default_rng(1).exponential(1.0, size=50))
    total, _ = quad(lambda x: float(kde.density(x)), 0.0, np.inf, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_kde_recovers_exponential_cdf():
    """Reflected KDE over 10^4 Exp(1) draws: analytic cdf value at 1 is
    1 - e^{-1} ~ 0.632; the estimate must land within 0.03."""
    values = np.random.default_rng(21).exponential(1.0, size=10_000)
    kde = fit_kde(values)
    assert float(kde.cdf(1.0)) == pytest.approx(1.0 - np.exp(-1.0), abs=0.03)


def test_select_threshold_against_quantile_oracle():
    # cdf smooths the empirical quantile (95.05 for 1..100 at alpha = 0.05)
    # by at most about one bandwidth
    values = np.arange(1.0, 101.0)
    kde = fit_kde(values)
    threshold = select_threshold(kde, alpha=0.05)
    assert abs(threshold - 95.05) <= kde.bandwidth
    assert float(kde.cdf(threshold)) == pytest.approx(0.95, abs=1e-6)


def test_threshold_monotone_in_alpha():
    kde = fit_kde(np.random.default_rng(2).exponential(2.0, size=500))
    thresholds = [select_threshold(kde, a) for a in (0.02, 0.05, 0.1, 0.25, 0.5)]
    assert all(a >= b for a, b in zip(thresholds, thresholds[1:]))


def test_threshold_scale_covariance():
    """Scaling the tuning sample by c scales J by c (Silverman bandwidth is
    itself scale-covariant)."""
    values = np.random.default_rng(3).exponential(1.0, size=300)
    j1 = select_threshold(fit_kde(values), alpha=0.05)
    c = 3.7
    j2 = select_threshold(fit_kde(c * values), alpha=0.05)
    assert j2 == pytest.approx(c * j1, rel=1e-4)


def test_select_threshold_alpha_validation():
    kde = fit_kde([1.0, 2.0, 3.0, 4.0, 5.0])
    for bad in (0.0, -0.1, 0.6, 1.0):
        with pytest.raises(ValueError, match="alpha"):
            select_threshold(kde, bad)


def _synthetic_mode(count=30, seed=14):
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(np.array([[1.0, 0.3], [0.3, 0.8]]))
    members = []
    for _ in range(count):
        x = rng.standard_normal((100, 2)) @ chol.T
        mu = x.mean(axis=0)
        c = np.cov(x.T)
        members.append(GaussianPdf(mean=mu, cov=c, label="NF"))
    return FaultMode("NF", members=tuple(members))


def test_tune_produces_calibrated_model():
    mode = _synthetic_mode()
    model = tune(mode, alpha=0.05)
    assert model.label == "NF"
    assert model.threshold > 0.0
    assert model.alpha == 0.05
    assert model.tuning_values.shape == (30,)
    # an obviously foreign batch is rejected, a member is not
    far = GaussianPdf(mean=np.array([25.0, -25.0]), cov=np.eye(2))
    assert model.rejects(far)
    assert not model.rejects(mode.members[0])
    d, idx = model.evaluate(mode.members[3])
    assert d == 0.0 and idx == 3


def test_tune_needs_enough_members():
    mode = _synthetic_mode(count=5)
    with pytest.raises(ValueError, match=">= 6"):
        tune(mode)
