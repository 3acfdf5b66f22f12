"""Statistical utilities: TV, KS, autocorrelation, proportions, trends."""

import math

import numpy as np
import pytest

from pathgibbs.stats import (total_variation, ks_statistic_atomic,
                             integrated_autocorr_time, effective_sample_size,
                             proportion_from_indicators, wilson_interval,
                             upward_trend_pvalue, log_log_slope)


def test_total_variation_basic():
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert total_variation([1.0, 0.0], [0.0, 1.0]) == 1.0
    with pytest.raises(ValueError, match="equal-length"):
        total_variation([1.0], [0.5, 0.5])


def test_ks_statistic_exact_atoms():
    support = np.array([-1.0, 0.0, 1.0])
    probs = np.array([0.25, 0.5, 0.25])
    samples = np.repeat(support, [25, 50, 25])
    assert ks_statistic_atomic(samples, support, probs) < 1e-12
    shifted = np.repeat(support, [50, 25, 25])
    assert ks_statistic_atomic(shifted, support, probs) >= 0.25


def test_autocorr_time_white_noise_and_persistent():
    rng = np.random.default_rng(0)
    white = rng.standard_normal(20_000)
    assert abs(integrated_autocorr_time(white) - 1.0) < 0.2
    rho = 0.9
    ar = np.empty(20_000)
    ar[0] = 0.0
    noise = rng.standard_normal(20_000)
    for i in range(1, ar.size):
        ar[i] = rho * ar[i - 1] + noise[i]
    # AR(1) theory: IAT = (1 + rho) / (1 - rho) = 19
    assert 12.0 < integrated_autocorr_time(ar) < 28.0
    assert effective_sample_size(ar) < ar.size / 10


def test_proportion_boundary_values():
    est = proportion_from_indicators(np.zeros(100))
    assert est.value == 0.0 and est.stderr == 0.0
    est = proportion_from_indicators(np.ones(100))
    assert est.value == 1.0 and est.stderr == 0.0


def test_wilson_interval_boundaries():
    lo, hi = wilson_interval(0.0, 4000)
    assert lo == 0.0
    # zero successes still leave an upper limit near z^2 / n
    assert 0.0005 < hi < 0.002
    lo, hi = wilson_interval(1.0, 4000)
    assert hi == 1.0 and lo > 0.998
    lo, hi = wilson_interval(0.5, 1000)
    assert abs((hi - lo) / 2 - 1.96 * math.sqrt(0.25 / 1000)) < 1e-4
    with pytest.raises(ValueError, match="positive"):
        wilson_interval(0.5, 0)


def test_wilson_interval_covers_binomial_truth():
    rng = np.random.default_rng(42)
    p_true = 0.003
    misses = 0
    for _ in range(200):
        p_hat = rng.binomial(4000, p_true) / 4000
        lo, hi = wilson_interval(p_hat, 4000)
        if not (lo <= p_true <= hi):
            misses += 1
    assert misses <= 20  # nominal 5% at 95% confidence


def test_upward_trend_detection():
    xs = [1.0, 2.0, 3.0, 4.0]
    ses = [0.01] * 4
    rising = upward_trend_pvalue(xs, [0.1, 0.2, 0.3, 0.4], ses)
    flat = upward_trend_pvalue(xs, [0.2, 0.21, 0.19, 0.2], ses)
    assert rising < 0.01
    assert flat > 0.05
    assert upward_trend_pvalue([1.0, 2.0], [0.1, 0.2], [0.01, 0.01]) == 1.0


def test_log_log_slope_recovers_power():
    xs = np.array([2.0, 4.0, 8.0, 16.0])
    assert abs(log_log_slope(xs, xs ** -1.5) + 1.5) < 1e-12
