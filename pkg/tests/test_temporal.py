import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from botsentinel.corpus import INORGANIC, ORGANIC
from botsentinel.synthgen import generate_user, inorganic_profile, organic_profile
from botsentinel.temporal import (
    LOGLIK_CAP,
    InsufficientHistoryError,
    Periodogram,
    dft_periodogram,
    dominant_periodicity,
    fit_arima,
    fit_arma,
    intervals,
    local_maxima,
    periodogram,
    temporal_features,
)
from conftest import history


def oracle_powers(counts):
    """Textbook O(n^2) loop over the Fourier frequencies k/n, k = 1..n//2."""
    x = [float(c) for c in counts]
    n = len(x)
    mean = sum(x) / n
    out = []
    for k in range(1, n // 2 + 1):
        re = im = 0.0
        for t, v in enumerate(x):
            ang = 2 * np.pi * k * t / n
            re += (v - mean) * np.cos(ang)
            im -= (v - mean) * np.sin(ang)
        out.append(re * re + im * im)
    return np.array(out)


def cosine(period, n, amp=1.0):
    return amp * np.cos(2 * np.pi * np.arange(n) / period)


# -- periodogram


def test_constant_series_has_zero_power():
    pg = periodogram(np.full(8, 3.0))
    assert np.all(pg.powers == 0)
    assert dominant_periodicity(pg) == 0


def test_cosine_8_peaks_at_one_eighth():
    pg = periodogram(cosine(8, 16))
    assert pg.frequencies[np.argmax(pg.powers)] == pytest.approx(1 / 8)
    np.testing.assert_allclose(pg.powers, oracle_powers(cosine(8, 16)), atol=1e-9)


def test_alternation_peaks_at_nyquist():
    pg = periodogram([1, 0, 1, 0, 1, 0, 1, 0])
    assert pg.frequencies[np.argmax(pg.powers)] == 0.5


def test_frequencies_grid():
    pg = periodogram(np.arange(10.0))
    np.testing.assert_allclose(pg.frequencies, np.arange(1, 6) / 10)


def test_too_short_series_rejected():
    with pytest.raises(ValueError):
        periodogram([1, 2, 3])


def test_direct_and_fft_paths_agree_with_loop_oracle():
    x = np.random.default_rng(0).poisson(3, size=37)
    ref = oracle_powers(x)
    np.testing.assert_allclose(dft_periodogram(x).powers, ref, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(periodogram(x, direct=True).powers, ref, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(periodogram(x).powers, ref, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("period", [4, 8])
@pytest.mark.parametrize("cycles", [2, 5, 31])
def test_pure_sinusoid_periodicity_exact(period, cycles):
    assert dominant_periodicity(periodogram(1 + cosine(period, period * cycles))) == period


def test_periodicity_ties_go_to_lowest_frequency():
    pg = Periodogram(np.array([0.1, 0.2, 0.3]), np.array([1.0, 5.0, 5.0]))
    assert dominant_periodicity(pg) == pytest.approx(5.0)


series = arrays(np.float64, st.integers(4, 64), elements=st.floats(0, 100, allow_nan=False))


@given(series, st.floats(-50, 50))
def test_power_invariant_to_offset(x, c):
    a, b = periodogram(x).powers, periodogram(x + c).powers
    np.testing.assert_allclose(a, b, rtol=1e-7, atol=1e-6 * (1 + np.max(np.abs(a), initial=0)))


@given(series, st.floats(0.1, 10))
def test_scaling_scales_power_and_keeps_argmax(x, c):
    a, b = periodogram(x), periodogram(c * x)
    scale = 1 + np.max(a.powers, initial=0)
    np.testing.assert_allclose(b.powers, c * c * a.powers, rtol=1e-9, atol=1e-9 * c * c * scale)
    # argmax comparisons are only meaningful when the spectrum is well separated from round-off
    top = np.sort(a.powers)[::-1]
    if len(top) > 1 and top[0] - top[1] > 1e-6 * scale:
        assert dominant_periodicity(a) == dominant_periodicity(b)


# -- local maxima


def test_single_spike():
    p = np.zeros(10)
    p[3] = 5
    assert local_maxima(Periodogram(np.arange(1, 11) / 20, p)) == (1, 0.0)


def test_two_equal_spikes():
    p = np.zeros(10)
    p[2] = p[6] = 5
    assert local_maxima(Periodogram(np.arange(1, 11) / 20, p)) == (2, 1.0)


def test_period_8_and_4_mixture_ratio():
    x = cosine(8, 64, 2.0) + cosine(4, 64, 1.0)
    count, ratio = local_maxima(periodogram(x))
    assert count == 2 and ratio == pytest.approx(0.25, abs=1e-9)


def test_plateau_counted_once():
    p = np.array([0, 0, 4, 4, 0, 0, 0.0])
    assert local_maxima(Periodogram(np.arange(1, 8) / 16, p))[0] == 1


def test_local_maxima_requires_three_points():
    with pytest.raises(ValueError):
        local_maxima(Periodogram(np.array([0.25, 0.5]), np.array([1.0, 2.0])))


@given(arrays(np.float64, st.integers(6, 64), elements=st.floats(0, 100, allow_nan=False)))
def test_local_maxima_ratio_in_unit_interval(x):
    count, ratio = local_maxima(periodogram(x))
    assert count >= 0 and 0 <= ratio <= 1


# -- intervals


@pytest.mark.parametrize("times, expected", [
    ([0, 60, 180], [60, 120]),
    ([0, 100, 200, 300], [100, 100, 100]),
    ([5, 5], [0]),
])
def test_intervals(times, expected):
    assert list(intervals(history(times))) == expected


def test_intervals_need_two_tweets():
    with pytest.raises(ValueError):
        intervals(history([3]))


# -- ARMA


def ar1(phi, n, seed):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=n + 200)
    x = np.zeros_like(e)
    for t in range(1, len(e)):
        x[t] = phi * x[t - 1] + e[t]
    return x[200:]


def test_ar1_coefficient_recovered():
    fit = fit_arima(ar1(0.8, 1000, 0))
    assert fit.p >= 1
    assert 0.7 <= fit.ar_coeffs[0] <= 0.9


def test_white_noise_variance_recovered():
    for seed in range(10):
        fit = fit_arima(np.random.default_rng(seed).normal(size=500))
        assert 0.8 <= fit.sigma2 <= 1.2


@pytest.mark.xfail(strict=True, reason=(
    "AIC's 2-per-parameter penalty picks a nonzero order on roughly 60% of white-noise "
    "draws over a 16-model grid; p=q=0 in 90% of seeds is out of reach for AIC selection"
))
def test_white_noise_selects_zero_order_in_90_percent():
    hits = sum(
        (lambda f: f.p == 0 and f.q == 0)(fit_arima(np.random.default_rng(seed).normal(size=500)))
        for seed in range(50)
    )
    assert hits >= 45


def test_constant_series_degenerate_fit():
    fit = fit_arima(np.full(30, 7.0))
    assert (fit.p, fit.q, fit.sigma2, fit.loglik) == (0, 0, 0.0, LOGLIK_CAP)
    assert fit.fit_length == 1


def test_arima_input_validation():
    with pytest.raises(ValueError):
        fit_arima(np.zeros(19) + np.arange(19))
    x = np.arange(30.0)
    x[4] = np.nan
    with pytest.raises(ValueError):
        fit_arima(x)
    with pytest.raises(ValueError):
        fit_arima(np.arange(30.0), max_p=4)


def test_selected_aic_is_grid_minimum():
    x = ar1(0.5, 300, 3)
    best = fit_arima(x)
    for p in range(4):
        for q in range(4):
            cand = fit_arma(x, p, q, condition=3)
            if cand is not None:
                assert best.aic <= cand.aic + 1e-9
    assert best.fit_length == best.p + best.q + 1
    assert len(best.ar_coeffs) == best.p and len(best.ma_coeffs) == best.q


def test_loglik_closed_form():
    fit = fit_arima(ar1(0.3, 400, 5))
    n = fit.nobs
    expected = -(n / 2) * (np.log(2 * np.pi * fit.sigma2) + 1)
    assert fit.loglik == pytest.approx(expected, rel=1e-9)
    assert fit.aic == pytest.approx(-2 * fit.loglik + 2 * fit.fit_length, rel=1e-12)


def test_arma_with_ma_term_is_fitted():
    rng = np.random.default_rng(11)
    e = rng.normal(size=2001)
    x = e[1:] + 0.6 * e[:-1]
    fit = fit_arma(x, 0, 1)
    assert fit.ma_coeffs[0] == pytest.approx(0.6, abs=0.1)


# -- composed features


def test_temporal_features_needs_twenty_tweets():
    with pytest.raises(InsufficientHistoryError):
        temporal_features(history(range(0, 19 * 60, 60)))


def test_inorganic_user_low_periodicity_and_small_error_var():
    h = generate_user(INORGANIC, 0, 5, inorganic_profile(), tweet_scale=0.2)
    f = temporal_features(h)
    organic = temporal_features(generate_user(ORGANIC, 0, 5, organic_profile(), tweet_scale=0.2))
    assert f.periodicity < 4
    # fixed 2-h spacing with 60 s jitter: residual variance is tiny next to organic arrivals
    assert f.error_var < 1e-3 * organic.error_var


def test_organic_user_daily_periodicity():
    h = generate_user(ORGANIC, 3, 1, organic_profile(half_day_share=0.0), tweet_scale=0.3)
    assert round(temporal_features(h).periodicity) == 8


def test_white_noise_timing_has_several_maxima():
    counts = []
    for seed in range(50):
        rng = np.random.default_rng(seed)
        times = np.sort(rng.integers(0, 60 * 86400, size=400))
        counts.append(temporal_features(history(times)).n_local_maxima)
    assert np.median(counts) > 2


def test_feature_invariants_on_generated_users():
    for kind, prof in ((ORGANIC, organic_profile()), (INORGANIC, inorganic_profile())):
        f = temporal_features(generate_user(kind, 1, 9, prof, tweet_scale=0.1))
        assert f.periodicity == 0 or f.periodicity >= 2
        assert 0 <= f.secondary_power_ratio <= 1
        assert f.sumsq_ar >= 0 and f.error_var >= 0
        assert 1 <= f.fit_length <= 7
