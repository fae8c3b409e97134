"""Temporal features: activity periodogram, dominant period, ARMA fit on intervals."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, signal

from .corpus import DEFAULT_BIN_WIDTH, BinnedSeries, CorpusError, UserHistory, bin_series

MIN_TWEETS = 20
MIN_BINS = 4
LOGLIK_CAP = 1e12


class InsufficientHistoryError(CorpusError):
    """History too short for temporal feature extraction; exclude the user."""


@dataclass(frozen=True)
class Periodogram:
    frequencies: np.ndarray  # cycles per bin, in (0, 0.5]
    powers: np.ndarray

    def __len__(self) -> int:
        return len(self.powers)


@dataclass(frozen=True)
class ArimaFit:
    p: int
    q: int
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    sigma2: float
    loglik: float
    aic: float
    nobs: int

    @property
    def fit_length(self) -> int:
        return self.p + self.q + 1


@dataclass(frozen=True)
class TemporalFeatures:
    periodicity: float
    loglik: float
    sumsq_ar: float
    error_var: float
    fit_length: int
    n_local_maxima: int
    secondary_power_ratio: float


def _counts(series) -> np.ndarray:
    x = series.counts if isinstance(series, BinnedSeries) else series
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < MIN_BINS:
        raise ValueError(f"periodogram needs at least {MIN_BINS} bins, got {len(x)}")
    return x


def dft_periodogram(series) -> Periodogram:
    """Reference O(n^2) periodogram evaluated term by term."""
    x = _counts(series)
    n = len(x)
    xc = x - x.mean()
    k = np.arange(1, n // 2 + 1)
    tau = np.arange(n)
    basis = np.exp(-2j * np.pi * np.outer(k, tau) / n)
    return Periodogram(k / n, np.abs(basis @ xc) ** 2)


def periodogram(series, direct: bool = False) -> Periodogram:
    """Squared modulus of the DFT of the mean-centred counts.

    Evaluated at the Fourier frequencies ``k/n`` for ``k = 1..n//2``.
    ``direct=True`` uses the O(n^2) sum instead of the FFT.
    """
    if direct:
        return dft_periodogram(series)
    x = _counts(series)
    n = len(x)
    spec = np.fft.rfft(x - x.mean())[1 : n // 2 + 1]
    return Periodogram(np.arange(1, n // 2 + 1) / n, spec.real**2 + spec.imag**2)


def _is_flat(powers: np.ndarray) -> bool:
    return not np.any(powers > 1e-18 * max(1.0, float(np.sum(powers))))


def dominant_periodicity(pgram: Periodogram) -> float:
    """Bins per cycle of the strongest frequency; 0 when the spectrum is flat."""
    if len(pgram) == 0:
        raise ValueError("empty periodogram")
    if _is_flat(pgram.powers):
        return 0.0
    # argmax returns the first maximum, i.e. the lowest frequency on ties
    return float(1.0 / pgram.frequencies[int(np.argmax(pgram.powers))])


def local_maxima(pgram: Periodogram) -> tuple[int, float]:
    """Count spectral peaks above the mean power.

    A peak is strictly above its left neighbour and at least its right
    neighbour; the end points only compare against the neighbour they have.
    Returns ``(count, second_peak_power / largest_power)``.
    """
    p = np.asarray(pgram.powers, dtype=float)
    if len(p) < 3:
        raise ValueError("local_maxima needs at least 3 frequencies")
    if _is_flat(p):
        return 0, 0.0
    left = np.concatenate(([-np.inf], p[:-1]))
    right = np.concatenate((p[1:], [-np.inf]))
    peaks = p[(p > left) & (p >= right) & (p > p.mean())]
    if len(peaks) < 2:
        return len(peaks), 0.0
    top2 = np.sort(peaks)[-2:]
    return len(peaks), float(min(1.0, top2[0] / p.max()))


def intervals(history: UserHistory) -> np.ndarray:
    """Seconds between consecutive tweets."""
    if len(history) < 2:
        raise CorpusError(f"{history.user_id}: need at least 2 tweets for intervals")
    return np.diff(history.timestamps).astype(float)


def _css_residuals(params, y, p, q, m):
    phi, theta = params[:p], params[p:]
    v = y[m:].copy()
    n = len(y)
    for k in range(1, p + 1):
        v -= phi[k - 1] * y[m - k : n - k]
    if q:
        return signal.lfilter([1.0], np.r_[1.0, theta], v)
    return v


def _gaussian_loglik(rss: float, n: int) -> tuple[float, float]:
    sigma2 = rss / n
    if sigma2 <= 0.0:
        return 0.0, LOGLIK_CAP
    ll = -0.5 * n * (math.log(2 * math.pi * sigma2) + 1.0)
    return sigma2, min(ll, LOGLIK_CAP)


def fit_arma(x, p: int, q: int, condition: Optional[int] = None) -> Optional[ArimaFit]:
    """Conditional-sum-of-squares fit of one ARMA(p, q) candidate.

    The series is mean-centred and the first ``condition`` observations
    (default ``p``) are held as pre-sample values, with pre-sample
    innovations set to zero.  Returns ``None`` if the optimiser fails.
    """
    y = np.asarray(x, dtype=float)
    m = p if condition is None else condition
    if m < p:
        raise ValueError("condition must be at least p")
    y = y - y.mean()
    n = len(y) - m
    scale = float(np.std(y))
    if scale == 0.0:
        # degenerate but exact: every coefficient vector gives zero residuals
        sigma2, ll = _gaussian_loglik(0.0, n)
        return ArimaFit(p, q, np.zeros(p), np.zeros(q), 0.0, ll, -2 * ll + 2 * (p + q + 1), n)
    ys = y / scale

    params = np.zeros(p + q)
    if p:
        lagged = np.column_stack([ys[m - k : len(ys) - k] for k in range(1, p + 1)])
        params[:p] = np.linalg.lstsq(lagged, ys[m:], rcond=None)[0]
    if q:
        def resid(theta_phi):
            r = _css_residuals(theta_phi, ys, p, q, m)
            if not np.all(np.isfinite(r)):
                return np.full_like(r, 1e6)
            return r

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            try:
                sol = optimize.least_squares(resid, params, method="lm", xtol=1e-10, ftol=1e-10)
            except (ValueError, np.linalg.LinAlgError):
                return None
        if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
            return None
        params = sol.x

    with np.errstate(all="ignore"):
        r = _css_residuals(params, y, p, q, m)
        rss = float(r @ r)
    if not math.isfinite(rss):
        return None
    sigma2, ll = _gaussian_loglik(rss, n)
    aic = -2.0 * ll + 2.0 * (p + q + 1)
    return ArimaFit(p, q, params[:p].copy(), params[p:].copy(), sigma2, ll, aic, n)


def fit_arima(x, max_p: int = 3, max_q: int = 3) -> ArimaFit:
    """Grid-search ARMA orders by AIC.

    Every candidate conditions on the same first ``max_p`` observations so
    that their likelihoods cover the same residual span and are comparable.
    Ties in AIC keep the earlier (smaller) order.
    """
    y = np.asarray(x, dtype=float)
    if y.ndim != 1 or len(y) < MIN_TWEETS:
        raise ValueError(f"ARMA fitting needs at least {MIN_TWEETS} observations")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if not (0 <= max_p <= 3 and 0 <= max_q <= 3):
        raise ValueError("max_p and max_q must lie in [0, 3]")
    best = None
    for p, q in itertools.product(range(max_p + 1), range(max_q + 1)):
        fit = fit_arma(y, p, q, condition=max_p)
        if fit is not None and (best is None or fit.aic < best.aic):
            best = fit
    if best is None:
        raise RuntimeError("every ARMA candidate failed to converge")
    return best


def temporal_features(
    history: UserHistory,
    bin_width: int = DEFAULT_BIN_WIDTH,
    max_p: int = 3,
    max_q: int = 3,
) -> TemporalFeatures:
    if len(history) < MIN_TWEETS:
        raise InsufficientHistoryError(
            f"{history.user_id}: {len(history)} tweets < {MIN_TWEETS}; exclude this user"
        )
    series = bin_series(history, bin_width)
    if len(series.counts) < MIN_BINS:
        raise InsufficientHistoryError(
            f"{history.user_id}: activity spans {len(series.counts)} bins < {MIN_BINS}; exclude this user"
        )
    pgram = periodogram(series)
    n_max, ratio = local_maxima(pgram) if len(pgram) >= 3 else (0, 0.0)
    fit = fit_arima(intervals(history), max_p, max_q)
    return TemporalFeatures(
        periodicity=dominant_periodicity(pgram),
        loglik=fit.loglik,
        sumsq_ar=float(np.sum(fit.ar_coeffs**2)),
        error_var=fit.sigma2,
        fit_length=fit.fit_length,
        n_local_maxima=n_max,
        secondary_power_ratio=ratio,
    )
