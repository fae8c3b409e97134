"""Temporal signatures of organic and scheduled accounts.

Run: python3 demos/01_temporal_signatures.py
"""

import numpy as np

from botsentinel.corpus import INORGANIC, ORGANIC, bin_series
from botsentinel.synthgen import generate_user, inorganic_profile, organic_profile
from botsentinel.temporal import dominant_periodicity, fit_arima, intervals, local_maxima, periodogram

# One person posting on a daily rhythm, one account posting every two hours.
human = generate_user(ORGANIC, 0, seed=11, profile=organic_profile(half_day_share=0.0), tweet_scale=0.3)
bot = generate_user(INORGANIC, 0, seed=11, profile=inorganic_profile(), tweet_scale=0.3)

# Activity is counted in 3-hour bins, so a daily cycle spans 8 bins.
for name, h in (("organic", human), ("inorganic", bot)):
    series = bin_series(h)
    pg = periodogram(series)
    n_max, ratio = local_maxima(pg)
    print(f"{name:9s} tweets={len(h):5d} bins={len(series.counts):4d} "
          f"periodicity={dominant_periodicity(pg):6.2f} local maxima={n_max:2d} secondary ratio={ratio:.3f}")

# The strongest spectral lines of the organic user sit at 1/8 and its harmonics.
pg = periodogram(bin_series(human))
top = np.argsort(pg.powers)[::-1][:3]
print("organic top frequencies (cycles/bin):", np.round(pg.frequencies[top], 4))

# Inter-tweet intervals: the bot's are almost constant, so its ARMA residual
# variance is tiny next to the bursty organic gaps.
for name, h in (("organic", human), ("inorganic", bot)):
    fit = fit_arima(intervals(h))
    print(f"{name:9s} ARMA({fit.p},{fit.q}) sigma2={fit.sigma2:12.1f} loglik={fit.loglik:10.1f} "
          f"sum phi^2={np.sum(fit.ar_coeffs ** 2):.3f}")
