"""Split conformal prediction sets on top of a probabilistic SVM.

Run: python3 demos/04_conformal_sets.py
"""

import numpy as np

from botsentinel.conformal import calibrate, coverage_report, forced_label, prediction_sets, uniformity_chi2
from botsentinel.corpus import INORGANIC, ORGANIC
from botsentinel.svm import svm_fit

rng = np.random.default_rng(0)


def draw(n, shift=0.6):
    y = rng.random(n) < 0.5
    X = rng.normal(size=(n, 3)) + np.where(y, shift, -shift)[:, None]
    return X, [ORGANIC if k else INORGANIC for k in y]


# Three disjoint draws: fit, calibrate, test.
model = svm_fit(*draw(300), seed=0)
Xc, yc = draw(1000)
Xt, yt = draw(1000)

# Coverage is guaranteed on average over calibration draws; a single draw
# wanders by about a percentage point either way.
for alpha in (0.05, 0.1, 0.2):
    cal = calibrate(model, Xc, yc, alpha)
    sets = prediction_sets(model, Xt, cal)
    rep = coverage_report(sets, yt)
    print(f"alpha={alpha:.2f}: coverage {rep.empirical_coverage:.3f} (target {1 - alpha:.2f}), "
          f"mean set size {rep.mean_set_size:.2f}, sizes {rep.size_histogram}")

cal = calibrate(model, Xc, yc, 0.1)
sets = prediction_sets(model, Xt, cal)
rep = coverage_report(sets, yt)
stat, crit = uniformity_chi2(rep.pvalue_histogram)
print("\ntrue-label p-value histogram:", rep.pvalue_histogram)
print(f"chi-square {stat:.2f} vs 1% critical value {crit:.2f}")

# Ambiguous points get both labels, confident ones a single label.
for s, truth in list(zip(sets, yt))[:6]:
    print(f"  p(organic)={s.p_values[ORGANIC]:.3f} p(inorganic)={s.p_values[INORGANIC]:.3f} "
          f"set={list(s.members)} forced={forced_label(s, ORGANIC)} truth={truth}")
