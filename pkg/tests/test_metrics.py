import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from botsentinel.corpus import INORGANIC, ORGANIC
from botsentinel.metrics import (
    TABLE1_FIELDS,
    auc_rank,
    clopper_pearson,
    confusion_statistics,
    evaluate,
    mcnemar_exact,
    roc_curve,
)

TABLE1 = {
    "accuracy": 0.9472, "accuracy_ci_low": 0.9235, "accuracy_ci_high": 0.9652, "nir": 0.502,
    "kappa": 0.8943, "mcnemar_pvalue": 1.0, "sensitivity": 0.9474, "specificity": 0.9469,
    "ppv": 0.9474, "npv": 0.9469, "prevalence": 0.5020, "detection_rate": 0.4756,
    "detection_prevalence": 0.5020, "balanced_accuracy": 0.9472,
}


def expand(confusion):
    """Prediction/truth lists realising a rows=predicted, cols=actual matrix."""
    (tp, fp), (fn, tn) = confusion
    pred = [ORGANIC] * (tp + fp) + [INORGANIC] * (fn + tn)
    truth = [ORGANIC] * tp + [INORGANIC] * fp + [ORGANIC] * fn + [INORGANIC] * tn
    return pred, truth


def pairwise_auc(scores, pos):
    """Probability a random positive outranks a random negative, ties count half."""
    p = [s for s, k in zip(scores, pos) if k]
    n = [s for s, k in zip(scores, pos) if not k]
    return sum((a > b) + 0.5 * (a == b) for a in p for b in n) / (len(p) * len(n))


def test_table1_from_confusion():
    st_ = confusion_statistics([[234, 13], [13, 232]])
    for name, value in TABLE1.items():
        assert round(st_[name], 4) == pytest.approx(value, abs=1e-12), name
    assert st_["acc_vs_nir_pvalue"] < 2.2e-16


def test_table1_via_evaluate():
    pred, truth = expand([[234, 13], [13, 232]])
    rep = evaluate(pred, None, truth, positive_class=ORGANIC)
    assert rep.confusion == [[234, 13], [13, 232]]
    for name, value in TABLE1.items():
        assert round(getattr(rep, name), 4) == pytest.approx(value, abs=1e-12), name
    d = rep.to_dict()
    assert set(TABLE1_FIELDS) <= set(d) and d["positive_class"] == ORGANIC


def test_perfect_predictions():
    truth = [ORGANIC, INORGANIC] * 5
    rep = evaluate(truth, [1.0 if t == ORGANIC else 0.0 for t in truth], truth)
    assert rep.accuracy == 1 and rep.kappa == 1 and rep.auc == 1


def test_constant_scores_auc_half():
    truth = [ORGANIC, INORGANIC, INORGANIC, ORGANIC, ORGANIC]
    rep = evaluate(truth, [0.3] * 5, truth)
    assert rep.auc == 0.5
    assert rep.roc_points == [(0.0, 0.0), (1.0, 1.0)]


def test_single_class_truth_omits_roc():
    rep = evaluate([ORGANIC, INORGANIC], [0.9, 0.1], [ORGANIC, ORGANIC])
    assert rep.roc_points is None and rep.auc is None and rep.roc_defined is False


def test_length_mismatch():
    with pytest.raises(ValueError):
        evaluate([ORGANIC], None, [ORGANIC, INORGANIC])
    with pytest.raises(ValueError):
        evaluate([ORGANIC], [0.1, 0.2], [ORGANIC])


def test_positive_class_swaps_rates():
    pred, truth = expand([[30, 5], [10, 55]])
    a = evaluate(pred, None, truth, positive_class=ORGANIC)
    b = evaluate(pred, None, truth, positive_class=INORGANIC)
    assert a.sensitivity == b.specificity and a.ppv == b.npv
    assert a.kappa == pytest.approx(b.kappa)


def test_mcnemar_and_ci_against_scipy_definitions():
    from scipy import stats

    assert mcnemar_exact(13, 13) == 1.0
    assert mcnemar_exact(2, 10) == pytest.approx(stats.binomtest(2, 12, 0.5).pvalue)
    assert mcnemar_exact(0, 0) == 1.0
    lo, hi = clopper_pearson(466, 492)
    assert (lo, hi) == pytest.approx((stats.beta.ppf(0.025, 466, 27), stats.beta.ppf(0.975, 467, 26)))
    assert clopper_pearson(0, 10)[0] == 0.0 and clopper_pearson(10, 10)[1] == 1.0


@given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=200))
def test_auc_matches_pairwise_oracle(data):
    scores = [float(s) for s, _ in data]
    pos = [k for _, k in data]
    if all(pos) or not any(pos):
        return
    assert auc_rank(scores, pos) == pytest.approx(pairwise_auc(scores, pos), abs=1e-12)


@given(st.lists(st.tuples(st.floats(-5, 5, allow_nan=False), st.booleans()), min_size=2, max_size=100))
def test_roc_monotone_and_bounded(data):
    scores = [s for s, _ in data]
    pos = [k for _, k in data]
    if all(pos) or not any(pos):
        return
    pts = roc_curve(scores, pos)
    assert pts[0] == (0.0, 0.0) and pts[-1] == (1.0, 1.0)
    for (f0, t0), (f1, t1) in zip(pts, pts[1:]):
        assert f1 >= f0 and t1 >= t0
    # trapezoid area of the tie-aware curve equals the rank AUC
    f, t = np.array(pts).T
    area = float(np.sum(np.diff(f) * (t[1:] + t[:-1]) / 2))
    assert area == pytest.approx(auc_rank(scores, pos), abs=1e-9)


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_rates_in_unit_interval(tp, fp, fn, tn):
    if tp + fp + fn + tn == 0:
        return
    s = confusion_statistics([[tp, fp], [fn, tn]])
    for k in ("accuracy", "nir", "prevalence", "detection_rate", "detection_prevalence", "mcnemar_pvalue"):
        assert 0 <= s[k] <= 1
    assert s["accuracy_ci_low"] <= s["accuracy"] <= s["accuracy_ci_high"]
