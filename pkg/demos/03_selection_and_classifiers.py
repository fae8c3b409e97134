"""From a synthetic corpus to VIF-pruned features, an SVM and k-means.

Run: python3 demos/03_selection_and_classifiers.py   (about 20 s)
"""

from types import SimpleNamespace

from botsentinel.corpus import split_dataset
from botsentinel.kmeans import kmeans_fit, kmeans_score
from botsentinel.metrics import evaluate
from botsentinel.pipeline import extract_features
from botsentinel.selection import select_by_vif, standardize
from botsentinel.svm import svm_fit
from botsentinel.synthgen import generate_corpus

corpus = generate_corpus(120, 95, seed=3, tweet_scale=0.25)
ext = extract_features(corpus)
raw = ext.matrix
print(f"feature matrix: {raw.values.shape[0]} users x {raw.values.shape[1]} features, {len(ext.excluded)} excluded")

records = [SimpleNamespace(user_id=u, label=lab) for u, lab in zip(raw.user_ids, raw.labels)]
split = split_dataset(records, (0.5, 0.0, 0.5), seed=3)

# Standardise on the training rows only, then prune collinear columns.
train = standardize(raw.rows(split.train))
report = select_by_vif(train, threshold=5.0)
print("\nVIF elimination order:")
for name, v in report.elimination_trace:
    print(f"  drop {name:22s} VIF {v:.1f}")
print("retained:", ", ".join(report.retained))

train = train.columns(report.retained)
test = standardize(raw.rows(split.test).columns(report.retained), train)

svm = svm_fit(train.values, train.labels, C=1.0, kernel="rbf", seed=3)
km = kmeans_fit(train.values, train.labels, seed=3)
for name, pred, score in (
    ("SVM", svm.predict(test.values), svm.predict_proba(test.values)[:, 0]),
    ("k-means", km.predict(test.values), kmeans_score(km, test.values)),
):
    rep = evaluate(pred, score, test.labels)
    print(f"\n{name}: confusion (rows predicted, cols actual) {rep.confusion}")
    print(f"  accuracy {rep.accuracy:.3f} [{rep.accuracy_ci_low:.3f}, {rep.accuracy_ci_high:.3f}]  "
          f"kappa {rep.kappa:.3f}  F {rep.f_score:.3f}  AUC {rep.auc:.3f}")
print(f"\nSVM kept {len(svm.support_vectors)} support vectors; Platt A={svm.platt_a:.3f} B={svm.platt_b:.3f}")
