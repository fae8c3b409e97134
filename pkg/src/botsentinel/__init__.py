"""Bot detection from tweet histories with temporal and semantic features.

Feature extraction, VIF-based selection, SVM and k-means classifiers,
split conformal prediction sets and leave-one-feature-out importance.
"""

__version__ = "0.1.0"

from .corpus import INORGANIC, ORGANIC, UserHistory, load_corpus, save_corpus, split_dataset  # noqa: E402
from .temporal import periodogram, dominant_periodicity, fit_arima, temporal_features  # noqa: E402
from .semantic import SentimentLexicon, bundled_lexicons, load_lexicon, semantic_features, tokenize  # noqa: E402
from .selection import FeatureMatrix, assemble_matrix, select_by_vif, standardize, vif  # noqa: E402
from .kmeans import KMeansModel, kmeans_fit, kmeans_predict  # noqa: E402
from .svm import SvmModel, svm_fit, svm_predict, svm_proba  # noqa: E402
from .metrics import EvalReport, evaluate  # noqa: E402
from .conformal import calibrate, coverage_report, forced_label, prediction_set, prediction_sets  # noqa: E402
from .importance import accuracy_scores  # noqa: E402
from .synthgen import generate_corpus  # noqa: E402
from .pipeline import extract_features  # noqa: E402

__all__ = [
    "__version__",
    "INORGANIC",
    "ORGANIC",
    "UserHistory",
    "load_corpus",
    "save_corpus",
    "split_dataset",
    "periodogram",
    "dominant_periodicity",
    "fit_arima",
    "temporal_features",
    "SentimentLexicon",
    "bundled_lexicons",
    "load_lexicon",
    "semantic_features",
    "tokenize",
    "FeatureMatrix",
    "assemble_matrix",
    "select_by_vif",
    "standardize",
    "vif",
    "KMeansModel",
    "kmeans_fit",
    "kmeans_predict",
    "SvmModel",
    "svm_fit",
    "svm_predict",
    "svm_proba",
    "EvalReport",
    "evaluate",
    "calibrate",
    "coverage_report",
    "forced_label",
    "prediction_set",
    "prediction_sets",
    "accuracy_scores",
    "generate_corpus",
    "extract_features",
]
