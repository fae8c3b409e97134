"""Versioned JSON model files bundling a classifier with its feature contract."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .corpus import atomic_write_text
from .kmeans import KMeansModel
from .selection import FeatureMatrix
from .svm import SvmModel

FORMAT = "botsentinel-model"
VERSION = 1


class FeatureMismatchError(ValueError):
    """Input features do not match the list a model was trained on."""


def dumps(obj) -> str:
    """Deterministic JSON text; non-finite floats become null."""

    def clean(v):
        if isinstance(v, float):
            return v if math.isfinite(v) else None
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, np.generic):
            return clean(v.item())
        return v

    return json.dumps(clean(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


@dataclass(frozen=True)
class ModelBundle:
    model: Union[SvmModel, KMeansModel]
    feature_names: tuple
    means: np.ndarray
    sds: np.ndarray

    def prepare(self, matrix: FeatureMatrix) -> np.ndarray:
        """Standardised rows of ``matrix`` in the model's feature order.

        ``matrix`` must hold raw (unstandardised) features.
        """
        if matrix.standardized:
            raise ValueError("pass raw features; the bundle applies its own standardisation")
        missing = [n for n in self.feature_names if n not in matrix.feature_names]
        if missing:
            raise FeatureMismatchError(f"input lacks features the model was trained on: {missing}")
        idx = [matrix.feature_names.index(n) for n in self.feature_names]
        x = matrix.values[:, idx]
        safe = np.where(self.sds > 0, self.sds, 1.0)
        return np.where(self.sds > 0, (x - self.means) / safe, 0.0)

    def prepare_standardized(self, matrix: FeatureMatrix) -> np.ndarray:
        if tuple(matrix.feature_names) != tuple(self.feature_names):
            raise FeatureMismatchError(
                f"feature list {list(matrix.feature_names)} differs from model's {list(self.feature_names)}"
            )
        return matrix.values

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "feature_names": list(self.feature_names),
            "standardization": {"means": self.means.tolist(), "sds": self.sds.tolist()},
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelBundle":
        if d.get("format") != FORMAT:
            raise ValueError("not a botsentinel model file")
        if d.get("version") != VERSION:
            raise ValueError(f"unsupported model file version {d.get('version')!r}")
        m = d["model"]
        model = SvmModel.from_dict(m) if m["type"] == "svm" else KMeansModel.from_dict(m)
        st = d["standardization"]
        return cls(model, tuple(d["feature_names"]), np.array(st["means"], dtype=float),
                   np.array(st["sds"], dtype=float))


def save_model(bundle: ModelBundle, path) -> None:
    atomic_write_text(path, dumps(bundle.to_dict()))


def load_model(path) -> ModelBundle:
    with open(path, encoding="utf-8") as fh:
        return ModelBundle.from_dict(json.load(fh))
