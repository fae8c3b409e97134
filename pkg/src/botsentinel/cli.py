"""Command-line pipeline: synth -> extract -> select -> train -> evaluate / conformal / importance -> report.

Every stage reads its inputs from and writes its outputs to ``--out``.
Settings resolve as command-line flag, then ``BOTSENTINEL_*`` environment
variable, then the ``[run]`` section of ``--config``, then the defaults.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from types import SimpleNamespace
from typing import Optional

import numpy as np

from . import __version__
from .conformal import calibrate, coverage_report, forced_label, prediction_sets
from .corpus import INORGANIC, ORGANIC, DatasetSplit, atomic_write_text, load_corpus, save_corpus, split_dataset
from .importance import accuracy_scores
from .kmeans import KMeansModel, kmeans_fit, kmeans_score
from .metrics import evaluate
from .models_io import ModelBundle, dumps, load_model, save_model
from .pipeline import extract_features, kmeans_trainer, svm_trainer
from .selection import FeatureMatrix, select_by_vif, standardize
from .semantic import load_lexicon
from .svm import svm_fit
from .synthgen import generate_corpus, load_profiles

ENV_PREFIX = "BOTSENTINEL_"


class StageError(Exception):
    """A stage cannot run; the message is reported on one line."""


@dataclass
class RunConfig:
    seed: Optional[int] = None
    out: str = "out"
    corpus: Optional[str] = None
    lexicons: Optional[str] = None  # three comma-separated paths; bundled demo lexicons if unset
    profiles: Optional[str] = None
    n_organic: int = 470
    n_inorganic: int = 373
    tweet_scale: float = 1.0
    bin_width: int = 10800
    vif_threshold: float = 5.0
    kernel: str = "rbf"
    c: float = 1.0
    gamma: Optional[float] = None
    alpha: float = 0.1
    fractions: str = "0.4,0.3,0.3"

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    @property
    def corpus_path(self) -> Path:
        return Path(self.corpus) if self.corpus else self.out_dir / "corpus.jsonl"

    @property
    def split_fractions(self) -> tuple:
        parts = tuple(float(v) for v in self.fractions.split(","))
        if len(parts) != 3:
            raise StageError("fractions must list three comma-separated numbers")
        return parts


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw):
    if raw is None or raw == "":
        return None
    kind = _FIELD_TYPES[name]
    try:
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError:
        raise StageError(f"bad value for {name}: {raw!r}") from None
    return str(raw)


def resolve_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    values = asdict(RunConfig())
    if getattr(args, "config", None):
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        if not cp.read(args.config, encoding="utf-8"):
            raise StageError(f"config file not found: {args.config}")
        if cp.has_section("run"):
            for key, raw in cp["run"].items():
                if key not in values:
                    raise StageError(f"unknown config key {key!r}")
                values[key] = _coerce(key, raw)
    for key in values:
        env = environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            values[key] = _coerce(key, env)
    for key in values:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig(**values)
    if cfg.seed is None:
        raise StageError("a seed is required (--seed, BOTSENTINEL_SEED or [run] seed)")
    if cfg.kernel not in ("linear", "rbf"):
        raise StageError(f"unknown kernel {cfg.kernel!r}")
    return cfg


def _need(path: Path, producer: str) -> Path:
    if not path.exists():
        raise StageError(f"missing {path}; run 'botsentinel {producer}' first")
    return path


def _read_json(path: Path, producer: str):
    with open(_need(path, producer), encoding="utf-8") as fh:
        return json.load(fh)


def _read_matrix(path: Path, producer: str) -> FeatureMatrix:
    return FeatureMatrix.from_csv(_need(path, producer).read_text(encoding="utf-8"))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(path, text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _lexicons(cfg: RunConfig):
    if not cfg.lexicons:
        return None
    paths = [p.strip() for p in cfg.lexicons.split(",")]
    if len(paths) != 3:
        raise StageError("lexicons must name exactly three files")
    for p in paths:
        if not Path(p).exists():
            raise StageError(f"lexicon file not found: {p}")
    return [load_lexicon(p) for p in paths]


# ---------------------------------------------------------------- stages


def cmd_synth(cfg: RunConfig) -> Path:
    profiles = load_profiles(cfg.profiles) if cfg.profiles else None
    corpus = generate_corpus(cfg.n_organic, cfg.n_inorganic, cfg.seed, profiles, cfg.tweet_scale)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / "corpus.jsonl"
    save_corpus(corpus, path)
    return path


def cmd_extract(cfg: RunConfig) -> Path:
    corpus = load_corpus(_need(cfg.corpus_path, "synth"))
    ext = extract_features(corpus, _lexicons(cfg), cfg.bin_width)
    _write(cfg.out_dir / "features.csv", ext.matrix.to_csv())
    excluded = list(ext.excluded) + [(u, "no tweets") for u in corpus.skipped_ids]
    _write(cfg.out_dir / "excluded.csv", _csv(["user_id", "reason"], sorted(excluded)))
    return cfg.out_dir / "features.csv"


def cmd_select(cfg: RunConfig) -> Path:
    raw = _read_matrix(cfg.out_dir / "features.csv", "extract")
    if raw.labels is None:
        raise StageError("features.csv has no labels; selection and training need labelled users")
    records = [SimpleNamespace(user_id=u, label=lab) for u, lab in zip(raw.user_ids, raw.labels)]
    split = split_dataset(records, cfg.split_fractions, cfg.seed)
    train = standardize(raw.rows(split.train))
    report = select_by_vif(train, cfg.vif_threshold)
    selected = standardize(raw, train).columns(report.retained)
    _write(cfg.out_dir / "features_selected.csv", selected.to_csv())
    doc = {
        "split": split.to_dict(),
        "standardization": {
            "feature_names": list(train.feature_names),
            "means": train.means.tolist(),
            "sds": train.sds.tolist(),
            "constant": list(train.constant),
        },
        "vif": report.to_dict(),
    }
    _write(cfg.out_dir / "selection.json", dumps(doc))
    return cfg.out_dir / "selection.json"


def _selection(cfg: RunConfig):
    doc = _read_json(cfg.out_dir / "selection.json", "select")
    return doc, DatasetSplit.from_dict(doc["split"])


def _bundle(doc: dict, model) -> ModelBundle:
    st = doc["standardization"]
    retained = doc["vif"]["retained"]
    idx = [st["feature_names"].index(n) for n in retained]
    return ModelBundle(model, tuple(retained), np.array(st["means"])[idx], np.array(st["sds"])[idx])


def _labelled_rows(selected: FeatureMatrix, ids) -> FeatureMatrix:
    sub = selected.rows(ids)
    keep = [u for u, lab in zip(sub.user_ids, sub.labels) if lab is not None]
    return sub.rows(keep)


def cmd_train(cfg: RunConfig) -> list:
    doc, split = _selection(cfg)
    selected = _read_matrix(cfg.out_dir / "features_selected.csv", "select")
    train = _labelled_rows(selected, split.train)
    svm = svm_fit(train.values, train.labels, C=cfg.c, kernel=cfg.kernel, gamma=cfg.gamma, seed=cfg.seed)
    km = kmeans_fit(train.values, train.labels, k=2, seed=cfg.seed)
    paths = [cfg.out_dir / "model_svm.json", cfg.out_dir / "model_kmeans.json"]
    for path, model in zip(paths, (svm, km)):
        save_model(_bundle(doc, model), path)
    return paths


def _test_rows(cfg: RunConfig, split: DatasetSplit, part: str = "test"):
    raw = _read_matrix(cfg.out_dir / "features.csv", "extract")
    ids = getattr(split, part)
    sub = raw.rows([u for u in raw.user_ids if u in ids])
    return sub


def _scores(bundle: ModelBundle, X) -> np.ndarray:
    if isinstance(bundle.model, KMeansModel):
        return kmeans_score(bundle.model, X)
    return bundle.model.predict_proba(X)[:, 0]


def cmd_evaluate(cfg: RunConfig) -> list:
    _, split = _selection(cfg)
    test = _test_rows(cfg, split)
    labelled = [i for i, lab in enumerate(test.labels or []) if lab is not None]
    if not labelled:
        raise StageError("test split has no labelled users")
    test = test.rows([test.user_ids[i] for i in labelled])
    outputs = []
    for name in ("svm", "kmeans"):
        bundle = load_model(_need(cfg.out_dir / f"model_{name}.json", "train"))
        X = bundle.prepare(test)
        rep = evaluate(bundle.model.predict(X), _scores(bundle, X), test.labels, positive_class=ORGANIC)
        _write(cfg.out_dir / f"eval_{name}.json", dumps(rep.to_dict()))
        _write(cfg.out_dir / f"roc_{name}.csv", _csv(["fpr", "tpr"], [(repr(a), repr(b)) for a, b in rep.roc_points or []]))
        outputs.append(cfg.out_dir / f"eval_{name}.json")
    return outputs


def cmd_conformal(cfg: RunConfig) -> Path:
    _, split = _selection(cfg)
    bundle = load_model(_need(cfg.out_dir / "model_svm.json", "train"))
    model = bundle.model
    cal = _test_rows(cfg, split, "calibration")
    calib = calibrate(model, bundle.prepare(cal), cal.labels, cfg.alpha)
    test = _test_rows(cfg, split)
    sets = prediction_sets(model, bundle.prepare(test), calib)
    labels = test.labels or [None] * len(sets)
    rows = []
    for uid, s, lab in zip(test.user_ids, sets, labels):
        rows.append({
            "user_id": uid,
            "p_organic": s.p_values[ORGANIC],
            "p_inorganic": s.p_values[INORGANIC],
            "set": list(s.members),
            "covered": None if lab is None else lab in s,
        })
    known = [(s, lab) for s, lab in zip(sets, labels) if lab is not None]
    summary = coverage_report([s for s, _ in known], [lab for _, lab in known])
    forced = [forced_label(s, ORGANIC) for s, _ in known]
    p_org = [s.p_values[ORGANIC] for s, _ in known]
    forced_eval = evaluate(forced, p_org, [lab for _, lab in known], positive_class=ORGANIC)
    doc = {
        "alpha": cfg.alpha,
        "n_calibration": len(calib),
        "rows": rows,
        "summary": summary.to_dict(),
        "forced_label_evaluation": forced_eval.to_dict(),
    }
    _write(cfg.out_dir / "conformal.json", dumps(doc))
    edges = summary.pvalue_bin_edges
    _write(cfg.out_dir / "pvalue_hist.csv", _csv(
        ["bin_low", "bin_high", "count"],
        [(repr(edges[i]), repr(edges[i + 1]), c) for i, c in enumerate(summary.pvalue_histogram)],
    ))
    _write(cfg.out_dir / "set_size_hist.csv", _csv(["set_size", "count"], sorted(summary.size_histogram.items())))
    _write(cfg.out_dir / "set_sizes.csv", _csv(["user_id", "set_size"], [(r["user_id"], len(r["set"])) for r in rows]))
    return cfg.out_dir / "conformal.json"


def cmd_importance(cfg: RunConfig) -> list:
    _, split = _selection(cfg)
    selected = _read_matrix(cfg.out_dir / "features_selected.csv", "select")
    train = _labelled_rows(selected, split.train)
    test = _labelled_rows(selected, split.test)
    trainers = {
        "svm": svm_trainer(C=cfg.c, kernel=cfg.kernel, gamma=cfg.gamma),
        "kmeans": kmeans_trainer(),
    }
    outputs = []
    for name, trainer in trainers.items():
        rep = accuracy_scores(trainer, train.values, train.labels, test.values, test.labels,
                              seed=cfg.seed, feature_names=train.feature_names)
        _write(cfg.out_dir / f"importance_{name}.csv", rep.to_csv())
        outputs.append(cfg.out_dir / f"importance_{name}.csv")
    return outputs


def _read_csv(path: Path, producer: str) -> list:
    with open(_need(path, producer), encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_report(cfg: RunConfig) -> Path:
    out = cfg.out_dir
    doc = {
        "botsentinel_version": __version__,
        "config": asdict(cfg),
        "seed": cfg.seed,
        "n_users": len(_read_matrix(out / "features.csv", "extract").user_ids),
        "excluded": _read_csv(out / "excluded.csv", "extract"),
        "selection": _read_json(out / "selection.json", "select"),
        "evaluation": {n: _read_json(out / f"eval_{n}.json", "evaluate") for n in ("svm", "kmeans")},
        "conformal": _read_json(out / "conformal.json", "conformal"),
        "importance": {n: _read_csv(out / f"importance_{n}.csv", "importance") for n in ("svm", "kmeans")},
    }
    _write(out / "report.json", dumps(doc))
    return out / "report.json"


STAGES = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "select": cmd_select,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "conformal": cmd_conformal,
    "importance": cmd_importance,
    "report": cmd_report,
}


def cmd_run(cfg: RunConfig) -> None:
    stages = list(STAGES)
    if cfg.corpus:
        stages.remove("synth")
    for name in stages:
        STAGES[name](cfg)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file with a [run] section")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--alpha", type=float, metavar="F")
    common.add_argument("--vif-threshold", dest="vif_threshold", type=float, metavar="F")
    common.add_argument("--bin-width", dest="bin_width", type=int, metavar="SECONDS")
    common.add_argument("--kernel", choices=("linear", "rbf"))
    common.add_argument("--c", type=float, metavar="F", help="SVM soft-margin penalty")
    common.add_argument("--gamma", type=float, metavar="F", help="RBF width (default 1/(d * mean variance))")
    common.add_argument("--out", metavar="DIR", help="artifact directory (default ./out)")
    common.add_argument("--corpus", metavar="PATH", help="corpus JSONL (default OUT/corpus.jsonl)")
    common.add_argument("--lexicons", metavar="A,B,C", help="three lexicon TSV files")
    common.add_argument("--fractions", metavar="TR,CAL,TE", help="split fractions, e.g. 0.4,0.3,0.3")
    common.add_argument("--profiles", metavar="PATH", help="generator profile file (synth)")
    common.add_argument("--n-organic", dest="n_organic", type=int, metavar="N")
    common.add_argument("--n-inorganic", dest="n_inorganic", type=int, metavar="N")
    common.add_argument("--tweet-scale", dest="tweet_scale", type=float, metavar="F")

    parser = argparse.ArgumentParser(prog="botsentinel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*STAGES, "run"]:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        (cmd_run if args.command == "run" else STAGES[args.command])(cfg)
    except (StageError, ValueError, KeyError, OSError, RuntimeError) as exc:
        msg = str(exc).replace("\n", " ")
        print(json.dumps({"error": msg, "command": args.command, "type": type(exc).__name__}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
