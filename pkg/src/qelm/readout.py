"""Trained readout layer: closed-form ridge regression and classification.

The only trained component of the model. Regression solves the normal
equations with an L2 penalty on every weight except the bias; classification
is one-hot ridge with argmax decoding. Metrics and bootstrap confidence
intervals live here too.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._seeding import subseed
from .features import FeatureMatrix

DEFAULT_RIDGE_REGRESSION = 1e-6
DEFAULT_RIDGE_CLASSIFICATION = 1e-3
MIN_BOOTSTRAP_RESAMPLES = 100

MODEL_SCHEMA = "qelm.model/1"


@dataclass
class RidgeModel:
    """Linear readout weights; column 0 of the features is the bias."""

    weights: np.ndarray
    ridge_lambda: float
    feature_names: tuple[str, ...]
    classes: np.ndarray | None = None

    def predict(self, fm: FeatureMatrix) -> np.ndarray:
        if fm.names != self.feature_names:
            raise ValueError("feature schema does not match the fitted model")
        return fm.values @ self.weights

    def predict_labels(self, fm: FeatureMatrix) -> np.ndarray:
        if self.classes is None:
            raise ValueError("not a classification model")
        scores = self.predict(fm)
        # argmax returns the first maximum, i.e. ties go to the lowest class index
        return self.classes[np.argmax(scores, axis=1)]


def _solve_ridge(r: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    gram = r.T @ r
    penalty = np.eye(r.shape[1]) * lam
    penalty[0, 0] = 0.0  # bias weight is never regularized
    try:
        return np.linalg.solve(gram + penalty, r.T @ y)
    except np.linalg.LinAlgError as err:
        raise ValueError(f"ridge system is singular: {err}") from None


def fit_ridge(fm: FeatureMatrix, targets: np.ndarray, ridge_lambda: float = DEFAULT_RIDGE_REGRESSION) -> RidgeModel:
    """Closed-form ridge regression with an unregularized bias weight."""
    if ridge_lambda < 0:
        raise ValueError("ridge penalty must be non-negative")
    y = np.asarray(targets, dtype=float)
    if y.shape[0] != fm.n_samples:
        raise ValueError("target count must match sample count")
    if fm.n_samples < 2:
        raise ValueError("need at least two training rows")
    weights = _solve_ridge(fm.values, y, ridge_lambda)
    return RidgeModel(weights=weights, ridge_lambda=ridge_lambda, feature_names=fm.names)


def fit_classifier(
    fm: FeatureMatrix, labels: np.ndarray, ridge_lambda: float = DEFAULT_RIDGE_CLASSIFICATION
) -> RidgeModel:
    """One-hot ridge classifier decoded by argmax over class scores."""
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("training labels contain fewer than two classes")
    onehot = (labels[:, None] == classes[None, :]).astype(float)
    base = fit_ridge(fm, onehot, ridge_lambda)
    base.classes = classes
    return base


def majority_baseline(labels_train: np.ndarray, labels_test: np.ndarray) -> np.ndarray:
    """Predictions of the constant most-frequent-class baseline."""
    labels_train = np.asarray(labels_train)
    classes, counts = np.unique(labels_train, return_counts=True)
    majority = classes[np.argmax(counts)]
    return np.full(np.asarray(labels_test).shape, majority)


def r_squared(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """1 - MSE / population variance of the targets."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size < 2:
        raise ValueError("need matching 1-d arrays with at least two entries")
    var = float(np.var(y_true))
    if var == 0.0:
        raise ValueError("targets have zero variance")
    mse = float(np.mean((y_true - y_pred) ** 2))
    return 1.0 - mse / var


@dataclass
class MetricReport:
    """Named metric values with optional bootstrap confidence intervals."""

    task: str
    values: dict = field(default_factory=dict)
    intervals: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "schema": "qelm.metrics/1",
            "task": self.task,
            "values": {k: float(v) for k, v in sorted(self.values.items())},
            "intervals": {
                k: [float(lo), float(hi)] for k, (lo, hi) in sorted(self.intervals.items())
            },
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def classification_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> MetricReport:
    """Accuracy plus macro/weighted F1 and precision.

    Classes absent from both truth and prediction are excluded; a per-class
    score with a zero denominator counts as 0.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise ValueError("need matching non-empty 1-d label arrays")
    classes = np.unique(np.concatenate([y_true, y_pred]))
    precision = np.zeros(classes.size)
    recall = np.zeros(classes.size)
    f1 = np.zeros(classes.size)
    support = np.zeros(classes.size)
    for i, c in enumerate(classes):
        tp = float(np.sum((y_true == c) & (y_pred == c)))
        fp = float(np.sum((y_true != c) & (y_pred == c)))
        fn = float(np.sum((y_true == c) & (y_pred != c)))
        support[i] = tp + fn
        precision[i] = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall[i] = tp / (tp + fn) if tp + fn > 0 else 0.0
        denom = precision[i] + recall[i]
        f1[i] = 2.0 * precision[i] * recall[i] / denom if denom > 0 else 0.0
    w = support / support.sum() if support.sum() > 0 else support
    return MetricReport(
        task="classification",
        values={
            "accuracy": float(np.mean(y_true == y_pred)),
            "f1_macro": float(f1.mean()),
            "f1_weighted": float(f1 @ w),
            "precision_macro": float(precision.mean()),
            "precision_weighted": float(precision @ w),
        },
    )


def bootstrap_ci(eval_fn, n_resamples: int, seed: int) -> tuple[float, float]:
    """Percentile 95% interval of eval_fn over deterministic resample generators.

    ``eval_fn(rng)`` must draw its resample (training rows or shots) from the
    generator it receives and return a scalar metric.
    """
    if n_resamples < MIN_BOOTSTRAP_RESAMPLES:
        raise ValueError(f"need at least {MIN_BOOTSTRAP_RESAMPLES} resamples")
    values = np.empty(n_resamples)
    for b in range(n_resamples):
        rng = np.random.default_rng(subseed(seed, b))
        values[b] = float(eval_fn(rng))
    lo, hi = np.percentile(values, [2.5, 97.5])
    return float(lo), float(hi)


def model_to_json(model: RidgeModel) -> str:
    doc = {
        "schema": MODEL_SCHEMA,
        "ridge_lambda": model.ridge_lambda,
        "feature_names": list(model.feature_names),
        "weights": np.asarray(model.weights).tolist(),
        "classes": None if model.classes is None else np.asarray(model.classes).tolist(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def model_from_json(text: str) -> RidgeModel:
    doc = json.loads(text)
    if doc.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"unsupported model schema: {doc.get('schema')!r}")
    classes = doc["classes"]
    return RidgeModel(
        weights=np.array(doc["weights"], dtype=float),
        ridge_lambda=doc["ridge_lambda"],
        feature_names=tuple(doc["feature_names"]),
        classes=None if classes is None else np.array(classes),
    )
