"""Troll/user classification protocol: undersampling, stratified CV, metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from trollirl.boost import feature_importance, predict_score, train_adaboost


@dataclass
class Dataset:
    ids: list[str]
    X: np.ndarray
    y: np.ndarray  # 1 = troll, 0 = user

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if len(self.ids) != len(self.X) or len(self.X) != len(self.y):
            raise ValueError("ids, X and y must have the same length")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("features must be finite")

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset([self.ids[i] for i in idx], self.X[idx], self.y[idx])


@dataclass
class EvalReport:
    auc: float
    tpr: float
    tnr: float
    precision: float
    recall: float
    f1: float
    accuracy: float
    feature_importance: np.ndarray

    def to_dict(self) -> dict:
        d = asdict(self)
        d["feature_importance"] = [float(v) for v in self.feature_importance]
        return d


@dataclass
class CvResult:
    folds: list[EvalReport]
    mean: EvalReport
    oof_scores: np.ndarray
    oof_auc: float


@dataclass
class EvaluationResult:
    splits: list[CvResult] = field(default_factory=list)
    aggregate: EvalReport = None


def standardize(X, means=None, stds=None):
    """Column-wise ``(x - mean) / std`` with population std.

    Without ``means``/``stds`` they are fitted on ``X``; zero-variance
    columns are centred only and get a recorded std of 1.
    """
    X = np.asarray(X, dtype=float)
    if means is None:
        if len(X) < 2:
            raise ValueError("need at least two rows to standardize")
        means = X.mean(axis=0)
        stds = X.std(axis=0)
        stds = np.where(stds > 0, stds, 1.0)
    return (X - means) / stds, means, stds


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(pos > neg) + P(pos == neg) / 2 over all pairs."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    n1 = int(pos.sum())
    n0 = len(labels) - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("both classes must be present")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def threshold_metrics(pred, labels) -> dict:
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    tp = int(np.sum((pred == 1) & (labels == 1)))
    tn = int(np.sum((pred == 0) & (labels == 0)))
    fp = int(np.sum((pred == 1) & (labels == 0)))
    fn = int(np.sum((pred == 0) & (labels == 1)))
    tpr = tp / (tp + fn) if tp + fn else 0.0
    tnr = tn / (tn + fp) if tn + fp else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    f1 = 2 * precision * tpr / (precision + tpr) if precision + tpr else 0.0
    return dict(tpr=tpr, tnr=tnr, precision=precision, recall=tpr, f1=f1,
                accuracy=(tp + tn) / len(labels))


def undersample_splits(data: Dataset, parts: int = 5, seed: int = 0) -> list[Dataset]:
    """All positives paired with each of ``parts`` disjoint slices of the negatives."""
    pos = np.flatnonzero(data.y == 1)
    neg = np.flatnonzero(data.y == 0)
    if parts < 1:
        raise ValueError("parts must be positive")
    if len(neg) < parts:
        raise ValueError(f"{len(neg)} negatives cannot be split into {parts} parts")
    if parts == 1:
        return [data]
    rng = np.random.default_rng(seed)
    chunks = np.array_split(rng.permutation(neg), parts)
    return [data.subset(np.sort(np.concatenate([pos, chunk]))) for chunk in chunks]


def stratified_folds(y, folds: int, seed: int = 0) -> np.ndarray:
    """Fold id per sample; each class is dealt round-robin after a seeded shuffle."""
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    if folds < 2:
        raise ValueError("need at least two folds")
    if counts.min() < folds:
        raise ValueError(f"smallest class has {counts.min()} members, fewer than {folds} folds")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in classes])
    fold_of = np.empty(len(y), dtype=int)
    fold_of[order] = np.arange(len(y)) % folds
    return fold_of


def _mean_report(reports: Sequence[EvalReport]) -> EvalReport:
    keys = ("auc", "tpr", "tnr", "precision", "recall", "f1", "accuracy")
    means = {k: float(np.mean([getattr(r, k) for r in reports])) for k in keys}
    imp = np.mean([r.feature_importance for r in reports], axis=0)
    return EvalReport(**means, feature_importance=imp / imp.sum())


def cross_validate(data: Dataset, folds: int = 10, rounds: int = 500, lr: float = 0.05,
                   seed: int = 0, scale: bool = True) -> CvResult:
    """Stratified k-fold AdaBoost; scaling is fitted on each training portion only."""
    fold_of = stratified_folds(data.y, folds, seed)
    oof = np.zeros(len(data))
    reports = []
    for k in range(folds):
        train, test = fold_of != k, fold_of == k
        X_train, X_test = data.X[train], data.X[test]
        if scale:
            X_train, means, stds = standardize(X_train)
            X_test, _, _ = standardize(X_test, means, stds)
        model = train_adaboost(X_train, data.y[train], rounds, lr)
        scores = predict_score(model, X_test)
        oof[test] = scores
        reports.append(EvalReport(auc=roc_auc(scores, data.y[test]),
                                  **threshold_metrics(scores > 0, data.y[test]),
                                  feature_importance=feature_importance(model)))
    return CvResult(reports, _mean_report(reports), oof, roc_auc(oof, data.y))


def evaluate(data: Dataset, parts: int = 5, folds: int = 10, rounds: int = 500,
             lr: float = 0.05, seed: int = 0, scale: bool = True) -> EvaluationResult:
    """Cross-validate on every undersampled split and average the split means."""
    if len(np.unique(data.y)) < 2:
        raise ValueError("both classes must be present")
    result = EvaluationResult()
    for i, split in enumerate(undersample_splits(data, parts, seed)):
        result.splits.append(cross_validate(split, folds, rounds, lr, seed + i, scale))
    result.aggregate = _mean_report([s.mean for s in result.splits])
    return result
