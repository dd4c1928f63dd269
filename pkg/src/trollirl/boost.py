"""Discrete AdaBoost over depth-one decision stumps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

# Error floor used for a perfect stump so its stage weight stays finite.
_MIN_ERR = 1e-10
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float
    # +1: predict troll when x[feature] > threshold.  -1: the reverse.
    polarity: int
    stage_weight: float

    def sign(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.where(X[:, self.feature] > self.threshold, self.polarity, -self.polarity)


@dataclass
class BoostModel:
    n_features: int
    stumps: list[Stump] = field(default_factory=list)

    def truncated(self, n: int) -> "BoostModel":
        return BoostModel(self.n_features, self.stumps[:n])


def _signed_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 (user) or 1 (troll)")
    if y.min() == y.max():
        raise ValueError("both classes must be present")
    return np.where(y == 1, 1.0, -1.0)


def best_stump(X: np.ndarray, ys: np.ndarray, w: np.ndarray) -> tuple[int, float, int, float]:
    """Weighted-error minimising stump ``(feature, threshold, polarity, err)``.

    Thresholds are midpoints between consecutive distinct values. Ties go to
    the lowest feature, then the lowest threshold, then polarity +1.
    """
    n, d = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    wpos = np.where(ys > 0, w, 0.0)[order]
    wneg = np.where(ys < 0, w, 0.0)[order]
    total = w.sum()
    # Split after sorted position i: rows 0..i fall at or below the threshold.
    below_pos = np.cumsum(wpos, axis=0)[:-1]
    below_neg = np.cumsum(wneg, axis=0)[:-1]
    err_plus = below_pos + (wneg.sum(axis=0) - below_neg)
    err_minus = total - err_plus
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        raise ValueError("no feature takes more than one value")
    err = np.stack([np.where(valid, err_plus, np.inf), np.where(valid, err_minus, np.inf)])
    best = err.min()
    pol_idx, pos, feat = np.nonzero(err <= best + _TIE_TOL)
    # Lexicographic (feature, position, polarity) minimum.
    k = np.lexsort((pol_idx, pos, feat))[0]
    j, i, p = int(feat[k]), int(pos[k]), int(pol_idx[k])
    lo, hi = xs[i, j], xs[i + 1, j]
    thr = 0.5 * (lo + hi)
    if thr >= hi:
        thr = lo
    return j, float(thr), (1 if p == 0 else -1), float(err[p, i, j] / total)


def boost_rounds(X, y, rounds: int, lr: float) -> Iterator[tuple[Stump, np.ndarray]]:
    """Yield ``(stump, sample_weights)`` after each boosting round."""
    if rounds < 1:
        raise ValueError("rounds must be positive")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    X = np.asarray(X, dtype=float)
    ys = _signed_labels(y)
    w = np.full(len(ys), 1.0 / len(ys))
    for _ in range(rounds):
        j, thr, pol, err = best_stump(X, ys, w)
        err = min(err, 0.5)
        e = max(err, _MIN_ERR)
        alpha = lr * 0.5 * np.log((1.0 - e) / e)
        stump = Stump(j, thr, pol, float(alpha))
        w = w * np.exp(-alpha * ys * stump.sign(X))
        w = w / w.sum()
        yield stump, w
        if err <= 0.0 or err >= 0.5:
            return


def train_adaboost(X, y, rounds: int = 500, lr: float = 0.05) -> BoostModel:
    X = np.asarray(X, dtype=float)
    model = BoostModel(X.shape[1])
    for stump, _ in boost_rounds(X, y, rounds, lr):
        model.stumps.append(stump)
    return model


def predict_score(model: BoostModel, X) -> np.ndarray:
    """Additive score; a 1-D ``X`` is treated as a single sample."""
    if not model.stumps:
        raise ValueError("empty model")
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    score = np.zeros(len(X))
    for stump in model.stumps:
        score += stump.stage_weight * stump.sign(X)
    return score[0] if single else score


def predict(model: BoostModel, X, threshold: float = 0.0):
    """1 (troll) iff the score exceeds ``threshold``; ties go to user."""
    return (np.asarray(predict_score(model, X)) > threshold).astype(int)


def exponential_loss(model: BoostModel, X, y) -> float:
    ys = _signed_labels(y)
    score = predict_score(model, np.atleast_2d(X)) if model.stumps else np.zeros(len(ys))
    return float(np.mean(np.exp(-ys * score)))


def feature_importance(model: BoostModel) -> np.ndarray:
    """Share of total absolute stage weight spent on each feature."""
    if not model.stumps:
        raise ValueError("empty model")
    imp = np.zeros(model.n_features)
    for stump in model.stumps:
        imp[stump.feature] += abs(stump.stage_weight)
    total = imp.sum()
    if total == 0:
        return np.full(model.n_features, 1.0 / model.n_features)
    return imp / total
