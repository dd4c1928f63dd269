"""Troll vs. user reward comparison: KS tests, theta recovery, class summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import kolmogorov

from trollirl.evaluation import standardize

QUANTILE_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)
CORRECTIONS = ("none", "bonferroni")


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float


def ks_two_sample(a, b) -> KsResult:
    """Two-sample Kolmogorov-Smirnov test.

    The statistic ``sup |F_a - F_b|`` is evaluated at every merged sample
    point as ``|i*m - j*n| / (n*m)`` in integers, so it is the correctly
    rounded exact value. The p-value is the asymptotic Kolmogorov tail at
    ``sqrt(n*m / (n+m)) * D``.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValueError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    i = np.searchsorted(a, grid, side="right").astype(np.int64)
    j = np.searchsorted(b, grid, side="right").astype(np.int64)
    d = int(np.max(np.abs(i * m - j * n))) / (n * m)
    p = float(kolmogorov(np.sqrt(n * m / (n + m)) * d))
    return KsResult(d, min(max(p, 0.0), 1.0))


def recover_theta(f, r) -> np.ndarray:
    """Least-squares ``theta`` with ``theta @ f ~ r`` via the normal equations."""
    f = np.asarray(f, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.linalg.matrix_rank(f) < f.shape[0]:
        raise np.linalg.LinAlgError("feature matrix is rank deficient")
    return np.linalg.solve(f @ f.T, f @ r.T).T


@dataclass(frozen=True)
class ColumnSummary:
    mean: float
    variance: float
    quantiles: tuple[float, ...]

    @classmethod
    def of(cls, x) -> "ColumnSummary":
        x = np.asarray(x, dtype=float)
        return cls(float(x.mean()), float(x.var()),
                   tuple(float(q) for q in np.quantile(x, QUANTILE_LEVELS)))


@dataclass(frozen=True)
class ColumnComparison:
    name: str
    kind: str  # "reward" or "theta"
    troll: ColumnSummary
    user: ColumnSummary
    ks: KsResult
    significant: bool

    @property
    def mean_difference(self) -> float:
        return self.troll.mean - self.user.mean


def class_compare(rewards, labels: Sequence[str], names: Sequence[str],
                  thetas=None, theta_names: Optional[Sequence[str]] = None,
                  alpha: float = 0.01, scale: bool = True,
                  correction: str = "none") -> list[ColumnComparison]:
    """Per-column class summaries and KS tests, troll vs. user.

    Rewards are standardised over all accounts first when ``scale`` is set;
    theta columns are compared on their raw values. Each column is flagged
    at ``p < alpha``; ``correction="bonferroni"`` divides ``alpha`` by the
    number of columns tested.
    """
    if correction not in CORRECTIONS:
        raise ValueError(f"correction must be one of {CORRECTIONS}, got {correction!r}")
    labels = np.asarray(labels)
    is_troll = labels == "troll"
    is_user = labels == "user"
    if not is_troll.any() or not is_user.any():
        raise ValueError("both classes must be present")
    rewards = np.asarray(rewards, dtype=float)
    if scale:
        rewards, _, _ = standardize(rewards)
    blocks = [("reward", rewards, names)]
    if thetas is not None:
        blocks.append(("theta", np.asarray(thetas, dtype=float), theta_names))
    if correction == "bonferroni":
        alpha = alpha / sum(len(cols) for _, _, cols in blocks)
    out = []
    for kind, table, cols in blocks:
        for c, name in enumerate(cols):
            x_t, x_u = table[is_troll, c], table[is_user, c]
            ks = ks_two_sample(x_t, x_u)
            out.append(ColumnComparison(name, kind, ColumnSummary.of(x_t), ColumnSummary.of(x_u),
                                        ks, ks.p_value < alpha))
    return out


def comparison_to_dict(rows: Sequence[ColumnComparison]) -> list[dict]:
    out = []
    for row in rows:
        out.append({
            "name": row.name,
            "kind": row.kind,
            "troll": vars(row.troll) | {"quantiles": list(row.troll.quantiles)},
            "user": vars(row.user) | {"quantiles": list(row.user.quantiles)},
            "ks_statistic": row.ks.statistic,
            "p_value": row.ks.p_value,
            "significant": row.significant,
            "mean_difference": row.mean_difference,
        })
    return out


def comparison_long_rows(rows: Sequence[ColumnComparison]):
    """Tidy ``(class, column, stat, value)`` rows for external plotting."""
    for row in rows:
        for cls, summary in (("troll", row.troll), ("user", row.user)):
            yield cls, row.name, "mean", summary.mean
            yield cls, row.name, "variance", summary.variance
            for level, q in zip(QUANTILE_LEVELS, summary.quantiles):
                yield cls, row.name, f"q{int(level * 100):02d}", q
        yield "both", row.name, "ks_statistic", row.ks.statistic
        yield "both", row.name, "p_value", row.ks.p_value
        yield "both", row.name, "significant", int(row.significant)
