"""In-process pipeline stages shared by the CLI and the experiment scripts."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from trollirl.activity import (ActivityEvent, build_trajectories, collect_labels,
                               filter_accounts, parse_activity_log, Trajectory)
from trollirl.analysis import class_compare
from trollirl.config import PipelineConfig
from trollirl.deep import deep_maxent_irl_batch
from trollirl.evaluation import Dataset, EvaluationResult, evaluate
from trollirl.irl import Demonstrations, maxent_irl_batch
from trollirl.mdp import FEATURE_NAMES, PAIR_CODES, estimate_transitions, feature_matrix
from trollirl.sim import AgentSpec, EnvironmentModel, TROLL_THETA, USER_THETA, generate_population

log = logging.getLogger(__name__)

REWARD_COLUMNS = tuple(f"r_{code}" for code in PAIR_CODES)
THETA_COLUMNS = tuple(f"theta_{name}" for name in FEATURE_NAMES)


class DataError(ValueError):
    pass


def fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class RewardTable:
    ids: list[str]
    labels: list[Optional[str]]
    rewards: np.ndarray
    thetas: Optional[np.ndarray] = None
    errors: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.ids)

    def subset(self, keep: Iterable[str]) -> "RewardTable":
        keep = set(keep)
        idx = [i for i, a in enumerate(self.ids) if a in keep]
        return RewardTable([self.ids[i] for i in idx], [self.labels[i] for i in idx],
                           self.rewards[idx], None if self.thetas is None else self.thetas[idx])

    def labelled_dataset(self) -> Dataset:
        idx = [i for i, lab in enumerate(self.labels) if lab in ("troll", "user")]
        if len(idx) < len(self.ids):
            log.warning("%d accounts without a label are left out", len(self.ids) - len(idx))
        y = np.array([self.labels[i] == "troll" for i in idx], dtype=int)
        if len(np.unique(y)) < 2:
            raise DataError("classification needs both troll and user accounts")
        return Dataset([self.ids[i] for i in idx], self.rewards[idx], y)

    def write_csv(self, path) -> None:
        header = ["account_id", "label", *REWARD_COLUMNS]
        if self.thetas is not None:
            header += THETA_COLUMNS
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i, account_id in enumerate(self.ids):
                row = [account_id, self.labels[i] or "", *map(fmt, self.rewards[i])]
                if self.thetas is not None:
                    row += map(fmt, self.thetas[i])
                w.writerow(row)

    @classmethod
    def read_csv(cls, path) -> "RewardTable":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            for col in ("account_id", "label", *REWARD_COLUMNS):
                if col not in fields:
                    raise DataError(f"{path}: missing column {col!r}")
            has_theta = all(c in fields for c in THETA_COLUMNS)
            ids, labels, rewards, thetas = [], [], [], []
            for lineno, row in enumerate(reader, start=2):
                try:
                    rewards.append([float(row[c]) for c in REWARD_COLUMNS])
                    if has_theta:
                        thetas.append([float(row[c]) for c in THETA_COLUMNS])
                except (TypeError, ValueError):
                    raise DataError(f"{path}: line {lineno}: non-numeric value") from None
                ids.append(row["account_id"])
                labels.append(row["label"] or None)
        if not ids:
            raise DataError(f"{path}: no accounts")
        return cls(ids, labels, np.array(rewards),
                   np.array(thetas) if has_theta else None)


def read_events(path) -> list[ActivityEvent]:
    with open(path, encoding="utf-8") as fh:
        return parse_activity_log(fh)


def read_labels_csv(path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"account_id", "label"} <= set(reader.fieldnames):
            raise DataError(f"{path}: labels file needs account_id and label columns")
        out = {}
        for row in reader:
            if row["label"] not in ("troll", "user"):
                raise DataError(f"{path}: bad label {row['label']!r} for {row['account_id']!r}")
            out[row["account_id"]] = row["label"]
    return out


def write_labels_csv(labels: dict[str, str], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["account_id", "label"])
        for account_id in sorted(labels):
            w.writerow([account_id, labels[account_id]])


def merge_labels(events: Sequence[ActivityEvent], labels_path=None) -> dict[str, str]:
    labels = collect_labels(events)
    if labels_path is not None and Path(labels_path).exists():
        for account_id, label in read_labels_csv(labels_path).items():
            if labels.setdefault(account_id, label) != label:
                raise DataError(f"conflicting labels for account {account_id!r}")
    return labels


def simulate(cfg: PipelineConfig):
    """Synthetic labelled population per the [simulate] section."""
    sc = cfg.simulate
    troll = AgentSpec(theta_true=TROLL_THETA, temperature=sc.temperature, label="troll")
    user = AgentSpec(theta_true=USER_THETA, temperature=sc.temperature, label="user")
    steps = sc.steps_min if sc.steps_min == sc.steps_max else (sc.steps_min, sc.steps_max)
    return generate_population(sc.n_troll, sc.n_user, troll, user, EnvironmentModel(), steps,
                               cfg.seed, sc.spread, sc.gamma)


def fit_rewards(trajectories: dict[str, Trajectory], labels: dict[str, str],
                cfg: PipelineConfig) -> RewardTable:
    """One IRL fit per account; failures are collected in ``errors``."""
    f = feature_matrix()
    errors: dict[str, str] = {}
    ids, Ts, trajs = [], [], []
    for account_id in sorted(trajectories):
        traj = trajectories[account_id]
        if len(traj) < 2:
            errors[account_id] = "trajectory shorter than 2 steps"
            continue
        ids.append(account_id)
        Ts.append(estimate_transitions(traj))
        trajs.append(traj)
    if not ids:
        return RewardTable([], [], np.zeros((0, len(PAIR_CODES))), None, errors)
    demos = Demonstrations.from_trajectories(Ts, trajs)
    if cfg.irl_variant == "linear":
        fit = maxent_irl_batch(f, demos, cfg.irl)
    else:
        fit = deep_maxent_irl_batch(f, demos, cfg.irl, cfg.hidden)
    ok = [i for i, e in enumerate(fit.errors) if e is None]
    for i, e in enumerate(fit.errors):
        if e is not None:
            errors[ids[i]] = f"{type(e).__name__}: {e}"
    return RewardTable([ids[i] for i in ok], [labels.get(ids[i]) for i in ok],
                       fit.rewards[ok], fit.params[ok] if cfg.irl_variant == "linear" else None,
                       errors)


def rewards_from_events(events: Sequence[ActivityEvent], labels: dict[str, str],
                        cfg: PipelineConfig) -> tuple[RewardTable, dict[str, Trajectory]]:
    trajectories = build_trajectories(events, cfg.k)
    if not trajectories:
        raise DataError(f"empty retained set: no account has {cfg.k} active and "
                        f"{cfg.k} passive events")
    return fit_rewards(trajectories, labels, cfg), trajectories


def classify(table: RewardTable, cfg: PipelineConfig) -> EvaluationResult:
    cc = cfg.classifier
    return evaluate(table.labelled_dataset(), cc.undersample_parts, cc.folds, cc.rounds, cc.lr,
                    cfg.seed, cc.scale)


def classification_report(result: EvaluationResult, cfg: PipelineConfig) -> dict:
    def block(report):
        d = report.to_dict()
        d["feature_importance"] = dict(zip(PAIR_CODES, d["feature_importance"]))
        return d

    splits = []
    for i, split in enumerate(result.splits):
        splits.append({
            "split": i,
            "mean": block(split.mean),
            "oof_auc": split.oof_auc,
            "folds": [block(r) | {"fold": k} for k, r in enumerate(split.folds)],
        })
    return {"config": cfg.to_dict(), "aggregate": block(result.aggregate), "splits": splits}


def analyze(table: RewardTable, cfg: PipelineConfig):
    labels = [lab or "" for lab in table.labels]
    return class_compare(table.rewards, labels, PAIR_CODES, table.thetas,
                         THETA_COLUMNS if table.thetas is not None else None,
                         cfg.analysis.alpha, cfg.analysis.scale, cfg.analysis.correction)


SWEEP_METRICS = ("accuracy", "precision", "recall", "f1", "auc")


def varying_k_sweep(events: Sequence[ActivityEvent], labels: dict[str, str],
                    cfg: PipelineConfig, k_values: Optional[Sequence[int]] = None) -> list[dict]:
    """Classification metrics for each filtering threshold ``k``.

    A trajectory does not depend on ``k`` (it only decides who is kept), so
    rewards are fitted once for the accounts kept at the smallest ``k`` and
    reused; this equals refitting per ``k`` because fits are per account.
    Failures at one ``k`` are recorded in its row and the sweep continues.
    """
    k_values = list(k_values or cfg.k_values)
    if not k_values or k_values != sorted(k_values):
        raise ValueError("k_values must be non-empty and ascending")
    kept_at = {k: set(filter_accounts(events, k)) for k in k_values}
    table = RewardTable([], [], np.zeros((0, len(PAIR_CODES))))
    base = kept_at[k_values[0]]
    if base:
        trajs = build_trajectories(events, k_values[0])
        table = fit_rewards(trajs, labels, cfg)
    rows = []
    for k in k_values:
        sub = table.subset(kept_at[k])
        row = {"k": k, "n_accounts": len(kept_at[k]), "n_fitted": len(sub),
               "n_troll": sum(lab == "troll" for lab in sub.labels),
               "n_user": sum(lab == "user" for lab in sub.labels)}
        row.update({m: None for m in SWEEP_METRICS})
        row["error"] = None
        try:
            if not kept_at[k]:
                raise DataError(f"empty retained set at k={k}")
            agg = classify(sub, cfg).aggregate
            row.update({m: getattr(agg, m) for m in SWEEP_METRICS})
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")
