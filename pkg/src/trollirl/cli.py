"""Command line entry point: ``trollirl {simulate,rewards,classify,analyze,sweep-k}``.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from trollirl import pipeline
from trollirl.activity import write_activity_log
from trollirl.analysis import comparison_long_rows, comparison_to_dict
from trollirl.config import ConfigError, PipelineConfig, load_config
from trollirl.irl import ConvergenceError
from trollirl.mdp import PAIR_CODES

log = logging.getLogger("trollirl")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS, help="INI config file")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    p.add_argument("--irl", dest="irl_variant", choices=("linear", "deep"),
                   default=argparse.SUPPRESS)
    p.add_argument("--k", type=int, default=argparse.SUPPRESS, help="min active and passive events")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="trollirl", parents=[common],
                     description="IRL-based troll detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="generate a synthetic labelled log")
    p = sub.add_parser("rewards", parents=[common], help="fit per-account IRL rewards")
    p.add_argument("--events", default=argparse.SUPPRESS, help="JSONL activity log")
    p.add_argument("--labels", default=argparse.SUPPRESS, help="account_id,label CSV")
    for name, help_ in (("classify", "AdaBoost cross-validation on rewards"),
                        ("analyze", "troll vs. user reward statistics")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--rewards", default=argparse.SUPPRESS, help="rewards CSV")
    p = sub.add_parser("sweep-k", parents=[common], help="metrics at several k")
    p.add_argument("--events", default=argparse.SUPPRESS)
    p.add_argument("--labels", default=argparse.SUPPRESS)
    p.add_argument("--k-values", dest="k_values", default=argparse.SUPPRESS,
                   help="comma separated, ascending")
    return parser


def _write_config(cfg: PipelineConfig, out: Path, command: str) -> None:
    pipeline.write_json({"command": command, "config": cfg.to_dict()},
                        out / f"{command}.config.json")


def cmd_simulate(cfg: PipelineConfig, out: Path) -> None:
    events, labels = pipeline.simulate(cfg)
    with open(out / "events.jsonl", "w", encoding="utf-8") as fh:
        write_activity_log(events, fh)
    pipeline.write_labels_csv(labels, out / "labels.csv")
    _write_config(cfg, out, "simulate")
    log.info("simulated %d accounts, %d events", len(labels), len(events))


def cmd_rewards(cfg: PipelineConfig, out: Path) -> None:
    events = pipeline.read_events(cfg.path("events", "events.jsonl"))
    labels = pipeline.merge_labels(events, cfg.path("labels", "labels.csv"))
    table, trajectories = pipeline.rewards_from_events(events, labels, cfg)
    with open(out / "trajectories.jsonl", "w", encoding="utf-8") as fh:
        for account_id in sorted(trajectories):
            fh.write(trajectories[account_id].to_json() + "\n")
    with open(out / "rewards_errors.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["account_id", "error"])
        for account_id in sorted(table.errors):
            w.writerow([account_id, table.errors[account_id]])
    if not len(table):
        if all(e.startswith("ConvergenceError") for e in table.errors.values()):
            raise ConvergenceError("IRL did not converge for any retained account")
        raise pipeline.DataError("IRL failed for every retained account")
    table.write_csv(out / "rewards.csv")
    _write_config(cfg, out, "rewards")
    log.info("fitted %d accounts, %d failures", len(table), len(table.errors))


def cmd_classify(cfg: PipelineConfig, out: Path) -> None:
    table = pipeline.RewardTable.read_csv(cfg.path("rewards", "rewards.csv"))
    result = pipeline.classify(table, cfg)
    pipeline.write_json(pipeline.classification_report(result, cfg), out / "metrics.json")
    with open(out / "importance.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair", "importance"])
        for code, value in zip(PAIR_CODES, result.aggregate.feature_importance):
            w.writerow([code, pipeline.fmt(value)])
    agg = result.aggregate
    log.info("AUC %.3f  TPR %.3f  TNR %.3f", agg.auc, agg.tpr, agg.tnr)


def cmd_analyze(cfg: PipelineConfig, out: Path) -> None:
    table = pipeline.RewardTable.read_csv(cfg.path("rewards", "rewards.csv"))
    rows = pipeline.analyze(table, cfg)
    pipeline.write_json({"config": cfg.to_dict(), "alpha": cfg.analysis.alpha,
                         "correction": cfg.analysis.correction,
                         "columns": comparison_to_dict(rows)}, out / "analysis.json")
    with open(out / "analysis_long.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "pair", "stat", "value"])
        for cls, name, stat, value in comparison_long_rows(rows):
            w.writerow([cls, name, stat, pipeline.fmt(value)])


def cmd_sweep_k(cfg: PipelineConfig, out: Path) -> None:
    events = pipeline.read_events(cfg.path("events", "events.jsonl"))
    labels = pipeline.merge_labels(events, cfg.path("labels", "labels.csv"))
    rows = pipeline.varying_k_sweep(events, labels, cfg)
    columns = ["k", "n_accounts", "n_fitted", "n_troll", "n_user", *pipeline.SWEEP_METRICS,
               "error"]
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(["" if row[c] is None else
                        pipeline.fmt(row[c]) if isinstance(row[c], float) else row[c]
                        for c in columns])
    pipeline.write_json({"config": cfg.to_dict(), "rows": rows}, out / "sweep.json")


COMMANDS = {"simulate": cmd_simulate, "rewards": cmd_rewards, "classify": cmd_classify,
            "analyze": cmd_analyze, "sweep-k": cmd_sweep_k}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    if "k_values" in args:
        try:
            args["k_values"] = tuple(int(x) for x in args["k_values"].split(","))
        except ValueError:
            log.error("bad --k-values %r", args["k_values"])
            return EXIT_USAGE
    try:
        cfg = load_config(config_path, args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[command](cfg, out)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    except (ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError) as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
