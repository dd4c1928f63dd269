"""Classification metrics against the filtering threshold k on simulated logs.

    python3 scripts/sweep_k.py --seeds 0 1 2 3 --out results/sweep
"""

import argparse
import csv
from pathlib import Path

from scipy.stats import spearmanr

from trollirl import pipeline
from trollirl.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--irl", choices=["linear", "deep"], default="linear")
    ap.add_argument("--out", default="results/sweep")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fields = ["seed", "k", "n_accounts", "n_troll", "n_user", *pipeline.SWEEP_METRICS]
    with open(out / f"sweep_{args.irl}.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for seed in args.seeds:
            cfg = load_config(args.config, {"seed": seed, "irl_variant": args.irl})
            events, labels = pipeline.simulate(cfg)
            rows = pipeline.varying_k_sweep(events, labels, cfg)
            for row in rows:
                w.writerow({"seed": seed, **row})
            aucs = [r["auc"] for r in rows]
            rho = spearmanr([r["k"] for r in rows], aucs).statistic
            print(f"seed {seed}: AUC by k {[round(a, 3) for a in aucs]}  Spearman {rho:.2f}",
                  flush=True)


if __name__ == "__main__":
    main()
