"""Spread of the headline estimates across master seeds."""

import argparse

import numpy as np

from gapcert.io import load_config
from gapcert.mc import run_experiment, threads_from_env

KEYS = ("e_gap", "p_gap_below_b", "l_gap", "e_tnorm", "alpha_hat")

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", nargs="?", default="experiment-1")
    ap.add_argument("--seeds", type=int, nargs="+", default=[12345, 12346, 12347, 12348, 12349])
    ap.add_argument("--samples", type=int, default=10_000)
    args = ap.parse_args()

    rows = []
    for seed in args.seeds:
        res = run_experiment(load_config(args.config, seed=seed, samples=args.samples), threads=threads_from_env())
        rows.append([res.estimates[k] for k in KEYS])
        print(f"seed {seed}: " + "  ".join(f"{k}={v:.4f}" for k, v in zip(KEYS, rows[-1])), flush=True)
    arr = np.array(rows)
    print("median: " + "  ".join(f"{k}={v:.4f}" for k, v in zip(KEYS, np.median(arr, axis=0))))
