"""Shared driver for the experiment scripts."""

import argparse
import json
from pathlib import Path

from gapcert.cli import _jsonable, histogram_svg, write_samples_csv
from gapcert.io import load_config
from gapcert.mc import run_experiment, threads_from_env


def run(config_name: str, describe: str) -> None:
    ap = argparse.ArgumentParser(description=describe)
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", default=f"results/{config_name}")
    args = ap.parse_args()

    cfg = load_config(config_name, samples=args.samples, seed=args.seed)
    res = run_experiment(cfg, threads=threads_from_env())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_samples_csv(out / "samples.csv", res)
    (out / "summary.json").write_text(json.dumps(_jsonable(res.summary()), indent=2, sort_keys=True) + "\n")
    (out / "histogram.svg").write_text(histogram_svg(res.histogram, f"{cfg.name}: gap density"))

    print(f"{cfg.name}: N={cfg.samples} seed={cfg.seed} sigma={cfg.theta.sigma}")
    for k, v in res.nominal.items():
        print(f"  nominal {k:16s} {v:.6g}")
    for k in ("e_gap", "l_gap", "alpha_hat", "p_gap_below_b", "e_tnorm", "n_flagged"):
        print(f"  estimate {k:15s} {res.estimates[k]:.6g}")
    for k, rep in res.bounds.items():
        print(f"  bound {k:18s} {rep.value:.6g}  valid={rep.valid}  {rep.note}")
    for k, v in res.checks.items():
        print(f"  check {k:18s} {v}")
    print(f"  wrote {out}/")
