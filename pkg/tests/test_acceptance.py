"""Acceptance criteria 1-12.

Each test records one PASS/FAIL line, printed in the pytest terminal summary
and when this file is run directly (``python tests/test_acceptance.py``).
Experiment runs are cached so criteria sharing a run do not repeat it.
"""

import functools
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_plant, random_stable
from gapcert import bounds
from gapcert.coprime import bezout_residual, bezout_solve, bezout_survival_rate, inner_residual, nrcf
from gapcert.gap import gap_metric, pointwise_lb
from gapcert.hinfnorm import adaptive_grid_norm, hinf_norm
from gapcert.io import load_config
from gapcert.lti import freq_response_grid, internally_stable, tf
from gapcert.sampling import realize_plant
from gapcert.mc import run_experiment
from gapcert.numlin import solve_care
from gapcert.perf import bpc, deviation_ub, q_deviation, tzw_ub


def record(k: int, checks: dict) -> bool:
    ok = all(v for v, _ in checks.values())
    parts = [f"{name}={'ok' if v else 'FAIL'} ({detail})" for name, (v, detail) in checks.items()]
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} | " + "; ".join(parts)
    ACCEPTANCE_LINES[k] = line
    print(line)
    return ok


@functools.lru_cache(maxsize=None)
def experiment(name: str, seed: int = 12345, samples: int = 10_000):
    return run_experiment(load_config(name, seed=seed, samples=samples), threads=1)


def near(x, target, tol):
    return bool(abs(x - target) <= tol), f"{x:.4f} vs {target}±{tol:g}"


# ------------------------------------------------------------------ criteria


def test_criterion_01_margins():
    P = tf([1.0], [1.0, 1.0])
    b1 = bpc(P, -tf([1.0], [1.0]))
    b2 = bpc(P, -tf([1.0, 2.0], [2.0, 6.0]))
    assert record(1, {"static": near(b1, 0.7071, 1e-3), "dynamic": near(b2, 0.8944, 1e-3)})


def test_criterion_02_scenario_size():
    n = bounds.scenario_sample_size(0.01, 0.05)
    assert record(2, {"N": (n == 90, f"{n}")})


def test_criterion_03_bound_pipeline():
    C_inv = bounds.inv_gap_moment_ub(0.4023, 0.5, 0.5308)
    E = bounds.expected_hinf_ub(0.7071, C_inv)
    assert record(3, {"inv_gap_moment": near(C_inv, 2.8464, 5e-3), "expected_hinf": near(E, 4.8592, 5e-3)})


SEEDS_EXP1 = (12345, 12346, 12347, 12348, 12349)


@pytest.mark.slow
def test_criterion_04_experiment1_seed_sweep():
    checks = {}
    for seed in SEEDS_EXP1:
        res = experiment("experiment-1", seed)
        est = res.estimates
        lb = res.bounds["stability"]
        checks[f"E[{seed}]"] = near(est["e_gap"], 0.3032, 0.02)
        checks[f"P[{seed}]"] = near(est["p_gap_below_b"], 0.9777, 0.01)
        p = est["p_gap_below_b"]
        checks[f"cons[{seed}]"] = (bool(lb.valid and p >= lb.value), f"{p:.4f} >= {lb.value:.4f}")
    assert record(4, checks)


@pytest.mark.slow
def test_criterion_05_experiment2():
    res = experiment("experiment-2")
    est = res.estimates
    C_gap = res.bounds["expected_gap"].value
    checks = {
        "E_gap": near(est["e_gap"], 0.3204, 0.02),
        "E_T": near(est["e_tnorm"], 0.5557, 0.02),
        "L_gap": (0.40 <= est["l_gap"] <= 0.70, f"{est['l_gap']:.4f} in [0.40, 0.70]"),
        "C_gap": (0.37 <= C_gap <= 0.44, f"{C_gap:.4f} in [0.37, 0.44]"),
    }
    assert record(5, checks)


@pytest.mark.slow
def test_criterion_06_scenario():
    narrow = experiment("scenario")
    wide = experiment("scenario-wide")
    a = narrow.estimates["alpha_hat"]
    b = narrow.nominal["b"]
    w_gaps = wide.stats.gaps
    w_flag = sum(r.flagged for r in wide.stats.samples)
    checks = {
        "alpha": near(a, 0.7019, 0.05),
        "below_b": (bool(a < 0.8944), f"{a:.4f} < 0.8944"),
        "issued": (narrow.bounds["scenario"].valid, narrow.bounds["scenario"].note or "issued"),
        "wide_flagged": (bool(w_flag > 0 and np.any(w_gaps == 1.0)), f"{w_flag} flagged"),
        "wide_withheld": (not wide.bounds["scenario"].valid, wide.bounds["scenario"].note),
    }
    assert record(6, checks)


def test_criterion_07_gap_axioms():
    rng = np.random.default_rng(7)
    tol = 1e-5
    worst = {"identity": 0.0, "symmetry": 0.0, "triangle": -np.inf, "sandwich": -np.inf, "lb": -np.inf}
    in_range = True
    for _ in range(200):
        n = [int(rng.integers(1, 5)) for _ in range(3)]
        m, p = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        a, b, c = (random_stable(rng, k, m, p) for k in n)
        gab, gba = gap_metric(a, b, tol), gap_metric(b, a, tol)
        gbc, gac = gap_metric(b, c, tol), gap_metric(a, c, tol)
        worst["identity"] = max(worst["identity"], gap_metric(a, a, tol).value)
        worst["symmetry"] = max(worst["symmetry"], abs(gab.value - gba.value))
        worst["triangle"] = max(worst["triangle"], gac.value - gab.value - gbc.value)
        worst["sandwich"] = max(worst["sandwich"], gab.lower - gab.upper)
        ga, gb = nrcf(a), nrcf(b)
        plb = max(pointwise_lb(ga, gb), pointwise_lb(gb, ga))
        worst["lb"] = max(worst["lb"], plb - gab.value)
        in_range &= all(0.0 <= g.value <= 1.0 for g in (gab, gba, gbc, gac))
    checks = {
        "identity": (worst["identity"] <= 1e-6, f"max {worst['identity']:.2e}"),
        "symmetry": (worst["symmetry"] <= 2 * tol, f"max {worst['symmetry']:.2e}"),
        "range": (bool(in_range), "[0,1]"),
        "triangle": (worst["triangle"] <= 3 * tol, f"max excess {worst['triangle']:.2e}"),
        "sandwich": (worst["sandwich"] <= 0.0, f"max lower-upper {worst['sandwich']:.2e}"),
        "pointwise": (worst["lb"] <= 1e-12, f"max lb-gap {worst['lb']:.2e}"),
    }
    assert record(7, checks)


def test_criterion_08_factorizations():
    rng = np.random.default_rng(8)
    inner = bez = 0.0
    for _ in range(200):
        P = random_plant(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        gs = nrcf(P)
        inner = max(inner, inner_residual(gs))
        bez = max(bez, bezout_residual(gs, bezout_solve(gs)))
    gs = nrcf(tf([1.0], [1.0, 1.0]))
    w = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 200)])
    Nw = freq_response_grid(gs.N, w)[:, 0, 0]
    ref = 1.0 / (1j * w + math.sqrt(2.0))
    err = min(np.max(np.abs(Nw - ref)), np.max(np.abs(Nw + ref)))
    cfg = load_config("experiment-1")
    rate = bezout_survival_rate(cfg.family, cfg.theta, 10_000, cfg.seed)
    checks = {
        "inner": (inner <= 1e-7, f"max {inner:.2e}"),
        "bezout": (bez <= 1e-6, f"max {bez:.2e}"),
        "nrcf_1/(s+1)": (err <= 1e-6, f"{err:.2e}"),
        "survival": (rate >= 0.999, f"{rate:.4f}"),
    }
    assert record(8, checks)


def test_criterion_09_numerics():
    X = solve_care([[-1.0]], [[1.0]], [[1.0]], [[1.0]])[0, 0]
    peak = hinf_norm(tf([1.0], [1.0, 0.2, 1.0]))
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        sys_ = random_stable(rng, int(rng.integers(1, 7)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        h, g = hinf_norm(sys_), adaptive_grid_norm(sys_)
        worst = max(worst, abs(h - g) / max(h, 1e-300))
    checks = {
        "care": (abs(X - (math.sqrt(2) - 1)) <= 1e-10, f"{X:.12f}"),
        "resonance": near(peak, 5.0249, 1e-3),
        "bisection_vs_grid": (worst <= 1e-4, f"max rel {worst:.2e}"),
    }
    assert record(9, checks)


@pytest.mark.slow
def test_criterion_10_samplewise_robustness():
    res = experiment("experiment-1")
    cfg = res.config
    C, b_nom, T_bar = cfg.controller, res.nominal["b"], res.nominal["T_bar"]
    slack = 1e-3
    n17 = n18 = n19 = 0
    bad17 = bad18 = bad19 = 0
    for r in res.stats.samples:
        if not r.stable or r.flagged:
            continue
        P = realize_plant(cfg.family, r.theta)
        if r.gap < b_nom:
            n17 += 1
            if not (internally_stable(P, C) and r.bpc >= b_nom - r.gap - slack):
                bad17 += 1
        if r.bpc > 0:
            n18 += 1
            if q_deviation(P, cfg.family.nominal, C) > deviation_ub(r.gap, r.bpc, b_nom) + slack:
                bad18 += 1
        if r.gap < 1.0 - 1e-3:
            n19 += 1
            if not r.tnorm <= tzw_ub(T_bar, r.gap) + slack:
                bad19 += 1
    checks = {
        "margin": (bad17 == 0, f"{bad17}/{n17} violations"),
        "deviation": (bad18 == 0, f"{bad18}/{n18} violations"),
        "T_bound": (bad19 == 0, f"{bad19}/{n19} violations"),
    }
    assert record(10, checks)


def test_criterion_11_concentration():
    rng = np.random.default_rng(11)
    n, p, sigma = 200_000, 3, 0.7
    theta = sigma * rng.standard_normal((n, p))
    f = np.linalg.norm(theta, axis=1)  # 1-Lipschitz
    dev = f - f.mean()
    tails = {}
    for eps in np.round(np.arange(0.1, 1.01, 0.1), 1):
        freq = float(np.mean(dev >= eps))
        se = math.sqrt(max(freq * (1 - freq), 1.0 / n) / n)
        tails[f"{eps:.1f}"] = freq <= bounds.gap_tail_ub(float(eps), sigma, 1.0) + 3 * se
    # Gaussian truncated to [0, 0.9]; truncation keeps it sub-Gaussian with the same parameter.
    s, m = 0.25, 0.4
    x = m + s * rng.standard_normal(4 * n)
    x = x[(x >= 0.0) & (x <= 0.9)][:n]
    y = 1.0 / (1.0 - x)
    emp, se = float(y.mean()), float(y.std(ddof=1) / math.sqrt(len(y)))
    ub = bounds.reciprocal_moment_ub(float(x.mean()), s)
    checks = {
        "tails": (all(tails.values()), f"{sum(tails.values())}/{len(tails)} eps"),
        "reciprocal": (emp <= ub + 3 * se, f"{emp:.4f} <= {ub:.4f}"),
    }
    assert record(11, checks)


def _csv_bytes(out: Path, threads: int, samples: int) -> bytes:
    env = dict(os.environ, GAPCERT_THREADS=str(threads))
    cmd = [sys.executable, "-m", "gapcert.cli", "experiment", "experiment-1", "--samples", str(samples),
           "--out", str(out)]
    subprocess.run(cmd, check=True, env=env, capture_output=True)
    return (out / "samples.csv").read_bytes()


@pytest.mark.slow
def test_criterion_12_determinism(tmp_path):
    samples = 2000
    a = _csv_bytes(tmp_path / "a", 1, samples)
    b = _csv_bytes(tmp_path / "b", 1, samples)
    c = _csv_bytes(tmp_path / "c", 8, samples)
    checks = {
        "repeat": (a == b, f"{len(a)} bytes"),
        "threads_1_vs_8": (a == c, f"{len(c)} bytes"),
    }
    assert record(12, checks)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
