import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapcert.errors import DomainError
from gapcert.io import load_config
from gapcert.mc import (
    empirical_probability,
    estimate_lipschitz,
    evaluate_samples,
    histogram,
    mean_with_se,
    run_experiment,
    threads_from_env,
)
from gapcert.sampling import sample_theta


@given(slope=st.floats(0.1, 5.0), seed=st.integers(0, 1000))
def test_lipschitz_of_linear_functional(slope, seed):
    rng = np.random.default_rng(seed)
    th = rng.standard_normal((200, 2))
    v = slope * th[:, 0]
    L = estimate_lipschitz(th, v, seed=seed)
    assert L <= slope * (1 + 1e-9)
    assert L >= 0.9 * slope
    assert estimate_lipschitz(th, v, quantile=0.5, seed=seed) <= L


def test_lipschitz_degenerate():
    with pytest.raises(DomainError):
        estimate_lipschitz(np.zeros((3, 1)), np.zeros(3))


def test_proportion_and_mean():
    p = empirical_probability([0.1, 0.2, 0.9, 1.0], 0.5)
    assert p.p == 0.5 and np.isclose(p.se, 0.25)
    assert empirical_probability([0.5], 0.5, strict=False).p == 1.0
    m, se = mean_with_se([1.0, 3.0])
    assert m == 2.0 and np.isclose(se, 1.0)


def test_histogram_is_density():
    h = histogram(np.linspace(0, 1, 101))
    widths = np.diff(h["edges"])
    assert np.isclose(np.sum(np.asarray(h["density"]) * widths), 1.0)


def test_threads_env(monkeypatch):
    monkeypatch.setenv("GAPCERT_THREADS", "3")
    assert threads_from_env() == 3
    monkeypatch.setenv("GAPCERT_THREADS", "x")
    with pytest.raises(DomainError):
        threads_from_env()


def test_parallel_equals_serial():
    cfg = load_config("experiment-2", samples=40)
    th = sample_theta(cfg.theta, 40, cfg.seed)
    a = evaluate_samples(cfg.family, th, cfg.controller, threads=1)
    b = evaluate_samples(cfg.family, th, cfg.controller, threads=3)
    assert [dataclasses.astuple(r) for r in a] == [dataclasses.astuple(r) for r in b]


def test_unstable_samples_flagged():
    cfg = load_config("scenario-wide", samples=300)
    res = run_experiment(cfg, threads=1)
    unstable = [r for r in res.stats.samples if not r.stable]
    assert unstable and all(r.flagged and r.gap == 1.0 for r in unstable)
    assert res.estimates["alpha_hat"] == 1.0
    assert not res.bounds["scenario"].valid


def test_small_experiment_report_shape():
    res = run_experiment(load_config("experiment-1", samples=200), threads=1)
    s = res.summary()
    assert s["samples"] == 200 and len(res.stats.samples) == 200
    assert 0.0 <= s["estimates"]["e_gap"] <= 1.0
    assert np.isclose(s["nominal"]["b"], 1 / np.sqrt(2), atol=1e-6)
    assert {"stability", "scenario", "expected_gap"} <= set(res.bounds)
