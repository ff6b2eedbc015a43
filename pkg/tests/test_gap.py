import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_stable, stable_systems
from gapcert.coprime import nrcf
from gapcert.gap import _basis_fit, directed_gap, gap_metric, laguerre_system, laguerre_values, pointwise_lb
from gapcert.lti import StateSpace, freq_response_grid, tf


def chordal(k1, k2):
    return abs(k1 - k2) / np.sqrt((1 + k1**2) * (1 + k2**2))


@pytest.mark.parametrize("k1,k2", [(0.0, 1.0), (2.0, -3.0), (0.5, 0.6)])
def test_static_gains_equal_chordal_distance(k1, k2):
    g = gap_metric(StateSpace.static([[k1]]), StateSpace.static([[k2]]), 1e-8)
    assert np.isclose(g.value, chordal(k1, k2), atol=1e-7)


def test_first_order_pair():
    g = gap_metric(tf([1.0], [1.0, 1.0]), tf([1.0], [1.0, 2.0]))
    assert g.converged
    assert abs(g.value - 1 / np.sqrt(10)) <= 1e-5


def test_basis_oracle_agrees_with_riccati():
    p1, p2 = tf([1.0], [1.0, 1.0]), tf([2.0, 1.0], [1.0, 3.0, 2.0])
    r = directed_gap(p1, p2, 1e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        b = directed_gap(p1, p2, 1e-6, method="basis")
    assert b.upper >= r.lower - 1e-9
    assert abs(b.upper - r.upper) <= 1e-4


def test_basis_upper_monotone_in_order():
    p1, p2 = tf([1.0], [1.0, 0.5, 2.0]), tf([1.0, 1.0], [1.0, 2.0, 1.5])
    sweeps = [(4,), (4, 8), (4, 8, 12)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        uppers = [directed_gap(p1, p2, 1e-12, method="basis", orders=o).upper for o in sweeps]
    assert all(b <= a + 1e-9 for a, b in zip(uppers, uppers[1:]))


def test_basis_grid_objective_nested():
    # the order-k basis is a prefix of the order-(k+4) basis
    g1, g2 = nrcf(tf([1.0], [1.0, 0.5, 2.0])), nrcf(tf([1.0, 1.0], [1.0, 2.0, 1.5]))
    w = np.concatenate([[0.0], np.geomspace(1e-2, 1e2, 60)])
    G1w, G2w = freq_response_grid(g1.g, w), freq_response_grid(g2.g, w)
    t = [_basis_fit(G1w, G2w, laguerre_values(k, w))[1] for k in (2, 6, 10)]
    assert all(b <= a + 1e-6 for a, b in zip(t, t[1:]))


def test_laguerre_realization():
    rng = np.random.default_rng(3)
    coeffs = rng.standard_normal((5, 2, 2))
    w = np.array([0.0, 0.3, 2.0, 40.0])
    Phi = laguerre_values(4, w)
    direct = np.einsum("wk,kij->wij", Phi, coeffs)
    assert np.allclose(freq_response_grid(laguerre_system(coeffs), w), direct)


def test_unstable_pair_flags():
    p1, p2 = tf([1.0], [1.0, 0.1]), tf([1.0], [1.0, -0.1])
    g = gap_metric(p1, p2)
    assert g.flagged and g.value == 1.0
    assert g.lower <= g.upper
    raw = gap_metric(p1, p2, saturate_unstable=False)
    # DC gains 10 and -10
    assert not raw.flagged and raw.lower == pytest.approx(20 / 101) and raw.value < 0.25


def test_both_unstable_small_gap():
    g = gap_metric(tf([1.0], [1.0, -1.0]), tf([1.0], [1.0, -1.05]))
    assert not g.flagged and 0 < g.value < 0.05


@settings(max_examples=25)
@given(a=stable_systems(shape=(1, 1)), b=stable_systems(shape=(1, 1)))
def test_sandwich_and_symmetry(a, b):
    tol = 1e-5
    gab, gba = gap_metric(a, b, tol), gap_metric(b, a, tol)
    assert 0.0 <= gab.value <= 1.0
    assert gab.lower <= gab.upper + 1e-12
    assert abs(gab.value - gba.value) <= 2 * tol
    ga, gb = nrcf(a), nrcf(b)
    assert max(pointwise_lb(ga, gb), pointwise_lb(gb, ga)) <= gab.value + 1e-12


@settings(max_examples=25)
@given(seed=st.integers(0, 2**32 - 1))
def test_triangle_inequality_mimo(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_stable(rng, int(rng.integers(1, 4)), 2, 2) for _ in range(3))
    tol = 1e-5
    assert gap_metric(a, c, tol).value <= gap_metric(a, b, tol).value + gap_metric(b, c, tol).value + 3 * tol


@given(a=stable_systems(max_n=3))
def test_identity(a):
    assert gap_metric(a, a).value <= 1e-6
