import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from gapcert.errors import DimensionError, DomainError
from gapcert.lti import tf
from gapcert.sampling import Delta, GaussianSpec, PlantFamily, realize_plant, sample_theta, standard_normal


def test_sample_is_pure_function_of_seed_and_index():
    spec = GaussianSpec((0.5, -0.25), 0.25)
    full = sample_theta(spec, 50, 7)
    tail = sample_theta(spec, 10, 7, start=40)
    assert np.array_equal(full[40:], tail)
    assert np.allclose(standard_normal(7, 3, 2), (full[3] - spec.mu) / 0.25, rtol=0, atol=1e-14)
    assert not np.array_equal(sample_theta(spec, 5, 8), full[:5])


def test_gaussian_moments():
    z = sample_theta(GaussianSpec((0.0,), 1.0), 20_000, 1)[:, 0]
    assert abs(z.mean()) < 0.03
    assert abs(z.std() - 1.0) < 0.03
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_family_realization():
    fam = PlantFamily(tf([1.0], [1.0, 1.0]), (Delta("A", 0, [[1.0]]), Delta("C", 1, [[1.0]])))
    assert fam.p == 2
    P = realize_plant(fam, (0.5, -0.25))
    assert np.allclose(P.A, [[-0.5]]) and np.allclose(P.C, [[0.75]])
    with pytest.raises(DimensionError):
        realize_plant(fam, (0.5,))


def test_bad_specs():
    with pytest.raises(DomainError):
        GaussianSpec((0.0,), 0.0)
    with pytest.raises(DomainError):
        Delta("D", 0, [[1.0]])


@given(seed=st.integers(0, 2**63 - 1), index=st.integers(0, 10**9))
def test_draws_finite(seed, index):
    z = standard_normal(seed, index, 3)
    assert z.shape == (3,) and np.all(np.isfinite(z))
