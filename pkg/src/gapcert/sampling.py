"""Gaussian parameter sampling and affine plant families.

Sample ``i`` of a run with master seed ``s`` is drawn from a Philox stream
whose key is derived from ``s`` and whose counter starts at ``i``. Every sample
is therefore a pure function of ``(s, i)`` and can be regenerated in any order
or on any worker.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.special

from .errors import DimensionError, DomainError
from .lti import StateSpace
from .numlin import as_matrix

TARGETS = ("A", "B", "C")


@dataclass(frozen=True)
class GaussianSpec:
    """Isotropic Gaussian ``N(mu, sigma^2 I_p)``."""

    mu: tuple
    sigma: float

    def __post_init__(self):
        mu = tuple(float(v) for v in np.atleast_1d(self.mu))
        object.__setattr__(self, "mu", mu)
        if not len(mu):
            raise DimensionError("mu must have at least one entry")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError("sigma must be positive")

    @property
    def p(self) -> int:
        return len(self.mu)


@dataclass(frozen=True, eq=False)
class Delta:
    """Rank-one-in-``theta`` perturbation ``M += theta[index] * matrix``."""

    target: str
    index: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.target not in TARGETS:
            raise DomainError(f"delta target must be one of {TARGETS}, got {self.target!r}")
        if self.index < 0:
            raise DomainError("delta parameter index must be nonnegative")
        object.__setattr__(self, "matrix", as_matrix(self.matrix, "delta"))


@dataclass(frozen=True, eq=False)
class PlantFamily:
    """Affine family ``theta -> (A(theta), B(theta), C(theta), D)``."""

    nominal: StateSpace
    deltas: tuple = field(default_factory=tuple)

    def __post_init__(self):
        deltas = tuple(self.deltas)
        object.__setattr__(self, "deltas", deltas)
        seen = set()
        for d in deltas:
            if d.index in seen:
                raise DomainError(f"parameter {d.index} has more than one delta")
            seen.add(d.index)
            want = getattr(self.nominal, d.target).shape
            if d.matrix.shape != want:
                raise DimensionError(f"delta on {d.target} has shape {d.matrix.shape}, expected {want}")

    @property
    def p(self) -> int:
        return max((d.index for d in self.deltas), default=-1) + 1


def realize_plant(family: PlantFamily, theta) -> StateSpace:
    """Plant of ``family`` at parameter ``theta``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.size < family.p:
        raise DimensionError(f"theta has {theta.size} entries, family needs {family.p}")
    mats = {"A": family.nominal.A.copy(), "B": family.nominal.B.copy(), "C": family.nominal.C.copy()}
    for d in family.deltas:
        mats[d.target] = mats[d.target] + theta[d.index] * d.matrix
    return StateSpace(mats["A"], mats["B"], mats["C"], family.nominal.D)


def _key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(int(seed)).generate_state(2, dtype=np.uint64)


def standard_normal(seed: int, index: int, p: int) -> np.ndarray:
    """``p`` standard normal draws for sample ``index`` of stream ``seed``."""
    bitgen = np.random.Philox(key=_key(seed), counter=[0, int(index), 0, 0])
    k = np.random.Generator(bitgen).integers(0, 2**53, size=p, dtype=np.uint64)
    u = (k.astype(float) + 0.5) * 2.0**-53
    return scipy.special.ndtri(u)


def sample_theta(spec: GaussianSpec, n: int, seed: int, start: int = 0) -> np.ndarray:
    """Array of shape ``(n, p)`` holding samples ``start .. start+n-1``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    mu = np.asarray(spec.mu)
    z = np.stack([standard_normal(seed, i, spec.p) for i in range(start, start + n)])
    return mu + spec.sigma * z
