"""Continuous-time LTI systems in state-space form.

``StateSpace`` is the carrier used by every other module. Transfer functions
(``RationalTF``) are SISO and only exist as an input format; they are converted
to a controllable-canonical realization. No minimal-realization step is ever
applied: pole/zero cancellations are left visible to the caller.

Interconnection convention: the feedback loop of a plant ``P`` and controller
``C`` is *positive*, ``u = C y``, so closed-loop maps carry ``(I - C P)^{-1}``.
A negative-feedback law ``u = -K y`` is passed as ``C = -K``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, SingularityError
from .numlin import as_matrix, eigenvalues

STABILITY_MARGIN = 1e-12


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Real LTI system ``x' = A x + B u, y = C x + D u``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = as_matrix(self.D, "D")
        A = np.asarray(self.A, dtype=float)
        A = as_matrix(A, "A") if A.size else np.zeros((0, 0))
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got {A.shape}")
        n = A.shape[0]
        l, m = D.shape
        B = np.asarray(self.B, dtype=float).reshape(n, m) if n else np.zeros((0, m))
        C = np.asarray(self.C, dtype=float).reshape(l, n) if n else np.zeros((l, 0))
        for name, M in (("B", B), ("C", C)):
            if not np.all(np.isfinite(M)):
                raise DomainError(f"{name} has non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @classmethod
    def static(cls, D) -> "StateSpace":
        D = as_matrix(D, "D")
        return cls(np.zeros((0, 0)), np.zeros((0, D.shape[1])), np.zeros((D.shape[0], 0)), D)

    @property
    def nstates(self) -> int:
        return self.A.shape[0]

    @property
    def ninputs(self) -> int:
        return self.D.shape[1]

    @property
    def noutputs(self) -> int:
        return self.D.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.D.shape

    def __neg__(self) -> "StateSpace":
        return StateSpace(self.A, self.B, -self.C, -self.D)

    def __add__(self, other) -> "StateSpace":
        return parallel(self, _coerce(other, self.shape))

    def __radd__(self, other) -> "StateSpace":
        return parallel(_coerce(other, self.shape), self)

    def __sub__(self, other) -> "StateSpace":
        return parallel(self, -_coerce(other, self.shape))

    def __mul__(self, other) -> "StateSpace":
        if np.isscalar(other):
            return StateSpace(self.A, self.B, self.C * other, self.D * other)
        return series(other, self)

    def __rmul__(self, other) -> "StateSpace":
        if np.isscalar(other):
            return self * other
        return series(self, StateSpace.static(other))

    def __matmul__(self, other) -> "StateSpace":
        return self * other

    def __call__(self, s: complex) -> np.ndarray:
        return evaluate(self, s)

    def __repr__(self) -> str:
        return f"StateSpace(n={self.nstates}, outputs={self.noutputs}, inputs={self.ninputs})"


def _coerce(other, shape) -> StateSpace:
    if isinstance(other, StateSpace):
        return other
    D = np.asarray(other, dtype=float)
    if D.ndim == 0:
        D = D * np.ones(shape) if shape == (1, 1) else D * np.eye(*shape)
    return StateSpace.static(D)


@dataclass(frozen=True)
class RationalTF:
    """SISO transfer function ``num(s)/den(s)``, coefficients in descending powers."""

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __post_init__(self):
        num = np.trim_zeros(np.atleast_1d(np.asarray(self.num, dtype=float)), "f")
        den = np.trim_zeros(np.atleast_1d(np.asarray(self.den, dtype=float)), "f")
        if den.size == 0:
            raise DomainError("denominator is identically zero")
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise DomainError("non-finite coefficients")
        if num.size == 0:
            num = np.zeros(1)
        if num.size > den.size:
            raise DomainError("transfer function is improper")
        object.__setattr__(self, "num", tuple(num))
        object.__setattr__(self, "den", tuple(den))

    def __call__(self, s: complex) -> complex:
        return np.polyval(self.num, s) / np.polyval(self.den, s)


def tf_to_ss(tf: RationalTF) -> StateSpace:
    """Controllable-canonical realization of a proper SISO transfer function."""
    num = np.asarray(tf.num, dtype=float)
    den = np.asarray(tf.den, dtype=float)
    n = den.size - 1
    lead = den[0]
    den = den / lead
    num = np.concatenate([np.zeros(n + 1 - num.size), num]) / lead
    d = num[0]
    rem = num[1:] - d * den[1:]
    if n == 0:
        return StateSpace.static([[d]])
    A = np.zeros((n, n))
    A[0, :] = -den[1:]
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = rem.reshape(1, n)
    return StateSpace(A, B, C, [[d]])


def ss(A, B, C, D) -> StateSpace:
    return StateSpace(np.asarray(A, float), np.asarray(B, float), np.asarray(C, float), as_matrix(D, "D"))


def tf(num: Sequence[float], den: Sequence[float]) -> StateSpace:
    """Shorthand: realize ``num/den`` directly."""
    return tf_to_ss(RationalTF(tuple(num), tuple(den)))


def poles(sys: StateSpace) -> np.ndarray:
    return eigenvalues(sys.A)


def is_stable(sys: StateSpace, margin: float = STABILITY_MARGIN) -> bool:
    """True iff every eigenvalue of ``A`` has real part below ``-margin``."""
    if sys.nstates == 0:
        return True
    return bool(np.max(poles(sys).real) < -margin)


def evaluate(sys: StateSpace, s: complex) -> np.ndarray:
    """Transfer matrix ``C (sI - A)^{-1} B + D`` at a complex point."""
    if sys.nstates == 0:
        return sys.D.astype(complex)
    M = s * np.eye(sys.nstates) - sys.A
    if np.linalg.cond(M) > 1e12:
        raise SingularityError(f"s = {s} is (numerically) a pole")
    return sys.C @ np.linalg.solve(M, sys.B) + sys.D


def freq_response(sys: StateSpace, omega: float) -> np.ndarray:
    """Frequency response at ``j * omega``."""
    return evaluate(sys, 1j * omega)


def freq_response_grid(sys: StateSpace, omegas) -> np.ndarray:
    """Responses on a frequency grid, shape ``(len(omegas), l, m)``."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    l, m = sys.shape
    if sys.nstates == 0:
        return np.broadcast_to(sys.D.astype(complex), (omegas.size, l, m)).copy()
    n = sys.nstates
    M = 1j * omegas[:, None, None] * np.eye(n) - sys.A
    try:
        X = np.linalg.solve(M, np.broadcast_to(sys.B.astype(complex), (omegas.size, n, m)))
    except np.linalg.LinAlgError as exc:
        raise SingularityError("grid frequency hits a pole") from exc
    return sys.C @ X + sys.D


# ---------------------------------------------------------------- interconnections


def series(first: StateSpace, second: StateSpace) -> StateSpace:
    """``first`` followed by ``second``: transfer ``second(s) @ first(s)``."""
    if first.noutputs != second.ninputs:
        raise DimensionError(f"series: {first.shape} -> {second.shape}")
    n1, n2 = first.nstates, second.nstates
    A = np.block([[first.A, np.zeros((n1, n2))], [second.B @ first.C, second.A]])
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    return StateSpace(A, B, C, second.D @ first.D)


def parallel(P: StateSpace, Q: StateSpace) -> StateSpace:
    """Sum ``P(s) + Q(s)``."""
    if P.shape != Q.shape:
        raise DimensionError(f"parallel: {P.shape} vs {Q.shape}")
    A = _blkdiag(P.A, Q.A)
    return StateSpace(A, np.vstack([P.B, Q.B]), np.hstack([P.C, Q.C]), P.D + Q.D)


def stack_rows(*systems: StateSpace) -> StateSpace:
    """Vertical concatenation ``[P1; P2; ...]`` sharing the input."""
    m = systems[0].ninputs
    if any(s.ninputs != m for s in systems):
        raise DimensionError("stack_rows: input dimensions differ")
    A = _blkdiag(*(s.A for s in systems))
    B = np.vstack([s.B for s in systems])
    C = _blkdiag(*(s.C for s in systems))
    D = np.vstack([s.D for s in systems])
    return StateSpace(A, B, C, D)


def stack_cols(*systems: StateSpace) -> StateSpace:
    """Horizontal concatenation ``[P1, P2, ...]`` summing the outputs."""
    l = systems[0].noutputs
    if any(s.noutputs != l for s in systems):
        raise DimensionError("stack_cols: output dimensions differ")
    A = _blkdiag(*(s.A for s in systems))
    B = _blkdiag(*(s.B for s in systems))
    C = np.hstack([s.C for s in systems])
    D = np.hstack([s.D for s in systems])
    return StateSpace(A, B, C, D)


def _blkdiag(*mats: np.ndarray) -> np.ndarray:
    rows = sum(M.shape[0] for M in mats)
    cols = sum(M.shape[1] for M in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for M in mats:
        out[r:r + M.shape[0], c:c + M.shape[1]] = M
        r += M.shape[0]
        c += M.shape[1]
    return out


def loop_system(P: StateSpace, C: StateSpace) -> StateSpace:
    """Closed-loop map ``[w1; w2] -> [y; u]`` of the positive-feedback loop.

    Signals: ``y = P u``, ``u = C (y - w1) + w2``. Its transfer matrix is
    ``[P; I] (I - C P)^{-1} [-C, I]`` and its ``A`` matrix is the closed-loop
    state matrix, so internal stability is ``is_stable(loop_system(P, C))``.
    """
    l, m = P.shape
    if C.shape != (m, l):
        raise DimensionError(f"controller shape {C.shape} incompatible with plant {P.shape}")
    E = np.eye(m) - C.D @ P.D
    if np.linalg.cond(E) > 1e12:
        raise SingularityError("algebraic loop: I - Dc Dp is singular")
    F = np.linalg.inv(E)
    np_, nc = P.nstates, C.nstates
    Mu_x = F @ np.hstack([C.D @ P.C, C.C])
    Mu_w = F @ np.hstack([-C.D, np.eye(m)])
    My_x = np.hstack([P.C, np.zeros((l, nc))]) + P.D @ Mu_x
    My_w = P.D @ Mu_w
    Me_w = My_w - np.hstack([np.eye(l), np.zeros((l, m))])
    A = _blkdiag(P.A, C.A) + np.vstack([P.B @ Mu_x, C.B @ My_x])
    B = np.vstack([P.B @ Mu_w, C.B @ Me_w])
    Cm = np.vstack([My_x, Mu_x])
    D = np.vstack([My_w, Mu_w])
    return StateSpace(A.reshape(np_ + nc, np_ + nc), B, Cm, D)


def feedback_loop(P: StateSpace, C: StateSpace) -> StateSpace:
    """Reference-to-output map ``P (I - C P)^{-1}`` with ``u = C y + r``."""
    full = loop_system(P, C)
    l = P.noutputs
    return StateSpace(full.A, full.B[:, l:], full.C[:l], full.D[:l, l:])


def closed_loop_poles(P: StateSpace, C: StateSpace) -> np.ndarray:
    return poles(loop_system(P, C))


def internally_stable(P: StateSpace, C: StateSpace, margin: float = STABILITY_MARGIN) -> bool:
    try:
        return is_stable(loop_system(P, C), margin)
    except SingularityError:
        return False
