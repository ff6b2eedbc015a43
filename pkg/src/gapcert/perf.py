"""Closed-loop performance: the loop block, the stability margin and T.

Sign convention: the loop is closed with positive feedback, ``u = C y + w2``,
so every closed-loop map carries ``(I - C P)^{-1}``. A conventional
negative-feedback law ``u = -K y`` is passed as ``C = -K``.
"""

from __future__ import annotations

from .errors import DomainError
from .hinfnorm import hinf_norm
from .lti import StateSpace, is_stable, loop_system


def closed_loop_Q(P: StateSpace, C: StateSpace) -> StateSpace:
    """``[P; I] (I - C P)^{-1} [-C, I]``, the map ``[w1; w2] -> [y; u]``."""
    return loop_system(P, C)


def bpc(P: StateSpace, C: StateSpace, tol: float = 1e-7) -> float:
    """Generalized stability margin ``1/||Q(P, C)||_inf``; 0 if the loop is unstable."""
    Q = closed_loop_Q(P, C)
    if not is_stable(Q):
        return 0.0
    return 1.0 / hinf_norm(Q, tol)


def closed_loop_T(P: StateSpace, C: StateSpace) -> StateSpace:
    """Complementary sensitivity ``P C (I - P C)^{-1}``.

    This is the negated ``w1 -> y`` block of :func:`closed_loop_Q`.
    """
    Q = closed_loop_Q(P, C)
    if not is_stable(Q):
        raise DomainError("closed loop is not internally stable")
    l = P.noutputs
    return StateSpace(Q.A, -Q.B[:, :l], Q.C[:l], -Q.D[:l, :l])


def t_norm(P: StateSpace, C: StateSpace, tol: float = 1e-7) -> float:
    """``||T(P, C)||_inf``; ``inf`` if the loop is unstable."""
    try:
        return hinf_norm(closed_loop_T(P, C), tol)
    except DomainError:
        return float("inf")


def degradation_lb(b_nominal: float, gap: float) -> float:
    """Guaranteed margin ``b - gap`` on a perturbed plant (non-positive means none)."""
    return float(b_nominal) - float(gap)


def deviation_ub(gap: float, b_perturbed: float, b_nominal: float) -> float:
    """Bound ``gap / (b_perturbed b_nominal)`` on ``||Q(P1, C) - Q(P, C)||_inf``."""
    if b_perturbed <= 0 or b_nominal <= 0:
        raise DomainError("stability margins must be positive")
    return float(gap) / (b_perturbed * b_nominal)


def tzw_ub(t_nominal: float, gap: float) -> float:
    """Bound ``(T_nominal + gap) / (1 - gap)`` on the perturbed ``||T||_inf``."""
    if gap >= 1.0 - 1e-12:
        raise DomainError("bound requires gap < 1")
    return (float(t_nominal) + float(gap)) / (1.0 - float(gap))


def q_deviation(P1: StateSpace, P: StateSpace, C: StateSpace, tol: float = 1e-7) -> float:
    """Measured ``||Q(P1, C) - Q(P, C)||_inf`` for two internally stable loops."""
    return hinf_norm(closed_loop_Q(P1, C) - closed_loop_Q(P, C), tol)


def nominal_summary(P: StateSpace, C: StateSpace) -> dict:
    b = bpc(P, C)
    return {"b": b, "t_norm": t_norm(P, C) if b > 0 else float("inf"), "stable": bool(b > 0)}


__all__ = [
    "closed_loop_Q",
    "bpc",
    "closed_loop_T",
    "t_norm",
    "degradation_lb",
    "deviation_ub",
    "tzw_ub",
    "q_deviation",
    "nominal_summary",
]
