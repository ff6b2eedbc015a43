"""Normalized right coprime factorizations and Bezout pairs.

For ``P = (A, B, C, D)`` with ``R = I + D^T D``, the stabilizing solution of

    (A - B R^{-1} D^T C)^T X + X (A - B R^{-1} D^T C)
        - X B R^{-1} B^T X + C^T (I + D D^T)^{-1} C = 0

gives ``F = -R^{-1} (B^T X + D^T C)`` and the inner graph symbol

    [N; D] = (A + B F, B R^{-1/2}, [C + D F; F], [D R^{-1/2}; R^{-1/2}]).

The Bezout pair comes from an observer-based stabilizer whose gain is the
(dual) filter Riccati solution, so no pole locations have to be chosen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FactorizationError, RiccatiError
from .hinfnorm import hinf_norm
from .lti import RationalTF, StateSpace, evaluate, freq_response_grid, is_stable, tf_to_ss
from .numlin import solve_care

INNER_TOL = 1e-7
BEZOUT_TOL = 1e-6


def residual_grid(npts: int = 400) -> np.ndarray:
    return np.concatenate([[0.0], np.geomspace(1e-4, 1e4, npts - 1)])


def _inv_sqrt(R: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(R)
    return (V / np.sqrt(w)) @ V.T


def _sqrt(R: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(R)
    return (V * np.sqrt(w)) @ V.T


@dataclass(frozen=True, eq=False)
class GraphSymbol:
    """Inner realization ``g`` of the stacked factors ``[N; D]``.

    ``n_rows_N`` marks the split: the first ``l`` outputs are ``N``. ``plant``
    and ``F`` are kept so the Bezout construction can reuse them.
    """

    g: StateSpace
    n_rows_N: int
    plant: StateSpace
    F: np.ndarray

    @property
    def N(self) -> StateSpace:
        l = self.n_rows_N
        return StateSpace(self.g.A, self.g.B, self.g.C[:l], self.g.D[:l])

    @property
    def D(self) -> StateSpace:
        l = self.n_rows_N
        return StateSpace(self.g.A, self.g.B, self.g.C[l:], self.g.D[l:])


@dataclass(frozen=True, eq=False)
class BezoutPair:
    """Stable ``X, Y`` with ``X N + Y D = I``."""

    x: StateSpace
    y: StateSpace


def nrcf(P) -> GraphSymbol:
    """Normalized right coprime factorization of a plant.

    Accepts a :class:`StateSpace` or a SISO :class:`RationalTF`.
    """
    if isinstance(P, RationalTF):
        P = tf_to_ss(P)
    A, B, C, D = P.A, P.B, P.C, P.D
    l, m = P.shape
    R = np.eye(m) + D.T @ D
    Rih = _inv_sqrt(R)
    if P.nstates == 0:
        F = np.zeros((m, 0))
    else:
        try:
            X = solve_care(A, B, C.T @ C, R, S=C.T @ D)
        except RiccatiError as exc:
            raise FactorizationError(f"normalized coprime factorization failed: {exc}") from exc
        F = -np.linalg.solve(R, B.T @ X + D.T @ C)
    g = StateSpace(
        A + B @ F,
        B @ Rih,
        np.vstack([C + D @ F, F]),
        np.vstack([D @ Rih, Rih]),
    )
    return GraphSymbol(g=g, n_rows_N=l, plant=P, F=F)


def inner_residual(gs: GraphSymbol, grid=None) -> float:
    """``max_w ||G(jw)^* G(jw) - I||`` over a grid (default 400 points)."""
    grid = residual_grid() if grid is None else grid
    G = freq_response_grid(gs.g, grid)
    m = G.shape[2]
    E = np.conj(np.swapaxes(G, 1, 2)) @ G - np.eye(m)
    return float(np.max(np.linalg.norm(E, ord=2, axis=(1, 2))))


def factor_residual(gs: GraphSymbol, grid=None) -> float:
    """``max_w ||N D^{-1} - P||`` relative to ``1 + ||P||`` on a grid avoiding poles."""
    grid = residual_grid(200)[1:] if grid is None else grid
    worst = 0.0
    for w in grid:
        try:
            Pw = evaluate(gs.plant, 1j * w)
        except Exception:
            continue
        Nw = evaluate(gs.N, 1j * w)
        Dw = evaluate(gs.D, 1j * w)
        err = np.linalg.norm(Nw - Pw @ Dw, 2) / np.linalg.norm(Dw, 2)
        worst = max(worst, err / (1.0 + np.linalg.norm(Pw, 2)))
    return worst


def bezout_solve(gs: GraphSymbol) -> BezoutPair:
    """Stable Bezout pair for the normalized factors in ``gs``."""
    P = gs.plant
    A, B, C, D = P.A, P.B, P.C, P.D
    l, m = P.shape
    Rh = _sqrt(np.eye(m) + D.T @ D)
    if P.nstates == 0:
        return BezoutPair(StateSpace.static(np.zeros((m, l))), StateSpace.static(Rh))
    n = P.nstates
    try:
        Y = solve_care(A.T, C.T, np.eye(n), np.eye(l))
    except RiccatiError as exc:
        raise FactorizationError(f"no stabilizing observer (coprimeness lost): {exc}") from exc
    L = -Y @ C.T
    Ao = A + L @ C
    # With X_r = (A+LC, -(B+LD), F, I), Y_r = (A+LC, -L, F, 0) and unnormalized
    # factors M, N: X_r M - Y_r N = I.  Normalizing by R^{-1/2} gives
    # X = -R^{1/2} Y_r, Y = R^{1/2} X_r.
    x = StateSpace(Ao, -L, -Rh @ gs.F, np.zeros((m, l)))
    y = StateSpace(Ao, -(B + L @ D), Rh @ gs.F, Rh)
    if not (is_stable(x) and is_stable(y)):
        raise FactorizationError("Bezout factors are not stable")
    return BezoutPair(x=x, y=y)


def bezout_residual(gs: GraphSymbol, pair: BezoutPair, grid=None) -> float:
    """``max_w ||X N + Y D - I||`` over a grid."""
    grid = residual_grid() if grid is None else grid
    Nw = freq_response_grid(gs.N, grid)
    Dw = freq_response_grid(gs.D, grid)
    Xw = freq_response_grid(pair.x, grid)
    Yw = freq_response_grid(pair.y, grid)
    m = Dw.shape[2]
    E = Xw @ Nw + Yw @ Dw - np.eye(m)
    return float(np.max(np.linalg.norm(E, ord=2, axis=(1, 2))))


def bezout_ok(P: StateSpace, tol: float = BEZOUT_TOL) -> bool:
    """True iff a Bezout pair exists numerically with residual at most ``tol``."""
    try:
        gs = nrcf(P)
        pair = bezout_solve(gs)
    except FactorizationError:
        return False
    res = bezout_residual(gs, pair)
    return bool(np.isfinite(res) and res <= tol)


def bezout_survival_rate(family, spec, n: int, seed: int) -> float:
    """Fraction of sampled parameters whose plant admits a certified Bezout pair."""
    from .sampling import realize_plant, sample_theta

    thetas = sample_theta(spec, n, seed)
    ok = sum(bezout_ok(realize_plant(family, th)) for th in thetas)
    return ok / n


def procrustes_alignment(nominal_gs: GraphSymbol, perturbed_gs: GraphSymbol) -> np.ndarray:
    """Orthogonal ``U`` minimizing ``||G~(0) U - G(0)||_F``."""
    G0 = evaluate(nominal_gs.g, 0.0).real
    G1 = evaluate(perturbed_gs.g, 0.0).real
    W, _, Vt = np.linalg.svd(G1.T @ G0)
    return W @ Vt


def coprime_perturbation(nominal_gs: GraphSymbol, perturbed_gs: GraphSymbol, tol: float = 1e-6) -> float:
    """``||G~ U - G||_inf`` with ``U`` removing the orthogonal gauge freedom."""
    if nominal_gs.g.shape != perturbed_gs.g.shape:
        raise FactorizationError("graph symbols have different dimensions")
    U = procrustes_alignment(nominal_gs, perturbed_gs)
    gp = perturbed_gs.g
    aligned = StateSpace(gp.A, gp.B @ U, gp.C, gp.D @ U)
    return hinf_norm(aligned - nominal_gs.g, tol)
