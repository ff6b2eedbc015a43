"""Dense linear-algebra kernels: spectra, SVD, Lyapunov and Riccati solves.

Matrices are plain 2-D ``numpy`` float arrays. The Riccati solver works on the
stable invariant subspace of the Hamiltonian matrix, obtained from an ordered
real Schur form.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, NumericalError, RiccatiError

ABS_TOL = 1e-10


def as_matrix(M, name: str = "M") -> np.ndarray:
    """Coerce ``M`` to a finite 2-D float array."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def _square(M, name="M") -> np.ndarray:
    arr = as_matrix(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    return arr


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues of a square matrix, with multiplicity."""
    arr = _square(M)
    if arr.size == 0:
        return np.zeros(0, dtype=complex)
    try:
        return np.linalg.eigvals(arr).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc


def singular_values(M) -> np.ndarray:
    """Singular values in descending order."""
    arr = as_matrix(M)
    if arr.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(arr, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def norm2(M) -> float:
    """Induced 2-norm (largest singular value); 0 for empty matrices."""
    arr = np.asarray(M)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def solve_lyapunov(A, Q) -> np.ndarray:
    """Solve ``A^T X + X A + Q = 0`` for Hurwitz ``A``."""
    A = _square(A, "A")
    Q = _square(Q, "Q")
    if A.shape != Q.shape:
        raise DimensionError("A and Q must have the same shape")
    if A.size == 0:
        return np.zeros((0, 0))
    if np.max(eigenvalues(A).real) >= -1e-12:
        raise DomainError("A is not Hurwitz")
    X = scipy.linalg.solve_continuous_lyapunov(A.T, -Q)
    X = 0.5 * (X + X.T) if np.allclose(Q, Q.T) else X
    resid = np.linalg.norm(A.T @ X + X @ A + Q)
    if resid > 1e-8 * (1.0 + np.linalg.norm(X)):
        raise NumericalError(f"Lyapunov residual {resid:.3e} too large")
    return X


def stable_subspace(H: np.ndarray, *, axis_tol: float = 1e-9):
    """Basis ``[U1; U2]`` of the stable invariant subspace of a Hamiltonian.

    Raises :class:`RiccatiError` when ``H`` has eigenvalues on (or numerically
    at) the imaginary axis, since the splitting is then undefined.
    """
    n2 = H.shape[0]
    n = n2 // 2
    scale = 1.0 + np.linalg.norm(H, 1)
    try:
        T, U, sdim = scipy.linalg.schur(H, output="real", sort="lhp")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise RiccatiError(f"Schur decomposition failed: {exc}") from exc
    ev = np.linalg.eigvals(T)
    if np.min(np.abs(ev.real)) <= axis_tol * scale:
        raise RiccatiError("Hamiltonian has imaginary-axis eigenvalues")
    if sdim != n:
        raise RiccatiError(f"stable subspace has dimension {sdim}, expected {n}")
    return U[:n, :n], U[n:, :n]


def riccati_from_hamiltonian(H: np.ndarray) -> np.ndarray:
    """Stabilizing Riccati solution ``X = U2 U1^{-1}`` from a Hamiltonian."""
    U1, U2 = stable_subspace(H)
    if np.linalg.cond(U1) > 1e12:
        raise RiccatiError("stable subspace is not complementary (U1 singular)")
    X = np.linalg.solve(U1.T, U2.T).T
    return 0.5 * (X + X.T)


def solve_care(A, B, Q, R, S=None) -> np.ndarray:
    """Stabilizing solution of the continuous algebraic Riccati equation.

    Solves ``A^T X + X A - (X B + S) R^{-1} (B^T X + S^T) + Q = 0`` such that
    ``A - B R^{-1} (B^T X + S^T)`` is Hurwitz. ``S`` defaults to zero.
    """
    A = _square(A, "A")
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    B = as_matrix(B, "B").reshape(n, -1)
    m = B.shape[1]
    Q = _square(Q, "Q")
    R = _square(R, "R")
    if Q.shape != (n, n) or R.shape != (m, m):
        raise DimensionError("inconsistent CARE dimensions")
    S =np.zeros((n, m)) if S is None else as_matrix(S, "S").reshape(n, m)
    if not np.allclose(R, R.T) or np.min(np.linalg.eigvalsh(0.5 * (R + R.T))) <= 0:
        raise DomainError("R must be symmetric positive definite")

    Rinv_St = np.linalg.solve(R, S.T)
    Abar = A - B @ Rinv_St
    Qbar = Q - S @ Rinv_St
    G = B @ np.linalg.solve(R, B.T)
    H = np.block([[Abar, -G], [-Qbar, -Abar.T]])
    X = riccati_from_hamiltonian(H)

    K = np.linalg.solve(R, B.T @ X + S.T)
    resid = A.T @ X + X @ A - (X @ B + S) @ K + Q
    xn = np.linalg.norm(X)
    if np.linalg.norm(resid) > 1e-8 * (1.0 + xn**2):
        raise RiccatiError(f"CARE residual {np.linalg.norm(resid):.3e} too large")
    if np.max(eigenvalues(A - B @ K).real) >= 0:
        raise RiccatiError("CARE solution is not stabilizing")
    return X
