"""Dense linear-algebra and random-matrix primitives.

Thin, validated wrappers over LAPACK (through numpy/scipy) with the
conventions the rest of the package relies on: descending eigenvalues,
lower-triangular Cholesky factors and explicit RNG streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DofTooSmall, NotPositiveDefinite, NotSymmetric

EIGEN_TIE_TOL = 1e-10


@dataclass(frozen=True)
class SymEigen:
    """Eigen-decomposition with values sorted in non-increasing order."""

    values: np.ndarray
    vectors: np.ndarray


def _check_finite(a: np.ndarray) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")


def symmetrize(a, name: str = "matrix") -> np.ndarray:
    """Return (A + A')/2 after checking that A is symmetric within tolerance."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"{name} must be square, got shape {a.shape}")
    _check_finite(a)
    tol = 1e-8 * (1.0 + np.max(np.abs(a), initial=0.0))
    if np.max(np.abs(a - a.T), initial=0.0) > tol:
        raise NotSymmetric(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


def cholesky_lower(omega) -> np.ndarray:
    """Lower-triangular L with L L' = omega."""
    s = symmetrize(omega, "omega")
    try:
        L = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    if np.any(np.diag(L) <= 0.0):
        raise NotPositiveDefinite("non-positive Cholesky pivot")
    return L


def sym_eigen_desc(omega) -> SymEigen:
    """Symmetric eigen-decomposition, eigenvalues descending.

    Tied eigenvalues are ordered by the row index of the largest-magnitude
    entry of their eigenvectors, and each eigenvector is signed so that this
    entry is positive.  Both rules only serve reproducibility.
    """
    s = symmetrize(omega, "omega")
    vals, vecs = np.linalg.eigh(s)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    n = len(vals)
    lead = np.argmax(np.abs(vecs), axis=0)
    for k in range(n):
        if vecs[lead[k], k] < 0:
            vecs[:, k] = -vecs[:, k]
    tol = EIGEN_TIE_TOL * max(1.0, float(np.max(np.abs(vals), initial=0.0)))
    order = list(range(n))
    i = 0
    while i < n:
        j = i + 1
        while j < n and vals[j - 1] - vals[j] < tol:
            j += 1
        if j - i > 1:
            order[i:j] = sorted(range(i, j), key=lambda k: (lead[k], k))
        i = j
    order = np.asarray(order)
    return SymEigen(values=vals[order], vectors=vecs[:, order])


def svd_decomp(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (U, s, V) with U diag(s) V' = a and s non-increasing."""
    a = np.asarray(a, dtype=float)
    _check_finite(a)
    U, s, Vt = np.linalg.svd(a)
    return U, s, Vt.T


def orthonormal_basis(basis, tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis for the column span of ``basis`` (rank-revealing)."""
    basis = np.asarray(basis, dtype=float)
    if basis.size == 0:
        return np.zeros((basis.shape[0] if basis.ndim == 2 else 0, 0))
    U, s, _ = np.linalg.svd(basis, full_matrices=False)
    if s.size == 0:
        return U[:, :0]
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return U[:, :rank]


def project_out(z, basis) -> np.ndarray:
    """Residual of z after least-squares projection on the columns of basis."""
    z = np.asarray(z, dtype=float)
    basis = np.asarray(basis, dtype=float)
    if basis.size == 0:
        return z.copy()
    if basis.ndim == 1:
        basis = basis[:, None]
    U = orthonormal_basis(basis)
    r = z - U @ (U.T @ z)
    # second pass removes rounding left by the first
    return r - U @ (U.T @ r)


def draw_wishart_factor(scale_inv_chol: np.ndarray, dof: float, rng: np.random.Generator) -> np.ndarray:
    """Lower-triangular M with M M' ~ Wishart(Sigma, dof), given chol(Sigma)."""
    n = scale_inv_chol.shape[0]
    A = np.zeros((n, n))
    A[np.diag_indices(n)] = np.sqrt(rng.chisquare(dof - np.arange(n)))
    low = np.tril_indices(n, -1)
    A[low] = rng.standard_normal(len(low[0]))
    return scale_inv_chol @ A


def draw_inverse_wishart(scale, dof: float, rng: np.random.Generator) -> np.ndarray:
    """One draw from the inverse-Wishart iW(scale, dof), mean scale/(dof-n-1).

    Uses the Bartlett decomposition of W ~ Wishart(scale^{-1}, dof) and
    returns W^{-1}.
    """
    S = symmetrize(scale, "scale")
    n = S.shape[0]
    if not dof > n + 1:
        raise DofTooSmall(f"dof={dof} must exceed n+1={n + 1}")
    R = cholesky_lower(S)
    # chol(S^{-1}) = chol of R^{-T} R^{-1}; compute it from the inverse
    Rinv = solve_triangular(R, np.eye(n), lower=True)
    Sinv_chol = cholesky_lower(Rinv.T @ Rinv)
    M = draw_wishart_factor(Sinv_chol, dof, rng)
    Minv = solve_triangular(M, np.eye(n), lower=True)
    out = Minv.T @ Minv
    return 0.5 * (out + out.T)


def is_spd(a) -> bool:
    try:
        cholesky_lower(a)
    except (NotPositiveDefinite, NotSymmetric):
        return False
    return True


def spd_inverse(a) -> np.ndarray:
    """Inverse of an SPD matrix through its Cholesky factor."""
    L = cholesky_lower(a)
    Linv = solve_triangular(L, np.eye(L.shape[0]), lower=True)
    out = Linv.T @ Linv
    return 0.5 * (out + out.T)
