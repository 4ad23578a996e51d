"""Identification through the regime change in volatility.

With Omega_1 = C C' and Omega_2 = C Lambda C', the impact matrix is
C = Omega_1tr Q where Q Lambda Q' is the eigen-decomposition of
Omega_1tr^{-1} Omega_2 Omega_1tr^{-1}'.  Columns of Q are indexed by eigenvalue
rank ("internal" order, lambda descending); a :class:`NormalizationRule` can
map user-facing shock labels onto those ranks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionTooLarge,
    InvalidPartition,
    RedundantRestrictions,
    ValidationError,
)
from .linalg import cholesky_lower, svd_decomp, sym_eigen_desc
from .reduced_form import ReducedForm

SIGN_RULES = ("diag_A0_nonneg", "diag_C_nonneg")
RANK_TOL = 1e-10


@dataclass(frozen=True)
class NormalizationRule:
    """Sign and permutation conventions.

    ``shock_order[k]`` is the eigenvalue rank (0-based, descending) attached to
    user shock k.  ``None`` means shock k is the k-th largest eigenvalue.
    ``sign_directions[k]`` (+1 or -1) is the required sign of shock k's
    diagonal entry; the default is all non-negative.
    """

    sign_rule: str = "diag_A0_nonneg"
    order_rule: str = "lambda_descending"
    shock_order: tuple[int, ...] | None = None
    sign_directions: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.sign_rule not in SIGN_RULES:
            raise ValidationError(f"unknown sign rule {self.sign_rule!r}")
        if self.order_rule != "lambda_descending":
            raise ValidationError(f"unknown order rule {self.order_rule!r}")
        if self.shock_order is not None:
            so = tuple(int(k) for k in self.shock_order)
            if sorted(so) != list(range(len(so))):
                raise ValidationError("shock_order must be a permutation")
            object.__setattr__(self, "shock_order", so)
        if self.sign_directions is not None:
            sd = tuple(int(d) for d in self.sign_directions)
            if any(d not in (1, -1) for d in sd):
                raise ValidationError("sign directions must be +1 or -1")
            object.__setattr__(self, "sign_directions", sd)

    def column_of_shock(self, n: int) -> np.ndarray:
        """Internal column holding each user shock."""
        if self.shock_order is None:
            return np.arange(n)
        if len(self.shock_order) != n:
            raise ValidationError("shock_order length does not match the system size")
        return np.asarray(self.shock_order)

    def shock_of_column(self, n: int) -> np.ndarray:
        return np.argsort(self.column_of_shock(n))

    def sign_vectors(self, L: np.ndarray) -> np.ndarray:
        """Column c holds sigma_c with the rule  sigma_c' q_c >= 0."""
        n = L.shape[0]
        k = self.shock_of_column(n)
        if self.sign_rule == "diag_A0_nonneg":
            sig = solve_triangular(L, np.eye(n), lower=True)[:, k]
        else:
            sig = L.T[:, k]
        if self.sign_directions is not None:
            if len(self.sign_directions) != n:
                raise ValidationError("sign_directions length does not match the system size")
            sig = sig * np.asarray(self.sign_directions, dtype=float)[k]
        return sig


@dataclass(frozen=True)
class EigenIdentification:
    """Ordered eigenvalues, rotation Q and impact matrix C = L Q (internal order)."""

    lam: np.ndarray
    Q: np.ndarray
    L: np.ndarray
    partition: tuple[tuple[int, ...], ...]
    norm: NormalizationRule = field(default_factory=NormalizationRule)
    degenerate_signs: tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def C(self) -> np.ndarray:
        return self.L @ self.Q

    @property
    def A0(self) -> np.ndarray:
        return self.Q.T @ solve_triangular(self.L, np.eye(self.n), lower=True)

    @property
    def omega2_fitted(self) -> np.ndarray:
        C = self.C
        return C @ np.diag(self.lam) @ C.T

    def block_of(self, col: int) -> tuple[int, ...]:
        for b in self.partition:
            if col in b:
                return b
        raise ValidationError(f"column {col} not in partition")

    def user_C(self) -> np.ndarray:
        return self.C[:, self.norm.column_of_shock(self.n)]

    def user_lambda(self) -> np.ndarray:
        return self.lam[self.norm.column_of_shock(self.n)]


@dataclass(frozen=True)
class StructuralParams:
    """theta = (A0, A_plus, Lambda) in user shock order, plus C = A0^{-1}."""

    A0: np.ndarray
    A_plus: np.ndarray
    Lambda: np.ndarray
    C: np.ndarray


def singleton_partition(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple((i,) for i in range(n))


def validate_partition(partition, n: int) -> tuple[tuple[int, ...], ...]:
    """Blocks must be contiguous, ordered and cover 0..n-1."""
    blocks = tuple(tuple(int(i) for i in b) for b in partition)
    flat = [i for b in blocks for i in b]
    if flat != list(range(n)) or any(len(b) == 0 for b in blocks):
        raise InvalidPartition(f"partition {partition} must split 0..{n - 1} into contiguous blocks")
    return blocks


def partition_from_pools(n: int, pools) -> tuple[tuple[int, ...], ...]:
    """Partition from (lo, hi) inclusive 0-based ranges; other indices stay singletons."""
    owner = list(range(n))
    for lo, hi in pools:
        if not 0 <= lo < hi < n:
            raise InvalidPartition(f"pool range {lo + 1}..{hi + 1} outside 1..{n}")
        for i in range(lo, hi + 1):
            if owner[i] != i:
                raise InvalidPartition("overlapping pool ranges")
            owner[i] = lo
    blocks: dict[int, list[int]] = {}
    for i, o in enumerate(owner):
        blocks.setdefault(o, []).append(i)
    return validate_partition([blocks[k] for k in sorted(blocks)], n)


def _apply_signs(Q: np.ndarray, sigma: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    Q = Q.copy()
    s = np.einsum("ij,ij->j", sigma, Q)
    Q[:, s < 0] *= -1.0
    return Q, tuple(int(c) for c in np.flatnonzero(s == 0.0))


def normalize(sol: EigenIdentification, norm: NormalizationRule | None = None) -> EigenIdentification:
    """Sort eigenvalues descending, then apply the column sign rule."""
    norm = sol.norm if norm is None else norm
    order = np.argsort(-sol.lam, kind="stable")
    lam = sol.lam[order]
    Q, degenerate = _apply_signs(sol.Q[:, order], norm.sign_vectors(sol.L))
    return replace(sol, lam=lam, Q=Q, norm=norm, degenerate_signs=degenerate)


def _standardized_omega2(rf: ReducedForm) -> tuple[np.ndarray, np.ndarray]:
    L = cholesky_lower(rf.omega1)
    Linv = solve_triangular(L, np.eye(L.shape[0]), lower=True)
    M = Linv @ rf.omega2 @ Linv.T
    return L, 0.5 * (M + M.T)


def solve_eigen(rf: ReducedForm, norm: NormalizationRule | None = None) -> EigenIdentification:
    """Eigen solution: C = Omega_1tr Q, Lambda from Omega_1tr^{-1} Omega_2 Omega_1tr^{-1}'."""
    norm = NormalizationRule() if norm is None else norm
    L, M = _standardized_omega2(rf)
    eig = sym_eigen_desc(M)
    sol = EigenIdentification(eig.values, eig.vectors, L, singleton_partition(L.shape[0]), norm)
    return normalize(sol, norm)


def solve_svd(rf: ReducedForm, norm: NormalizationRule | None = None) -> EigenIdentification:
    """SVD solution: Omega_1tr^{-1} Omega_2tr = Q_1 Lambda^{1/2} Q_2."""
    norm = NormalizationRule() if norm is None else norm
    L = cholesky_lower(rf.omega1)
    L2 = cholesky_lower(rf.omega2)
    U, s, _ = svd_decomp(solve_triangular(L, L2, lower=True))
    sol = EigenIdentification(s**2, U, L, singleton_partition(L.shape[0]), norm)
    return normalize(sol, norm)


def enumerate_observational_equivalents(C, Lambda) -> list[tuple[np.ndarray, np.ndarray]]:
    """All (C S P', P Lambda P') for sign matrices S and permutation matrices P."""
    C = np.asarray(C, dtype=float)
    lam = np.asarray(Lambda, dtype=float)
    n = len(lam)
    if n > 4:
        raise DimensionTooLarge("enumeration is limited to n <= 4")
    out = []
    for perm in itertools.permutations(range(n)):
        p = np.asarray(perm)
        for signs in itertools.product((1.0, -1.0), repeat=n):
            CS = C * np.asarray(signs)
            out.append((CS[:, p], lam[p]))
    return out


def pool_eigenvalues(sol: EigenIdentification, partition) -> EigenIdentification:
    """Replace eigenvalues in each block by the block mean.

    Block eigenvectors are kept and passed through a sign-preserving QR pass.
    """
    blocks = validate_partition(partition, sol.n)
    lam = sol.lam.copy()
    Q = sol.Q.copy()
    for b in blocks:
        if len(b) == 1:
            continue
        idx = list(b)
        lam[idx] = lam[idx].mean()
        Qb, R = np.linalg.qr(Q[:, idx])
        Q[:, idx] = Qb * np.sign(np.diag(R))
    Q, degenerate = _apply_signs(Q, sol.norm.sign_vectors(sol.L))
    return replace(sol, lam=lam, Q=Q, partition=blocks, degenerate_signs=degenerate)


def frobenius_loss(sol: EigenIdentification, lam_tilde) -> float:
    """||Omega_2 - Omega~_2||_F in standardized coordinates (same Q)."""
    d = sol.lam - np.asarray(lam_tilde, dtype=float)
    M = sol.Q @ np.diag(d) @ sol.Q.T
    return float(np.linalg.norm(M))


def structural_params(rf: ReducedForm, sol: EigenIdentification, Q: np.ndarray | None = None) -> StructuralParams:
    """theta in user shock order for rotation Q (defaults to sol.Q)."""
    Q = sol.Q if Q is None else Q
    cols = sol.norm.column_of_shock(sol.n)
    C = (sol.L @ Q)[:, cols]
    A0 = np.linalg.inv(C)
    return StructuralParams(A0=A0, A_plus=A0 @ rf.B, Lambda=sol.lam[cols], C=C)


def null_direction(M: np.ndarray, m: int) -> np.ndarray:
    """Unit vector spanning the one-dimensional null space of M (r x m).

    Raises RedundantRestrictions when the rank is below m - 1.
    """
    if M.shape[0] == 0:
        if m == 1:
            return np.ones(1)
        raise ValidationError("column is not pinned down by its restrictions")
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > RANK_TOL * max(1.0, s[0] if s.size else 0.0)))
    if rank < m - 1:
        if M.shape[0] >= m - 1:
            raise RedundantRestrictions("restriction rows are linearly dependent on earlier constraints")
        raise ValidationError("column is not pinned down by its restrictions")
    if rank > m - 1:
        raise ValidationError("restrictions leave no admissible direction")
    return Vt[-1]


def exact_point_identify(rf: ReducedForm, sol: EigenIdentification, program, norm=None) -> StructuralParams:
    """Unique rotation under a point-identifying zero pattern.

    Within each block the columns are built in the program's order as the unit
    vector of the block eigenspace orthogonal to the previously built columns
    and to the column's restriction rows.
    """
    Q = point_rotation(sol, program)
    return structural_params(rf, sol, Q)


def sequential_columns(sol: EigenIdentification, program, block: tuple[int, ...], count: int) -> list[np.ndarray]:
    """First ``count`` columns of ``block`` (in construction order), each pinned
    down by its zero rows and orthogonality to the earlier ones."""
    sigma = program.sigma if getattr(program, "sigma", None) is not None else sol.norm.sign_vectors(sol.L)
    V = sol.Q[:, sorted(block)]
    m = V.shape[1]
    built: list[np.ndarray] = []
    for c in block[:count]:
        K = np.vstack([program.F[c]] + [q[None, :] for q in built])
        q = V @ null_direction(K @ V, m)
        q /= np.linalg.norm(q)
        if sigma[:, c] @ q < 0:
            q = -q
        built.append(q)
    return built


def point_rotation(sol: EigenIdentification, program) -> np.ndarray:
    """Q with every multi-column block built by :func:`sequential_columns`."""
    orders = program.order if program.order is not None else sol.partition
    Q = sol.Q.copy()
    for block in orders:
        if len(block) == 1:
            continue
        for c, q in zip(block, sequential_columns(sol, program, block, len(block))):
            Q[:, c] = q
    return Q
