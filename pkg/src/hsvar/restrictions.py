"""Zero and sign restrictions compiled into linear rows acting on columns of Q.

Every restriction on a structural object becomes a row vector r(phi) with the
restriction reading r' q_c = 0 (zeros) or r' q_c >= 0 (signs), where q_c is the
column of Q attached to the restricted shock.  Indices are 0-based here; the
text format in :mod:`hsvar.io` is 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import linprog

from .errors import HorizonExceeded, IndexOutOfBounds, RedundantRestrictions, ValidationError
from .identification import (
    EigenIdentification,
    NormalizationRule,
    partition_from_pools,
    point_rotation,
    sequential_columns,
    singleton_partition,
    validate_partition,
)
from .linalg import cholesky_lower
from .reduced_form import ReducedForm, VmaCoefficients, long_run_multiplier

ZERO_TARGETS = ("A0inv", "A0", "A_l", "CIRinf", "IRh")


@dataclass(frozen=True)
class ZeroRestriction:
    """target in A0inv | A0 | A_l | CIRinf | IRh; ``lag`` is the lag (A_l) or horizon (IRh)."""

    target: str
    i: int
    j: int
    lag: int | None = None

    def __post_init__(self):
        if self.target not in ZERO_TARGETS:
            raise ValidationError(f"unknown zero-restriction target {self.target!r}")
        if self.target in ("A_l", "IRh") and (self.lag is None or self.lag < 0):
            raise ValidationError(f"{self.target} needs a non-negative lag/horizon")
        if self.target == "A_l" and self.lag < 1:
            raise ValidationError("A_l lag must be >= 1")

    def shock(self) -> int:
        """User shock whose column the row acts on."""
        return self.i if self.target in ("A0", "A_l") else self.j


@dataclass(frozen=True)
class SignRestriction:
    """Response of variable i to shock j at horizons h..h_end has the sign of ``direction``."""

    i: int
    j: int
    h: int
    direction: int
    h_end: int | None = None

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValidationError("direction must be +1 or -1")
        if self.h < 0 or (self.h_end is not None and self.h_end < self.h):
            raise ValidationError("invalid sign-restriction horizon range")

    def horizons(self) -> range:
        return range(self.h, (self.h if self.h_end is None else self.h_end) + 1)


@dataclass(frozen=True)
class RestrictionSpec:
    """User restrictions, pooled eigenvalue ranges and normalization choices."""

    zeros: tuple[ZeroRestriction, ...] = ()
    signs: tuple[SignRestriction, ...] = ()
    interest: int | None = None
    pools: tuple[tuple[int, int], ...] = ()
    shock_order: tuple[int, ...] | None = None
    sign_rule: str = "diag_A0_nonneg"
    sign_directions: tuple[int, ...] | None = None
    label: str = ""

    def __add__(self, other: "RestrictionSpec") -> "RestrictionSpec":
        return RestrictionSpec(
            zeros=self.zeros + other.zeros,
            signs=self.signs + other.signs,
            interest=self.interest if self.interest is not None else other.interest,
            pools=self.pools + other.pools,
            shock_order=self.shock_order or other.shock_order,
            sign_rule=self.sign_rule,
            sign_directions=self.sign_directions or other.sign_directions,
            label=self.label or other.label,
        )

    def normalization(self) -> NormalizationRule:
        return NormalizationRule(
            sign_rule=self.sign_rule,
            shock_order=self.shock_order,
            sign_directions=self.sign_directions,
        )

    def partition(self, n: int) -> tuple[tuple[int, ...], ...]:
        return partition_from_pools(n, self.pools) if self.pools else singleton_partition(n)

    def max_horizon(self) -> int:
        hs = [max(s.horizons()) for s in self.signs]
        hs += [z.lag for z in self.zeros if z.target == "IRh"]
        return max(hs, default=0)

    def validate(self, n: int, lag_order: int | None = None) -> None:
        for z in self.zeros:
            if not (0 <= z.i < n and 0 <= z.j < n):
                raise IndexOutOfBounds(f"zero restriction indices ({z.i + 1}, {z.j + 1}) outside 1..{n}")
            if z.target == "A_l" and lag_order is not None and z.lag > lag_order:
                raise IndexOutOfBounds(f"lag {z.lag} exceeds lag order {lag_order}")
        for s in self.signs:
            if not (0 <= s.i < n and 0 <= s.j < n):
                raise IndexOutOfBounds(f"sign restriction indices ({s.i + 1}, {s.j + 1}) outside 1..{n}")
        if self.interest is not None and not 0 <= self.interest < n:
            raise IndexOutOfBounds("shock of interest out of range")
        if self.shock_order is not None and len(self.shock_order) != n:
            raise IndexOutOfBounds("shock order length does not match the system size")
        if self.sign_directions is not None and len(self.sign_directions) != n:
            raise IndexOutOfBounds("normalization directions do not match the system size")
        self.partition(n)


@dataclass(frozen=True)
class RestrictionProgram:
    """Compiled rows per internal column c: F[c] (f_c x n) and S[c] (s_c x n).

    ``sigma[:, c]`` is the sign-normalization vector of column c (never counted
    among the restrictions); ``order`` lists, per block, the construction order.
    """

    F: tuple[np.ndarray, ...]
    S: tuple[np.ndarray, ...]
    sigma: np.ndarray
    partition: tuple[tuple[int, ...], ...]
    norm: NormalizationRule
    j_star: int | None = None
    order: tuple[tuple[int, ...], ...] | None = None

    @property
    def n(self) -> int:
        return len(self.F)

    @property
    def f(self) -> np.ndarray:
        return np.array([F.shape[0] for F in self.F])

    @property
    def s(self) -> np.ndarray:
        return np.array([S.shape[0] for S in self.S])

    def block_of(self, col: int) -> tuple[int, ...]:
        for b in self.partition:
            if col in b:
                return b
        raise ValidationError(f"column {col} not in partition")

    def ordered_block(self, col: int) -> tuple[int, ...]:
        blocks = self.order if self.order is not None else self.partition
        for b in blocks:
            if col in b:
                return b
        raise ValidationError(f"column {col} not in partition")

    def with_interest(self, j_star: int) -> "RestrictionProgram":
        return order_variables(replace(self, order=None), j_star=j_star)


@dataclass(frozen=True)
class BlockCount:
    columns: tuple[int, ...]
    m: int
    f: tuple[int, ...]


@dataclass(frozen=True)
class IdStatus:
    tag: str
    blocks: tuple[BlockCount, ...]
    convexity: str = "none"
    sign_feasible: bool | None = None
    redundant: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)


def _empty(n: int) -> np.ndarray:
    return np.zeros((0, n))


def compile(spec: RestrictionSpec, rf: ReducedForm, vma: VmaCoefficients, norm: NormalizationRule | None = None) -> RestrictionProgram:
    """Build F_c(phi) and S_c(phi) for every internal column c."""
    n = rf.n
    norm = spec.normalization() if norm is None else norm
    spec.validate(n, rf.lag_order)
    need = spec.max_horizon()
    if need > vma.horizons:
        raise HorizonExceeded(f"restrictions need horizon {need}, VMA has {vma.horizons}")
    L = cholesky_lower(rf.omega1)
    Linv = solve_triangular(L, np.eye(n), lower=True)
    col = norm.column_of_shock(n)
    F: list[list[np.ndarray]] = [[] for _ in range(n)]
    S: list[list[np.ndarray]] = [[] for _ in range(n)]
    lr = None
    for z in spec.zeros:
        if z.target == "A0inv":
            row = L[z.i]
        elif z.target == "A0":
            row = Linv[:, z.j]
        elif z.target == "A_l":
            row = Linv @ rf.lag_matrix(z.lag)[:, z.j]
        elif z.target == "CIRinf":
            lr = long_run_multiplier(rf) if lr is None else lr
            row = (lr @ L)[z.i]
        else:
            row = (vma.C[z.lag] @ L)[z.i]
        F[col[z.shock()]].append(row)
    for s in spec.signs:
        for h in s.horizons():
            S[col[s.j]].append(s.direction * (vma.C[h] @ L)[s.i])
    stack = lambda rows: np.vstack(rows) if rows else _empty(n)  # noqa: E731
    return RestrictionProgram(
        F=tuple(stack(r) for r in F),
        S=tuple(stack(r) for r in S),
        sigma=norm.sign_vectors(L),
        partition=spec.partition(n),
        norm=norm,
        j_star=None if spec.interest is None else int(col[spec.interest]),
    )


def order_variables(program: RestrictionProgram, partition=None, j_star: int | None = None) -> RestrictionProgram:
    """Within each block sort columns by restriction count, descending.

    Ties put the column of interest first, then keep the eigenvalue order.
    """
    partition = program.partition if partition is None else validate_partition(partition, program.n)
    j_star = program.j_star if j_star is None else j_star
    f = program.f
    order = tuple(tuple(sorted(b, key=lambda c: (-f[c], c != j_star, c))) for b in partition)
    return replace(program, partition=partition, j_star=j_star, order=order)


def _convexity_tag(f: tuple[int, ...], m: int, pos: int) -> str:
    """Zero-pattern conditions for convexity; ``pos`` is the 1-based position of j*."""
    if pos == 1:
        return "cond1" if f[0] < m - 1 else "none"
    if all(f[j - 1] < m - j for j in range(1, pos)):
        return "cond2"
    for k in range(1, pos):
        exact = all(f[j - 1] == m - j for j in range(1, k + 1))
        loose = all(f[j - 1] < m - j for j in range(k + 1, pos + 1))
        if exact and loose:
            return "cond3"
    return "none"


def _sign_feasible(sol: EigenIdentification, program: RestrictionProgram, tag: str) -> bool:
    """Strict-slack certificate: exists unit q with F q = 0, S q > 0, sigma' q > 0.

    q ranges over the eigenspace of j*'s block; under the third convexity
    condition it is also orthogonal to the exactly identified leading columns.
    Solved as a linear program on the box |x| <= 1.
    """
    c = program.j_star
    block = program.ordered_block(c)
    V = sol.Q[:, sorted(block)]
    cons = [program.F[c]]
    if tag == "cond3":
        pos = block.index(c)
        f = program.f
        m = len(block)
        k = max(kk for kk in range(1, pos + 1) if all(f[block[j - 1]] == m - j for j in range(1, kk + 1)))
        cons += [q[None, :] for q in sequential_columns(sol, program, block, k)]
    K = np.vstack(cons) @ V
    N = V @ _null_basis(K, V.shape[1])
    if N.shape[1] == 0:
        return False
    G = np.vstack([program.S[c], program.sigma[:, c][None, :]]) @ N
    d = N.shape[1]
    # maximize t subject to G x >= t, -1 <= x <= 1
    res = linprog(
        c=np.r_[np.zeros(d), -1.0],
        A_ub=np.hstack([-G, np.ones((G.shape[0], 1))]),
        b_ub=np.zeros(G.shape[0]),
        bounds=[(-1, 1)] * d + [(None, 1)],
        method="highs",
    )
    return bool(res.status == 0 and -res.fun > 1e-9)


def _null_basis(K: np.ndarray, m: int) -> np.ndarray:
    if K.shape[0] == 0:
        return np.eye(m)
    _, s, Vt = np.linalg.svd(K)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    return Vt[rank:].T


def classify(program: RestrictionProgram, partition=None, sol: EigenIdentification | None = None) -> IdStatus:
    """Point, set or over-identification from the zero-restriction counts.

    With ``sol`` supplied the rank of a point-identifying pattern is audited
    and, when the shock of interest carries sign restrictions, a strict-slack
    feasibility certificate is computed.
    """
    if program.order is None or partition is not None:
        program = order_variables(program, partition)
    f = program.f
    blocks = []
    over = strict = False
    for b in program.order:
        fb = tuple(int(f[c]) for c in b)
        m = len(b)
        blocks.append(BlockCount(columns=b, m=m, f=fb))
        for j, fj in enumerate(fb, start=1):
            if fj > m - j:
                over = True
            elif fj < m - j:
                strict = True
    tag = "over_restricted" if over else ("set_identified" if strict else "point_identified")
    redundant = False
    notes = []
    if tag == "point_identified" and sol is not None:
        try:
            point_rotation(sol, program)
        except RedundantRestrictions:
            redundant = True
            tag = "set_identified"
            notes.append("zero restrictions are redundant at this reduced form")
    convexity = "none"
    feasible = None
    c = program.j_star
    if c is not None and tag != "over_restricted":
        block = program.ordered_block(c)
        if len(block) > 1:
            fb = tuple(int(f[k]) for k in block)
            convexity = _convexity_tag(fb, len(block), block.index(c) + 1)
            others_signed = any(program.S[k].shape[0] for k in range(program.n) if k != c)
            if convexity != "none" and others_signed:
                notes.append("sign restrictions on other shocks: convexity conditions do not apply")
                convexity = "none"
        if sol is not None and program.S[c].shape[0] and len(block) > 1:
            feasible = _sign_feasible(sol, program, convexity)
    return IdStatus(tag, tuple(blocks), convexity, feasible, redundant, tuple(notes))


TABLE2_OIL_TEXT = """\
# Sign pattern on impact responses of (production growth, real activity, real oil price).
# Shock labels: 1 oil supply disruption, 2 aggregate demand, 3 oil-specific demand.
# The distinct eigenvalue (largest) belongs to shock 3; shocks 1 and 2 share lambda_2 = lambda_3.
shocks 2 3 1
pool 2..3
normalize C - + +
interest 1
# shock 1: (-) production [normalization], real activity -, real oil price + for twelve months
sign IR 0 2 1 -
sign IR 0..11 3 1 +
# shock 2: production +, (+) real activity [normalization], real oil price +
sign IR 0 1 2 +
sign IR 0 3 2 +
# shock 3: (+) real oil price [normalization], otherwise unrestricted
"""
