"""Robust-Bayes inference for set-identified impulse responses.

For each posterior draw of the reduced form the eigenvalues are pooled
according to the declared partition, an admissible rotation Q is sampled
(sequential projection plus sign checks) and the lower/upper bounds of every
impulse response over the admissible set are computed.  Summaries follow:
posterior-mean bounds, robust credible regions, single-prior HPD regions and
prior informativeness.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import (
    AcceptanceTooLow,
    AllDrawsEmpty,
    NoFeasibleStart,
    NumericalError,
    RedundantRestrictions,
    UnstableVar,
    ValidationError,
)
from .gibbs import GibbsSampler, PriorSpec
from .identification import EigenIdentification, point_rotation, pool_eigenvalues, solve_eigen
from .linalg import orthonormal_basis
from .reduced_form import Dataset, ReducedForm, VmaCoefficients, long_run_multiplier, vma_coefficients
from .restrictions import RestrictionProgram, RestrictionSpec, compile, order_variables

RESIDUAL_TOL = 1e-12
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class AlgoConfig:
    """Settings of the robust-Bayes algorithm.

    ``method`` is "optimize" (exact or local-search bounds) or "stochastic"
    (min/max over K admissible draws per reduced-form draw).
    """

    M: int = 1000
    L: int = 3000
    multistarts: int = 5
    K: int = 10000
    eta_grid: int = 400
    alpha: float = 0.68
    seed: int = 0
    horizons: int = 24
    method: str = "optimize"
    burn_in: int = 1000
    thinning: int = 1
    cumulate: tuple[int, ...] = ()
    workers: int | None = None

    def __post_init__(self):
        if self.M < 1 or self.L < 1 or self.K < 1 or self.multistarts < 1:
            raise ValidationError("M, L, K and multistarts must be positive")
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        if self.method not in ("optimize", "stochastic"):
            raise ValidationError(f"unknown bounds method {self.method!r}")
        if self.eta_grid < 2 or self.horizons < 0:
            raise ValidationError("eta_grid >= 2 and horizons >= 0 required")


@dataclass(frozen=True)
class EtaFunctional:
    """Scalar response of variable g to one shock: c(phi)' q.

    target: "IRh" (horizon h), "CIRh" (cumulated to h), "IRinf" or "CIRinf".
    ``shock`` is an internal column; ``None`` uses the program's shock of interest.
    """

    target: str
    g: int
    h: int = 0
    shock: int | None = None

    def row(self, rf: ReducedForm, L: np.ndarray, vma: VmaCoefficients | None = None) -> np.ndarray:
        if self.target in ("IRh", "CIRh"):
            vma = vma_coefficients(rf, self.h) if vma is None or vma.horizons < self.h else vma
            Ch = vma.C[self.h] if self.target == "IRh" else vma.C[: self.h + 1].sum(axis=0)
            return (Ch @ L)[self.g]
        if self.target == "IRinf":
            if not rf.stable:
                raise UnstableVar("long-run responses need a stable VAR")
            return ((np.eye(rf.n) - rf.lag_sum()) @ L)[self.g]
        if self.target == "CIRinf":
            return (long_run_multiplier(rf) @ L)[self.g]
        raise ValidationError(f"unknown functional target {self.target!r}")


def response_rows(vma: VmaCoefficients, L: np.ndarray, horizons: int, cumulate=()) -> np.ndarray:
    """Rows c_{g,h}' = e_g' C_h L as an (n, H + 1, n) array; cumulated for listed g."""
    R = vma.C[: horizons + 1] @ L
    out = np.transpose(R, (1, 0, 2)).copy()
    for g in cumulate:
        out[g] = np.cumsum(out[g], axis=0)
    return out


# admissible rotations


def _sample_rotations(sol: EigenIdentification, program: RestrictionProgram, rng, N: int):
    """N candidate rotations (N x n x n) and a mask of non-degenerate draws."""
    n = sol.n
    sigma = program.sigma
    Qs = np.empty((N, n, n))
    ok = np.ones(N, dtype=bool)
    blocks = program.order if program.order is not None else program.partition
    for block in blocks:
        if len(block) == 1:
            c = block[0]
            q = sol.Q[:, c] if sigma[:, c] @ sol.Q[:, c] >= 0 else -sol.Q[:, c]
            Qs[:, :, c] = q
            continue
        outside = [k for k in range(n) if k not in block]
        Qbar = sol.Q[:, outside]
        built: list[np.ndarray] = []
        for c in block:
            U = orthonormal_basis(np.hstack([program.F[c].T, Qbar]))
            r = rng.standard_normal((N, n))
            W: list[np.ndarray] = []
            for q in built:
                w = q - (q @ U) @ U.T
                for w2 in W:
                    w -= np.sum(w * w2, axis=1, keepdims=True) * w2
                nw = np.linalg.norm(w, axis=1, keepdims=True)
                W.append(np.where(nw > RESIDUAL_TOL, w / np.where(nw > 0, nw, 1.0), 0.0))
            for _ in range(2):
                r = r - (r @ U) @ U.T
                for w in W:
                    r = r - np.sum(r * w, axis=1, keepdims=True) * w
            nr = np.linalg.norm(r, axis=1)
            ok &= nr >= RESIDUAL_TOL
            q = r / np.where(nr > 0, nr, 1.0)[:, None]
            q[q @ sigma[:, c] < 0] *= -1.0
            Qs[:, :, c] = q
            built.append(q)
    return Qs, ok


def _signs_hold(Qs: np.ndarray, program: RestrictionProgram) -> np.ndarray:
    ok = np.ones(Qs.shape[0], dtype=bool)
    for c, S in enumerate(program.S):
        if S.shape[0]:
            ok &= np.all(Qs[:, :, c] @ S.T >= 0.0, axis=1)
    return ok


def draw_admissible_Q(sol: EigenIdentification, program: RestrictionProgram, rng, L: int = 3000, batch: int = 32):
    """One admissible rotation, or ``None`` if L consecutive candidates fail."""
    tried = 0
    while tried < L:
        N = min(batch, L - tried)
        Qs, ok = _sample_rotations(sol, program, rng, N)
        ok &= _signs_hold(Qs, program)
        hit = np.flatnonzero(ok)
        if hit.size:
            return Qs[hit[0]]
        tried += N
    return None


def sample_admissible(sol, program, rng, K: int, L: int = 3000, batch: int = 256) -> np.ndarray:
    """Up to K admissible rotations (K' x n x n); stops after max(L, 100 K) candidates."""
    out = []
    got = tried = 0
    limit = max(L, 100 * K)
    while got < K and tried < limit:
        N = min(batch, limit - tried)
        Qs, ok = _sample_rotations(sol, program, rng, N)
        ok &= _signs_hold(Qs, program)
        sel = Qs[ok][: K - got]
        out.append(sel)
        got += sel.shape[0]
        tried += N
        if got == 0 and tried >= L:
            break
    if got == 0:
        raise AllDrawsEmpty("no admissible rotation found")
    return np.concatenate(out, axis=0)


# bounds over the admissible set


def _angle_coeffs(rows: np.ndarray, V: np.ndarray, second: bool) -> tuple[np.ndarray, np.ndarray]:
    """(cos, sin) coefficients of x' q(theta) for each row x.

    First column: q = V (cos t, sin t); second column: q = V (-sin t, cos t).
    """
    P = rows @ V
    if second:
        return P[:, 1], -P[:, 0]
    return P[:, 0], P[:, 1]


def _eval(ac, as_, t):
    return ac * np.cos(t) + as_ * np.sin(t)


def _roots(ac, as_) -> np.ndarray:
    keep = np.hypot(ac, as_) > 0
    psi = np.arctan2(as_[keep], ac[keep])
    return np.mod(np.concatenate([psi + np.pi / 2, psi - np.pi / 2]), TWO_PI)


def feasible_arcs(V, sigma0, sigma1, S0, S1) -> list[tuple[float, float, float]]:
    """Admissible angles of a two-column block with no zero restrictions.

    The block is Q_b = V [u(t), s(t) u_perp(t)] where s(t) is fixed by the sign
    normalization of the second column.  Returns closed arcs (t0, t1, s).
    """
    c0 = _angle_coeffs(np.vstack([sigma0[None, :], S0]), V, False)
    c1 = _angle_coeffs(S1, V, True) if S1.shape[0] else (np.zeros(0), np.zeros(0))
    cn = _angle_coeffs(sigma1[None, :], V, True)
    cuts = np.concatenate([_roots(*c0), _roots(*c1), _roots(*cn), [0.0, TWO_PI]])
    cuts = np.unique(np.clip(cuts, 0.0, TWO_PI))
    arcs = []
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        if t1 - t0 <= 1e-15:
            continue
        mid = 0.5 * (t0 + t1)
        s = 1.0 if _eval(*cn, mid)[0] >= 0 else -1.0
        if np.all(_eval(*c0, mid) >= 0) and np.all(s * _eval(*c1, mid) >= 0):
            if arcs and arcs[-1][1] == t0 and arcs[-1][2] == s:
                arcs[-1] = (arcs[-1][0], t1, s)
            else:
                arcs.append((t0, t1, s))
    return arcs


def _in_arc(t: np.ndarray, t0: float, t1: float) -> np.ndarray:
    t = np.mod(t, TWO_PI)
    return (t >= t0) & (t <= t1)


def arc_bounds(rows: np.ndarray, V: np.ndarray, arcs, second: bool) -> tuple[np.ndarray, np.ndarray]:
    """Exact min and max of rows' q over the admissible arcs."""
    G = rows.shape[0]
    lo = np.full(G, np.inf)
    hi = np.full(G, -np.inf)
    ac0, as0 = _angle_coeffs(rows, V, second)
    for t0, t1, s in arcs:
        ac, as_ = (s * ac0, s * as0) if second else (ac0, as0)
        for t in (t0, t1):
            v = _eval(ac, as_, t)
            lo = np.minimum(lo, v)
            hi = np.maximum(hi, v)
        amp = np.hypot(ac, as_)
        psi = np.arctan2(as_, ac)
        hi = np.where(_in_arc(psi, t0, t1), np.maximum(hi, amp), hi)
        lo = np.where(_in_arc(psi + np.pi, t0, t1), np.minimum(lo, -amp), lo)
    return lo, hi


def _block_kind(program: RestrictionProgram, sol: EigenIdentification, col: int) -> str:
    block = program.ordered_block(col)
    m = len(block)
    if m == 1:
        return "point"
    f = program.f
    if all(f[block[k]] == m - 1 - k for k in range(m)):
        try:
            point_rotation(sol, program)
            return "point"
        except RedundantRestrictions:
            pass
    if m == 2 and f[block[0]] == 0 and f[block[1]] == 0:
        return "arc"
    return "general"


def _slsqp_extreme(V, FV, GV, cvec, pos, W0, sense):
    """Extreme of sense * c' V w_pos over orthogonal W with F V w_k = 0, G V w_k >= 0."""
    m = V.shape[1]
    cV = cvec @ V
    norm = float(np.linalg.norm(cV))
    if norm == 0.0:
        return 0.0
    # unit-scale objective and constraint rows keep SLSQP's tolerances meaningful
    cU = cV / norm
    FV = [A / np.maximum(np.linalg.norm(A, axis=1, keepdims=True), 1e-300) for A in FV]
    GV = [A / np.maximum(np.linalg.norm(A, axis=1, keepdims=True), 1e-300) for A in GV]
    iu = np.triu_indices(m)

    def unpack(x):
        return x.reshape(m, m)

    def obj(x):
        return -sense * (cU @ unpack(x)[:, pos])

    def obj_grad(x):
        g = np.zeros((m, m))
        g[:, pos] = -sense * cU
        return g.ravel()

    def orth(x):
        W = unpack(x)
        return (W.T @ W - np.eye(m))[iu]

    def orth_jac(x):
        W = unpack(x)
        J = np.zeros((len(iu[0]), m, m))
        for r, (i, j) in enumerate(zip(*iu)):
            J[r, :, i] += W[:, j]
            J[r, :, j] += W[:, i]
        return J.reshape(len(iu[0]), -1)

    def linear(mats):
        rows = []
        for k, A in enumerate(mats):
            for a in A:
                J = np.zeros((m, m))
                J[:, k] = a
                rows.append(J.ravel())
        return np.array(rows).reshape(-1, m * m)

    JF = linear(FV)
    JG = linear(GV)
    cons = [{"type": "eq", "fun": orth, "jac": orth_jac}]
    if JF.shape[0]:
        cons.append({"type": "eq", "fun": lambda x: JF @ x, "jac": lambda x: JF})
    if JG.shape[0]:
        cons.append({"type": "ineq", "fun": lambda x: JG @ x, "jac": lambda x: JG})
    res = minimize(obj, W0.ravel(), jac=obj_grad, constraints=cons, method="SLSQP",
                   options={"ftol": 1e-12, "maxiter": 300})
    U, _, Vt = np.linalg.svd(unpack(res.x))
    W = U @ Vt
    x = W.ravel()
    scale = max(1.0, float(np.max(np.abs(JG), initial=0.0)), float(np.max(np.abs(JF), initial=0.0)))
    if JF.shape[0] and np.max(np.abs(JF @ x)) > 1e-8 * scale:
        return None
    if JG.shape[0] and np.min(JG @ x) < -1e-9 * scale:
        return None
    return float(cV @ W[:, pos])


def general_bounds(sol, program, col, rows, starts, pool=None) -> tuple[np.ndarray, np.ndarray]:
    """Multistart SLSQP over the block rotation for each row.

    ``starts`` are admissible Q's used for every row; ``pool`` (admissible
    draws) adds, per row and direction, the best pooled draw as one more start.
    Local searches cannot cross between the two components of O(m), so seeding
    from the best draw keeps them on the side where the extreme lies.
    """
    block = program.ordered_block(col)
    V = sol.Q[:, sorted(block)]
    pos = block.index(col)
    FV = [program.F[c] @ V for c in block]
    GV = [np.vstack([program.S[c], program.sigma[:, c][None, :]]) @ V for c in block]
    cand = np.stack(list(starts) + ([] if pool is None else list(pool)))
    W0s = [V.T @ Q[:, list(block)] for Q in starts]
    G = rows.shape[0]
    lo = np.empty(G)
    hi = np.empty(G)
    vals = cand[:, :, col] @ rows.T
    for g in range(G):
        i_lo, i_hi = int(np.argmin(vals[:, g])), int(np.argmax(vals[:, g]))
        best_lo, best_hi = vals[i_lo, g], vals[i_hi, g]
        seeds_lo = W0s + ([V.T @ cand[i_lo][:, list(block)]] if i_lo >= len(starts) else [])
        seeds_hi = W0s + ([V.T @ cand[i_hi][:, list(block)]] if i_hi >= len(starts) else [])
        for W0 in seeds_lo:
            v = _slsqp_extreme(V, FV, GV, rows[g], pos, W0, -1.0)
            if v is not None:
                best_lo = min(best_lo, v)
        for W0 in seeds_hi:
            v = _slsqp_extreme(V, FV, GV, rows[g], pos, W0, 1.0)
            if v is not None:
                best_hi = max(best_hi, v)
        lo[g], hi[g] = best_lo, best_hi
    return lo, hi


POOL_SIZE = 200


def bounds_for_rows(sol, program, col, rows, start_Q, rng, multistarts: int = 5, L: int = 3000, solver: str = "auto"):
    """(lower, upper) of rows' q_col over the admissible set, for every row.

    ``solver``: "auto" uses the exact arc solution for two-column blocks
    without zeros and multistart SLSQP otherwise; "slsqp" forces the latter.
    """
    rows = np.atleast_2d(rows)
    at_start = rows @ start_Q[:, col]
    kind = _block_kind(program, sol, col)
    if kind == "point":
        return at_start.copy(), at_start.copy()
    if kind == "arc" and solver == "auto":
        block = program.ordered_block(col)
        V = sol.Q[:, list(block)]
        S0, S1 = program.S[block[0]], program.S[block[1]]
        arcs = feasible_arcs(V, program.sigma[:, block[0]], program.sigma[:, block[1]], S0, S1)
        lo, hi = arc_bounds(rows, V, arcs, second=(col == block[1]))
        return np.minimum(lo, at_start), np.maximum(hi, at_start)
    try:
        pool = sample_admissible(sol, program, rng, POOL_SIZE, L)
    except AllDrawsEmpty:
        pool = np.zeros((0,) + start_Q.shape)
    starts = [start_Q] + list(pool[: multistarts - 1])
    return general_bounds(sol, program, col, rows, starts, pool[multistarts - 1 :])


def optimize_bounds(phi: ReducedForm, sol, program, eta: EtaFunctional, config: AlgoConfig | None = None,
                    rng=None, start_Q=None, solver: str = "auto") -> tuple[float, float]:
    """Lower and upper bound of eta over the admissible rotations."""
    config = AlgoConfig() if config is None else config
    rng = np.random.default_rng(config.seed) if rng is None else rng
    col = program.j_star if eta.shock is None else eta.shock
    if col is None:
        raise ValidationError("no shock selected for the functional")
    if start_Q is None:
        start_Q = draw_admissible_Q(sol, program, rng, config.L)
        if start_Q is None:
            raise NoFeasibleStart("no admissible rotation to start from")
    row = eta.row(phi, sol.L, vma_coefficients(phi, max(eta.h, 0)))
    lo, hi = bounds_for_rows(sol, program, col, row[None, :], start_Q, rng, config.multistarts, config.L, solver)
    return float(lo[0]), float(hi[0])


def stochastic_bounds(phi: ReducedForm, sol, program, eta: EtaFunctional, K: int, rng, L: int = 3000,
                      return_values: bool = False):
    """Min and max of eta over K admissible draws (inner approximation)."""
    col = program.j_star if eta.shock is None else eta.shock
    row = eta.row(phi, sol.L, vma_coefficients(phi, max(eta.h, 0)))
    Qs = sample_admissible(sol, program, rng, K, L)
    vals = Qs[:, :, col] @ row
    out = (float(vals.min()), float(vals.max()))
    return (out, vals) if return_values else out


# posterior summaries


def _k_of(alpha: float, N: int) -> int:
    return min(N, max(1, math.ceil(alpha * N - 1e-9)))


def hpd_region(samples, alpha: float) -> tuple[float, float]:
    """Shortest interval containing ceil(alpha N) of the sorted samples."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    N = x.size
    if N == 0:
        raise ValidationError("no samples")
    k = _k_of(alpha, N) if alpha < 1 else N
    widths = x[k - 1 :] - x[: N - k + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k - 1])


def robust_credible_region(lower, upper, alpha: float, grid: int = 400) -> tuple[float, float, float]:
    """(center, radius, grid step) of the robust credible region.

    d(eta, phi) = max(|eta - l(phi)|, |eta - u(phi)|); the radius is the
    smallest alpha-quantile of d over an eta grid and the center its argmin.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    lo, hi = float(lower.min()), float(upper.max())
    span = hi - lo
    if span == 0.0:
        return lo, 0.0, 0.0
    etas = np.linspace(lo - span / 10, hi + span / 10, grid)
    d = np.maximum(np.abs(etas[:, None] - lower[None, :]), np.abs(etas[:, None] - upper[None, :]))
    k = _k_of(alpha, lower.size) - 1
    q = np.partition(d, k, axis=1)[:, k]
    i = int(np.argmin(q))
    return float(etas[i]), float(q[i]), float(etas[1] - etas[0])


def informativeness(hpd_width: float, robust_width: float) -> float:
    """1 - width_HPD / width_robust (0 when both widths vanish)."""
    if robust_width <= 0.0:
        return 0.0
    v = 1.0 - hpd_width / robust_width
    # rounding guard only; the construction guarantees v >= 0
    return 0.0 if -1e-12 < v < 0.0 else v


@dataclass
class BoundsResult:
    """Per-draw bounds and single-prior values, indexed (draw, shock, variable, horizon).

    Shocks and variables follow the user's ordering.
    """

    lower: np.ndarray
    upper: np.ndarray
    eta: np.ndarray
    variable_names: tuple[str, ...]
    shock_names: tuple[str, ...]
    point_shocks: tuple[bool, ...]
    attempts: int
    empty: int
    unstable: int
    alpha: float = 0.68
    eta_grid: int = 400
    cumulated: tuple[int, ...] = ()
    has_bounds: bool = True
    draw_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def accepted(self) -> int:
        return self.lower.shape[0]

    @property
    def horizons(self) -> int:
        return self.lower.shape[3] - 1

    @property
    def emptiness_rate(self) -> float:
        return self.empty / self.attempts if self.attempts else 0.0

    def posterior_mean(self) -> np.ndarray:
        return self.eta.mean(axis=0)

    def posterior_mean_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower.mean(axis=0), self.upper.mean(axis=0)

    def _per_target(self, fn):
        _, J, G, H1 = self.lower.shape
        out = None
        for j in range(J):
            for g in range(G):
                for h in range(H1):
                    vals = fn(j, g, h)
                    if out is None:
                        out = np.empty((len(vals), J, G, H1))
                    out[:, j, g, h] = vals
        return out

    def hpd(self, alpha: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        a = self.alpha if alpha is None else alpha
        out = self._per_target(lambda j, g, h: hpd_region(self.eta[:, j, g, h], a))
        return out[0], out[1]

    def robust_region(self, alpha: float | None = None):
        """(center, radius, grid step) arrays of shape (shock, variable, horizon)."""
        a = self.alpha if alpha is None else alpha
        out = self._per_target(
            lambda j, g, h: robust_credible_region(self.lower[:, j, g, h], self.upper[:, j, g, h], a, self.eta_grid)
        )
        return out[0], out[1], out[2]

    def informativeness(self, alpha: float | None = None) -> np.ndarray:
        lo, hi = self.hpd(alpha)
        _, radius, _ = self.robust_region(alpha)
        f = np.vectorize(informativeness)
        return f(hi - lo, 2.0 * radius)

    def bands(self, alpha: float | None = None) -> dict[str, np.ndarray]:
        """Band arrays keyed by CSV column name, each (shock, variable, horizon)."""
        lo, hi = self.hpd(alpha)
        out = {"mean": self.posterior_mean(), "hpd_lo": lo, "hpd_hi": hi}
        if self.has_bounds:
            pl, pu = self.posterior_mean_bounds()
            center, radius, _ = self.robust_region(alpha)
            out.update(pmb_lo=pl, pmb_hi=pu, rcr_lo=center - radius, rcr_hi=center + radius)
        return out


# Algorithm 1 driver


@dataclass(frozen=True)
class _DrawTask:
    index: int
    B: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray


def _process_draw(task: _DrawTask, spec: RestrictionSpec, config: AlgoConfig):
    """Steps 4-5 for one reduced-form draw; returns (status, payload)."""
    rf = ReducedForm(task.B, task.omega1, task.omega2)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(task.index,)))
    norm = spec.normalization()
    n = rf.n
    partition = spec.partition(n)
    try:
        sol = pool_eigenvalues(solve_eigen(rf, norm), partition)
        vma = vma_coefficients(rf, max(config.horizons, spec.max_horizon()))
        program = compile(spec, rf, vma, norm)
    except UnstableVar:
        return "unstable", None
    col = norm.column_of_shock(n)
    j_star = None if spec.interest is None else int(col[spec.interest])
    program = order_variables(program, partition, j_star)
    Q = draw_admissible_Q(sol, program, rng, config.L)
    if Q is None:
        return "empty", None
    rows = response_rows(vma, sol.L, config.horizons, config.cumulate)
    flat = rows.reshape(-1, n)
    H1 = config.horizons + 1
    lower = np.empty((n, n, H1))
    upper = np.empty((n, n, H1))
    eta = np.empty((n, n, H1))
    for k in range(n):
        c = int(col[k])
        eta[k] = (flat @ Q[:, c]).reshape(n, H1)
        if config.method == "stochastic" and _block_kind(program, sol, c) != "point":
            Qs = np.concatenate([Q[None], sample_admissible(sol, program, rng, config.K - 1, config.L)])
            vals = Qs[:, :, c] @ flat.T
            lo, hi = vals.min(axis=0), vals.max(axis=0)
        else:
            lo, hi = bounds_for_rows(sol, program, c, flat, Q, rng, config.multistarts, config.L)
        lower[k] = lo.reshape(n, H1)
        upper[k] = hi.reshape(n, H1)
    return "ok", (lower, upper, eta)


def _worker_count(config: AlgoConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    env = os.environ.get("HSVAR_THREADS")
    return max(1, int(env)) if env else 1


def _run_tasks(tasks, spec, config, pool):
    if pool is None:
        return [_process_draw(t, spec, config) for t in tasks]
    return list(pool.map(_process_draw, tasks, [spec] * len(tasks), [config] * len(tasks)))


def shock_is_point(spec: RestrictionSpec, n: int) -> tuple[bool, ...]:
    """Whether each user shock sits in a singleton block or a zero-pinned block."""
    col = spec.normalization().column_of_shock(n)
    partition = spec.partition(n)
    f = np.zeros(n, dtype=int)
    for z in spec.zeros:
        f[col[z.shock()]] += 1
    out = []
    for k in range(n):
        block = next(b for b in partition if col[k] in b)
        fb = sorted((f[c] for c in block), reverse=True)
        m = len(block)
        out.append(all(fb[j] == m - 1 - j for j in range(m)))
    return tuple(out)


def run_algorithm1(data: Dataset, prior: PriorSpec, spec: RestrictionSpec, config: AlgoConfig,
                   shock_names=None) -> BoundsResult:
    """Gibbs draws of phi, pooled eigen-solution, admissible rotation and bounds until M acceptances.

    Draws are processed in chunks (optionally on a process pool) and reduced in
    draw-index order, so results do not depend on the number of workers.
    """
    n = data.n
    spec.validate(n, data.lag_order)
    sampler = GibbsSampler(data, prior, seed=config.seed)
    for _ in range(config.burn_in):
        sampler.step()
    max_attempts = math.ceil(config.M / 0.05)
    accepted: list[tuple] = []
    index: list[int] = []
    attempts = empty = unstable = 0
    workers = _worker_count(config)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while len(accepted) < config.M and attempts < max_attempts:
            need = config.M - len(accepted)
            rate = len(accepted) / attempts if attempts else 1.0
            chunk = min(max_attempts - attempts, max(workers, math.ceil(need / max(rate, 0.05))))
            chunk = min(chunk, 64 * workers) if pool is not None else min(chunk, need if rate == 1.0 else chunk)
            tasks = []
            for t in range(chunk):
                for _ in range(config.thinning):
                    sampler.step()
                tasks.append(_DrawTask(attempts + t, sampler.B.copy(), sampler.omega1.copy(), sampler.omega2.copy()))
            for task, (status, payload) in zip(tasks, _run_tasks(tasks, spec, config, pool)):
                if len(accepted) >= config.M:
                    break
                attempts += 1
                if status == "ok":
                    accepted.append(payload)
                    index.append(task.index)
                elif status == "empty":
                    empty += 1
                else:
                    unstable += 1
    finally:
        if pool is not None:
            pool.shutdown()
    if len(accepted) < config.M:
        raise AcceptanceTooLow(
            f"only {len(accepted)} of {attempts} draws had a non-empty admissible set"
        )
    lower = np.stack([a[0] for a in accepted])
    upper = np.stack([a[1] for a in accepted])
    eta = np.stack([a[2] for a in accepted])
    names = tuple(shock_names) if shock_names else tuple(f"shock{k + 1}" for k in range(n))
    return BoundsResult(
        lower=lower,
        upper=upper,
        eta=eta,
        variable_names=data.variable_names,
        shock_names=names,
        point_shocks=shock_is_point(spec, n),
        attempts=attempts,
        empty=empty,
        unstable=unstable,
        alpha=config.alpha,
        eta_grid=config.eta_grid,
        cumulated=tuple(config.cumulate),
        draw_index=np.asarray(index),
    )


def point_identified_irfs(data: Dataset, prior: PriorSpec, spec: RestrictionSpec, config: AlgoConfig,
                          shock_names=None) -> BoundsResult:
    """Distinct-eigenvalue branch: one rotation per draw, responses with HPD bands only."""
    n = data.n
    norm = spec.normalization()
    col = norm.column_of_shock(n)
    sampler = GibbsSampler(data, prior, seed=config.seed)
    for _ in range(config.burn_in):
        sampler.step()
    draws = sampler.sample(config.M, config.thinning)
    H1 = config.horizons + 1
    eta = np.empty((config.M, n, n, H1))
    for d in range(config.M):
        rf = draws[d]
        sol = solve_eigen(rf, norm)
        rows = response_rows(vma_coefficients(rf, config.horizons), sol.L, config.horizons, config.cumulate)
        for k in range(n):
            eta[d, k] = rows @ sol.Q[:, col[k]]
    names = tuple(shock_names) if shock_names else tuple(f"shock{k + 1}" for k in range(n))
    return BoundsResult(
        lower=eta,
        upper=eta,
        eta=eta,
        variable_names=data.variable_names,
        shock_names=names,
        point_shocks=(True,) * n,
        attempts=config.M,
        empty=0,
        unstable=0,
        alpha=config.alpha,
        eta_grid=config.eta_grid,
        cumulated=tuple(config.cumulate),
        has_bounds=False,
        draw_index=np.arange(config.M),
    )


__all__ = [
    "AlgoConfig",
    "BoundsResult",
    "EtaFunctional",
    "NumericalError",
    "arc_bounds",
    "bounds_for_rows",
    "draw_admissible_Q",
    "feasible_arcs",
    "hpd_region",
    "informativeness",
    "optimize_bounds",
    "point_identified_irfs",
    "robust_credible_region",
    "run_algorithm1",
    "sample_admissible",
    "stochastic_bounds",
]
