"""Reduced-form estimation of a VAR with two volatility regimes.

The model is y_t = B x_t + u_t with x_t = (1, y_{t-1}', ..., y_{t-l}')' and
Var(u_t) = Omega_1 for t <= T_B, Omega_2 afterwards.  Matrices follow the
"variables in rows, periods in columns" layout, so Y is n x T and X is m x T.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BreakOutOfRange,
    InvalidRegime,
    MissingValue,
    NoConvergence,
    SingularRegressors,
    SingularWeighting,
    UnstableVar,
    ValidationError,
)
from .linalg import cholesky_lower, spd_inverse

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class Dataset:
    """Observed series split into presample and estimation sample.

    ``observations`` is n x T, ``presample`` is n x l (oldest first) and
    ``break_index`` counts the estimation-sample periods in regime 1.
    """

    observations: np.ndarray
    presample: np.ndarray
    lag_order: int
    break_index: int
    variable_names: tuple[str, ...] = ()
    dates: tuple[str, ...] | None = None

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        pre = np.asarray(self.presample, dtype=float)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "presample", pre)
        if obs.ndim != 2 or pre.ndim != 2 or pre.shape[0] != obs.shape[0]:
            raise ValidationError("observations and presample must be n x T and n x l")
        if self.lag_order < 1 or pre.shape[1] != self.lag_order:
            raise ValidationError("presample must hold exactly lag_order >= 1 columns")
        if not (np.all(np.isfinite(obs)) and np.all(np.isfinite(pre))):
            raise MissingValue("dataset contains missing or non-finite values")
        if not 1 < self.break_index < obs.shape[1]:
            raise BreakOutOfRange(
                f"break index {self.break_index} must satisfy 1 < T_B < T = {obs.shape[1]}"
            )
        if not self.variable_names:
            names = tuple(f"y{i + 1}" for i in range(obs.shape[0]))
            object.__setattr__(self, "variable_names", names)
        elif len(self.variable_names) != obs.shape[0]:
            raise ValidationError("one variable name per series required")

    @classmethod
    def from_array(cls, full, lag_order: int, break_index: int, names=(), dates=None) -> "Dataset":
        """Build from a (T + l) x n time-major array whose first l rows are presample."""
        full = np.asarray(full, dtype=float)
        return cls(
            observations=full[lag_order:].T.copy(),
            presample=full[:lag_order].T.copy(),
            lag_order=lag_order,
            break_index=break_index,
            variable_names=tuple(names),
            dates=None if dates is None else tuple(dates),
        )

    @property
    def n(self) -> int:
        return self.observations.shape[0]

    @property
    def T(self) -> int:
        return self.observations.shape[1]

    @property
    def m(self) -> int:
        return self.n * self.lag_order + 1

    @property
    def regime_sizes(self) -> tuple[int, int]:
        return self.break_index, self.T - self.break_index

    def full_array(self) -> np.ndarray:
        """(T + l) x n time-major array, presample first."""
        return np.hstack([self.presample, self.observations]).T

    def design(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (Y, X): Y is n x T, X is m x T with an intercept row first."""
        z = np.hstack([self.presample, self.observations])
        l, T = self.lag_order, self.T
        rows = [np.ones((1, T))]
        for lag in range(1, l + 1):
            rows.append(z[:, l - lag : l - lag + T])
        return self.observations, np.vstack(rows)

    def regime_design(self):
        """((Y1, X1), (Y2, X2)) split at the break."""
        Y, X = self.design()
        tb = self.break_index
        return (Y[:, :tb], X[:, :tb]), (Y[:, tb:], X[:, tb:])


@dataclass(frozen=True)
class ReducedForm:
    """phi = (B, Omega_1, Omega_2); B is n x m with the intercept first."""

    B: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    info: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def lag_order(self) -> int:
        return (self.B.shape[1] - 1) // self.n

    @property
    def intercept(self) -> np.ndarray:
        return self.B[:, 0]

    def lag_matrix(self, lag: int) -> np.ndarray:
        """B_lag (1-based lag index)."""
        n = self.n
        if not 1 <= lag <= self.lag_order:
            raise ValidationError(f"lag {lag} outside 1..{self.lag_order}")
        return self.B[:, 1 + (lag - 1) * n : 1 + lag * n]

    def lag_sum(self) -> np.ndarray:
        n = self.n
        return self.B[:, 1:].reshape(n, self.lag_order, n).sum(axis=1)

    def companion(self) -> np.ndarray:
        n, l = self.n, self.lag_order
        F = np.zeros((n * l, n * l))
        F[:n, :] = self.B[:, 1:]
        if l > 1:
            F[n:, :-n] = np.eye(n * (l - 1))
        return F

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.companion()))))

    @property
    def stable(self) -> bool:
        return self.spectral_radius() < 1.0

    @property
    def phi_B(self) -> np.ndarray:
        """vec(B), column-major."""
        return self.B.reshape(-1, order="F")


@dataclass(frozen=True)
class VmaCoefficients:
    """C_0, ..., C_H stacked as an (H + 1) x n x n array."""

    C: np.ndarray

    @property
    def horizons(self) -> int:
        return self.C.shape[0] - 1


def _regime_covariance(U: np.ndarray, divisor: float) -> np.ndarray:
    if divisor <= 0:
        raise InvalidRegime("regime too short for the covariance degrees-of-freedom divisor")
    S = U @ U.T / divisor
    return 0.5 * (S + S.T)


def _check_regimes(data: Dataset) -> None:
    t1, t2 = data.regime_sizes
    if t1 <= data.m or t2 <= data.m:
        raise InvalidRegime(f"each regime needs more than m={data.m} observations, got {t1}, {t2}")


def ols_coefficients(Y: np.ndarray, X: np.ndarray) -> np.ndarray:
    XX = X @ X.T
    if np.linalg.matrix_rank(XX) < XX.shape[0]:
        raise SingularRegressors("X X' is rank deficient")
    return np.linalg.solve(XX, X @ Y.T).T


def ols_estimate(data: Dataset) -> ReducedForm:
    """Equation-wise OLS; covariances use the divisor T_i - n m."""
    _check_regimes(data)
    Y, X = data.design()
    B = ols_coefficients(Y, X)
    (Y1, X1), (Y2, X2) = data.regime_design()
    nm = data.n * data.m
    om1 = _regime_covariance(Y1 - B @ X1, Y1.shape[1] - nm)
    om2 = _regime_covariance(Y2 - B @ X2, Y2.shape[1] - nm)
    return ReducedForm(B, om1, om2, info={"estimator": "ols"})


def gls_coefficients(data: Dataset, omega1, omega2) -> np.ndarray:
    """B solving the two-regime weighted normal equations for fixed covariances."""
    (Y1, X1), (Y2, X2) = data.regime_design()
    W1, W2 = spd_inverse(omega1), spd_inverse(omega2)
    lhs = np.kron(X1 @ X1.T, W1) + np.kron(X2 @ X2.T, W2)
    rhs = (W1 @ Y1 @ X1.T).reshape(-1, order="F") + (W2 @ Y2 @ X2.T).reshape(-1, order="F")
    if np.linalg.matrix_rank(lhs) < lhs.shape[0]:
        raise SingularWeighting("GLS weighting matrix is singular")
    phi = np.linalg.solve(lhs, rhs)
    return phi.reshape(data.n, data.m, order="F")


def gls_estimate(data: Dataset) -> ReducedForm:
    """Feasible GLS: OLS covariances as weights, covariances re-estimated after."""
    first = ols_estimate(data)
    B = gls_coefficients(data, first.omega1, first.omega2)
    (Y1, X1), (Y2, X2) = data.regime_design()
    nm = data.n * data.m
    om1 = _regime_covariance(Y1 - B @ X1, Y1.shape[1] - nm)
    om2 = _regime_covariance(Y2 - B @ X2, Y2.shape[1] - nm)
    return ReducedForm(B, om1, om2, info={"estimator": "gls"})


def residuals(data: Dataset, rf: ReducedForm) -> tuple[np.ndarray, np.ndarray]:
    """Regime residual matrices (n x T_1, n x T_2)."""
    (Y1, X1), (Y2, X2) = data.regime_design()
    return Y1 - rf.B @ X1, Y2 - rf.B @ X2


def _gaussian_block(U: np.ndarray, omega: np.ndarray) -> float:
    L = cholesky_lower(omega)
    n, T = U.shape
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    Z = np.linalg.solve(L, U)
    return -0.5 * (n * T * LOG_2PI + T * logdet + np.sum(Z * Z))


def log_likelihood_from_residuals(U1, U2, omega1, omega2) -> float:
    return _gaussian_block(np.asarray(U1), omega1) + _gaussian_block(np.asarray(U2), omega2)


def log_likelihood(data: Dataset, rf: ReducedForm) -> float:
    """Exact Gaussian log-likelihood conditional on the presample."""
    U1, U2 = residuals(data, rf)
    return log_likelihood_from_residuals(U1, U2, rf.omega1, rf.omega2)


def ml_estimate(
    data: Dataset,
    init: ReducedForm | None = None,
    tol: float = 1e-8,
    max_iter: int = 500,
) -> ReducedForm:
    """Gaussian ML by alternating GLS for B and per-regime covariances (divisor T_i)."""
    current = gls_estimate(data) if init is None else init
    ll = log_likelihood(data, current)
    trace = [ll]
    for it in range(1, max_iter + 1):
        B = gls_coefficients(data, current.omega1, current.omega2)
        U1, U2 = residuals(data, ReducedForm(B, current.omega1, current.omega2))
        cand = ReducedForm(
            B,
            _regime_covariance(U1, U1.shape[1]),
            _regime_covariance(U2, U2.shape[1]),
        )
        ll_new = log_likelihood(data, cand)
        improvement = ll_new - ll
        if improvement < tol:
            info = {"estimator": "ml", "iterations": it, "loglik_trace": trace}
            return replace(current, info=info)
        current, ll = cand, ll_new
        trace.append(ll)
    raise NoConvergence(f"ML did not converge in {max_iter} iterations", last=current, trace=trace)


def vma_coefficients(rf: ReducedForm, horizons: int) -> VmaCoefficients:
    """C_0 = I and C_j = sum_{i=1..min(j,l)} B_i C_{j-i}."""
    if horizons < 0:
        raise ValidationError("horizons must be non-negative")
    n, l = rf.n, rf.lag_order
    lags = [rf.lag_matrix(i) for i in range(1, l + 1)]
    C = np.zeros((horizons + 1, n, n))
    C[0] = np.eye(n)
    for j in range(1, horizons + 1):
        acc = np.zeros((n, n))
        for i in range(1, min(j, l) + 1):
            acc += lags[i - 1] @ C[j - i]
        C[j] = acc
    return VmaCoefficients(C)


def impulse_responses(rf: ReducedForm, C_struct, horizons: int) -> np.ndarray:
    """IR^h = C_h C_struct for h = 0..horizons, as an (H + 1) x n x n array."""
    vma = vma_coefficients(rf, horizons)
    return vma.C @ np.asarray(C_struct, dtype=float)


def long_run_responses(rf: ReducedForm, C_struct) -> tuple[np.ndarray, np.ndarray]:
    """(IR_inf, CIR_inf).

    IR_inf is (I - sum B_j) C_struct, reproducing the published expression
    literally; the usual long-run multiplier uses the inverse, which is what
    CIR_inf = (I - sum B_j)^{-1} C_struct = (sum_h C_h) C_struct provides.
    """
    if not rf.stable:
        raise UnstableVar("long-run responses need a stable VAR")
    C_struct = np.asarray(C_struct, dtype=float)
    D = np.eye(rf.n) - rf.lag_sum()
    return D @ C_struct, np.linalg.solve(D, C_struct)


def long_run_multiplier(rf: ReducedForm) -> np.ndarray:
    """sum_h C_h = (I - sum B_j)^{-1}; requires stability."""
    if not rf.stable:
        raise UnstableVar("long-run multiplier needs a stable VAR")
    return np.linalg.inv(np.eye(rf.n) - rf.lag_sum())
