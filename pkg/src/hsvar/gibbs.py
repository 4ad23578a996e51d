"""Gibbs sampler for the two-regime reduced form.

Prior: vec(B) ~ N(mu, V) independent of Omega_i ~ iW(S_i, d_i).  The sampler
alternates the two full conditionals: a Normal draw of vec(B) given the
covariances and independent inverse-Wishart draws of the covariances given B.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import InvalidRegime, SingularPosteriorCovariance, ValidationError
from .linalg import draw_inverse_wishart, spd_inverse, symmetrize
from .reduced_form import Dataset, ReducedForm, ols_estimate


@dataclass(frozen=True)
class PriorSpec:
    """Normal prior on vec(B) and independent inverse-Wishart priors on Omega_i.

    ``V_phi=None`` encodes a flat prior on vec(B) (zero prior precision).
    """

    mu_phi: np.ndarray
    V_phi: np.ndarray | None
    S1: np.ndarray
    S2: np.ndarray
    d1: float
    d2: float

    def __post_init__(self):
        n = np.asarray(self.S1).shape[0]
        if not (self.d1 > n + 1 and self.d2 > n + 1):
            raise ValidationError("prior degrees of freedom must exceed n + 1")

    @property
    def precision(self) -> np.ndarray:
        k = len(self.mu_phi)
        if self.V_phi is None:
            return np.zeros((k, k))
        return spd_inverse(self.V_phi)


def default_diffuse_prior(n: int, m: int, v_scale: float = 1e4, d: float | None = None) -> PriorSpec:
    """mu = 0, V = v_scale I, d_i = n + 2 and S_i = (d_i - n - 1) I, so E[Omega_i] = I."""
    d = n + 2 if d is None else d
    S = (d - n - 1) * np.eye(n)
    return PriorSpec(
        mu_phi=np.zeros(n * m),
        V_phi=v_scale * np.eye(n * m),
        S1=S.copy(),
        S2=S.copy(),
        d1=d,
        d2=d,
    )


@dataclass(frozen=True)
class GibbsConfig:
    draws: int
    burn_in: int = 1000
    thinning: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.draws < 1 or self.thinning < 1 or self.burn_in < 0:
            raise ValidationError("draws >= 1, thinning >= 1 and burn_in >= 0 required")


@dataclass(frozen=True)
class PosteriorDraws:
    """Stacked posterior draws; indexing yields :class:`ReducedForm` records."""

    B: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    stable: np.ndarray

    def __len__(self) -> int:
        return self.B.shape[0]

    def __getitem__(self, k: int) -> ReducedForm:
        return ReducedForm(self.B[k], self.omega1[k], self.omega2[k])

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def mean(self) -> ReducedForm:
        return ReducedForm(self.B.mean(axis=0), self.omega1.mean(axis=0), self.omega2.mean(axis=0))


class _Moments:
    """Sufficient statistics of each regime reused across iterations."""

    def __init__(self, data: Dataset):
        (Y1, X1), (Y2, X2) = data.regime_design()
        self.n, self.m = data.n, data.m
        self.Y = (Y1, Y2)
        self.X = (X1, X2)
        self.XX = (X1 @ X1.T, X2 @ X2.T)
        self.YX = (Y1 @ X1.T, Y2 @ X2.T)
        self.T = (Y1.shape[1], Y2.shape[1])


def _phi_precision_and_rhs(mom: _Moments, prior: PriorSpec, omega1, omega2, prior_prec=None):
    W1, W2 = spd_inverse(omega1), spd_inverse(omega2)
    Vinv = prior.precision if prior_prec is None else prior_prec
    P = np.kron(mom.XX[0], W1) + np.kron(mom.XX[1], W2) + Vinv
    rhs = (
        Vinv @ prior.mu_phi
        + (W1 @ mom.YX[0]).reshape(-1, order="F")
        + (W2 @ mom.YX[1]).reshape(-1, order="F")
    )
    return 0.5 * (P + P.T), rhs


def _chol_precision(P: np.ndarray) -> np.ndarray:
    try:
        R = np.linalg.cholesky(P)
    except np.linalg.LinAlgError as exc:
        raise SingularPosteriorCovariance("posterior precision of vec(B) is singular") from exc
    return R


def posterior_phi_moments(data: Dataset, prior: PriorSpec, omega1, omega2) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of vec(B) given both covariances."""
    P, rhs = _phi_precision_and_rhs(_Moments(data), prior, omega1, omega2)
    R = _chol_precision(P)
    mean = cho_solve((R, True), rhs)
    Rinv = solve_triangular(R, np.eye(len(rhs)), lower=True)
    return mean, Rinv.T @ Rinv


def _draw_phi(mom, prior, omega1, omega2, rng, prior_prec=None) -> np.ndarray:
    P, rhs = _phi_precision_and_rhs(mom, prior, omega1, omega2, prior_prec)
    R = _chol_precision(P)
    mean = cho_solve((R, True), rhs)
    z = rng.standard_normal(len(rhs))
    # P = R R', so R'^{-1} z has covariance P^{-1}
    return mean + solve_triangular(R.T, z, lower=False)


def draw_phi_given_omegas(data: Dataset, prior: PriorSpec, omega1, omega2, rng) -> np.ndarray:
    """One draw of vec(B) from its Normal full conditional."""
    return _draw_phi(_Moments(data), prior, omega1, omega2, rng)


def omega_posterior_params(U: np.ndarray, S: np.ndarray, d: float) -> tuple[np.ndarray, float]:
    """Inverse-Wishart posterior (scale, dof) for one regime given residuals U."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[1] == 0:
        raise InvalidRegime("regime has no observations")
    return symmetrize(S + U @ U.T), U.shape[1] + d


def _draw_omegas(mom, prior, B, rng):
    out = []
    for Y, X, S, d in zip(mom.Y, mom.X, (prior.S1, prior.S2), (prior.d1, prior.d2)):
        scale, dof = omega_posterior_params(Y - B @ X, S, d)
        out.append(draw_inverse_wishart(scale, dof, rng))
    return out[0], out[1]


def draw_omegas_given_phi(data: Dataset, prior: PriorSpec, phi_B, rng) -> tuple[np.ndarray, np.ndarray]:
    """Independent inverse-Wishart draws of Omega_1 and Omega_2 given vec(B)."""
    B = np.asarray(phi_B, dtype=float).reshape(data.n, data.m, order="F")
    return _draw_omegas(_Moments(data), prior, B, rng)


class GibbsSampler:
    """Resumable chain; repeated :meth:`sample` calls continue the same chain."""

    def __init__(self, data: Dataset, prior: PriorSpec, seed: int = 0, init: ReducedForm | None = None):
        self.data = data
        self.prior = prior
        self.rng = np.random.default_rng(seed)
        self._mom = _Moments(data)
        self._prec = prior.precision
        start = ols_estimate(data) if init is None else init
        self.omega1, self.omega2 = start.omega1, start.omega2
        self.B = start.B

    def step(self) -> None:
        n, m = self._mom.n, self._mom.m
        phi = _draw_phi(self._mom, self.prior, self.omega1, self.omega2, self.rng, self._prec)
        self.B = phi.reshape(n, m, order="F")
        self.omega1, self.omega2 = _draw_omegas(self._mom, self.prior, self.B, self.rng)

    def sample(self, draws: int, thinning: int = 1) -> PosteriorDraws:
        n, m = self._mom.n, self._mom.m
        Bs = np.empty((draws, n, m))
        O1 = np.empty((draws, n, n))
        O2 = np.empty((draws, n, n))
        stable = np.empty(draws, dtype=bool)
        for k in range(draws):
            for _ in range(thinning):
                self.step()
            Bs[k], O1[k], O2[k] = self.B, self.omega1, self.omega2
            stable[k] = ReducedForm(self.B, self.omega1, self.omega2).stable
        return PosteriorDraws(Bs, O1, O2, stable)


def run_gibbs(data: Dataset, prior: PriorSpec, config: GibbsConfig) -> PosteriorDraws:
    """Burn in, then keep every ``thinning``-th draw until ``draws`` are stored."""
    sampler = GibbsSampler(data, prior, seed=config.seed)
    for _ in range(config.burn_in):
        sampler.step()
    return sampler.sample(config.draws, config.thinning)


def batch_means_se(x: np.ndarray, batches: int = 20) -> np.ndarray:
    """Monte Carlo standard error of the mean of a chain by batch means (axis 0)."""
    x = np.asarray(x, dtype=float)
    N = x.shape[0] // batches * batches
    if N < batches * 2:
        raise ValidationError("chain too short for batch means")
    means = x[:N].reshape(batches, N // batches, *x.shape[1:]).mean(axis=1)
    return means.std(axis=0, ddof=1) / np.sqrt(batches)
