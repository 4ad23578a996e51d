"""Closed-form identification results for two-variable systems.

Structural model (no dynamics):  p - beta q = eps (demand),  q - alpha p = eta (supply).
With Omega_tr^{-1} = (w1, w2) and Q = (q1, q2):
    beta  = -(q1'w2) / (q1'w1),    alpha = -(q2'w1) / (q2'w2).
The sign normalization keeps q1'w1 > 0 and q2'w2 > 0; the optional sign
restrictions are alpha >= 0 and beta <= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CaseMismatch, NotPositiveDefinite, ValidationError

KINDS = ("closed", "open", "infinite")


@dataclass(frozen=True)
class BivariateCovariances:
    omega_p2: float
    omega_q2: float
    omega_pq: float

    def __post_init__(self):
        if not (self.omega_p2 > 0 and self.omega_q2 > 0 and self.det > 0):
            raise NotPositiveDefinite("bivariate covariance must be SPD")

    @property
    def det(self) -> float:
        return self.omega_p2 * self.omega_q2 - self.omega_pq**2

    @classmethod
    def from_matrix(cls, omega) -> "BivariateCovariances":
        a = np.asarray(omega, dtype=float)
        if a.shape != (2, 2) or abs(a[0, 1] - a[1, 0]) > 1e-12 * (1 + abs(a).max()):
            raise ValidationError("expected a symmetric 2 x 2 matrix")
        return cls(float(a[0, 0]), float(a[1, 1]), float(a[0, 1]))

    def matrix(self) -> np.ndarray:
        return np.array([[self.omega_p2, self.omega_pq], [self.omega_pq, self.omega_q2]])

    def chol_inverse_columns(self) -> tuple[np.ndarray, np.ndarray]:
        """Columns (w1, w2) of the inverse lower Cholesky factor."""
        g = 1.0 / math.sqrt(self.omega_q2 - self.omega_pq**2 / self.omega_p2)
        w1 = np.array([1.0 / math.sqrt(self.omega_p2), -self.omega_pq / self.omega_p2 * g])
        w2 = np.array([0.0, g])
        return w1, w2


def _as_cov(omega) -> BivariateCovariances:
    return omega if isinstance(omega, BivariateCovariances) else BivariateCovariances.from_matrix(omega)


@dataclass(frozen=True)
class Interval:
    """Real interval with explicit endpoint kinds; infinite ends carry +-inf internally."""

    lo: float
    hi: float
    lo_kind: str = "closed"
    hi_kind: str = "closed"

    def __post_init__(self):
        if self.lo_kind not in KINDS or self.hi_kind not in KINDS:
            raise ValidationError("endpoint kind must be closed, open or infinite")
        if (self.lo_kind == "infinite") != math.isinf(self.lo) or (self.hi_kind == "infinite") != math.isinf(self.hi):
            raise ValidationError("infinite endpoints must be tagged 'infinite'")

    @classmethod
    def real_line(cls) -> "Interval":
        return cls(-math.inf, math.inf, "infinite", "infinite")

    def contains(self, x: float, tol: float = 0.0) -> bool:
        lo_ok = self.lo_kind == "infinite" or x >= self.lo - tol
        hi_ok = self.hi_kind == "infinite" or x <= self.hi + tol
        return lo_ok and hi_ok

    def to_dict(self) -> dict:
        """JSON-ready form; infinite ends serialize as null value with kind 'infinite'."""
        end = lambda v, k: {"value": None if k == "infinite" else v, "kind": k, **({"sign": 1 if v > 0 else -1} if k == "infinite" else {})}  # noqa: E731
        return {"lower": end(self.lo, self.lo_kind), "upper": end(self.hi, self.hi_kind)}


@dataclass(frozen=True)
class BivariateSet:
    alpha: Interval
    beta: Interval
    case: str


def _upper_ratio(num: float, den: float) -> tuple[float, str]:
    if den == 0.0:
        return math.inf, "infinite"
    return num / den, "closed"


def bivariate_identified_set(omega, restrictions: str = "norm_plus_signs") -> BivariateSet:
    """Identified sets of (alpha, beta) from the regime-1 covariance.

    ``restrictions`` is "norm_only" or "norm_plus_signs".  With omega_pq = 0
    and signs the upper end of alpha is infinite (Case I limit).

    Under the normalization alone both parameters range over the real line:
    q2 may sit on either side of q1, and the side with q2'w2 -> 0+ sends alpha
    to +inf even when omega_pq > 0 (q2'w1 / q2'w2 -> -inf).
    """
    cov = _as_cov(omega)
    p2, q2, pq = cov.omega_p2, cov.omega_q2, cov.omega_pq
    case = "I" if pq >= 0 else "II"
    if restrictions == "norm_only":
        return BivariateSet(Interval.real_line(), Interval.real_line(), case)
    if restrictions != "norm_plus_signs":
        raise ValidationError(f"unknown restriction tag {restrictions!r}")
    if case == "I":
        hi, kind = _upper_ratio(q2, pq)
        alpha = Interval(pq / p2, hi, "closed", kind)
        beta = Interval(-math.inf, 0.0, "infinite", "closed")
    else:
        alpha = Interval(0.0, math.inf, "closed", "infinite")
        beta = Interval(p2 / pq, pq / q2)
    return BivariateSet(alpha, beta, case)


def bivariate_ols_point(omega, restriction: str) -> float:
    """alpha under beta = 0 (needs omega_pq >= 0) or beta under alpha = 0 (omega_pq < 0)."""
    cov = _as_cov(omega)
    if restriction == "beta_zero":
        if cov.omega_pq < 0:
            raise CaseMismatch("beta = 0 point identification needs omega_pq >= 0")
        return cov.omega_pq / cov.omega_p2
    if restriction == "alpha_zero":
        if cov.omega_pq >= 0:
            raise CaseMismatch("alpha = 0 point identification needs omega_pq < 0")
        return cov.omega_pq / cov.omega_q2
    raise ValidationError(f"unknown restriction tag {restriction!r}")


@dataclass(frozen=True)
class BivariateEigen:
    """Eigenvalues (descending), the root term Delta and the monic quadratic (1, b, c)."""

    lambda1: float
    lambda2: float
    delta: float
    b: float
    c: float

    def residual(self, lam: float) -> float:
        return lam * lam + self.b * lam + self.c


def bivariate_eigen(omega1, omega2) -> BivariateEigen:
    """Closed-form eigenvalues of Omega_1tr^{-1} Omega_2 Omega_1tr^{-1}'."""
    a, b = _as_cov(omega1), _as_cov(omega2)
    p1, q1, pq1 = a.omega_p2, a.omega_q2, a.omega_pq
    p2, q2, pq2 = b.omega_p2, b.omega_q2, b.omega_pq
    d1 = a.det
    s = p1 * q2 + p2 * q1 - 2.0 * pq1 * pq2
    rad = (p1 * q2 - p2 * q1) ** 2 + 4.0 * (p1 * pq2 - p2 * pq1) * (q1 * pq2 - q2 * pq1)
    delta = math.sqrt(max(rad, 0.0))
    return BivariateEigen(
        lambda1=(s + delta) / (2.0 * d1),
        lambda2=(s - delta) / (2.0 * d1),
        delta=delta,
        b=-s / d1,
        c=b.det / d1,
    )


@dataclass(frozen=True)
class AngleSweep:
    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    admissible: np.ndarray

    def hull(self, which: str) -> tuple[float, float]:
        v = (self.alpha if which == "alpha" else self.beta)[self.admissible]
        return float(v.min()), float(v.max())


def angle_sweep(omega, points: int = 100_000, signs: bool = True) -> AngleSweep:
    """(alpha, beta) over q1 = (cos t, sin t), t on a uniform grid of [0, 2 pi).

    q2 is the unit vector orthogonal to q1 with q2'w2 > 0; admissible points
    satisfy q1'w1 > 0 and, with ``signs``, alpha >= 0 and beta <= 0.
    """
    cov = _as_cov(omega)
    w1, w2 = cov.chol_inverse_columns()
    t = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    q1 = np.stack([np.cos(t), np.sin(t)], axis=1)
    q2 = np.stack([-np.sin(t), np.cos(t)], axis=1)
    q2 *= np.where(q2 @ w2 < 0, -1.0, 1.0)[:, None]
    a1, a2 = q1 @ w1, q1 @ w2
    b1, b2 = q2 @ w1, q2 @ w2
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = -a2 / a1
        alpha = -b1 / b2
    ok = (a1 > 0) & (b2 > 0)
    if signs:
        ok &= (alpha >= 0) & (beta <= 0)
    return AngleSweep(t, alpha, beta, ok)


__all__ = [
    "AngleSweep",
    "BivariateCovariances",
    "BivariateEigen",
    "BivariateSet",
    "Interval",
    "angle_sweep",
    "bivariate_eigen",
    "bivariate_identified_set",
    "bivariate_ols_point",
]
