"""Simulation of structural VARs with a single break in shock variances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnstableVar, ValidationError
from .reduced_form import Dataset, ReducedForm


@dataclass(frozen=True)
class HsvarTruth:
    """Data-generating process: impact matrix C, post-break variances Lambda, B = (nu, B_1, ..., B_l)."""

    C: np.ndarray
    Lambda: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        lam = np.asarray(self.Lambda, dtype=float)
        B = np.asarray(self.B, dtype=float)
        n = C.shape[0]
        if C.shape != (n, n) or lam.shape != (n,) or B.shape[0] != n or (B.shape[1] - 1) % n:
            raise ValidationError("inconsistent truth dimensions")
        if np.any(lam <= 0):
            raise ValidationError("post-break variances must be positive")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Lambda", lam)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def lag_order(self) -> int:
        return (self.B.shape[1] - 1) // self.n

    def reduced_form(self) -> ReducedForm:
        """Population phi: Omega_1 = C C', Omega_2 = C Lambda C'."""
        return ReducedForm(self.B, self.C @ self.C.T, self.C @ np.diag(self.Lambda) @ self.C.T)


def simulate(truth: HsvarTruth, T: int, T_B: int, seed: int = 0, burn: int = 200, names=()) -> Dataset:
    """Gaussian sample of length T (plus presample) with the variance break after T_B.

    Shocks have identity covariance through period T_B of the estimation
    sample (and during burn-in and presample) and diag(Lambda) afterwards.
    """
    rf = truth.reduced_form()
    if not rf.stable:
        raise UnstableVar("companion matrix has an eigenvalue on or outside the unit circle")
    n, l = truth.n, truth.lag_order
    total = burn + l + T
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((total, n))
    eps[burn + l + T_B :] *= np.sqrt(truth.Lambda)
    u = eps @ truth.C.T
    nu = truth.B[:, 0]
    lags = [truth.B[:, 1 + k * n : 1 + (k + 1) * n] for k in range(l)]
    # start at the unconditional mean
    mu = np.linalg.solve(np.eye(n) - sum(lags), nu)
    y = np.empty((total + l, n))
    y[:l] = mu
    for t in range(l, total + l):
        acc = nu + u[t - l]
        for k, Bk in enumerate(lags, start=1):
            acc = acc + Bk @ y[t - k]
        y[t] = acc
    full = y[l + burn :]
    return Dataset.from_array(full, l, T_B, names)


def random_truth(n: int, lag_order: int, Lambda, rng, persistence: float = 0.5) -> HsvarTruth:
    """Random stable truth with diag(C) > 0 and lag matrices scaled to spectral radius <= persistence."""
    C = rng.standard_normal((n, n)) * 0.5 + np.eye(n)
    C *= np.where(np.diag(C) < 0, -1.0, 1.0)
    blocks = []
    for _ in range(lag_order):
        A = rng.standard_normal((n, n))
        A *= persistence / (lag_order * max(np.max(np.abs(np.linalg.eigvals(A))), 1e-12))
        blocks.append(A)
    B = np.hstack([rng.standard_normal((n, 1)) * 0.1] + blocks)
    return HsvarTruth(C, np.asarray(Lambda, dtype=float), B)


__all__ = ["HsvarTruth", "random_truth", "simulate"]
