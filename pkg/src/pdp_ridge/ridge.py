"""Weighted ridge regression in closed form.

The estimator minimises

    L_w(theta) = sum_i w_i (y_i - theta^T x_i)^2 + lam * ||theta||^2

whose unique minimiser (lam > 0) solves the normal equations

    (sum_i w_i x_i x_i^T + lam I) theta = sum_i w_i x_i y_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NumericalFailure, ValidationError

WEIGHT_SUM_ATOL = 1e-9


@dataclass(frozen=True)
class Dataset:
    """Features in [0, 1]^d and labels in [-1, 1].

    Out-of-range values raise instead of being clamped: the privacy
    calibration is only valid on this domain.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise DimensionMismatch(f"features must be 2-D, got shape {x.shape}")
        if y.ndim != 1:
            raise DimensionMismatch(f"labels must be 1-D, got shape {y.shape}")
        n, d = x.shape
        if n < 1 or d < 1:
            raise ValidationError(f"dataset must have n >= 1 and d >= 1, got {x.shape}")
        if y.shape[0] != n:
            raise DimensionMismatch(f"{n} feature rows but {y.shape[0]} labels")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("features and labels must be finite")
        bad = np.argwhere((x < 0.0) | (x > 1.0))
        if bad.size:
            i, j = bad[0]
            raise ValidationError(
                f"feature [{i}, {j}] = {x[i, j]!r} outside [0, 1]"
            )
        bad_y = np.flatnonzero(np.abs(y) > 1.0)
        if bad_y.size:
            i = bad_y[0]
            raise ValidationError(f"label [{i}] = {y[i]!r} outside [-1, 1]")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.labels[idx])


@dataclass(frozen=True)
class WeightVector:
    """Non-negative weights summing to one (absolute tolerance 1e-9)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValidationError(f"weights must be a non-empty 1-D vector, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("weights must be finite and non-negative")
        total = float(np.sum(w))
        if abs(total - 1.0) > WEIGHT_SUM_ATOL:
            raise ValidationError(f"weights sum to {total!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.full(n, 1.0 / n))

    def __len__(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class RidgeConfig:
    lam: float
    dimension: int
    theta_bound: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValidationError(f"lambda must be positive, got {self.lam!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValidationError(f"dimension must be a positive integer, got {self.dimension!r}")
        if self.theta_bound is not None and not (self.theta_bound > 0):
            raise ValidationError(f"theta_bound must be positive, got {self.theta_bound!r}")


def _check_weights(data: Dataset, w: WeightVector) -> np.ndarray:
    if len(w) != data.n:
        raise DimensionMismatch(f"{len(w)} weights for {data.n} data points")
    return w.weights


def weighted_gram(data: Dataset, w: WeightVector) -> np.ndarray:
    """Return sum_i w_i x_i x_i^T.

    Accumulated in extended precision (``np.longdouble``) so the result does
    not depend on BLAS blocking, then rounded to float64.
    """
    weights = _check_weights(data, w)
    x = data.features.astype(np.longdouble)
    gram = x.T @ (weights.astype(np.longdouble)[:, None] * x)
    return np.asarray(gram, dtype=np.float64)


def weighted_moment(data: Dataset, w: WeightVector) -> np.ndarray:
    """Return sum_i w_i x_i y_i."""
    weights = _check_weights(data, w)
    x = data.features.astype(np.longdouble)
    wy = weights.astype(np.longdouble) * data.labels.astype(np.longdouble)
    return np.asarray(x.T @ wy, dtype=np.float64)


def solve_weighted_ridge(data: Dataset, w: WeightVector, cfg: RidgeConfig) -> np.ndarray:
    """Closed-form minimiser of the weighted ridge objective.

    Solves the normal equations by Cholesky factorisation; the system matrix
    is symmetric positive definite whenever ``cfg.lam > 0``.
    """
    if cfg.dimension != data.d:
        raise DimensionMismatch(f"config dimension {cfg.dimension} != data dimension {data.d}")
    gram = weighted_gram(data, w)
    rhs = weighted_moment(data, w)
    system = gram + cfg.lam * np.eye(data.d)
    try:
        factor = scipy.linalg.cho_factor(system, lower=True, check_finite=True)
        theta = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"Cholesky solve failed for lambda={cfg.lam!r}: {exc}") from exc
    if not np.all(np.isfinite(theta)):
        raise NumericalFailure("non-finite ridge solution")
    return theta


def _check_theta(data: Dataset, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (data.d,):
        raise DimensionMismatch(f"theta has shape {theta.shape}, expected ({data.d},)")
    return theta


def weighted_ridge_loss(data: Dataset, w: WeightVector, theta, lam: float) -> float:
    weights = _check_weights(data, w)
    theta = _check_theta(data, theta)
    resid = data.labels - data.features @ theta
    return float(np.dot(weights, resid * resid) + lam * np.dot(theta, theta))


def weighted_ridge_gradient(data: Dataset, w: WeightVector, theta, lam: float) -> np.ndarray:
    """Gradient of :func:`weighted_ridge_loss` with respect to theta."""
    weights = _check_weights(data, w)
    theta = _check_theta(data, theta)
    resid = data.labels - data.features @ theta
    return -2.0 * data.features.T @ (weights * resid) + 2.0 * lam * theta
