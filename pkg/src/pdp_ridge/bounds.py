"""High-probability accuracy bound for the released estimate.

For labels y_i = x_i^T theta* + N(0, sigma^2) and a calibrated noise rate
eta, with probability at least 1 - delta:

    ||theta* - theta_hat|| <= ||theta*|| / (1 + lmin / lam)
                              + (d + sqrt(2d/delta)) / eta
                              + (sigma / lam) sqrt(2d/delta) ||w||

where lmin is the smallest eigenvalue of sum_i w_i x_i x_i^T. The
guarantee is only claimed for eta produced by :func:`pdp_op.calibrate`;
the formula itself is evaluated for any eta > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .ridge import Dataset, WeightVector, weighted_gram

EIGEN_CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class AccuracyBoundInput:
    theta_star_norm: float
    lambda_min_gram: float
    lam: float
    eta: float
    d: int
    delta: float
    sigma: float = 0.0
    weight_norm: float = 0.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam!r}")
        if not self.eta > 0:
            raise ValidationError(f"eta must be positive, got {self.eta!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError(f"d must be a positive integer, got {self.d!r}")
        for name in ("theta_star_norm", "lambda_min_gram", "sigma", "weight_norm"):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"{name} must be non-negative, got {getattr(self, name)!r}")


class BoundTerms(NamedTuple):
    bias: float
    privacy: float
    label_noise: float

    @property
    def total(self) -> float:
        return self.bias + self.privacy + self.label_noise


def accuracy_bound_terms(inp: AccuracyBoundInput) -> BoundTerms:
    spread = math.sqrt(2.0 * inp.d / inp.delta)
    bias = inp.theta_star_norm / (1.0 + inp.lambda_min_gram / inp.lam)
    privacy = (inp.d + spread) / inp.eta
    label_noise = inp.sigma / inp.lam * spread * inp.weight_norm
    return BoundTerms(bias, privacy, label_noise)


def accuracy_bound(inp: AccuracyBoundInput) -> float:
    return accuracy_bound_terms(inp).total


def min_gram_eigenvalue(data: Dataset, w: WeightVector) -> float:
    """Smallest eigenvalue of sum_i w_i x_i x_i^T, clamped at 0 for rounding noise."""
    lmin = float(np.linalg.eigvalsh(weighted_gram(data, w))[0])
    if lmin < 0:
        if lmin < -EIGEN_CLAMP_TOL:
            raise ArithmeticError(f"weighted Gram matrix has eigenvalue {lmin!r} < 0")
        lmin = 0.0
    return lmin
