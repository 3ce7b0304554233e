"""Personalized-DP output perturbation for ridge regression.

Each point i with budget eps_i gets weight w_i = eps_i / sum_j eps_j in the
ridge objective, which caps its l2-sensitivity at

    2 sqrt(d) w_i (sqrt(d) b + 1) / lam,

where b bounds ||theta_bar||. Adding noise with density proportional to
exp(-eta ||z||) and

    eta = lam * sum_j eps_j / (2 sqrt(d) (1 + sqrt(d) b))

then makes the release eps_i-DP with respect to point i, for every i.
Without further assumptions b = min(1/sqrt(lam), sqrt(d)/lam); with a known
bound B on the unregularised weighted least-squares solution, b = B.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InvalidBudget, ValidationError
from .noise import NoiseParams, sample_noise
from .ridge import Dataset, RidgeConfig, WeightVector, solve_weighted_ridge

MAX_EPSILON = 1e6

_NORM_ASSERT_TOL = 1e-9


@dataclass(frozen=True)
class PrivacyProfile:
    """Per-point privacy budgets eps_i in (0, 1e6]."""

    epsilons: np.ndarray

    def __post_init__(self):
        eps = np.array(self.epsilons, dtype=np.float64)
        if eps.ndim != 1 or eps.size == 0:
            raise InvalidBudget(f"epsilons must be a non-empty 1-D vector, got shape {eps.shape}")
        bad = np.flatnonzero(~np.isfinite(eps) | (eps <= 0))
        if bad.size:
            i = bad[0]
            raise InvalidBudget(f"epsilon[{i}] = {eps[i]!r} is not a positive finite budget")
        big = np.flatnonzero(eps > MAX_EPSILON)
        if big.size:
            i = big[0]
            raise InvalidBudget(
                f"epsilon[{i}] = {eps[i]!r} exceeds {MAX_EPSILON:g}; likely a unit error"
            )
        eps.setflags(write=False)
        object.__setattr__(self, "epsilons", eps)

    @classmethod
    def constant(cls, eps: float, n: int) -> "PrivacyProfile":
        return cls(np.full(n, float(eps)))

    def __len__(self):
        return self.epsilons.shape[0]

    @property
    def total(self) -> float:
        return float(np.sum(self.epsilons))


class Regime(enum.Enum):
    UNASSUMED = "unassumed"
    BOUNDED_THETA = "bounded-theta"


@dataclass(frozen=True)
class Calibration:
    weights: WeightVector
    eta: float
    regime: Regime
    b_lambda: float
    epsilon_sum: float


@dataclass(frozen=True)
class PrivateModel:
    """Released estimate plus calibration metadata.

    ``theta_bar`` is the non-private estimate. It is kept for testing only
    and is never part of :meth:`to_record` or any CLI output.
    """

    theta_hat: np.ndarray
    calibration: Calibration
    lam: float
    method: str = "pdp-op"
    n_used: int = 0
    theta_bar: np.ndarray = field(default=None, repr=False, compare=False)

    def to_record(self) -> dict:
        cal = self.calibration
        return {
            "method": self.method,
            "lambda": float(self.lam),
            "d": int(self.theta_hat.shape[0]),
            "n_used": int(self.n_used),
            "regime": cal.regime.value,
            "b_lambda": float(cal.b_lambda),
            "epsilon_sum": float(cal.epsilon_sum),
            "eta": float(cal.eta),
            "theta_hat": [float(v) for v in self.theta_hat],
        }


def b_lambda(lam: float, d: int) -> float:
    """A priori bound min(1/sqrt(lam), sqrt(d)/lam) on the ridge solution norm."""
    if not lam > 0 or d < 1:
        raise ValidationError(f"need lam > 0 and d >= 1, got lam={lam!r}, d={d!r}")
    return min(1.0 / math.sqrt(lam), math.sqrt(d) / lam)


def noise_rate(epsilon_sum: float, lam: float, d: int, b: float) -> float:
    return lam / (2.0 * math.sqrt(d) * (1.0 + math.sqrt(d) * b)) * epsilon_sum


def calibrate(
    profile: PrivacyProfile,
    lam: float,
    d: int,
    theta_bound: Optional[float] = None,
) -> Calibration:
    """Weights and noise rate guaranteeing eps_i-DP for each point.

    With ``theta_bound`` the bounded-theta rate is used as stated, even when
    the bound is looser than the default one (a warning is issued then,
    since the result is noisier).
    """
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam!r}")
    total = profile.total
    weights = WeightVector(profile.epsilons / total)
    default_b = b_lambda(lam, d)
    if theta_bound is None:
        regime, b = Regime.UNASSUMED, default_b
    else:
        if not theta_bound > 0:
            raise ValidationError(f"theta_bound must be positive, got {theta_bound!r}")
        regime, b = Regime.BOUNDED_THETA, float(theta_bound)
        if b > default_b:
            warnings.warn(
                f"theta_bound={b:g} exceeds min(1/sqrt(lam), sqrt(d)/lam)={default_b:g}; "
                "the bounded-theta calibration adds more noise than the default",
                stacklevel=2,
            )
    return Calibration(
        weights=weights,
        eta=noise_rate(total, lam, d, b),
        regime=regime,
        b_lambda=b,
        epsilon_sum=total,
    )


def sensitivity_bound(w_i: float, lam: float, d: int, b: float) -> float:
    """Upper bound on ||theta_bar(D) - theta_bar(D')|| for i-neighbouring D, D'."""
    return 2.0 * math.sqrt(d) * w_i * (math.sqrt(d) * b + 1.0) / lam


def release(
    data: Dataset,
    calibration: Calibration,
    lam: float,
    rng: np.random.Generator,
    method: str = "pdp-op",
) -> PrivateModel:
    """Solve the weighted ridge problem and perturb it with calibrated noise."""
    theta_bar = solve_weighted_ridge(data, calibration.weights, RidgeConfig(lam, data.d))
    assert np.linalg.norm(theta_bar) <= b_lambda(lam, data.d) + _NORM_ASSERT_TOL
    z = sample_noise(NoiseParams(calibration.eta, data.d), rng)
    return PrivateModel(
        theta_hat=theta_bar + z,
        calibration=calibration,
        lam=lam,
        method=method,
        n_used=data.n,
        theta_bar=theta_bar,
    )


def fit(
    data: Dataset,
    profile: PrivacyProfile,
    lam: float,
    theta_bound: Optional[float] = None,
    rng: np.random.Generator = None,
) -> PrivateModel:
    """Fit a personalized-DP ridge model."""
    if rng is None:
        raise ValidationError("fit requires an explicit random generator")
    if len(profile) != data.n:
        raise DimensionMismatch(f"profile has {len(profile)} budgets for {data.n} data points")
    calibration = calibrate(profile, lam, data.d, theta_bound)
    return release(data, calibration, lam, rng)
