"""Comparison mechanisms: uniform-budget output perturbation and Jorgensen sampling."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, EmptySubsample, ValidationError
from .pdp_op import PrivacyProfile, PrivateModel, calibrate, release
from .ridge import Dataset


class ThresholdRule(enum.Enum):
    MAX = "max"
    MEAN = "mean"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class JorgensenConfig:
    rule: ThresholdRule = ThresholdRule.MAX
    value: Optional[float] = None

    def __post_init__(self):
        if self.rule is ThresholdRule.EXPLICIT:
            if self.value is None or not self.value > 0:
                raise ValidationError(f"explicit threshold must be positive, got {self.value!r}")

    @classmethod
    def explicit(cls, t: float) -> "JorgensenConfig":
        return cls(ThresholdRule.EXPLICIT, float(t))


@dataclass(frozen=True)
class SubsampleOutcome:
    kept_indices: np.ndarray
    threshold: float
    inclusion_probs: np.ndarray


def fit_non_personalized(
    data: Dataset,
    profile: PrivacyProfile,
    lam: float,
    theta_bound: Optional[float] = None,
    rng: np.random.Generator = None,
) -> PrivateModel:
    """Everyone gets the most stringent budget min_i eps_i; weights are 1/n."""
    if rng is None:
        raise ValidationError("fit requires an explicit random generator")
    if len(profile) != data.n:
        raise DimensionMismatch(f"profile has {len(profile)} budgets for {data.n} data points")
    eps_star = float(np.min(profile.epsilons))
    calibration = calibrate(PrivacyProfile.constant(eps_star, data.n), lam, data.d, theta_bound)
    return release(data, calibration, lam, rng, method="non-personalized")


def jorgensen_threshold(profile: PrivacyProfile, cfg: JorgensenConfig) -> float:
    if cfg.rule is ThresholdRule.MAX:
        return float(np.max(profile.epsilons))
    if cfg.rule is ThresholdRule.MEAN:
        return float(np.mean(profile.epsilons))
    return float(cfg.value)


def inclusion_probabilities(epsilons, t: float) -> np.ndarray:
    """(e^eps - 1) / (e^t - 1) below the threshold, exactly 1 at or above it."""
    eps = np.asarray(epsilons, dtype=np.float64)
    probs = np.ones_like(eps)
    below = eps < t
    # expm1 keeps precision for small budgets; never evaluated at eps >= t
    probs[below] = np.expm1(eps[below]) / math.expm1(t)
    return probs


def jorgensen_subsample(profile: PrivacyProfile, t: float, rng: np.random.Generator) -> SubsampleOutcome:
    """Keep each point independently with its inclusion probability."""
    if not t > 0:
        raise ValidationError(f"threshold must be positive, got {t!r}")
    probs = inclusion_probabilities(profile.epsilons, t)
    u = rng.random(probs.shape[0])
    kept = np.flatnonzero(u < probs)
    return SubsampleOutcome(kept_indices=kept, threshold=float(t), inclusion_probs=probs)


def fit_jorgensen(
    data: Dataset,
    profile: PrivacyProfile,
    lam: float,
    cfg: JorgensenConfig = JorgensenConfig(),
    theta_bound: Optional[float] = None,
    rng: np.random.Generator = None,
) -> PrivateModel:
    """Subsample, then run uniform-budget output perturbation at budget t.

    The kept points are weighted 1/m and the noise rate uses sum eps = m * t.
    Raises :class:`EmptySubsample` when no point survives sampling.
    """
    if rng is None:
        raise ValidationError("fit requires an explicit random generator")
    if len(profile) != data.n:
        raise DimensionMismatch(f"profile has {len(profile)} budgets for {data.n} data points")
    t = jorgensen_threshold(profile, cfg)
    outcome = jorgensen_subsample(profile, t, rng)
    m = outcome.kept_indices.size
    if m == 0:
        raise EmptySubsample(f"no points kept at threshold t={t:g}")
    sub = data.subset(outcome.kept_indices)
    calibration = calibrate(PrivacyProfile.constant(t, m), lam, data.d, theta_bound)
    name = {ThresholdRule.MAX: "jorgensen-max", ThresholdRule.MEAN: "jorgensen-mean"}.get(
        cfg.rule, "jorgensen"
    )
    return release(sub, calibration, lam, rng, method=name)
