"""Privacy noise with density proportional to exp(-eta * ||b||_2).

Such a vector factors as Z = R * Y with R ~ Gamma(shape=d, rate=eta) and Y
uniform on the unit sphere, independent of each other.

Randomness contract
-------------------
* Bit generator: Philox 4x64-10 (counter based), via ``numpy.random.Philox``.
* Gaussians: numpy's ziggurat ``standard_normal``; uniforms: ``random``
  (53-bit doubles).
* Per-trial streams: ``numpy.random.SeedSequence(master_seed,
  spawn_key=keys)``, whose hashing is stable across platforms and numpy
  versions.

Not a cryptographically secure source; this is a research tool.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ValidationError

SeedLike = Union[int, np.random.SeedSequence]

_MT_BATCH = 64


@dataclass(frozen=True)
class NoiseParams:
    eta: float
    dimension: int

    def __post_init__(self):
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise ValidationError(f"eta must be positive and finite, got {self.eta!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValidationError(f"dimension must be a positive integer, got {self.dimension!r}")


def derive_seed(master_seed: int, *keys: int) -> np.random.SeedSequence:
    """Child seed for the stream identified by ``keys`` under ``master_seed``."""
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)):
        if seed < 0 or seed >= 2**64:
            raise ValidationError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def marsaglia_tsang(shape: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Standard Gamma(shape, 1) draws for shape >= 1 (Marsaglia & Tsang 2000).

    Vectorised rejection: candidates are drawn in batches and accepted by the
    cheap squeeze test first, then the exact log test.
    """
    if shape < 1:
        raise ValidationError(f"shape must be >= 1, got {shape!r}")
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(size, dtype=np.float64)
    filled = 0
    while filled < size:
        # acceptance rate is > 0.95 for every shape >= 1
        need = size - filled
        batch = max(_MT_BATCH, int(need * 1.1) + 8)
        x = rng.standard_normal(batch)
        u = rng.random(batch)
        v = 1.0 + c * x
        ok = v > 0
        v = np.where(ok, v * v * v, 1.0)
        x2 = x * x
        squeeze = u < 1.0 - 0.0331 * x2 * x2
        with np.errstate(divide="ignore", invalid="ignore"):
            exact = np.log(u) < 0.5 * x2 + d * (1.0 - v + np.log(v))
        accepted = d * v[ok & (squeeze | exact)]
        take = min(need, accepted.size)
        out[filled:filled + take] = accepted[:take]
        filled += take
    return out


def sample_radius(params: NoiseParams, rng: np.random.Generator, size: Optional[int] = None):
    """Norm of the noise vector: Gamma(shape=d, rate=eta)."""
    n = 1 if size is None else int(size)
    r = marsaglia_tsang(float(params.dimension), n, rng) / params.eta
    return float(r[0]) if size is None else r


def sample_unit_sphere(d: int, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Uniform draw(s) from the unit sphere in R^d by normalising Gaussians."""
    if int(d) != d or d < 1:
        raise ValidationError(f"dimension must be a positive integer, got {d!r}")
    n = 1 if size is None else int(size)
    g = rng.standard_normal((n, int(d)))
    norms = np.linalg.norm(g, axis=1)
    # zero vector has probability 0 but is not impossible with floats
    while np.any(norms == 0.0):
        zero = norms == 0.0
        g[zero] = rng.standard_normal((int(zero.sum()), int(d)))
        norms = np.linalg.norm(g, axis=1)
    y = g / norms[:, None]
    return y[0] if size is None else y


def sample_noise(params: NoiseParams, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Draw Z with density proportional to exp(-eta ||Z||_2).

    Returns shape ``(d,)`` when ``size`` is None, else ``(size, d)``.
    """
    radius = sample_radius(params, rng, 1 if size is None else size)
    direction = sample_unit_sphere(params.dimension, rng, 1 if size is None else size)
    z = radius[:, None] * direction
    return z[0] if size is None else z
