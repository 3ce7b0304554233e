"""Synthetic data, the Medical Cost dataset, and privacy-budget profiles."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DegenerateColumn,
    DimensionMismatch,
    EmptySplit,
    MalformedCsv,
    ValidationError,
)
from .noise import make_rng, sample_unit_sphere
from .pdp_op import MAX_EPSILON, PrivacyProfile
from .ridge import Dataset

log = logging.getLogger(__name__)

MEDICAL_COLUMNS = ("age", "sex", "bmi", "children", "smoker", "region", "charges")
MEDICAL_NUMERIC = ("age", "bmi", "children")
MEDICAL_CATEGORICAL = ("sex", "smoker", "region")
MEDICAL_LABEL = "charges"

# guards floor(f * n) against products like 0.29 * 100 = 28.999999999999996
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class SyntheticSpec:
    d: int
    n: int
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValidationError(f"need d >= 1 and n >= 1, got d={self.d}, n={self.n}")
        if not self.sigma >= 0:
            raise ValidationError(f"sigma must be non-negative, got {self.sigma!r}")


@dataclass(frozen=True)
class PrivacySegmentSpec:
    """Conservative / medium / liberal split of the population.

    Defaults are f_c=0.34, f_m=0.43 (so f_l=0.23) and budgets 0.01 / 0.2 / 1.0.
    """

    f_c: float = 0.34
    f_m: float = 0.43
    eps_c: float = 0.01
    eps_m: float = 0.2
    eps_l: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (0 <= self.f_c <= 1 and 0 <= self.f_m <= 1 and self.f_c + self.f_m <= 1 + 1e-12):
            raise ValidationError(f"invalid fractions f_c={self.f_c!r}, f_m={self.f_m!r}")
        if not (0 < self.eps_c < self.eps_m < self.eps_l):
            raise ValidationError(
                f"need 0 < eps_c < eps_m < eps_l, got {self.eps_c!r}, {self.eps_m!r}, {self.eps_l!r}"
            )

    @property
    def f_l(self) -> float:
        return 1.0 - self.f_c - self.f_m

    def segment_sizes(self, n: int) -> tuple[int, int, int]:
        n_c = int(math.floor(self.f_c * n + _FLOOR_EPS))
        n_m = int(math.floor(self.f_m * n + _FLOOR_EPS))
        n_m = min(n_m, n - n_c)
        return n_c, n_m, n - n_c - n_m


@dataclass(frozen=True)
class LabeledSplit:
    train: Dataset
    test: Dataset
    theta_star: Optional[np.ndarray] = None


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, np.ndarray]:
    """Draw theta* on the unit sphere, x ~ U[0,1]^d, and y = x^T theta* / sqrt(d).

    With ``sigma > 0`` Gaussian label noise is added and labels are clamped
    to [-1, 1]; the clamp rate is logged.
    """
    rng = make_rng(spec.seed)
    theta_star = sample_unit_sphere(spec.d, rng)
    x = rng.random((spec.n, spec.d))
    y = x @ theta_star / math.sqrt(spec.d)
    if spec.sigma > 0:
        y = y + spec.sigma * rng.standard_normal(spec.n)
        clamped = int(np.count_nonzero(np.abs(y) > 1.0))
        if clamped:
            log.info("clamped %d/%d synthetic labels to [-1, 1]", clamped, spec.n)
        y = np.clip(y, -1.0, 1.0)
    else:
        # |y| <= 1 analytically; absorb last-bit rounding
        y = np.clip(y, -1.0, 1.0)
    return Dataset(x, y), theta_star


def assign_privacy_profile(n: int, spec: PrivacySegmentSpec) -> PrivacyProfile:
    """Sample per-point budgets for the three segments, in random order."""
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    rng = make_rng(spec.seed)
    n_c, n_m, n_l = spec.segment_sizes(n)
    eps = np.concatenate([
        rng.uniform(spec.eps_c, spec.eps_m, n_c),
        rng.uniform(spec.eps_m, spec.eps_l, n_m),
        np.full(n_l, spec.eps_l),
    ])
    return PrivacyProfile(rng.permutation(eps))


def _split_indices(n: int, test_fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < test_fraction < 1:
        raise ValidationError(f"test_fraction must lie in (0, 1), got {test_fraction!r}")
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n - n_test < 1:
        raise EmptySplit(f"test_fraction={test_fraction!r} leaves an empty split of n={n}")
    perm = make_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def train_test_split(data: Dataset, test_fraction: float, seed=0) -> LabeledSplit:
    train_idx, test_idx = _split_indices(data.n, test_fraction, seed)
    return LabeledSplit(train=data.subset(train_idx), test=data.subset(test_idx))


def _parse_medical_rows(path) -> dict[str, list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise MalformedCsv(f"{path}: empty file") from None
            missing = [c for c in MEDICAL_COLUMNS if c not in header]
            if missing:
                raise MalformedCsv(f"{path}: missing column(s) {', '.join(missing)}")
            pos = {c: header.index(c) for c in MEDICAL_COLUMNS}
            cols: dict[str, list[str]] = {c: [] for c in MEDICAL_COLUMNS}
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise MalformedCsv(
                        f"{path}: line {lineno} has {len(row)} fields, expected {len(header)}"
                    )
                for c in MEDICAL_COLUMNS:
                    cols[c].append(row[pos[c]].strip())
    except FileNotFoundError:
        raise
    except UnicodeDecodeError as exc:
        raise MalformedCsv(f"{path}: not UTF-8 ({exc})") from exc
    if not cols[MEDICAL_LABEL]:
        raise MalformedCsv(f"{path}: no data rows")
    return cols


def _numeric(path, name: str, values: list[str]) -> np.ndarray:
    out = np.empty(len(values))
    for i, v in enumerate(values):
        try:
            out[i] = float(v)
        except ValueError:
            raise MalformedCsv(f"{path}: line {i + 2}, column {name!r}: {v!r} is not numeric") from None
        if not math.isfinite(out[i]):
            raise MalformedCsv(f"{path}: line {i + 2}, column {name!r}: {v!r} is not finite")
    return out


def _minmax(path, name: str, values: np.ndarray, ref: np.ndarray) -> np.ndarray:
    lo, hi = float(ref.min()), float(ref.max())
    if hi == lo:
        raise DegenerateColumn(f"{path}: column {name!r} is constant ({lo!r}) on the scaling rows")
    return np.clip((values - lo) / (hi - lo), 0.0, 1.0)


def load_medical_cost(path, test_fraction: float = 0.2, seed=0, scaling: str = "train") -> LabeledSplit:
    """Load and preprocess the Kaggle Medical Cost (``insurance.csv``) file.

    Numeric columns and the label are min-max scaled to [0, 1] with
    statistics from the training rows (``scaling="train"``) or from all rows
    (``scaling="global"``); out-of-range test values are clamped. Categorical
    columns are one-hot encoded over all of their sorted levels, and a
    constant intercept feature is appended last.
    """
    if scaling not in ("train", "global"):
        raise ValidationError(f"scaling must be 'train' or 'global', got {scaling!r}")
    if not os.path.exists(path):
        raise FileNotFoundError(f"Medical Cost CSV not found: {path}")
    cols = _parse_medical_rows(path)
    n = len(cols[MEDICAL_LABEL])
    train_idx, test_idx = _split_indices(n, test_fraction, seed)
    ref_idx = train_idx if scaling == "train" else np.arange(n)

    blocks = []
    for name in MEDICAL_NUMERIC:
        v = _numeric(path, name, cols[name])
        blocks.append(_minmax(path, name, v, v[ref_idx])[:, None])
    for name in MEDICAL_CATEGORICAL:
        levels = sorted(set(cols[name]))
        codes = np.array([levels.index(v) for v in cols[name]])
        blocks.append((codes[:, None] == np.arange(len(levels))[None, :]).astype(np.float64))
    blocks.append(np.ones((n, 1)))
    x = np.hstack(blocks)
    charges = _numeric(path, MEDICAL_LABEL, cols[MEDICAL_LABEL])
    y = _minmax(path, MEDICAL_LABEL, charges, charges[ref_idx])
    return LabeledSplit(
        train=Dataset(x[train_idx], y[train_idx]),
        test=Dataset(x[test_idx], y[test_idx]),
    )


def medical_feature_names(path) -> list[str]:
    cols = _parse_medical_rows(path)
    names = list(MEDICAL_NUMERIC)
    for name in MEDICAL_CATEGORICAL:
        names += [f"{name}={lvl}" for lvl in sorted(set(cols[name]))]
    return names + ["intercept"]


# canonical on-disk formats ---------------------------------------------------

def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"f{j}" for j in range(data.d)] + ["y"])
    for row, y in zip(data.features, data.labels):
        writer.writerow([repr(float(v)) for v in row] + [repr(float(y))])
    return buf.getvalue()


def write_dataset_csv(data: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset_to_csv(data))


def read_dataset_csv(path) -> Dataset:
    """Read the canonical ``f0..f{d-1},y`` format, naming the offending cell on error."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedCsv(f"{path}: empty file") from None
        d = len(header) - 1
        expected = [f"f{j}" for j in range(d)] + ["y"]
        if d < 1 or header != expected:
            raise MalformedCsv(f"{path}: header must be f0..f{{d-1}},y, got {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise MalformedCsv(f"{path}: line {lineno} has {len(row)} fields, expected {d + 1}")
            vals = []
            for name, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise MalformedCsv(f"{path}: line {lineno}, column {name!r}: {cell!r} is not numeric") from None
            x, y = vals[:-1], vals[-1]
            if any(not 0.0 <= v <= 1.0 for v in x):
                j = next(k for k, v in enumerate(x) if not 0.0 <= v <= 1.0)
                raise ValidationError(f"{path}: line {lineno}, column 'f{j}': {x[j]!r} outside [0, 1]")
            if not -1.0 <= y <= 1.0:
                raise ValidationError(f"{path}: line {lineno}, column 'y': {y!r} outside [-1, 1]")
            rows.append(vals)
    if not rows:
        raise MalformedCsv(f"{path}: no data rows")
    arr = np.array(rows)
    return Dataset(arr[:, :-1], arr[:, -1])


def profile_to_csv(profile: PrivacyProfile) -> str:
    return "epsilon\n" + "".join(f"{float(e)!r}\n" for e in profile.epsilons)


def read_profile_csv(path, n: Optional[int] = None) -> PrivacyProfile:
    """Read a single-column ``epsilon`` CSV, row-aligned with a dataset of size ``n``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedCsv(f"{path}: empty file") from None
        if header != ["epsilon"]:
            raise MalformedCsv(f"{path}: header must be 'epsilon', got {','.join(header)}")
        eps = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            cell = row[0]
            try:
                v = float(cell)
            except ValueError:
                raise MalformedCsv(f"{path}: line {lineno}, column 'epsilon': {cell!r} is not numeric") from None
            if not (math.isfinite(v) and 0 < v <= MAX_EPSILON):
                raise ValidationError(
                    f"{path}: line {lineno}, column 'epsilon': {v!r} is not a budget in (0, {MAX_EPSILON:g}]"
                )
            eps.append(v)
    if n is not None and len(eps) != n:
        raise DimensionMismatch(f"{path}: {len(eps)} budgets for {n} data points")
    return PrivacyProfile(np.array(eps))
