"""Seeded experiment runner comparing PDP-OP with its baselines.

Seed derivation (all via :func:`pdp_ridge.noise.derive_seed`):

* dataset / split:   (master, 0)            or (master, 0, sweep, trial) with resample_data
* privacy profile:   (master, 1, sweep, trial)  shared by every method in the trial
* mechanism noise:   (master, 2 + METHODS.index(method), sweep, trial)

Results are reduced in trial order, so reports are byte-identical for
identical plans.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .baselines import JorgensenConfig, ThresholdRule, fit_jorgensen, fit_non_personalized
from .errors import DimensionMismatch, EmptySubsample, PlanInvalid, ValidationError
from .noise import derive_seed, make_rng
from .pdp_op import fit
from .data import (
    LabeledSplit,
    PrivacySegmentSpec,
    SyntheticSpec,
    assign_privacy_profile,
    generate_synthetic,
    load_medical_cost,
)
from .ridge import Dataset

log = logging.getLogger(__name__)

METHODS = ("pdp-op", "non-personalized", "jorgensen-max", "jorgensen-mean")
SWEEP_PARAMS = ("lambda", "eps_c", "eps_m", "f_c", "train_fraction")
METHOD_LABELS = {
    "pdp-op": "PDP-OP",
    "non-personalized": "non-personalized",
    "jorgensen-max": "Jorgensen max",
    "jorgensen-mean": "Jorgensen mean",
}

_DATA_STREAM, _PROFILE_STREAM, _NOISE_STREAM = 0, 1, 2


# metrics -----------------------------------------------------------------------

def unregularized_test_loss(theta, test: Dataset) -> float:
    """Mean squared error of the linear predictor on ``test``."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (test.d,):
        raise DimensionMismatch(f"theta has shape {theta.shape}, test data has d={test.d}")
    resid = test.labels - test.features @ theta
    return float(np.mean(resid * resid))


def regularized_test_loss(theta, test: Dataset, lam: float) -> float:
    theta = np.asarray(theta, dtype=np.float64)
    return unregularized_test_loss(theta, test) + lam * float(np.dot(theta, theta))


# plans -------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSource:
    d: int = 30
    n: int = 100
    n_test: int = 1000
    sigma: float = 0.0

    def __post_init__(self):
        if self.d < 1 or self.n < 1 or self.n_test < 1:
            raise PlanInvalid(f"synthetic source needs d, n, n_test >= 1, got {self}")
        if not self.sigma >= 0:
            raise PlanInvalid(f"sigma must be non-negative, got {self.sigma!r}")


@dataclass(frozen=True)
class MedicalCostSource:
    path: str
    test_fraction: float = 0.2
    scaling: str = "train"

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise PlanInvalid(f"test_fraction must lie in (0, 1), got {self.test_fraction!r}")
        if self.scaling not in ("train", "global"):
            raise PlanInvalid(f"scaling must be 'train' or 'global', got {self.scaling!r}")


@dataclass(frozen=True)
class ExperimentPlan:
    source: Union[SyntheticSource, MedicalCostSource] = SyntheticSource()
    privacy: PrivacySegmentSpec = PrivacySegmentSpec()
    sweep_param: str = "lambda"
    sweep_values: tuple = (1.0,)
    lam: float = 1.0
    theta_bound: Optional[float] = None
    train_fraction: float = 1.0
    methods: tuple = METHODS
    trials: int = 1000
    master_seed: int = 0
    resample_data: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.sweep_param not in SWEEP_PARAMS:
            raise PlanInvalid(
                f"unknown sweep parameter {self.sweep_param!r}; valid: {', '.join(SWEEP_PARAMS)}"
            )
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise PlanInvalid(
                f"unknown method(s) {', '.join(map(repr, unknown)) or '(none given)'}; "
                f"valid: {', '.join(METHODS)}"
            )
        if len(set(self.methods)) != len(self.methods):
            raise PlanInvalid(f"duplicate methods in {self.methods}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise PlanInvalid(f"trials must be a positive integer, got {self.trials!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise PlanInvalid(f"seed must be an unsigned 64-bit integer, got {self.master_seed!r}")
        if self.theta_bound is not None and not self.theta_bound > 0:
            raise PlanInvalid(f"theta_bound must be positive, got {self.theta_bound!r}")
        # validates every sweep point up front
        for i in range(len(self.sweep_values)):
            self.point(i)

    def point(self, index: int) -> tuple[float, PrivacySegmentSpec, float]:
        """(lambda, privacy spec, train fraction) at sweep position ``index``."""
        value = self.sweep_values[index]
        lam, frac, privacy = self.lam, self.train_fraction, self.privacy
        try:
            if self.sweep_param == "lambda":
                lam = value
            elif self.sweep_param == "train_fraction":
                frac = value
            else:
                privacy = dataclasses.replace(privacy, **{self.sweep_param: value})
        except ValidationError as exc:
            raise PlanInvalid(f"{self.sweep_param}={value!r}: {exc}") from exc
        if not (math.isfinite(lam) and lam > 0):
            raise PlanInvalid(f"lambda must be positive, got {lam!r}")
        if not 0 < frac <= 1:
            raise PlanInvalid(f"train_fraction must lie in (0, 1], got {frac!r}")
        return lam, privacy, frac

    @classmethod
    def from_dict(cls, cfg: dict) -> "ExperimentPlan":
        """Build a plan from the JSON schema documented in the README."""
        cfg = dict(cfg)
        known = {"dataset", "privacy", "sweep", "lambda", "theta_bound", "train_fraction",
                 "methods", "trials", "seed", "resample_data"}
        extra = set(cfg) - known
        if extra:
            raise PlanInvalid(f"unknown plan key(s): {', '.join(sorted(extra))}")
        try:
            ds = dict(cfg.get("dataset", {"kind": "synthetic"}))
            kind = ds.pop("kind", "synthetic")
            if kind == "synthetic":
                source = SyntheticSource(**ds)
            elif kind == "medical_cost":
                source = MedicalCostSource(**ds)
            else:
                raise PlanInvalid(f"unknown dataset kind {kind!r}; valid: synthetic, medical_cost")
            privacy = PrivacySegmentSpec(**cfg.get("privacy", {}))
            sweep = cfg.get("sweep", {"param": "lambda", "values": [cfg.get("lambda", 1.0)]})
            return cls(
                source=source,
                privacy=privacy,
                sweep_param=sweep["param"],
                sweep_values=tuple(sweep["values"]),
                lam=float(cfg.get("lambda", 1.0)),
                theta_bound=cfg.get("theta_bound"),
                train_fraction=float(cfg.get("train_fraction", 1.0)),
                methods=tuple(cfg.get("methods", METHODS)),
                trials=int(cfg.get("trials", 1000)),
                master_seed=int(cfg.get("seed", 0)),
                resample_data=bool(cfg.get("resample_data", False)),
            )
        except PlanInvalid:
            raise
        except (TypeError, KeyError, ValueError) as exc:
            raise PlanInvalid(f"malformed plan: {exc}") from exc

    def to_dict(self) -> dict:
        if isinstance(self.source, SyntheticSource):
            ds = {"kind": "synthetic", **dataclasses.asdict(self.source)}
        else:
            ds = {"kind": "medical_cost", **dataclasses.asdict(self.source)}
        privacy = dataclasses.asdict(self.privacy)
        privacy.pop("seed")
        return {
            "dataset": ds,
            "privacy": privacy,
            "sweep": {"param": self.sweep_param, "values": list(self.sweep_values)},
            "lambda": self.lam,
            "theta_bound": self.theta_bound,
            "train_fraction": self.train_fraction,
            "methods": list(self.methods),
            "trials": self.trials,
            "seed": self.master_seed,
            "resample_data": self.resample_data,
        }


def load_plan(path) -> ExperimentPlan:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PlanInvalid(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise PlanInvalid(f"{path}: plan must be a JSON object")
    return ExperimentPlan.from_dict(cfg)


# reports -----------------------------------------------------------------------

def _std(values: np.ndarray) -> float:
    # sample std (n - 1); a single trial has no spread to report
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


@dataclass
class CellResult:
    """Per-trial losses for one (sweep value, method) cell."""

    unregularized: np.ndarray
    regularized: np.ndarray
    discarded: int = 0

    @property
    def trials(self) -> int:
        return int(self.unregularized.size)

    @property
    def unreg_mean(self) -> float:
        return float(np.mean(self.unregularized)) if self.trials else math.nan

    @property
    def unreg_std(self) -> float:
        return _std(self.unregularized)

    @property
    def reg_mean(self) -> float:
        return float(np.mean(self.regularized)) if self.trials else math.nan

    @property
    def reg_std(self) -> float:
        return _std(self.regularized)


@dataclass
class ExperimentReport:
    sweep_param: str
    sweep_values: tuple
    methods: tuple
    cells: dict = field(default_factory=dict)

    def cell(self, sweep_index: int, method: str) -> CellResult:
        return self.cells[(sweep_index, method)]


# runner ------------------------------------------------------------------------

def _load_split(plan: ExperimentPlan, seed) -> LabeledSplit:
    src = plan.source
    if isinstance(src, SyntheticSource):
        full, theta_star = generate_synthetic(
            SyntheticSpec(d=src.d, n=src.n + src.n_test, sigma=src.sigma, seed=seed)
        )
        # rows are i.i.d., so a prefix split is a uniformly random split
        train = full.subset(np.arange(src.n))
        test = full.subset(np.arange(src.n, src.n + src.n_test))
        return LabeledSplit(train, test, theta_star)
    return load_medical_cost(src.path, src.test_fraction, seed, src.scaling)


def _train_subset(train: Dataset, frac: float, seed) -> Dataset:
    if frac >= 1.0:
        return train
    k = max(1, int(math.floor(frac * train.n + 1e-9)))
    order = make_rng(seed).permutation(train.n)
    return train.subset(np.sort(order[:k]))


def _fit_method(method, train, profile, lam, theta_bound, rng):
    if method == "pdp-op":
        return fit(train, profile, lam, theta_bound, rng)
    if method == "non-personalized":
        return fit_non_personalized(train, profile, lam, theta_bound, rng)
    rule = ThresholdRule.MAX if method == "jorgensen-max" else ThresholdRule.MEAN
    return fit_jorgensen(train, profile, lam, JorgensenConfig(rule), theta_bound, rng)


def run_experiment(plan: ExperimentPlan) -> ExperimentReport:
    seed = plan.master_seed
    report = ExperimentReport(plan.sweep_param, plan.sweep_values, plan.methods)
    fixed_split = None if plan.resample_data else _load_split(plan, derive_seed(seed, _DATA_STREAM))

    for s in range(len(plan.sweep_values)):
        lam, privacy, frac = plan.point(s)
        log.info("%s=%g: %d trial(s) x %d method(s)", plan.sweep_param,
                 plan.sweep_values[s], plan.trials, len(plan.methods))
        losses = {m: ([], []) for m in plan.methods}
        discarded = dict.fromkeys(plan.methods, 0)
        for t in range(plan.trials):
            if fixed_split is None:
                split = _load_split(plan, derive_seed(seed, _DATA_STREAM, s, t))
                train = _train_subset(split.train, frac, derive_seed(seed, _DATA_STREAM, s, t, 1))
            else:
                split = fixed_split
                train = _train_subset(split.train, frac, derive_seed(seed, _DATA_STREAM, 1))
            profile_seed = derive_seed(seed, _PROFILE_STREAM, s, t)
            profile = assign_privacy_profile(train.n, dataclasses.replace(privacy, seed=profile_seed))
            for m in plan.methods:
                rng = make_rng(derive_seed(seed, _NOISE_STREAM + METHODS.index(m), s, t))
                try:
                    model = _fit_method(m, train, profile, lam, plan.theta_bound, rng)
                except EmptySubsample as exc:
                    discarded[m] += 1
                    log.warning("%s=%g trial %d: %s discarded (%s)",
                                plan.sweep_param, plan.sweep_values[s], t, m, exc)
                    continue
                unreg = unregularized_test_loss(model.theta_hat, split.test)
                losses[m][0].append(unreg)
                losses[m][1].append(unreg + lam * float(np.dot(model.theta_hat, model.theta_hat)))
        for m in plan.methods:
            report.cells[(s, m)] = CellResult(
                np.array(losses[m][0]), np.array(losses[m][1]), discarded[m]
            )
    return report


# emission ----------------------------------------------------------------------

_METRICS = (("unreg", "unregularized"), ("reg", "regularized"))


def _csv_header(report: ExperimentReport) -> list[str]:
    cols = [report.sweep_param]
    for key, _ in _METRICS:
        for m in report.methods:
            cols += [f"{m}:{key}_mean", f"{m}:{key}_std"]
    for m in report.methods:
        cols += [f"{m}:trials", f"{m}:discarded"]
    return cols


def _fmt_md(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.3g}"


def emit_report(report: ExperimentReport, fmt: str = "csv") -> str:
    """Render one row per sweep value; mean/std column pairs per metric and method."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_csv_header(report))
        for s, value in enumerate(report.sweep_values):
            row = [repr(float(value))]
            for key, _ in _METRICS:
                for m in report.methods:
                    c = report.cell(s, m)
                    row += [repr(getattr(c, f"{key}_mean")), repr(getattr(c, f"{key}_std"))]
            for m in report.methods:
                c = report.cell(s, m)
                row += [str(c.trials), str(c.discarded)]
            writer.writerow(row)
        return buf.getvalue()
    if fmt == "markdown":
        head = [report.sweep_param]
        for _, metric in _METRICS:
            for m in report.methods:
                label = METHOD_LABELS[m]
                head += [f"{metric} ({label}) mean", f"{metric} ({label}) std"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for s, value in enumerate(report.sweep_values):
            row = [f"{value:g}"]
            for key, _ in _METRICS:
                for m in report.methods:
                    c = report.cell(s, m)
                    row += [_fmt_md(getattr(c, f"{key}_mean")), _fmt_md(getattr(c, f"{key}_std"))]
            lines.append("| " + " | ".join(row) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}; valid: csv, markdown")


def parse_report_csv(text: str) -> list[dict[str, float]]:
    """Inverse of ``emit_report(..., "csv")``: one dict per sweep row."""
    reader = csv.DictReader(io.StringIO(text))
    return [{k: float(v) for k, v in row.items()} for row in reader]
