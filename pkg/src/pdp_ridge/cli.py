"""Command-line interface.

Exit codes: 0 success, 1 data/validation error, 2 usage or plan error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys


from . import bench
from .baselines import JorgensenConfig, ThresholdRule, fit_jorgensen, fit_non_personalized
from .bounds import AccuracyBoundInput, accuracy_bound_terms
from .data import (
    PrivacySegmentSpec,
    SyntheticSpec,
    assign_privacy_profile,
    dataset_to_csv,
    generate_synthetic,
    profile_to_csv,
    read_dataset_csv,
    read_profile_csv,
)
from .errors import PdpRidgeError, PlanInvalid, ValidationError
from .noise import make_rng
from .pdp_op import fit

log = logging.getLogger("pdp_ridge")

FIT_METHODS = ("pdp-op", "non-personalized", "jorgensen-max", "jorgensen-mean")


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64), got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_synth(args) -> int:
    data, theta_star = generate_synthetic(
        SyntheticSpec(d=args.d, n=args.n, sigma=args.sigma, seed=args.seed)
    )
    _write(dataset_to_csv(data), args.out)
    if args.out not in (None, "-"):
        stem, _ = os.path.splitext(args.out)
        sidecar = stem + ".theta_star.csv"
        _write("theta_star\n" + "".join(f"{float(v)!r}\n" for v in theta_star), sidecar)
        log.info("wrote %s and %s", args.out, sidecar)
    return 0


def cmd_profile(args) -> int:
    spec = PrivacySegmentSpec(
        f_c=args.f_c, f_m=args.f_m, eps_c=args.eps_c, eps_m=args.eps_m, eps_l=args.eps_l,
        seed=args.seed,
    )
    _write(profile_to_csv(assign_privacy_profile(args.n, spec)), args.out)
    return 0


def cmd_fit(args) -> int:
    data = read_dataset_csv(args.data)
    profile = read_profile_csv(args.profile, n=data.n)
    rng = make_rng(args.seed)
    if args.method == "pdp-op":
        model = fit(data, profile, args.lam, args.theta_bound, rng)
    elif args.method == "non-personalized":
        model = fit_non_personalized(data, profile, args.lam, args.theta_bound, rng)
    else:
        rule = ThresholdRule.MAX if args.method == "jorgensen-max" else ThresholdRule.MEAN
        model = fit_jorgensen(data, profile, args.lam, JorgensenConfig(rule), args.theta_bound, rng)
    _write(json.dumps(model.to_record(), indent=2) + "\n", args.out)
    return 0


def cmd_bound(args) -> int:
    if not 0 < args.delta < 1:
        raise UsageError(f"--delta must lie in (0, 1), got {args.delta}")
    try:
        inp = AccuracyBoundInput(
            theta_star_norm=args.theta_star_norm,
            lambda_min_gram=args.lambda_min_gram,
            lam=args.lam,
            eta=args.eta,
            d=args.d,
            delta=args.delta,
            sigma=args.sigma,
            weight_norm=args.weight_norm,
        )
    except ValidationError as exc:
        raise UsageError(str(exc)) from exc
    terms = accuracy_bound_terms(inp)
    sys.stdout.write(
        f"bound {terms.total:.6g}\n"
        f"bias {terms.bias:.6g}\n"
        f"privacy {terms.privacy:.6g}\n"
        f"label_noise {terms.label_noise:.6g}\n"
    )
    return 0


def cmd_experiment(args) -> int:
    try:
        plan = bench.load_plan(args.plan)
        overrides = plan.to_dict()
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.methods is not None:
            overrides["methods"] = args.methods.split(",")
        if args.resample_data:
            overrides["resample_data"] = True
        plan = bench.ExperimentPlan.from_dict(overrides)
    except OSError as exc:
        raise UsageError(f"cannot read plan: {exc}") from exc
    report = bench.run_experiment(plan)
    _write(bench.emit_report(report, args.format), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pdp-ridge",
        description="Personalized differentially private ridge regression.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic dataset")
    s.add_argument("--d", type=_positive_int, required=True)
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out", help="dataset CSV path (default: stdout); "
                                 "theta* goes to <stem>.theta_star.csv")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("profile", help="sample a three-segment privacy profile")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--f-c", type=float, default=0.34)
    s.add_argument("--f-m", type=float, default=0.43)
    s.add_argument("--eps-c", type=float, default=0.01)
    s.add_argument("--eps-m", type=float, default=0.2)
    s.add_argument("--eps-l", type=float, default=1.0)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("fit", help="fit a private model and write its record")
    s.add_argument("--data", required=True, help="canonical dataset CSV (f0..f{d-1},y)")
    s.add_argument("--profile", required=True, help="CSV with a single 'epsilon' column")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--method", choices=FIT_METHODS, default="pdp-op")
    s.add_argument("--theta-bound", type=float, default=None)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("bound", help="evaluate the high-probability accuracy bound")
    s.add_argument("--theta-star-norm", type=float, required=True)
    s.add_argument("--lambda-min-gram", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--eta", type=float, required=True)
    s.add_argument("--d", type=_positive_int, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--weight-norm", type=float, default=0.0)
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("experiment", help="run an experiment plan")
    s.add_argument("--plan", required=True, help="JSON plan file")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=_seed)
    s.add_argument("--methods", help="comma-separated subset of " + ",".join(FIT_METHODS))
    s.add_argument("--resample-data", action="store_true")
    s.add_argument("--format", choices=("csv", "markdown"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose or args.command == "experiment" else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, PlanInvalid) as exc:
        parser.exit(2, f"{parser.prog} {args.command}: error: {exc}\n")
    except (PdpRidgeError, FileNotFoundError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{parser.prog} {args.command}: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
