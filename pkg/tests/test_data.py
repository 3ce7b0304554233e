import csv
import math

import numpy as np
import pytest

from pdp_ridge.data import (
    LabeledSplit,
    PrivacySegmentSpec,
    SyntheticSpec,
    assign_privacy_profile,
    dataset_to_csv,
    generate_synthetic,
    load_medical_cost,
    medical_feature_names,
    read_dataset_csv,
    read_profile_csv,
    train_test_split,
    write_dataset_csv,
)
from pdp_ridge.errors import (
    DegenerateColumn,
    DimensionMismatch,
    EmptySplit,
    MalformedCsv,
    ValidationError,
)
from pdp_ridge.ridge import Dataset, RidgeConfig, WeightVector, solve_weighted_ridge

REGIONS = ("northeast", "northwest", "southeast", "southwest")


def write_medical_csv(path, n=60, seed=0, **overrides):
    """Small file in the Kaggle insurance.csv layout with synthetic values."""
    r = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        row = {
            "age": str(int(r.integers(18, 65))),
            "sex": ("female", "male")[i % 2],
            "bmi": f"{r.uniform(16, 50):.3f}",
            "children": str(int(r.integers(0, 6))),
            "smoker": ("yes", "no")[(i // 2) % 2],
            "region": REGIONS[i % 4],
            "charges": f"{r.uniform(1000, 60000):.5f}",
        }
        row.update({k: v(i) if callable(v) else v for k, v in overrides.items()})
        rows.append(row)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["age", "sex", "bmi", "children", "smoker",
                                                "region", "charges"])
        writer.writeheader()
        writer.writerows(rows)
    return path


def test_synthetic_properties():
    data, theta = generate_synthetic(SyntheticSpec(d=7, n=500, seed=3))
    assert abs(np.linalg.norm(theta) - 1.0) <= 1e-12
    assert data.features.min() >= 0 and data.features.max() <= 1
    assert np.all(np.abs(data.labels) <= 1.0)
    np.testing.assert_allclose(data.labels, data.features @ theta / math.sqrt(7), rtol=1e-14)


def test_synthetic_d1_colinear():
    data, theta = generate_synthetic(SyntheticSpec(d=1, n=50, seed=1))
    assert theta[0] in (-1.0, 1.0)
    np.testing.assert_array_equal(data.labels, data.features[:, 0] * theta[0])


def test_synthetic_near_unregularised_recovery():
    d, n = 5, 1000
    data, theta = generate_synthetic(SyntheticSpec(d=d, n=n, seed=2))
    est = solve_weighted_ridge(data, WeightVector.uniform(n), RidgeConfig(1e-8, d))
    assert np.max(np.abs(est - theta / math.sqrt(d))) <= 1e-3


def test_synthetic_deterministic():
    a, ta = generate_synthetic(SyntheticSpec(d=4, n=30, seed=9))
    b, tb = generate_synthetic(SyntheticSpec(d=4, n=30, seed=9))
    assert dataset_to_csv(a) == dataset_to_csv(b)
    assert ta.tobytes() == tb.tobytes()


def test_synthetic_label_noise_is_clamped():
    data, _ = generate_synthetic(SyntheticSpec(d=2, n=2000, sigma=2.0, seed=4))
    assert np.all(np.abs(data.labels) <= 1.0)
    assert np.any(np.abs(data.labels) == 1.0)


def test_profile_all_conservative():
    spec = PrivacySegmentSpec(f_c=1.0, f_m=0.0, seed=1)
    eps = assign_privacy_profile(200, spec).epsilons
    assert np.all((eps >= 0.01) & (eps <= 0.2))


def test_profile_all_liberal():
    eps = assign_privacy_profile(50, PrivacySegmentSpec(f_c=0.0, f_m=0.0, seed=1)).epsilons
    assert np.all(eps == 1.0)


@pytest.mark.parametrize("n", [1, 7, 100, 101, 999])
def test_profile_segment_counts(n):
    spec = PrivacySegmentSpec(seed=n)
    eps = assign_privacy_profile(n, spec).epsilons
    n_c, n_m = math.floor(0.34 * n + 1e-9), math.floor(0.43 * n + 1e-9)
    liberal = eps == 1.0
    assert liberal.sum() == n - n_c - n_m
    # a medium draw equal to 1.0 exactly has probability zero
    assert np.sum(eps <= 0.2) == n_c
    assert np.sum((eps > 0.2) & ~liberal) == n_m


def test_segment_sizes_floor_guard():
    assert PrivacySegmentSpec(f_c=0.29, f_m=0.0).segment_sizes(100) == (29, 0, 71)


def test_profile_mean_budget():
    eps = np.concatenate([
        assign_privacy_profile(1000, PrivacySegmentSpec(seed=s)).epsilons for s in range(100)
    ])
    assert abs(eps.mean() - 0.5237) <= 0.005


def test_profile_is_permuted():
    eps = assign_privacy_profile(100, PrivacySegmentSpec(seed=0)).epsilons
    assert not np.all(np.diff(eps) >= 0)


@pytest.mark.parametrize("kw", [dict(eps_c=0.3), dict(f_c=0.7, f_m=0.5), dict(eps_l=0.1)])
def test_segment_spec_validation(kw):
    with pytest.raises(ValidationError):
        PrivacySegmentSpec(**kw)


def test_split_basic():
    data = Dataset(np.linspace(0, 1, 10)[:, None], np.zeros(10))
    s = train_test_split(data, 0.5, seed=3)
    assert s.train.n == 5 and s.test.n == 5
    merged = np.sort(np.r_[s.train.features[:, 0], s.test.features[:, 0]])
    np.testing.assert_array_equal(merged, data.features[:, 0])
    s2 = train_test_split(data, 0.5, seed=3)
    np.testing.assert_array_equal(s.test.features, s2.test.features)


def test_split_empty():
    data = Dataset([[0.1], [0.2]], [0.0, 0.0])
    with pytest.raises(EmptySplit):
        train_test_split(data, 0.1)
    with pytest.raises(ValidationError):
        train_test_split(data, 1.0)


def test_medical_cost_layout(tmp_path):
    path = write_medical_csv(tmp_path / "insurance.csv")
    split = load_medical_cost(path, test_fraction=0.25, seed=1)
    assert isinstance(split, LabeledSplit)
    assert split.train.n == 45 and split.test.n == 15
    assert split.train.d == 12
    names = medical_feature_names(path)
    assert len(names) == 12 and names[-1] == "intercept"
    for part in (split.train, split.test):
        x = part.features
        np.testing.assert_array_equal(x[:, -1], 1.0)
        np.testing.assert_array_equal(x[:, 7:11].sum(axis=1), 1.0)  # region one-hot
        np.testing.assert_array_equal(x[:, 3:5].sum(axis=1), 1.0)   # sex
        np.testing.assert_array_equal(x[:, 5:7].sum(axis=1), 1.0)   # smoker
        assert x.min() >= 0 and x.max() <= 1
        assert part.labels.min() >= 0 and part.labels.max() <= 1
    # train statistics span exactly [0, 1]
    assert split.train.features[:, 0].min() == 0.0 and split.train.features[:, 0].max() == 1.0
    assert split.train.labels.min() == 0.0 and split.train.labels.max() == 1.0


def test_medical_cost_global_scaling(tmp_path):
    path = write_medical_csv(tmp_path / "insurance.csv")
    split = load_medical_cost(path, test_fraction=0.25, seed=1, scaling="global")
    ages = np.r_[split.train.features[:, 0], split.test.features[:, 0]]
    assert ages.min() == 0.0 and ages.max() == 1.0


def test_medical_cost_test_rows_clamped(tmp_path):
    # an extreme age in whichever split is the test side must clamp into [0, 1]
    path = write_medical_csv(tmp_path / "insurance.csv", n=40,
                             age=lambda i: "200" if i == 0 else str(20 + i % 30))
    for seed in range(5):
        split = load_medical_cost(path, 0.5, seed)
        assert split.test.features.max() <= 1.0


def test_medical_cost_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_medical_cost(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("age,sex,bmi,children,smoker,region\n19,female,27.9,0,yes,southwest\n")
    with pytest.raises(MalformedCsv, match="charges"):
        load_medical_cost(bad)
    path = write_medical_csv(tmp_path / "nan.csv", bmi=lambda i: "abc" if i == 3 else "20.0")
    with pytest.raises(MalformedCsv, match="line 5, column 'bmi'"):
        load_medical_cost(path)
    path = write_medical_csv(tmp_path / "const.csv", children="2")
    with pytest.raises(DegenerateColumn, match="children"):
        load_medical_cost(path)


def test_dataset_csv_round_trip(tmp_path):
    data, _ = generate_synthetic(SyntheticSpec(d=3, n=20, seed=5))
    write_dataset_csv(data, tmp_path / "d.csv")
    back = read_dataset_csv(tmp_path / "d.csv")
    assert back.features.tobytes() == data.features.tobytes()
    assert back.labels.tobytes() == data.labels.tobytes()


def test_dataset_csv_errors(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("f0,f1,y\n0.1,0.2,0.3\n0.1,1.4,0.3\n")
    with pytest.raises(ValidationError, match="line 3, column 'f1'"):
        read_dataset_csv(p)
    p.write_text("a,b\n0.1,0.2\n")
    with pytest.raises(MalformedCsv):
        read_dataset_csv(p)


def test_profile_csv(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("epsilon\n0.5\n1.0\n")
    assert read_profile_csv(p, n=2).epsilons.tolist() == [0.5, 1.0]
    with pytest.raises(DimensionMismatch):
        read_profile_csv(p, n=3)
    p.write_text("epsilon\n0.5\n-1.0\n")
    with pytest.raises(ValidationError, match="line 3"):
        read_profile_csv(p)
