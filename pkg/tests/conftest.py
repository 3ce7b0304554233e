import numpy as np
import pytest

from pdp_ridge.ridge import Dataset, WeightVector


def random_instance(rng, n, d, signed_labels=True):
    x = rng.random((n, d))
    y = rng.uniform(-1.0, 1.0, n) if signed_labels else rng.random(n)
    w = rng.random(n) + 1e-3
    return Dataset(x, y), WeightVector(w / w.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def neighbouring_pair(rng, n, d):
    """Random dataset and an i-neighbour with the replaced point often at a corner.

    Budgets are drawn log-uniformly so the weights are heterogeneous.
    """
    x = rng.random((n, d))
    y = rng.uniform(-1.0, 1.0, n)
    eps = 10.0 ** rng.uniform(-2, 0, n)
    w = eps / eps.sum()
    i = int(rng.integers(n))
    x2, y2 = x.copy(), y.copy()
    if rng.random() < 0.5:
        x2[i] = rng.integers(0, 2, d).astype(float)
        y2[i] = float(rng.choice([-1.0, 1.0]))
        x[i] = 1.0 - x2[i]
        y[i] = -y2[i]
    else:
        x2[i] = rng.random(d)
        y2[i] = rng.uniform(-1.0, 1.0)
    return Dataset(x, y), Dataset(x2, y2), WeightVector(w), i


# criterion -> (passed, detail); filled by test_acceptance and echoed at the end of the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {status}  {detail}")
