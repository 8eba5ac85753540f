import numpy as np
import pytest

from celer_lasso import DesignMatrix, LassoProblem, lambda_max, preprocess, synthesize


@pytest.fixture
def toy():
    """``X = I_2``, ``y = (3, 1)``, ``lam = 2``: solution ``(1, 0)``."""
    return LassoProblem(DesignMatrix(np.eye(2)), np.array([3.0, 1.0]), 2.0)


def random_problem(rng, n, p, ratio=0.3, sparse=False):
    X = rng.standard_normal((n, p))
    y = rng.standard_normal(n)
    D = DesignMatrix(X, sparse=sparse)
    return LassoProblem(D, y, ratio * lambda_max(D, y))


def normalized_synthetic(n, p, s, seed, snr=3.0):
    X, y, _ = synthesize(n, p, s, snr=snr, seed=seed)
    X, y, _ = preprocess(X, y, unit_norm_cols=True, center_y=True, unit_norm_y=True)
    return X, y


# Acceptance criteria register one verdict line each; they are printed
# together at the end of the run.
ACCEPTANCE_REPORT = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_REPORT):
        ok, detail = ACCEPTANCE_REPORT[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
