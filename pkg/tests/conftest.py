import numpy as np
import pytest

from sssvd.moments import SsParams
from sssvd.pipeline import solve
from sssvd.problems import Model, ModelSpec, build_model

INTERVAL_1 = (0.8, 1.2)
INTERVAL_2 = (1e-3, 1e-1)
PAPER_PARAMS = SsParams(L=20, M=4, N=32, ell=1, delta=1e-20)


@pytest.fixture(scope="session")
def model1():
    return build_model(ModelSpec(Model.UNIFORM))


@pytest.fixture(scope="session")
def model2():
    return build_model(ModelSpec(Model.LOG_UNIFORM))


@pytest.fixture(scope="session")
def runs(model1, model2):
    """Default-seed runs of every mode on both model problems."""
    out = {}
    for name, (A, _), interval in (("m1", model1, INTERVAL_1), ("m2", model2, INTERVAL_2)):
        for mode in ("ss-svd", "ss-svd-nt", "naive", "naive-nt"):
            out[name, mode] = solve(A, interval, PAPER_PARAMS, mode=mode, threads=1)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (passed, detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[criterion]
        status = {True: "PASS", False: "FAIL", None: "N/A "}[passed]
        terminalreporter.write_line(f"criterion {criterion:>2}: {status}  {detail}")
