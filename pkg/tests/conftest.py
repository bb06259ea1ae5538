import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ORACLES = json.loads((Path(__file__).parent / "oracles" / "oracles.json").read_text())


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


def random_index_matrix(rng, n, lo=-3.0, hi=3.0, zero_diagonal=False):
    a = np.triu(rng.uniform(lo, hi, (n, n)), 1)
    if not zero_diagonal:
        a += np.diag(np.sort(rng.uniform(lo, hi, n))[::-1])
    return a


def log_uniform(rng, lo=0.1, hi=10.0, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


ACCEPTANCE = {}


@pytest.fixture
def record():
    """record(number, passed, detail) stores one acceptance line."""
    def _record(number, passed, detail=""):
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(str(k).split("-")[0]), str(k))):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
