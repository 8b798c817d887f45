import os

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qrdyn", max_examples=60, deadline=None)
settings.load_profile("qrdyn")

# filled by tests/test_acceptance.py: criterion id -> (ok, text)
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def outdir(tmp_path):
    d = tmp_path / "out"
    os.makedirs(d)
    return d


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key:<5} {text}")
