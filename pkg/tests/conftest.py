import math

import numpy as np
import pytest

from geomik.model import FIXTURE, JointAngles

ACCEPTANCE = {}


@pytest.fixture
def params():
    return FIXTURE


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def nonsingular_samples(rng, n, cutoff=0.05):
    out = []
    while len(out) < n:
        q = rng.uniform(-math.pi, math.pi, size=6)
        if abs(math.sin(q[4])) >= cutoff:
            out.append(JointAngles(*map(float, q)))
    return out


def same_mod_2pi(a, b, tol):
    return all(abs(math.remainder(x - y, 2 * math.pi)) < tol for x, y in zip(a, b))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
