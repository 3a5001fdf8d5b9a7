import itertools

import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", deadline=None, max_examples=50)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")

ACCEPTANCE: dict[tuple[int, str], tuple[bool, str]] = {}


def nnls_bruteforce(C, b):
    """Enumerate every zero pattern; return the unique KKT point of min_{x>=0} ||b - Cx||."""
    C = np.asarray(C, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    k = C.shape[1]
    for r in range(k + 1):
        for S in itertools.combinations(range(k), r):
            x = np.zeros(k)
            if S:
                x[list(S)] = np.linalg.lstsq(C[:, list(S)], b, rcond=None)[0]
            g = C.T @ (C @ x - b)
            rest = [i for i in range(k) if i not in S]
            scale = max(1.0, np.abs(C.T @ b).max())
            if np.all(x >= -1e-12) and np.all(g[rest] >= -1e-10 * scale):
                return np.maximum(x, 0.0)
    raise AssertionError("no KKT point found; C not full rank?")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    def record(num: int, ok: bool, detail: str, variant: str = ""):
        ACCEPTANCE[num, variant] = (bool(ok), detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, variant in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num, variant]
        label = f"{num:2d}{variant}"
        terminalreporter.write_line(f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}")
