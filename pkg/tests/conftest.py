import numpy as np
import pytest

from costboost.dataset import BinaryDataset, synth_survey


@pytest.fixture
def small_data():
    return synth_survey(200, 0.65, 5, informative=(0, 1), noise_level=1.0, seed=11)


@pytest.fixture
def toy6():
    """Six points on a line; stumps separate them imperfectly."""
    X = np.arange(1.0, 7.0).reshape(-1, 1)
    y = np.array([1, 1, -1, 1, -1, -1])
    return BinaryDataset(("x",), X, y)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 15):
        if n not in RESULTS:
            terminalreporter.write_line(f"criterion {n:2d}: SKIP  not run (skipped or deselected)")
            continue
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
