import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))


def relative_fro(A, B):
    """||A - B||_F / ||B||_F (absolute when B is zero)."""
    scale = np.linalg.norm(B)
    return np.linalg.norm(A - B) / (scale if scale > 0 else 1.0)


# one line per acceptance criterion, filled in by test_acceptance and echoed
# in the terminal summary so it survives output capturing
ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
