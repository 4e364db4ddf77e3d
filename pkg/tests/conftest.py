import json
from pathlib import Path

import numpy as np
import pytest

from qae._backend import compiled_kernels, python_kernels
from qae.qubo_map import Qubo

FIXTURES = Path(__file__).parent / "fixtures"

BACKENDS = [pytest.param(python_kernels, id="python")]
if compiled_kernels is not None:
    BACKENDS.append(pytest.param(compiled_kernels, id="compiled"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def oracle_values():
    with open(FIXTURES / "oracle_values.json") as fh:
        return json.load(fh)


def random_qubo(n, rng, low=-1.0, high=1.0):
    return Qubo(np.triu(rng.uniform(low, high, size=(n, n))))


def random_symmetric(n, rng, scale=1.0):
    a = rng.normal(scale=scale, size=(n, n))
    return 0.5 * (a + a.T)


# One pass/fail line per acceptance criterion, printed after the test run.
ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_report():
    def report(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
