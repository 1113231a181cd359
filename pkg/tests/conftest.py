import numpy as np
import pytest
from hypothesis import settings

from ptc.convcode import ConvCodeSpec, build_trellis
from ptc.harness import CODES
from ptc.permmap import load_codebook

settings.register_profile("ptc", max_examples=60, deadline=None)
settings.load_profile("ptc")

# demodulated patterns for the sent word 3214: impulse in slot 4, interferer on row 1
Y_IMPULSE = np.array([[0, 0, 1, 1], [0, 1, 0, 1], [1, 0, 0, 1], [0, 0, 0, 1]])
Y_NARROWBAND = np.array([[1, 1, 1, 1], [0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]])


def code(name):
    k, n, K, gens, book = CODES[name]
    spec = ConvCodeSpec.from_octal(k, n, K, gens)
    return spec, build_trellis(spec), load_codebook(book)


@pytest.fixture(scope="session")
def r12():
    return code("r12-m3")


@pytest.fixture(scope="session")
def r23():
    return code("r23-m4")


@pytest.fixture(scope="session")
def r14():
    return code("r14-m4")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion_log(request):
    lines = request.config.stash.setdefault(_LOG_KEY, [])

    def log(number, ok, detail):
        lines.append(f"{'PASS' if ok else 'FAIL'} criterion {number:<3} {detail}")
        return ok

    return log


_LOG_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LOG_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
