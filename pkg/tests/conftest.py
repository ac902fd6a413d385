import numpy as np
import pytest
from hypothesis import settings

from ragd.manifolds import SPD, Euclidean, Hyperbolic, Sphere

settings.register_profile("ragd", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("ragd")

MODELS = [Euclidean(3), Sphere(3), Hyperbolic(3), SPD(3)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=MODELS, ids=lambda m: repr(m))
def manifold(request):
    return request.param


# acceptance criteria append (name, passed, detail); printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {detail}")
