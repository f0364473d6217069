import numpy as np
import pytest

from ssbm import ProblemInstance, gen_circulant, gen_complete, kernels

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line; returns the boolean for asserting."""

    def _verdict(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _verdict


@pytest.fixture(params=kernels.available())
def backend(request):
    return request.param


@pytest.fixture
def k3():
    return gen_complete(3, "all-af")


@pytest.fixture
def c4():
    return gen_circulant(4, [1])


@pytest.fixture
def ring16():
    return gen_circulant(16, [1, 8])


@pytest.fixture
def pair_af():
    return ProblemInstance.from_edges(2, [(0, 1, 1.0)])


def random_instance(rng, n, density=0.6, weights=(-1.0, 1.0)):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < density
    w = rng.choice(weights, size=int(keep.sum()))
    return ProblemInstance(n, iu[keep], ju[keep], w)
