import numpy as np
import pytest

from causalsep.catalog import make_noise, make_switch
from causalsep.tensor import BIPARTITE, TRIPARTITE, Operator


def random_hermitian(rng, layout, scale=1.0):
    d = layout.dim
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return Operator(layout, scale * (g + g.conj().T) / 2)


def random_psd(rng, layout, rank=None):
    d = layout.dim
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    return Operator(layout, g @ g.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20161016)


@pytest.fixture(scope="session")
def switch():
    return make_switch()


@pytest.fixture(scope="session")
def noises():
    return {kind: make_noise(kind) for kind in ("white", "depol", "deph")}


@pytest.fixture(scope="session")
def switch_report(switch):
    from causalsep.robustness import random_robustness

    return random_robustness(switch)


@pytest.fixture(params=[BIPARTITE, TRIPARTITE], ids=["bi", "tri"])
def layout(request):
    return request.param


# acceptance verdicts: criterion number -> (PASS/FAIL, detail)
CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        status, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")
