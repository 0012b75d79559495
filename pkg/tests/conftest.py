import pytest

from tabch.contraction import available_impls
from tabch.graph import InputGraph


def triangle():
    return InputGraph.undirected(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])


def diamond():
    return InputGraph.from_edges(4, [(0, 1, 1), (0, 2, 10), (1, 3, 1), (2, 3, 1)])


def path4():
    return InputGraph.undirected(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])


def star():
    return InputGraph.undirected(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])


FIXTURES = {"triangle": triangle, "diamond": diamond, "path4": path4, "star": star}

IMPLS = available_impls()

needs_core = pytest.mark.skipif("compiled" not in IMPLS, reason="compiled core not built")


@pytest.fixture(params=sorted(FIXTURES))
def fixture_graph(request):
    return request.param, FIXTURES[request.param]()


# ------------------------------------------------------ acceptance reporting

ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def record(number: int, title: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = ("PASS" if passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number:2d} {title}: {detail}")
