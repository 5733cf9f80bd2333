import pytest

from qsm.data import load_iris
from qsm.fixtures import IRIS_FEATURES
from qsm.model import cart_fit

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def iris():
    return load_iris()


@pytest.fixture(scope="session")
def iris_tree(iris):
    return cart_fit(iris, IRIS_FEATURES)


@pytest.fixture
def acceptance(request):
    """Record the outcome of one acceptance criterion for the summary block."""

    def record(number, text):
        ACCEPTANCE[number] = [text, "FAIL"]
        request.node.user_properties.append(("criterion", number))
        return number

    yield record
    for number, entry in ACCEPTANCE.items():
        if ("criterion", number) in request.node.user_properties:
            rep = getattr(request.node, "rep_call", None)
            entry[1] = "PASS" if rep is not None and rep.passed else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        text, status = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {text}")
