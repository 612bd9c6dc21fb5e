import json
from importlib import resources

import pytest

from springerfib.quiver import QuiverRep

ACCEPTANCE_LINES: list[str] = []


def load_fixture(name: str) -> QuiverRep:
    text = resources.files("springerfib").joinpath("fixtures", name).read_text()
    return QuiverRep.from_json(json.loads(text))


@pytest.fixture
def ex_fi() -> QuiverRep:
    """The (2,2) example with A_1 = B_2 = (1,0)^T, A_2 = B_1 = (0,1), Gamma = I."""
    return load_fixture("ex-fi.json")


@pytest.fixture
def ex_31() -> QuiverRep:
    return load_fixture("ex-31.json")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
