import pytest

from momix.suites import Workspace


@pytest.fixture(scope="session")
def ws():
    return Workspace()


@pytest.fixture(scope="session")
def a1(ws):
    return ws.bruhat("A1")


@pytest.fixture(scope="session")
def a2(ws):
    return ws.bruhat("A2")


@pytest.fixture(scope="session")
def b2(ws):
    return ws.bruhat("B2")
